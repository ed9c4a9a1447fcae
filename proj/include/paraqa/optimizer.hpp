#pragma once

#include "paraqa/tensor.hpp"

namespace paraqa {

/// Adam moments (beta1 0.9, beta2 0.999, eps 1e-8, bias correction).
struct AdamState {
    ParamSet m;
    ParamSet v;
    long step = 0;
};

AdamState make_adam_state(const ParamSet& params);

/// One update step. Throws NonfiniteGradientError when any gradient entry is
/// NaN or infinite; parameters are left untouched in that case.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double learning_rate);

}  // namespace paraqa
