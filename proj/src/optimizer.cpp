#include "paraqa/optimizer.hpp"

#include <cmath>

#include "paraqa/errors.hpp"

namespace paraqa {

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
}  // namespace

AdamState make_adam_state(const ParamSet& params) {
    AdamState state;
    state.m = params.zeros_like();
    state.v = params.zeros_like();
    return state;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double learning_rate) {
    if (params.size() != grads.size()) {
        throw StateError("optimizer: parameter/gradient layout mismatch");
    }
    for (std::size_t t = 0; t < grads.size(); ++t) {
        for (const double g : grads.tensor(t).data) {
            if (!std::isfinite(g)) {
                throw NonfiniteGradientError("tensor " + grads.name(t));
            }
        }
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor& p = params.tensor(t);
        const Tensor& g = grads.tensor(t);
        Tensor& m = state.m.tensor(t);
        Tensor& v = state.v.tensor(t);
        for (std::size_t i = 0; i < p.numel(); ++i) {
            m.data[i] = kBeta1 * m.data[i] + (1.0 - kBeta1) * g.data[i];
            v.data[i] = kBeta2 * v.data[i] + (1.0 - kBeta2) * g.data[i] * g.data[i];
            const double m_hat = m.data[i] / bc1;
            const double v_hat = v.data[i] / bc2;
            p.data[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + kEps);
        }
    }
}

}  // namespace paraqa
