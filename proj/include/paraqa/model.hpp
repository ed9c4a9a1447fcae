#pragma once

#include "paraqa/encoder.hpp"
#include "paraqa/heads.hpp"
#include "paraqa/tensor.hpp"
#include "paraqa/windowing.hpp"

namespace paraqa {

/// Encoder plus both heads in one parameter set (checkpoint layout).
ParamSet init_model_params(const EncoderConfig& cfg);

struct AttentionInputs {
    std::vector<std::uint8_t> mask;        // non-PAD positions
    std::vector<std::uint8_t> global_set;  // CLS, question tokens, markup tokens
};

AttentionInputs attention_inputs(const Window& window);

struct WindowForward {
    EncoderTape tape;
    ParagraphDistribution para;
    SpanLogits span;
};

/// Full per-window forward: encoder, paragraph distribution (padded to
/// capacity slots), span logits.
WindowForward model_forward(const Window& window, const ParamSet& params,
                            const EncoderConfig& cfg, int para_capacity);

/// Forward + loss + exact backward for one window; gradients accumulate into
/// grads. Pure given its inputs, so windows may run on different threads with
/// distinct grad buffers.
LossBreakdown model_loss_and_grad(const Window& window, const ParamSet& params,
                                  const EncoderConfig& cfg, const GpoConfig& gpo,
                                  bool gpo_enabled, int para_capacity, ParamSet& grads);

}  // namespace paraqa
