#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "paraqa/tensor.hpp"
#include "paraqa/windowing.hpp"

namespace paraqa {

/// Gaussian-prior soft-label settings for span training: the Gaussian pdf
/// centered at the gold position becomes the logit of each position, a
/// temperature softmax turns those into the target distribution, and
/// kl_weight mixes the KL term into the loss.
struct GpoConfig {
    double sigma = 1.0;
    double temperature = 1.0;
    double kl_weight = 1.0;

    void validate() const;
};

/// Softmax over [CLS, candidate 0, candidate 1, ...], padded with masked
/// slots up to a fixed capacity so a batch forms a rectangular tensor.
struct ParagraphDistribution {
    std::vector<double> logits;  // size 1 + capacity; masked slots are -inf
    std::vector<double> probs;   // masked slots carry 0
    int n_candidates = 0;

    int slots() const { return static_cast<int>(logits.size()); }
    bool slot_live(int slot) const { return slot == 0 || slot <= n_candidates; }
};

/// Applies the shared affine paragraph head to the CLS row and each
/// candidate's markup row. capacity >= candidates.size().
ParagraphDistribution paragraph_logits(const Mat& hidden,
                                       const std::vector<std::pair<int, int>>& candidates,
                                       const ParamSet& params, int capacity);

struct SpanLogits {
    std::vector<double> start;
    std::vector<double> end;
    std::vector<std::uint8_t> mask;  // 1 where a span endpoint is allowed
};

/// Per-position linear start/end scores. PAD, question, SEP and markup
/// positions are masked to -inf; position 0 stays live as the null anchor.
SpanLogits span_logits(const Mat& hidden, const Window& window, const ParamSet& params);

/// Target distribution q(y | y_s) = softmax(pdf(y; y_s, sigma) / T) over the
/// unmasked positions. Throws InputError when y_s is masked.
std::vector<double> gpo_target(int length, int y_s, const std::vector<std::uint8_t>& mask,
                               const GpoConfig& cfg);

/// KL(q || p) with p = masked softmax(logits); gradient w.r.t. logits is
/// p - q on unmasked positions. Throws InputError when q puts mass on a
/// masked position.
std::pair<double, std::vector<double>> kl_loss(const std::vector<double>& q,
                                               const std::vector<double>& logits,
                                               const std::vector<std::uint8_t>& mask);

/// Cross entropy -log p(y_s); gradient is p - onehot(y_s).
std::pair<double, std::vector<double>> mle_loss(int y_s, const std::vector<double>& logits,
                                                const std::vector<std::uint8_t>& mask);

struct LossBreakdown {
    double mle_span = 0.0;
    double kl_span = 0.0;
    double para_ce = 0.0;
    double total = 0.0;

    LossBreakdown& operator+=(const LossBreakdown& other);
    LossBreakdown& operator/=(double denom);
};

struct LossGrads {
    std::vector<double> para;   // d(total)/d(paragraph logits)
    std::vector<double> start;  // d(total)/d(start logits)
    std::vector<double> end;
};

/// para_ce is always computed against la_slot (CLS slot for negatives). Span
/// terms target the gold positions when present; windows without a span
/// target the CLS null anchor under pure MLE and skip GPO. total =
/// para_ce + mle_span + kl_weight * kl_span (kl_weight treated as 0 when
/// gpo_enabled is false).
std::pair<LossBreakdown, LossGrads> total_loss(const WindowLabels& labels,
                                               const ParagraphDistribution& para,
                                               const SpanLogits& span, const GpoConfig& cfg,
                                               bool gpo_enabled);

/// Appends the paragraph and span head tensors.
void init_head_params(int d_model, ParamSet& params);

}  // namespace paraqa
