#include "paraqa/heads.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "paraqa/errors.hpp"

namespace paraqa {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double dot_bias(const double* h, const Tensor& w, const Tensor& b) {
    double acc = b.data[0];
    for (std::size_t c = 0; c < w.numel(); ++c) {
        acc += h[c] * w.data[c];
    }
    return acc;
}

/// log-softmax over unmasked positions; masked entries come back as -inf.
std::vector<double> masked_log_softmax(const std::vector<double>& logits,
                                       const std::vector<std::uint8_t>& mask) {
    double max_logit = kNegInf;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (mask[i] != 0) {
            max_logit = std::max(max_logit, logits[i]);
        }
    }
    if (max_logit == kNegInf) {
        throw InputError("softmax over an empty mask");
    }
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (mask[i] != 0) {
            z += std::exp(logits[i] - max_logit);
        }
    }
    const double log_z = std::log(z);
    std::vector<double> out(logits.size(), kNegInf);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (mask[i] != 0) {
            out[i] = logits[i] - max_logit - log_z;
        }
    }
    return out;
}

std::vector<double> probs_from_log(const std::vector<double>& log_p) {
    std::vector<double> out(log_p.size(), 0.0);
    for (std::size_t i = 0; i < log_p.size(); ++i) {
        if (log_p[i] != kNegInf) {
            out[i] = std::exp(log_p[i]);
        }
    }
    return out;
}

std::vector<std::uint8_t> slot_mask(const ParagraphDistribution& para) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(para.slots()), 0);
    for (int s = 0; s < para.slots(); ++s) {
        mask[static_cast<std::size_t>(s)] = para.slot_live(s) ? 1 : 0;
    }
    return mask;
}

}  // namespace

void GpoConfig::validate() const {
    if (!(sigma > 0.0)) {
        throw InputError("gpo sigma must be > 0");
    }
    if (!(temperature > 0.0)) {
        throw InputError("gpo temperature must be > 0");
    }
    if (!(kl_weight >= 0.0)) {
        throw InputError("gpo kl_weight must be >= 0");
    }
}

void init_head_params(int d_model, ParamSet& params) {
    params.add("head.paragraph.w", {d_model});
    params.add("head.paragraph.b", {1});
    params.add("head.span.start.w", {d_model});
    params.add("head.span.start.b", {1});
    params.add("head.span.end.w", {d_model});
    params.add("head.span.end.b", {1});
}

ParagraphDistribution paragraph_logits(const Mat& hidden,
                                       const std::vector<std::pair<int, int>>& candidates,
                                       const ParamSet& params, int capacity) {
    const int n_candidates = static_cast<int>(candidates.size());
    if (capacity < n_candidates) {
        throw InputError("paragraph slot capacity below candidate count");
    }
    const Tensor& w = params.at("head.paragraph.w");
    const Tensor& b = params.at("head.paragraph.b");

    ParagraphDistribution out;
    out.n_candidates = n_candidates;
    out.logits.assign(static_cast<std::size_t>(1 + capacity), kNegInf);
    out.logits[0] = dot_bias(hidden.row(0), w, b);
    for (int j = 0; j < n_candidates; ++j) {
        const int pos = candidates[static_cast<std::size_t>(j)].first;
        out.logits[static_cast<std::size_t>(1 + j)] = dot_bias(hidden.row(pos), w, b);
    }
    out.probs = probs_from_log(masked_log_softmax(out.logits, slot_mask(out)));
    return out;
}

SpanLogits span_logits(const Mat& hidden, const Window& window, const ParamSet& params) {
    const Tensor& sw = params.at("head.span.start.w");
    const Tensor& sb = params.at("head.span.start.b");
    const Tensor& ew = params.at("head.span.end.w");
    const Tensor& eb = params.at("head.span.end.b");

    SpanLogits out;
    out.mask = window.span_mask();
    const int n = window.seq_len();
    out.start.assign(static_cast<std::size_t>(n), kNegInf);
    out.end.assign(static_cast<std::size_t>(n), kNegInf);
    for (int pos = 0; pos < n; ++pos) {
        if (out.mask[static_cast<std::size_t>(pos)] == 0) {
            continue;
        }
        out.start[static_cast<std::size_t>(pos)] = dot_bias(hidden.row(pos), sw, sb);
        out.end[static_cast<std::size_t>(pos)] = dot_bias(hidden.row(pos), ew, eb);
    }
    return out;
}

std::vector<double> gpo_target(int length, int y_s, const std::vector<std::uint8_t>& mask,
                               const GpoConfig& cfg) {
    cfg.validate();
    if (length < 1 || static_cast<int>(mask.size()) != length) {
        throw InputError("gpo_target length/mask mismatch");
    }
    if (y_s < 0 || y_s >= length || mask[static_cast<std::size_t>(y_s)] == 0) {
        throw InputError("gpo_target: gold position is masked");
    }
    const double norm = 1.0 / (cfg.sigma * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> logits(static_cast<std::size_t>(length), kNegInf);
    for (int y = 0; y < length; ++y) {
        if (mask[static_cast<std::size_t>(y)] == 0) {
            continue;
        }
        const double dist = static_cast<double>(y - y_s);
        const double density = norm * std::exp(-(dist * dist) / (2.0 * cfg.sigma * cfg.sigma));
        logits[static_cast<std::size_t>(y)] = density / cfg.temperature;
    }
    return probs_from_log(masked_log_softmax(logits, mask));
}

std::pair<double, std::vector<double>> kl_loss(const std::vector<double>& q,
                                               const std::vector<double>& logits,
                                               const std::vector<std::uint8_t>& mask) {
    if (q.size() != logits.size() || q.size() != mask.size()) {
        throw InputError("kl_loss size mismatch");
    }
    const std::vector<double> log_p = masked_log_softmax(logits, mask);
    double loss = 0.0;
    std::vector<double> grad(q.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (mask[i] == 0) {
            if (q[i] != 0.0) {
                throw InputError("kl_loss: target mass on a masked position");
            }
            continue;
        }
        const double p = log_p[i] == kNegInf ? 0.0 : std::exp(log_p[i]);
        if (q[i] > 0.0) {
            loss += q[i] * (std::log(q[i]) - log_p[i]);
        }
        grad[i] = p - q[i];
    }
    return {std::max(loss, 0.0), std::move(grad)};
}

std::pair<double, std::vector<double>> mle_loss(int y_s, const std::vector<double>& logits,
                                                const std::vector<std::uint8_t>& mask) {
    if (logits.size() != mask.size()) {
        throw InputError("mle_loss size mismatch");
    }
    if (y_s < 0 || y_s >= static_cast<int>(logits.size()) ||
        mask[static_cast<std::size_t>(y_s)] == 0) {
        throw InputError("mle_loss: target position is masked");
    }
    const std::vector<double> log_p = masked_log_softmax(logits, mask);
    std::vector<double> grad(logits.size(), 0.0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (mask[i] != 0) {
            grad[i] = std::exp(log_p[i]);
        }
    }
    grad[static_cast<std::size_t>(y_s)] -= 1.0;
    return {-log_p[static_cast<std::size_t>(y_s)], std::move(grad)};
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& other) {
    mle_span += other.mle_span;
    kl_span += other.kl_span;
    para_ce += other.para_ce;
    total += other.total;
    return *this;
}

LossBreakdown& LossBreakdown::operator/=(double denom) {
    mle_span /= denom;
    kl_span /= denom;
    para_ce /= denom;
    total /= denom;
    return *this;
}

std::pair<LossBreakdown, LossGrads> total_loss(const WindowLabels& labels,
                                               const ParagraphDistribution& para,
                                               const SpanLogits& span, const GpoConfig& cfg,
                                               bool gpo_enabled) {
    cfg.validate();
    if (labels.la_slot < 0 || labels.la_slot > para.n_candidates) {
        throw InputError("la_slot outside the live paragraph slots");
    }
    const double lambda = gpo_enabled ? cfg.kl_weight : 0.0;

    LossBreakdown loss;
    LossGrads grads;

    auto [para_ce, para_grad] = mle_loss(labels.la_slot, para.logits, slot_mask(para));
    loss.para_ce = para_ce;
    grads.para = std::move(para_grad);

    const int length = static_cast<int>(span.start.size());
    const bool has_span = labels.y_start.has_value() && labels.y_end.has_value();
    const int start_target = has_span ? *labels.y_start : 0;  // CLS null anchor
    const int end_target = has_span ? *labels.y_end : 0;

    auto [start_mle, start_grad] = mle_loss(start_target, span.start, span.mask);
    auto [end_mle, end_grad] = mle_loss(end_target, span.end, span.mask);
    loss.mle_span = start_mle + end_mle;
    grads.start = std::move(start_grad);
    grads.end = std::move(end_grad);

    if (has_span) {
        const std::vector<double> q_start = gpo_target(length, start_target, span.mask, cfg);
        const std::vector<double> q_end = gpo_target(length, end_target, span.mask, cfg);
        auto [start_kl, start_kl_grad] = kl_loss(q_start, span.start, span.mask);
        auto [end_kl, end_kl_grad] = kl_loss(q_end, span.end, span.mask);
        loss.kl_span = start_kl + end_kl;
        if (lambda != 0.0) {
            for (std::size_t i = 0; i < grads.start.size(); ++i) {
                grads.start[i] += lambda * start_kl_grad[i];
                grads.end[i] += lambda * end_kl_grad[i];
            }
        }
    }

    loss.total = loss.para_ce + loss.mle_span + lambda * loss.kl_span;
    return {loss, std::move(grads)};
}

}  // namespace paraqa
