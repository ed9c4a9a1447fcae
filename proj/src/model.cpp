#include "paraqa/model.hpp"

#include "paraqa/errors.hpp"

namespace paraqa {

ParamSet init_model_params(const EncoderConfig& cfg) {
    ParamSet params;
    init_encoder_params(cfg, params);
    init_head_params(cfg.d_model, params);
    return params;
}

AttentionInputs attention_inputs(const Window& window) {
    const int n = window.seq_len();
    AttentionInputs out;
    out.mask.assign(static_cast<std::size_t>(n), 0);
    out.global_set.assign(static_cast<std::size_t>(n), 0);
    const int doc_offset = window.doc_offset();
    for (int pos = 0; pos < n; ++pos) {
        if (window.is_pad(pos)) {
            continue;
        }
        out.mask[static_cast<std::size_t>(pos)] = 1;
        if (pos <= window.question_len) {
            out.global_set[static_cast<std::size_t>(pos)] = 1;  // CLS + question; SEP stays local
        } else if (pos >= doc_offset &&
                   window.doc_char_spans[static_cast<std::size_t>(pos - doc_offset)].length() == 0) {
            out.global_set[static_cast<std::size_t>(pos)] = 1;  // markup token
        }
    }
    return out;
}

WindowForward model_forward(const Window& window, const ParamSet& params,
                            const EncoderConfig& cfg, int para_capacity) {
    const AttentionInputs attn = attention_inputs(window);
    WindowForward out;
    out.tape = encode_forward(window.token_ids, attn.mask, attn.global_set, params, cfg);
    out.para = paragraph_logits(out.tape.hidden, window.candidates, params, para_capacity);
    out.span = span_logits(out.tape.hidden, window, params);
    return out;
}

LossBreakdown model_loss_and_grad(const Window& window, const ParamSet& params,
                                  const EncoderConfig& cfg, const GpoConfig& gpo,
                                  bool gpo_enabled, int para_capacity, ParamSet& grads) {
    const WindowForward fwd = model_forward(window, params, cfg, para_capacity);
    auto [loss, logit_grads] = total_loss(window.labels, fwd.para, fwd.span, gpo, gpo_enabled);

    const Mat& hidden = fwd.tape.hidden;
    const int d = cfg.d_model;
    Mat grad_hidden(hidden.rows, d);

    // Paragraph head: shared affine map over the CLS row and candidate rows.
    {
        const Tensor& w = params.at("head.paragraph.w");
        Tensor& dw = grads.at("head.paragraph.w");
        Tensor& db = grads.at("head.paragraph.b");
        auto apply_slot = [&](int slot, int row) {
            const double g = logit_grads.para[static_cast<std::size_t>(slot)];
            if (g == 0.0) {
                return;
            }
            db.data[0] += g;
            const double* h = hidden.row(row);
            double* gh = grad_hidden.row(row);
            for (int c = 0; c < d; ++c) {
                dw.data[static_cast<std::size_t>(c)] += g * h[c];
                gh[c] += g * w.data[static_cast<std::size_t>(c)];
            }
        };
        apply_slot(0, 0);
        for (std::size_t j = 0; j < window.candidates.size(); ++j) {
            apply_slot(1 + static_cast<int>(j), window.candidates[j].first);
        }
    }

    // Span heads: per-position linear scores on unmasked positions.
    {
        const Tensor& sw = params.at("head.span.start.w");
        const Tensor& ew = params.at("head.span.end.w");
        Tensor& dsw = grads.at("head.span.start.w");
        Tensor& dsb = grads.at("head.span.start.b");
        Tensor& dew = grads.at("head.span.end.w");
        Tensor& deb = grads.at("head.span.end.b");
        for (int pos = 0; pos < hidden.rows; ++pos) {
            if (fwd.span.mask[static_cast<std::size_t>(pos)] == 0) {
                continue;
            }
            const double gs = logit_grads.start[static_cast<std::size_t>(pos)];
            const double ge = logit_grads.end[static_cast<std::size_t>(pos)];
            if (gs == 0.0 && ge == 0.0) {
                continue;
            }
            const double* h = hidden.row(pos);
            double* gh = grad_hidden.row(pos);
            dsb.data[0] += gs;
            deb.data[0] += ge;
            for (int c = 0; c < d; ++c) {
                dsw.data[static_cast<std::size_t>(c)] += gs * h[c];
                dew.data[static_cast<std::size_t>(c)] += ge * h[c];
                gh[c] += gs * sw.data[static_cast<std::size_t>(c)] +
                         ge * ew.data[static_cast<std::size_t>(c)];
            }
        }
    }

    encode_backward(fwd.tape, grad_hidden, params, cfg, grads);
    return loss;
}

}  // namespace paraqa
