#include "paraqa/encoder.hpp"

#include <cmath>
#include <limits>

#include "paraqa/errors.hpp"
#include "paraqa/rng.hpp"

namespace paraqa {

namespace {

constexpr double kLnEps = 1e-5;

std::string layer_prefix(int layer) { return "layer" + std::to_string(layer) + "."; }

// y = x W^T + b with W shaped [out, in].
void linear_forward(const Mat& x, const Tensor& w, const Tensor& b, Mat& y) {
    const int out_dim = w.shape[0];
    const int in_dim = w.shape[1];
    y = Mat(x.rows, out_dim);
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double* yr = y.row(r);
        for (int o = 0; o < out_dim; ++o) {
            const double* wo = w.data.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(in_dim);
            double acc = b.data[static_cast<std::size_t>(o)];
            for (int i = 0; i < in_dim; ++i) {
                acc += xr[i] * wo[i];
            }
            yr[o] = acc;
        }
    }
}

// Accumulates dW, db and writes dX for y = x W^T + b.
void linear_backward(const Mat& x, const Tensor& w, const Mat& dy, Tensor& dw, Tensor& db,
                     Mat& dx) {
    const int out_dim = w.shape[0];
    const int in_dim = w.shape[1];
    dx = Mat(x.rows, in_dim);
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        const double* dyr = dy.row(r);
        double* dxr = dx.row(r);
        for (int o = 0; o < out_dim; ++o) {
            const double g = dyr[o];
            if (g == 0.0) {
                continue;
            }
            const double* wo = w.data.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(in_dim);
            double* dwo = dw.data.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(in_dim);
            db.data[static_cast<std::size_t>(o)] += g;
            for (int i = 0; i < in_dim; ++i) {
                dwo[i] += g * xr[i];
                dxr[i] += g * wo[i];
            }
        }
    }
}

void layer_norm_forward(const Mat& x, const Tensor& scale, const Tensor& offset, Mat& xhat,
                        std::vector<double>& rstd, Mat& y) {
    const int d = x.cols;
    xhat = Mat(x.rows, d);
    y = Mat(x.rows, d);
    rstd.assign(static_cast<std::size_t>(x.rows), 0.0);
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double mean = 0.0;
        for (int c = 0; c < d; ++c) {
            mean += xr[c];
        }
        mean /= d;
        double var = 0.0;
        for (int c = 0; c < d; ++c) {
            const double dv = xr[c] - mean;
            var += dv * dv;
        }
        var /= d;
        const double r_std = 1.0 / std::sqrt(var + kLnEps);
        rstd[static_cast<std::size_t>(r)] = r_std;
        double* xh = xhat.row(r);
        double* yr = y.row(r);
        for (int c = 0; c < d; ++c) {
            xh[c] = (xr[c] - mean) * r_std;
            yr[c] = xh[c] * scale.data[static_cast<std::size_t>(c)] +
                    offset.data[static_cast<std::size_t>(c)];
        }
    }
}

// dx_i = rstd * (dxhat_i - mean(dxhat) - xhat_i * mean(dxhat .* xhat))
void layer_norm_backward(const Mat& xhat, const std::vector<double>& rstd, const Tensor& scale,
                         const Mat& dy, Tensor& dscale, Tensor& doffset, Mat& dx) {
    const int d = xhat.cols;
    dx = Mat(xhat.rows, d);
    for (int r = 0; r < xhat.rows; ++r) {
        const double* xh = xhat.row(r);
        const double* dyr = dy.row(r);
        double* dxr = dx.row(r);
        double sum_dxhat = 0.0;
        double sum_dxhat_xhat = 0.0;
        for (int c = 0; c < d; ++c) {
            const double dxhat = dyr[c] * scale.data[static_cast<std::size_t>(c)];
            dscale.data[static_cast<std::size_t>(c)] += dyr[c] * xh[c];
            doffset.data[static_cast<std::size_t>(c)] += dyr[c];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xh[c];
        }
        const double mean_dxhat = sum_dxhat / d;
        const double mean_dxhat_xhat = sum_dxhat_xhat / d;
        const double r_std = rstd[static_cast<std::size_t>(r)];
        for (int c = 0; c < d; ++c) {
            const double dxhat = dyr[c] * scale.data[static_cast<std::size_t>(c)];
            dxr[c] = r_std * (dxhat - mean_dxhat - xh[c] * mean_dxhat_xhat);
        }
    }
}

}  // namespace

void EncoderConfig::validate() const {
    if (d_model < 1 || n_layers < 1 || n_heads < 1 || ffn_dim < 1 || max_len < 1) {
        throw InputError("encoder dimensions must be positive");
    }
    if (d_model % n_heads != 0) {
        throw InputError("d_model must be divisible by n_heads");
    }
    if (local_window < 0 || local_window % 2 != 0) {
        throw InputError("local_window must be even and non-negative");
    }
    if (vocab_size < 1) {
        throw InputError("vocab_size must be positive");
    }
}

void init_encoder_params(const EncoderConfig& cfg, ParamSet& params) {
    cfg.validate();
    SplitMix64 rng(cfg.seed);
    auto fill_uniform = [&](Tensor& t, double limit) {
        for (double& v : t.data) {
            v = rng.uniform(-limit, limit);
        }
    };
    auto add_linear = [&](const std::string& name, int out_dim, int in_dim) {
        Tensor& w = params.add(name + ".w", {out_dim, in_dim});
        fill_uniform(w, std::sqrt(6.0 / (in_dim + out_dim)));
        params.add(name + ".b", {out_dim});
    };
    auto add_layer_norm = [&](const std::string& name) {
        Tensor& scale = params.add(name + ".scale", {cfg.d_model});
        std::fill(scale.data.begin(), scale.data.end(), 1.0);
        params.add(name + ".offset", {cfg.d_model});
    };

    fill_uniform(params.add("embed.token", {cfg.vocab_size, cfg.d_model}), 0.1);
    fill_uniform(params.add("embed.pos", {cfg.max_len, cfg.d_model}), 0.1);
    for (int l = 0; l < cfg.n_layers; ++l) {
        const std::string p = layer_prefix(l);
        add_layer_norm(p + "ln1");
        add_linear(p + "attn.q", cfg.d_model, cfg.d_model);
        add_linear(p + "attn.k", cfg.d_model, cfg.d_model);
        add_linear(p + "attn.v", cfg.d_model, cfg.d_model);
        add_linear(p + "attn.o", cfg.d_model, cfg.d_model);
        add_layer_norm(p + "ln2");
        add_linear(p + "ffn.1", cfg.ffn_dim, cfg.d_model);
        add_linear(p + "ffn.2", cfg.d_model, cfg.ffn_dim);
    }
    add_layer_norm("final_ln");
}

namespace {

bool attention_allowed(int i, int j, int half_window, const std::vector<std::uint8_t>& mask,
                       const std::vector<std::uint8_t>& global_set) {
    if (mask[static_cast<std::size_t>(i)] == 0 || mask[static_cast<std::size_t>(j)] == 0) {
        return false;
    }
    if (global_set[static_cast<std::size_t>(i)] != 0 || global_set[static_cast<std::size_t>(j)] != 0) {
        return true;
    }
    const int diff = i >= j ? i - j : j - i;
    return diff <= half_window;
}

}  // namespace

EncoderTape encode_forward(const std::vector<int>& token_ids,
                           const std::vector<std::uint8_t>& mask,
                           const std::vector<std::uint8_t>& global_set, const ParamSet& params,
                           const EncoderConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(token_ids.size());
    if (n == 0 || n > cfg.max_len) {
        throw StateError("sequence length " + std::to_string(n) + " not in [1, max_len=" +
                         std::to_string(cfg.max_len) + "]");
    }
    if (static_cast<int>(mask.size()) != n || static_cast<int>(global_set.size()) != n) {
        throw StateError("mask/global_set size mismatch");
    }
    const int d = cfg.d_model;
    const int hd = cfg.head_dim();
    const int half_window = cfg.local_window / 2;
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

    EncoderTape tape;
    tape.token_ids = token_ids;
    tape.mask = mask;
    tape.global_set = global_set;

    const Tensor& tok_emb = params.at("embed.token");
    const Tensor& pos_emb = params.at("embed.pos");

    Mat x(n, d);
    for (int t = 0; t < n; ++t) {
        const int id = token_ids[static_cast<std::size_t>(t)];
        if (id < 0 || id >= cfg.vocab_size) {
            throw StateError("token id " + std::to_string(id) + " outside vocab_size " +
                             std::to_string(cfg.vocab_size));
        }
        const double* te = tok_emb.data.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(d);
        const double* pe = pos_emb.data.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(d);
        double* xr = x.row(t);
        for (int c = 0; c < d; ++c) {
            xr[c] = te[c] + pe[c];
        }
    }

    tape.layers.resize(static_cast<std::size_t>(cfg.n_layers));
    for (int l = 0; l < cfg.n_layers; ++l) {
        LayerTape& lt = tape.layers[static_cast<std::size_t>(l)];
        const std::string p = layer_prefix(l);
        lt.x_in = x;

        layer_norm_forward(x, params.at(p + "ln1.scale"), params.at(p + "ln1.offset"), lt.ln1_xhat,
                           lt.ln1_rstd, lt.ln1_out);
        linear_forward(lt.ln1_out, params.at(p + "attn.q.w"), params.at(p + "attn.q.b"), lt.q);
        linear_forward(lt.ln1_out, params.at(p + "attn.k.w"), params.at(p + "attn.k.b"), lt.k);
        linear_forward(lt.ln1_out, params.at(p + "attn.v.w"), params.at(p + "attn.v.b"), lt.v);

        lt.attn_concat = Mat(n, d);
        lt.probs.assign(static_cast<std::size_t>(cfg.n_heads), Mat(n, n));
        std::vector<double> scores(static_cast<std::size_t>(n));
        for (int h = 0; h < cfg.n_heads; ++h) {
            Mat& probs = lt.probs[static_cast<std::size_t>(h)];
            const int c0 = h * hd;
            for (int i = 0; i < n; ++i) {
                double max_score = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < n; ++j) {
                    if (!attention_allowed(i, j, half_window, mask, global_set)) {
                        continue;
                    }
                    const double* qi = lt.q.row(i) + c0;
                    const double* kj = lt.k.row(j) + c0;
                    double s = 0.0;
                    for (int c = 0; c < hd; ++c) {
                        s += qi[c] * kj[c];
                    }
                    s *= inv_sqrt_hd;
                    scores[static_cast<std::size_t>(j)] = s;
                    max_score = std::max(max_score, s);
                }
                if (max_score == -std::numeric_limits<double>::infinity()) {
                    continue;  // empty row (PAD); output stays zero
                }
                double z = 0.0;
                for (int j = 0; j < n; ++j) {
                    if (!attention_allowed(i, j, half_window, mask, global_set)) {
                        continue;
                    }
                    const double e = std::exp(scores[static_cast<std::size_t>(j)] - max_score);
                    probs(i, j) = e;
                    z += e;
                }
                double* out = lt.attn_concat.row(i) + c0;
                for (int j = 0; j < n; ++j) {
                    const double pj = probs(i, j);
                    if (pj == 0.0) {
                        continue;
                    }
                    const double pn = pj / z;
                    probs(i, j) = pn;
                    const double* vj = lt.v.row(j) + c0;
                    for (int c = 0; c < hd; ++c) {
                        out[c] += pn * vj[c];
                    }
                }
            }
        }

        Mat attn_out;
        linear_forward(lt.attn_concat, params.at(p + "attn.o.w"), params.at(p + "attn.o.b"),
                       attn_out);
        lt.x_mid = Mat(n, d);
        for (std::size_t k = 0; k < x.data.size(); ++k) {
            lt.x_mid.data[k] = x.data[k] + attn_out.data[k];
        }

        layer_norm_forward(lt.x_mid, params.at(p + "ln2.scale"), params.at(p + "ln2.offset"),
                           lt.ln2_xhat, lt.ln2_rstd, lt.ln2_out);
        linear_forward(lt.ln2_out, params.at(p + "ffn.1.w"), params.at(p + "ffn.1.b"), lt.ffn_pre);
        lt.ffn_act = lt.ffn_pre;
        for (double& v : lt.ffn_act.data) {
            v = v > 0.0 ? v : 0.0;
        }
        Mat ffn_out;
        linear_forward(lt.ffn_act, params.at(p + "ffn.2.w"), params.at(p + "ffn.2.b"), ffn_out);
        x = Mat(n, d);
        for (std::size_t k = 0; k < x.data.size(); ++k) {
            x.data[k] = lt.x_mid.data[k] + ffn_out.data[k];
        }
    }

    tape.final_in = x;
    layer_norm_forward(x, params.at("final_ln.scale"), params.at("final_ln.offset"),
                       tape.final_xhat, tape.final_rstd, tape.hidden);
    return tape;
}

void encode_backward(const EncoderTape& tape, const Mat& grad_hidden, const ParamSet& params,
                     const EncoderConfig& cfg, ParamSet& grads) {
    const int n = static_cast<int>(tape.token_ids.size());
    const int d = cfg.d_model;
    const int hd = cfg.head_dim();
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));
    if (grad_hidden.rows != n || grad_hidden.cols != d) {
        throw StateError("grad_hidden shape mismatch");
    }

    Mat dx;
    layer_norm_backward(tape.final_xhat, tape.final_rstd, params.at("final_ln.scale"), grad_hidden,
                        grads.at("final_ln.scale"), grads.at("final_ln.offset"), dx);

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
        const LayerTape& lt = tape.layers[static_cast<std::size_t>(l)];
        const std::string p = layer_prefix(l);

        // FFN half: x_out = x_mid + ffn(ln2(x_mid))
        Mat dr;
        linear_backward(lt.ffn_act, params.at(p + "ffn.2.w"), dx, grads.at(p + "ffn.2.w"),
                        grads.at(p + "ffn.2.b"), dr);
        for (std::size_t k = 0; k < dr.data.size(); ++k) {
            if (lt.ffn_pre.data[k] <= 0.0) {
                dr.data[k] = 0.0;
            }
        }
        Mat da2;
        linear_backward(lt.ln2_out, params.at(p + "ffn.1.w"), dr, grads.at(p + "ffn.1.w"),
                        grads.at(p + "ffn.1.b"), da2);
        Mat dx_mid;
        layer_norm_backward(lt.ln2_xhat, lt.ln2_rstd, params.at(p + "ln2.scale"), da2,
                            grads.at(p + "ln2.scale"), grads.at(p + "ln2.offset"), dx_mid);
        for (std::size_t k = 0; k < dx_mid.data.size(); ++k) {
            dx_mid.data[k] += dx.data[k];  // residual
        }

        // Attention half: x_mid = x_in + Wo(attn(ln1(x_in)))
        Mat d_concat;
        linear_backward(lt.attn_concat, params.at(p + "attn.o.w"), dx_mid,
                        grads.at(p + "attn.o.w"), grads.at(p + "attn.o.b"), d_concat);

        Mat dq(n, d);
        Mat dk(n, d);
        Mat dv(n, d);
        std::vector<double> dp(static_cast<std::size_t>(n));
        for (int h = 0; h < cfg.n_heads; ++h) {
            const Mat& probs = lt.probs[static_cast<std::size_t>(h)];
            const int c0 = h * hd;
            for (int i = 0; i < n; ++i) {
                const double* doi = d_concat.row(i) + c0;
                double dot = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double pij = probs(i, j);
                    if (pij == 0.0) {
                        dp[static_cast<std::size_t>(j)] = 0.0;
                        continue;
                    }
                    const double* vj = lt.v.row(j) + c0;
                    double g = 0.0;
                    for (int c = 0; c < hd; ++c) {
                        g += doi[c] * vj[c];
                    }
                    dp[static_cast<std::size_t>(j)] = g;
                    dot += pij * g;
                    double* dvj = dv.row(j) + c0;
                    for (int c = 0; c < hd; ++c) {
                        dvj[c] += pij * doi[c];
                    }
                }
                // softmax jacobian, then score grads flow into q and k
                double* dqi = dq.row(i) + c0;
                const double* qi = lt.q.row(i) + c0;
                for (int j = 0; j < n; ++j) {
                    const double pij = probs(i, j);
                    if (pij == 0.0) {
                        continue;
                    }
                    const double ds = pij * (dp[static_cast<std::size_t>(j)] - dot) * inv_sqrt_hd;
                    const double* kj = lt.k.row(j) + c0;
                    double* dkj = dk.row(j) + c0;
                    for (int c = 0; c < hd; ++c) {
                        dqi[c] += ds * kj[c];
                        dkj[c] += ds * qi[c];
                    }
                }
            }
        }

        Mat da_q, da_k, da_v;
        linear_backward(lt.ln1_out, params.at(p + "attn.q.w"), dq, grads.at(p + "attn.q.w"),
                        grads.at(p + "attn.q.b"), da_q);
        linear_backward(lt.ln1_out, params.at(p + "attn.k.w"), dk, grads.at(p + "attn.k.w"),
                        grads.at(p + "attn.k.b"), da_k);
        linear_backward(lt.ln1_out, params.at(p + "attn.v.w"), dv, grads.at(p + "attn.v.w"),
                        grads.at(p + "attn.v.b"), da_v);
        Mat da(n, d);
        for (std::size_t k = 0; k < da.data.size(); ++k) {
            da.data[k] = da_q.data[k] + da_k.data[k] + da_v.data[k];
        }
        Mat dx_in;
        layer_norm_backward(lt.ln1_xhat, lt.ln1_rstd, params.at(p + "ln1.scale"), da,
                            grads.at(p + "ln1.scale"), grads.at(p + "ln1.offset"), dx_in);
        for (std::size_t k = 0; k < dx_in.data.size(); ++k) {
            dx_in.data[k] += dx_mid.data[k];  // residual
        }
        dx = std::move(dx_in);
    }

    Tensor& d_tok = grads.at("embed.token");
    Tensor& d_pos = grads.at("embed.pos");
    for (int t = 0; t < n; ++t) {
        const int id = tape.token_ids[static_cast<std::size_t>(t)];
        double* te = d_tok.data.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(d);
        double* pe = d_pos.data.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(d);
        const double* g = dx.row(t);
        for (int c = 0; c < d; ++c) {
            te[c] += g[c];
            pe[c] += g[c];
        }
    }
}

}  // namespace paraqa
