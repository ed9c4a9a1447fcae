#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paraqa/tensor.hpp"

namespace paraqa {

/// Longformer-style encoder: sliding-window self-attention (position i
/// attends to j iff |i-j| <= local_window/2) widened by a set of
/// global-attention positions that attend to, and are attended by, every
/// non-PAD position. Pre-layer-norm blocks, ReLU feed-forward, learned
/// absolute position embeddings.
struct EncoderConfig {
    int d_model = 32;
    int n_layers = 2;
    int n_heads = 2;
    int ffn_dim = 64;
    int local_window = 16;  // attend iff |i - j| <= local_window / 2
    int max_len = 512;
    int vocab_size = 0;
    std::uint64_t seed = 0;

    int head_dim() const { return d_model / n_heads; }
    void validate() const;
};

/// Deterministic seeded initialization: uniform Xavier limits for linear
/// maps, uniform(-0.1, 0.1) embeddings, layer-norm scales 1 and offsets 0.
/// Tensors are appended to params in a fixed order that defines the
/// checkpoint layout.
void init_encoder_params(const EncoderConfig& cfg, ParamSet& params);

/// Activations recorded by the forward pass for the exact backward pass.
struct LayerTape {
    Mat x_in;
    Mat ln1_xhat;
    std::vector<double> ln1_rstd;
    Mat ln1_out;
    Mat q, k, v;
    std::vector<Mat> probs;  // per head, rows of disallowed pairs stay zero
    Mat attn_concat;
    Mat x_mid;
    Mat ln2_xhat;
    std::vector<double> ln2_rstd;
    Mat ln2_out;
    Mat ffn_pre;  // pre-ReLU
    Mat ffn_act;
};

struct EncoderTape {
    std::vector<int> token_ids;
    std::vector<std::uint8_t> mask;        // 1 = real token, 0 = PAD
    std::vector<std::uint8_t> global_set;  // 1 = global attention position
    std::vector<LayerTape> layers;
    Mat final_in;
    Mat final_xhat;
    std::vector<double> final_rstd;
    Mat hidden;  // row t is h_t; markup rows feed the paragraph head
};

/// Forward pass. PAD positions are masked out of every attention row; a row
/// whose allowed set is empty produces a zero attention output. Throws
/// StateError when token ids fall outside the configured vocabulary or the
/// sequence exceeds max_len.
EncoderTape encode_forward(const std::vector<int>& token_ids,
                           const std::vector<std::uint8_t>& mask,
                           const std::vector<std::uint8_t>& global_set, const ParamSet& params,
                           const EncoderConfig& cfg);

/// Exact gradients of the scalar loss whose hidden-state gradient is
/// grad_hidden, accumulated into grads (same layout as params).
void encode_backward(const EncoderTape& tape, const Mat& grad_hidden, const ParamSet& params,
                     const EncoderConfig& cfg, ParamSet& grads);

}  // namespace paraqa
