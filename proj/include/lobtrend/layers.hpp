#pragma once

#include <cmath>
#include <string>

#include "lobtrend/rng.hpp"
#include "lobtrend/tensor.hpp"

// Model-specific layers: mixing MLP blocks, bilinear normalization, sinusoidal
// positional encoding, and single-head self-attention. All operate on [T,N]
// matrices or [B,T,N] batches and are stateless given their parameters.
namespace lobtrend::nn {

constexpr double kNormEps = 1.0e-5;

// Glorot-style uniform init, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <class S>
ad::Tensor<S> glorot_uniform(ad::Shape shape, int64_t fan_in, int64_t fan_out, Rng& rng,
                             std::string name) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<S> data(static_cast<size_t>(ad::shape_numel(shape)));
    for (auto& v : data) v = static_cast<S>(rng.uniform(-a, a));
    return ad::Tensor<S>::param(std::move(shape), std::move(data), std::move(name));
}

template <class S>
ad::Tensor<S> const_param(ad::Shape shape, S value, std::string name) {
    std::vector<S> data(static_cast<size_t>(ad::shape_numel(shape)), value);
    return ad::Tensor<S>::param(std::move(shape), std::move(data), std::move(name));
}

// ---------------------------------------------------------------------------
// Mixing blocks.
// ---------------------------------------------------------------------------

// Weights for one feature-mixing + temporal-mixing block. The mixing linears
// carry no bias; the layer norms carry gain and bias.
template <class S>
struct MixBlockParams {
    ad::Tensor<S> w1, w2, ln1_gain, ln1_bias; // feature mixing, width N -> E -> N
    ad::Tensor<S> w3, w4, ln2_gain, ln2_bias; // temporal mixing, width T -> E' -> T
};

template <class S>
MixBlockParams<S> make_mix_block(int64_t T, int64_t N, int expansion, Rng& rng,
                                 const std::string& prefix) {
    const int64_t E = expansion * N;
    const int64_t Et = expansion * T;
    MixBlockParams<S> p;
    p.w1 = glorot_uniform<S>({N, E}, N, E, rng, prefix + ".w1");
    p.w2 = glorot_uniform<S>({E, N}, E, N, rng, prefix + ".w2");
    p.ln1_gain = const_param<S>({N}, S(1), prefix + ".ln1_gain");
    p.ln1_bias = const_param<S>({N}, S(0), prefix + ".ln1_bias");
    p.w3 = glorot_uniform<S>({T, Et}, T, Et, rng, prefix + ".w3");
    p.w4 = glorot_uniform<S>({Et, T}, Et, T, rng, prefix + ".w4");
    p.ln2_gain = const_param<S>({T}, S(1), prefix + ".ln2_gain");
    p.ln2_bias = const_param<S>({T}, S(0), prefix + ".ln2_bias");
    return p;
}

// Row-wise mixing over the feature axis:
// U = gelu(LayerNorm(gelu(X W1) W2 + X)).
template <class S>
ad::Tensor<S> feature_mix(const ad::Tensor<S>& x, const MixBlockParams<S>& p) {
    auto inner = ad::matmul(ad::gelu(ad::matmul(x, p.w1)), p.w2);
    auto normed = ad::layer_norm(ad::add(inner, x), p.ln1_gain, p.ln1_bias, kNormEps);
    return ad::gelu(normed);
}

// Column-wise mixing over the time axis; implemented on the transpose.
template <class S>
ad::Tensor<S> temporal_mix(const ad::Tensor<S>& x, const MixBlockParams<S>& p) {
    auto xt = ad::transpose_last_two(x);
    auto inner = ad::matmul(ad::gelu(ad::matmul(xt, p.w3)), p.w4);
    auto normed = ad::layer_norm(ad::add(inner, xt), p.ln2_gain, p.ln2_bias, kNormEps);
    return ad::transpose_last_two(ad::gelu(normed));
}

// ---------------------------------------------------------------------------
// Self-attention (single head).
// ---------------------------------------------------------------------------

template <class S>
struct AttentionParams {
    ad::Tensor<S> wq, wk, wv, wo; // d x d
    int64_t dim = 0;
};

template <class S>
AttentionParams<S> make_attention(int64_t d, Rng& rng, const std::string& prefix) {
    AttentionParams<S> p;
    p.dim = d;
    p.wq = glorot_uniform<S>({d, d}, d, d, rng, prefix + ".wq");
    p.wk = glorot_uniform<S>({d, d}, d, d, rng, prefix + ".wk");
    p.wv = glorot_uniform<S>({d, d}, d, d, rng, prefix + ".wv");
    p.wo = glorot_uniform<S>({d, d}, d, d, rng, prefix + ".wo");
    return p;
}

// Scaled dot-product attention over the second-to-last axis, followed by an
// output projection. Residual connections belong to the caller.
template <class S>
ad::Tensor<S> self_attention(const ad::Tensor<S>& x, const AttentionParams<S>& p) {
    const int64_t d = x.shape().back();
    if (d != p.dim)
        throw ValidationError("self_attention: input dim " + std::to_string(d) +
                              " does not match projection dim " + std::to_string(p.dim));
    auto q = ad::matmul(x, p.wq);
    auto k = ad::matmul(x, p.wk);
    auto v = ad::matmul(x, p.wv);
    auto scores = ad::mul_scalar(ad::matmul(q, ad::transpose_last_two(k)),
                                 static_cast<S>(1.0 / std::sqrt(static_cast<double>(d))));
    auto weights = ad::softmax_last_axis(scores);
    return ad::matmul(ad::matmul(weights, v), p.wo);
}

// Attention across features: transpose so feature vectors over time become
// the tokens (model dim T), attend, transpose back.
template <class S>
ad::Tensor<S> spatial_attention(const ad::Tensor<S>& x, const AttentionParams<S>& p) {
    return ad::transpose_last_two(self_attention(ad::transpose_last_two(x), p));
}

// ---------------------------------------------------------------------------
// Bilinear normalization.
// ---------------------------------------------------------------------------

// Two-branch input normalization: the temporal branch standardizes each
// feature column across time and applies a per-feature affine; the feature
// branch standardizes each time row across features and applies a per-step
// affine. The output is lambda1 * Z_time + lambda2 * Z_feat.
template <class S>
struct BiNParams {
    ad::Tensor<S> time_scale, time_shift; // per feature, length F
    ad::Tensor<S> feat_scale, feat_shift; // per time step, length T
    ad::Tensor<S> lambda1, lambda2;       // scalar branch weights
};

template <class S>
BiNParams<S> make_bin(int64_t T, int64_t F, const std::string& prefix) {
    BiNParams<S> p;
    p.time_scale = const_param<S>({F}, S(1), prefix + ".time_scale");
    p.time_shift = const_param<S>({F}, S(0), prefix + ".time_shift");
    p.feat_scale = const_param<S>({T}, S(1), prefix + ".feat_scale");
    p.feat_shift = const_param<S>({T}, S(0), prefix + ".feat_shift");
    p.lambda1 = const_param<S>({1}, S(0.5), prefix + ".lambda1");
    p.lambda2 = const_param<S>({1}, S(0.5), prefix + ".lambda2");
    return p;
}

namespace detail {

// Standardize along the last axis; a length-1 axis passes through unchanged.
template <class S>
ad::Tensor<S> standardize_last(const ad::Tensor<S>& x) {
    if (x.shape().back() < 2) return x;
    auto centered = ad::sub(x, ad::mean_last_axis(x));
    auto inv_std =
        ad::rsqrt(ad::add_scalar(ad::variance_last_axis(x), static_cast<S>(kNormEps)));
    return ad::mul(centered, inv_std);
}

} // namespace detail

// x: [*, T, F].
template <class S>
ad::Tensor<S> bin_forward(const ad::Tensor<S>& x, const BiNParams<S>& p) {
    if (x.rank() < 2)
        throw ValidationError("bin_forward: expected [*,T,F], got " + ad::shape_str(x.shape()));

    // Temporal branch: normalize along time (work on [*, F, T]), affine per
    // feature applied in [*, T, F] layout where F is the trailing axis.
    auto zt = ad::transpose_last_two(detail::standardize_last(ad::transpose_last_two(x)));
    auto z_time = ad::add(ad::mul(zt, p.time_scale), p.time_shift);

    // Feature branch: normalize along features, affine per time step applied
    // in [*, F, T] layout where T is the trailing axis.
    auto zf = detail::standardize_last(x);
    auto zf_t = ad::transpose_last_two(zf);
    auto z_feat =
        ad::transpose_last_two(ad::add(ad::mul(zf_t, p.feat_scale), p.feat_shift));

    return ad::add(ad::mul(z_time, p.lambda1), ad::mul(z_feat, p.lambda2));
}

// ---------------------------------------------------------------------------
// Positional encoding.
// ---------------------------------------------------------------------------

// Sinusoidal table: PE[pos, 2i] = sin(pos / 10000^(2i/d)),
// PE[pos, 2i+1] = cos(pos / 10000^(2i/d)). A constant, not a parameter.
template <class S>
ad::Tensor<S> positional_encoding(int64_t T, int64_t d) {
    std::vector<S> data(static_cast<size_t>(T * d));
    for (int64_t pos = 0; pos < T; ++pos) {
        for (int64_t i = 0; 2 * i < d; ++i) {
            const double freq =
                std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(d));
            const double angle = static_cast<double>(pos) * freq;
            data[static_cast<size_t>(pos * d + 2 * i)] = static_cast<S>(std::sin(angle));
            if (2 * i + 1 < d)
                data[static_cast<size_t>(pos * d + 2 * i + 1)] =
                    static_cast<S>(std::cos(angle));
        }
    }
    return ad::Tensor<S>::from({T, d}, std::move(data));
}

} // namespace lobtrend::nn
