#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lobtrend/layers.hpp"

namespace lobtrend::nn {

enum class Architecture { Mlplob, Tlob, TlobNoSa, TlobNoTa };

std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

struct ModelConfig {
    Architecture architecture = Architecture::Tlob;
    int64_t window = 128;  // T, snapshots per input
    int64_t features = 40; // F, raw feature count
    int64_t hidden = 128;  // N, block width
    int num_blocks = 4;
    int heads = 1;      // the search found no benefit beyond one head
    int expansion = 4;  // mixing MLP width multiplier
    double dropout = 0.0;
    uint64_t seed = 0;
    bool use_positional_encoding = true;
};

enum class AttnKind { Temporal, Spatial };

template <class S>
struct AttnLayerParams {
    AttnKind kind = AttnKind::Temporal;
    AttentionParams<S> attn;
    ad::Tensor<S> ln_gain, ln_bias; // post-norm after the residual add
};

template <class S>
struct BlockParams {
    std::vector<AttnLayerParams<S>> attn; // empty for mlplob blocks
    MixBlockParams<S> mix;
};

template <class S>
struct LinearParams {
    ad::Tensor<S> w, b;
};

// An MLPLOB / TLOB model instance: configuration plus parameters. Building is
// deterministic for (config, seed); forward passes are pure given parameters.
template <class S>
class Model {
public:
    static Model build(const ModelConfig& cfg);

    // x: [B, T, F] -> logits [B, 3]. `dropout_rng` enables dropout (training
    // mode); inference passes keep it null.
    ad::Tensor<S> forward(const ad::Tensor<S>& x, Rng* dropout_rng = nullptr) const;

    std::vector<std::pair<std::string, ad::Tensor<S>>> named_parameters() const;
    std::vector<ad::Tensor<S>> parameters() const;
    int64_t parameter_count() const;
    void zero_grad() const;

    int temporal_attention_layers() const;
    int spatial_attention_layers() const;

    const ModelConfig& config() const { return cfg_; }

    // Overwrites parameter values; order and shapes must match parameters().
    void load_parameter_values(const std::vector<std::vector<S>>& values);
    std::vector<std::vector<S>> snapshot_parameter_values() const;

private:
    ModelConfig cfg_;
    BiNParams<S> bin_;
    LinearParams<S> proj_;
    ad::Tensor<S> pos_; // constant, only used by tlob variants
    std::vector<BlockParams<S>> blocks_;
    LinearParams<S> reduce_;              // per-step N -> N/4
    std::vector<LinearParams<S>> head_;   // halving stack
    LinearParams<S> out_;                 // final -> 3 logits
};

// Ablation variants keep the per-block layer count at two attention layers so
// the total across the model stays fixed.
template <class S>
Model<S> build_ablation(Architecture variant, const ModelConfig& base) {
    ModelConfig cfg = base;
    cfg.architecture = variant;
    return Model<S>::build(cfg);
}

// ---------------------------------------------------------------------------
// Implementation.
// ---------------------------------------------------------------------------

inline std::string architecture_name(Architecture a) {
    switch (a) {
        case Architecture::Mlplob: return "mlplob";
        case Architecture::Tlob: return "tlob";
        case Architecture::TlobNoSa: return "tlob-no-sa";
        case Architecture::TlobNoTa: return "tlob-no-ta";
    }
    return "?";
}

inline Architecture architecture_from_name(const std::string& name) {
    if (name == "mlplob") return Architecture::Mlplob;
    if (name == "tlob") return Architecture::Tlob;
    if (name == "tlob-no-sa") return Architecture::TlobNoSa;
    if (name == "tlob-no-ta") return Architecture::TlobNoTa;
    throw ConfigError("unknown architecture: " + name);
}

template <class S>
Model<S> Model<S>::build(const ModelConfig& cfg) {
    if (cfg.window < 1 || cfg.features < 1 || cfg.hidden < 1)
        throw ConfigError("model dimensions must be >= 1");
    if (cfg.num_blocks < 1) throw ConfigError("num_blocks must be >= 1");
    if (cfg.heads != 1) throw ConfigError("head count is fixed to 1");

    Model<S> m;
    m.cfg_ = cfg;
    Rng rng(cfg.seed);
    const int64_t T = cfg.window, F = cfg.features, N = cfg.hidden;

    m.bin_ = make_bin<S>(T, F, "bin");
    m.proj_.w = glorot_uniform<S>({F, N}, F, N, rng, "proj.w");
    m.proj_.b = const_param<S>({N}, S(0), "proj.b");

    const bool is_tlob = cfg.architecture != Architecture::Mlplob;
    if (is_tlob) m.pos_ = positional_encoding<S>(T, N);

    for (int b = 0; b < cfg.num_blocks; ++b) {
        const std::string prefix = "block" + std::to_string(b);
        BlockParams<S> block;
        if (is_tlob) {
            std::vector<AttnKind> kinds;
            switch (cfg.architecture) {
                case Architecture::Tlob:
                    kinds = {AttnKind::Temporal, AttnKind::Spatial};
                    break;
                case Architecture::TlobNoSa:
                    kinds = {AttnKind::Temporal, AttnKind::Temporal};
                    break;
                case Architecture::TlobNoTa:
                    kinds = {AttnKind::Spatial, AttnKind::Spatial};
                    break;
                default: break;
            }
            for (size_t a = 0; a < kinds.size(); ++a) {
                const std::string ap = prefix + ".attn" + std::to_string(a);
                AttnLayerParams<S> layer;
                layer.kind = kinds[a];
                const int64_t d = kinds[a] == AttnKind::Temporal ? N : T;
                layer.attn = make_attention<S>(d, rng, ap);
                layer.ln_gain = const_param<S>({N}, S(1), ap + ".ln_gain");
                layer.ln_bias = const_param<S>({N}, S(0), ap + ".ln_bias");
                block.attn.push_back(std::move(layer));
            }
        }
        block.mix = make_mix_block<S>(T, N, cfg.expansion, rng, prefix + ".mix");
        m.blocks_.push_back(std::move(block));
    }

    const int64_t reduced = std::max<int64_t>(1, N / 4);
    m.reduce_.w = glorot_uniform<S>({N, reduced}, N, reduced, rng, "head.reduce.w");
    m.reduce_.b = const_param<S>({reduced}, S(0), "head.reduce.b");

    int64_t width = T * reduced;
    int fc = 0;
    while (width > 64) {
        const int64_t next = width / 2;
        const std::string name = "head.fc" + std::to_string(fc++);
        LinearParams<S> lin;
        lin.w = glorot_uniform<S>({width, next}, width, next, rng, name + ".w");
        lin.b = const_param<S>({next}, S(0), name + ".b");
        m.head_.push_back(std::move(lin));
        width = next;
    }
    m.out_.w = glorot_uniform<S>({width, 3}, width, 3, rng, "head.out.w");
    m.out_.b = const_param<S>({3}, S(0), "head.out.b");
    return m;
}

template <class S>
ad::Tensor<S> Model<S>::forward(const ad::Tensor<S>& x, Rng* dropout_rng) const {
    if (x.rank() != 3 || x.dim(1) != cfg_.window || x.dim(2) != cfg_.features)
        throw ValidationError("model expects [B," + std::to_string(cfg_.window) + "," +
                              std::to_string(cfg_.features) + "], got " +
                              ad::shape_str(x.shape()));
    const bool is_tlob = cfg_.architecture != Architecture::Mlplob;
    const bool use_dropout = dropout_rng != nullptr && cfg_.dropout > 0.0;

    auto h = bin_forward(x, bin_);
    h = ad::add(ad::matmul(h, proj_.w), proj_.b);
    if (is_tlob && cfg_.use_positional_encoding) h = ad::add(h, pos_);

    for (const auto& block : blocks_) {
        for (const auto& layer : block.attn) {
            auto a = layer.kind == AttnKind::Temporal ? self_attention(h, layer.attn)
                                                      : spatial_attention(h, layer.attn);
            if (use_dropout) a = ad::dropout(a, cfg_.dropout, *dropout_rng);
            h = ad::layer_norm(ad::add(h, a), layer.ln_gain, layer.ln_bias, kNormEps);
        }
        h = feature_mix(h, block.mix);
        h = temporal_mix(h, block.mix);
        if (use_dropout) h = ad::dropout(h, cfg_.dropout, *dropout_rng);
    }

    auto r = ad::add(ad::matmul(h, reduce_.w), reduce_.b);
    auto flat = ad::reshape(r, {x.dim(0), r.dim(1) * r.dim(2)});
    for (const auto& lin : head_)
        flat = ad::gelu(ad::add(ad::matmul(flat, lin.w), lin.b));
    return ad::add(ad::matmul(flat, out_.w), out_.b);
}

template <class S>
std::vector<std::pair<std::string, ad::Tensor<S>>> Model<S>::named_parameters() const {
    std::vector<std::pair<std::string, ad::Tensor<S>>> out;
    auto push = [&out](const ad::Tensor<S>& t) { out.emplace_back(t.node->name, t); };
    push(bin_.time_scale);
    push(bin_.time_shift);
    push(bin_.feat_scale);
    push(bin_.feat_shift);
    push(bin_.lambda1);
    push(bin_.lambda2);
    push(proj_.w);
    push(proj_.b);
    for (const auto& block : blocks_) {
        for (const auto& layer : block.attn) {
            push(layer.attn.wq);
            push(layer.attn.wk);
            push(layer.attn.wv);
            push(layer.attn.wo);
            push(layer.ln_gain);
            push(layer.ln_bias);
        }
        push(block.mix.w1);
        push(block.mix.w2);
        push(block.mix.ln1_gain);
        push(block.mix.ln1_bias);
        push(block.mix.w3);
        push(block.mix.w4);
        push(block.mix.ln2_gain);
        push(block.mix.ln2_bias);
    }
    push(reduce_.w);
    push(reduce_.b);
    for (const auto& lin : head_) {
        push(lin.w);
        push(lin.b);
    }
    push(out_.w);
    push(out_.b);
    return out;
}

template <class S>
std::vector<ad::Tensor<S>> Model<S>::parameters() const {
    std::vector<ad::Tensor<S>> out;
    for (auto& [name, t] : named_parameters()) {
        (void)name;
        out.push_back(t);
    }
    return out;
}

template <class S>
int64_t Model<S>::parameter_count() const {
    int64_t total = 0;
    for (const auto& t : parameters()) total += t.numel();
    return total;
}

template <class S>
void Model<S>::zero_grad() const {
    for (const auto& t : parameters()) t.node->zero_grad();
}

template <class S>
int Model<S>::temporal_attention_layers() const {
    int n = 0;
    for (const auto& b : blocks_)
        for (const auto& l : b.attn)
            if (l.kind == AttnKind::Temporal) ++n;
    return n;
}

template <class S>
int Model<S>::spatial_attention_layers() const {
    int n = 0;
    for (const auto& b : blocks_)
        for (const auto& l : b.attn)
            if (l.kind == AttnKind::Spatial) ++n;
    return n;
}

template <class S>
void Model<S>::load_parameter_values(const std::vector<std::vector<S>>& values) {
    auto params = parameters();
    if (values.size() != params.size())
        throw ValidationError("parameter list size mismatch: " + std::to_string(values.size()) +
                              " vs " + std::to_string(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
        if (values[i].size() != params[i].values().size())
            throw ValidationError("parameter " + std::to_string(i) + " size mismatch");
        params[i].values() = values[i];
    }
}

template <class S>
std::vector<std::vector<S>> Model<S>::snapshot_parameter_values() const {
    std::vector<std::vector<S>> out;
    for (const auto& t : parameters()) out.push_back(t.values());
    return out;
}

} // namespace lobtrend::nn
