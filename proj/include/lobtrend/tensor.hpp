#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lobtrend/errors.hpp"
#include "lobtrend/rng.hpp"

// Dense tensor engine with reverse-mode differentiation. Graphs are dynamic
// tapes: every op allocates a node holding its value, parent links, and a
// backward closure. A graph is confined to one thread; independent graphs may
// run on different threads.
namespace lobtrend::ad {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

template <class S>
struct Node {
    Shape shape;
    std::vector<S> value;
    std::vector<S> grad; // empty until first needed
    bool requires_grad = false;
    std::string name;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    int64_t numel() const { return static_cast<int64_t>(value.size()); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), S(0));
    }
    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), S(0));
    }
};

// Whether newly built ops record backward closures. Disabled via NoGradGuard
// for inference and finite-difference probing.
inline thread_local bool g_grad_enabled = true;

struct NoGradGuard {
    bool prev;
    NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
    ~NoGradGuard() { g_grad_enabled = prev; }
};

template <class S>
class Tensor {
public:
    std::shared_ptr<Node<S>> node;

    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node<S>> n) : node(std::move(n)) {}

    static Tensor zeros(Shape shape) {
        auto n = std::make_shared<Node<S>>();
        n->value.assign(static_cast<size_t>(shape_numel(shape)), S(0));
        n->shape = std::move(shape);
        return Tensor(n);
    }

    static Tensor full(Shape shape, S v) {
        Tensor t = zeros(std::move(shape));
        std::fill(t.node->value.begin(), t.node->value.end(), v);
        return t;
    }

    static Tensor from(Shape shape, std::vector<S> data) {
        if (static_cast<int64_t>(data.size()) != shape_numel(shape))
            throw ValidationError("tensor data length " + std::to_string(data.size()) +
                                  " does not match shape " + shape_str(shape));
        auto n = std::make_shared<Node<S>>();
        n->shape = std::move(shape);
        n->value = std::move(data);
        return Tensor(n);
    }

    static Tensor scalar(S v) { return from({1}, {v}); }

    // Leaf parameter: participates in gradients and carries a name for
    // checkpoints.
    static Tensor param(Shape shape, std::vector<S> data, std::string name) {
        Tensor t = from(std::move(shape), std::move(data));
        t.node->requires_grad = true;
        t.node->name = std::move(name);
        return t;
    }

    bool defined() const { return node != nullptr; }
    const Shape& shape() const { return node->shape; }
    int rank() const { return static_cast<int>(node->shape.size()); }
    int64_t numel() const { return node->numel(); }
    int64_t dim(int i) const { return node->shape[static_cast<size_t>(i)]; }

    S* data() { return node->value.data(); }
    const S* data() const { return node->value.data(); }
    std::vector<S>& values() { return node->value; }
    const std::vector<S>& values() const { return node->value; }
    const std::vector<S>& grad() const { return node->grad; }

    bool requires_grad() const { return node->requires_grad; }
    S item() const {
        if (numel() != 1)
            throw ValidationError("item() on non-scalar tensor " + shape_str(shape()));
        return node->value[0];
    }
};

namespace detail {

template <class S>
std::shared_ptr<Node<S>> make_result(Shape shape,
                                      std::vector<std::shared_ptr<Node<S>>> parents,
                                      std::function<void(Node<S>&)> backward) {
    auto n = std::make_shared<Node<S>>();
    n->value.assign(static_cast<size_t>(shape_numel(shape)), S(0));
    n->shape = std::move(shape);
    bool needs = false;
    if (g_grad_enabled)
        for (const auto& p : parents)
            if (p->requires_grad) needs = true;
    if (needs) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backward = std::move(backward);
    }
    return n;
}

enum class Bcast { Same, Scalar, Suffix, KeepLast };

template <class S>
Bcast resolve_bcast(const Shape& a, const Shape& b, const char* op) {
    if (a == b) return Bcast::Same;
    if (shape_numel(b) == 1) return Bcast::Scalar;
    if (b.size() < a.size()) {
        bool suffix = true;
        for (size_t i = 0; i < b.size(); ++i)
            if (b[b.size() - 1 - i] != a[a.size() - 1 - i]) suffix = false;
        if (suffix) return Bcast::Suffix;
    }
    if (b.size() == a.size() && !a.empty() && b.back() == 1) {
        bool match = true;
        for (size_t i = 0; i + 1 < a.size(); ++i)
            if (a[i] != b[i]) match = false;
        if (match) return Bcast::KeepLast;
    }
    throw ValidationError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                          shape_str(b));
}

// Maps a flat index of the full operand onto the broadcast operand.
struct BcastIndex {
    Bcast kind;
    int64_t b_numel;
    int64_t last_dim;
    int64_t operator()(int64_t i) const {
        switch (kind) {
            case Bcast::Same: return i;
            case Bcast::Scalar: return 0;
            case Bcast::Suffix: return i % b_numel;
            case Bcast::KeepLast: return i / last_dim;
        }
        return 0;
    }
};

template <class S>
BcastIndex bcast_index(const Shape& a, const Shape& b, Bcast kind) {
    return BcastIndex{kind, shape_numel(b), a.empty() ? 1 : a.back()};
}

template <class S>
using EMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using Map = Eigen::Map<EMat<S>>;
template <class S>
using CMap = Eigen::Map<const EMat<S>>;

} // namespace detail

// ---------------------------------------------------------------------------
// Elementwise arithmetic (second operand broadcasts: equal shape, scalar,
// trailing-suffix shape, or same-rank keepdim with last dim 1).
// ---------------------------------------------------------------------------

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
    auto kind = detail::resolve_bcast<S>(a.shape(), b.shape(), "add");
    auto map = detail::bcast_index<S>(a.shape(), b.shape(), kind);
    auto out = detail::make_result<S>(a.shape(), {a.node, b.node}, [map](Node<S>& self) {
        auto& ga = *self.parents[0];
        auto& gb = *self.parents[1];
        const int64_t n = self.numel();
        if (ga.requires_grad) {
            ga.ensure_grad();
            for (int64_t i = 0; i < n; ++i) ga.grad[i] += self.grad[i];
        }
        if (gb.requires_grad) {
            gb.ensure_grad();
            for (int64_t i = 0; i < n; ++i) gb.grad[map(i)] += self.grad[i];
        }
    });
    const int64_t n = shape_numel(a.shape());
    for (int64_t i = 0; i < n; ++i)
        out->value[i] = a.node->value[i] + b.node->value[map(i)];
    return Tensor<S>(out);
}

template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
    auto kind = detail::resolve_bcast<S>(a.shape(), b.shape(), "sub");
    auto map = detail::bcast_index<S>(a.shape(), b.shape(), kind);
    auto out = detail::make_result<S>(a.shape(), {a.node, b.node}, [map](Node<S>& self) {
        auto& ga = *self.parents[0];
        auto& gb = *self.parents[1];
        const int64_t n = self.numel();
        if (ga.requires_grad) {
            ga.ensure_grad();
            for (int64_t i = 0; i < n; ++i) ga.grad[i] += self.grad[i];
        }
        if (gb.requires_grad) {
            gb.ensure_grad();
            for (int64_t i = 0; i < n; ++i) gb.grad[map(i)] -= self.grad[i];
        }
    });
    const int64_t n = shape_numel(a.shape());
    for (int64_t i = 0; i < n; ++i)
        out->value[i] = a.node->value[i] - b.node->value[map(i)];
    return Tensor<S>(out);
}

template <class S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
    auto kind = detail::resolve_bcast<S>(a.shape(), b.shape(), "mul");
    auto map = detail::bcast_index<S>(a.shape(), b.shape(), kind);
    auto out = detail::make_result<S>(a.shape(), {a.node, b.node}, [map](Node<S>& self) {
        auto& ga = *self.parents[0];
        auto& gb = *self.parents[1];
        const int64_t n = self.numel();
        if (ga.requires_grad) {
            ga.ensure_grad();
            for (int64_t i = 0; i < n; ++i)
                ga.grad[i] += self.grad[i] * gb.value[map(i)];
        }
        if (gb.requires_grad) {
            gb.ensure_grad();
            for (int64_t i = 0; i < n; ++i)
                gb.grad[map(i)] += self.grad[i] * ga.value[i];
        }
    });
    const int64_t n = shape_numel(a.shape());
    for (int64_t i = 0; i < n; ++i)
        out->value[i] = a.node->value[i] * b.node->value[map(i)];
    return Tensor<S>(out);
}

template <class S>
Tensor<S> add_scalar(const Tensor<S>& a, S c) {
    auto out = detail::make_result<S>(a.shape(), {a.node}, [](Node<S>& self) {
        auto& ga = *self.parents[0];
        if (!ga.requires_grad) return;
        ga.ensure_grad();
        for (int64_t i = 0; i < self.numel(); ++i) ga.grad[i] += self.grad[i];
    });
    for (int64_t i = 0; i < a.numel(); ++i) out->value[i] = a.node->value[i] + c;
    return Tensor<S>(out);
}

template <class S>
Tensor<S> mul_scalar(const Tensor<S>& a, S c) {
    auto out = detail::make_result<S>(a.shape(), {a.node}, [c](Node<S>& self) {
        auto& ga = *self.parents[0];
        if (!ga.requires_grad) return;
        ga.ensure_grad();
        for (int64_t i = 0; i < self.numel(); ++i) ga.grad[i] += c * self.grad[i];
    });
    for (int64_t i = 0; i < a.numel(); ++i) out->value[i] = c * a.node->value[i];
    return Tensor<S>(out);
}

// ---------------------------------------------------------------------------
// Matrix multiplication: [m,k]x[k,n], [B,m,k]x[k,n], [B,m,k]x[B,k,n].
// ---------------------------------------------------------------------------

template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    auto fail = [&] {
        throw ValidationError("matmul: shape mismatch " + shape_str(sa) + " x " +
                              shape_str(sb));
    };
    if (sa.size() < 2 || sb.size() < 2 || sa.size() > 3 || sb.size() > 3) fail();

    const int64_t m = sa[sa.size() - 2], k = sa.back();
    const int64_t k2 = sb[sb.size() - 2], n = sb.back();
    if (k != k2) fail();

    Shape out_shape;
    int64_t batch = 1;
    bool batched_b = false;
    if (sa.size() == 2 && sb.size() == 2) {
        out_shape = {m, n};
    } else if (sa.size() == 3 && sb.size() == 2) {
        batch = sa[0];
        out_shape = {batch, m, n};
    } else if (sa.size() == 3 && sb.size() == 3) {
        if (sa[0] != sb[0]) fail();
        batch = sa[0];
        batched_b = true;
        out_shape = {batch, m, n};
    } else {
        fail();
    }

    auto out = detail::make_result<S>(
        out_shape, {a.node, b.node}, [m, k, n, batch, batched_b](Node<S>& self) {
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            if (pa.requires_grad) pa.ensure_grad();
            if (pb.requires_grad) pb.ensure_grad();
            if (!batched_b) {
                // Fold batch into rows: A is (batch*m, k), G is (batch*m, n).
                detail::CMap<S> A(pa.value.data(), batch * m, k);
                detail::CMap<S> B(pb.value.data(), k, n);
                detail::CMap<S> G(self.grad.data(), batch * m, n);
                if (pa.requires_grad) {
                    detail::Map<S> GA(pa.grad.data(), batch * m, k);
                    GA.noalias() += G * B.transpose();
                }
                if (pb.requires_grad) {
                    detail::Map<S> GB(pb.grad.data(), k, n);
                    GB.noalias() += A.transpose() * G;
                }
            } else {
                for (int64_t bi = 0; bi < batch; ++bi) {
                    detail::CMap<S> A(pa.value.data() + bi * m * k, m, k);
                    detail::CMap<S> B(pb.value.data() + bi * k * n, k, n);
                    detail::CMap<S> G(self.grad.data() + bi * m * n, m, n);
                    if (pa.requires_grad) {
                        detail::Map<S> GA(pa.grad.data() + bi * m * k, m, k);
                        GA.noalias() += G * B.transpose();
                    }
                    if (pb.requires_grad) {
                        detail::Map<S> GB(pb.grad.data() + bi * k * n, k, n);
                        GB.noalias() += A.transpose() * G;
                    }
                }
            }
        });

    if (!batched_b) {
        detail::CMap<S> A(a.node->value.data(), batch * m, k);
        detail::CMap<S> B(b.node->value.data(), k, n);
        detail::Map<S> C(out->value.data(), batch * m, n);
        C.noalias() = A * B;
    } else {
        for (int64_t bi = 0; bi < batch; ++bi) {
            detail::CMap<S> A(a.node->value.data() + bi * m * k, m, k);
            detail::CMap<S> B(b.node->value.data() + bi * k * n, k, n);
            detail::Map<S> C(out->value.data() + bi * m * n, m, n);
            C.noalias() = A * B;
        }
    }
    return Tensor<S>(out);
}

// ---------------------------------------------------------------------------
// Shape manipulation.
// ---------------------------------------------------------------------------

template <class S>
Tensor<S> transpose_last_two(const Tensor<S>& a) {
    if (a.rank() < 2)
        throw ValidationError("transpose_last_two: rank < 2, shape " + shape_str(a.shape()));
    Shape out_shape = a.shape();
    std::swap(out_shape[out_shape.size() - 1], out_shape[out_shape.size() - 2]);
    const int64_t r = a.shape()[a.shape().size() - 2];
    const int64_t c = a.shape().back();
    const int64_t batch = a.numel() / (r * c);

    auto out = detail::make_result<S>(out_shape, {a.node}, [r, c, batch](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (int64_t b = 0; b < batch; ++b) {
            const S* g = self.grad.data() + b * r * c;
            S* ga = pa.grad.data() + b * r * c;
            for (int64_t i = 0; i < c; ++i)
                for (int64_t j = 0; j < r; ++j) ga[j * c + i] += g[i * r + j];
        }
    });
    for (int64_t b = 0; b < batch; ++b) {
        const S* src = a.node->value.data() + b * r * c;
        S* dst = out->value.data() + b * r * c;
        for (int64_t i = 0; i < r; ++i)
            for (int64_t j = 0; j < c; ++j) dst[j * r + i] = src[i * c + j];
    }
    return Tensor<S>(out);
}

template <class S>
Tensor<S> reshape(const Tensor<S>& a, Shape shape) {
    if (shape_numel(shape) != a.numel())
        throw ValidationError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                              shape_str(shape));
    auto out = detail::make_result<S>(shape, {a.node}, [](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (int64_t i = 0; i < self.numel(); ++i) pa.grad[i] += self.grad[i];
    });
    out->value = a.node->value;
    return Tensor<S>(out);
}

template <class S>
Tensor<S> concat_last_axis(const Tensor<S>& a, const Tensor<S>& b) {
    if (a.rank() != b.rank() || a.rank() < 1)
        throw ValidationError("concat_last_axis: rank mismatch " + shape_str(a.shape()) +
                              " vs " + shape_str(b.shape()));
    for (size_t i = 0; i + 1 < a.shape().size(); ++i)
        if (a.shape()[i] != b.shape()[i])
            throw ValidationError("concat_last_axis: leading dims differ " +
                                  shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const int64_t la = a.shape().back(), lb = b.shape().back();
    const int64_t rows = a.numel() / la;
    Shape out_shape = a.shape();
    out_shape.back() = la + lb;

    auto out = detail::make_result<S>(out_shape, {a.node, b.node}, [la, lb, rows](Node<S>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) pa.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const S* g = self.grad.data() + r * (la + lb);
            if (pa.requires_grad)
                for (int64_t i = 0; i < la; ++i) pa.grad[r * la + i] += g[i];
            if (pb.requires_grad)
                for (int64_t i = 0; i < lb; ++i) pb.grad[r * lb + i] += g[la + i];
        }
    });
    for (int64_t r = 0; r < rows; ++r) {
        S* dst = out->value.data() + r * (la + lb);
        const S* pa = a.node->value.data() + r * la;
        const S* pb = b.node->value.data() + r * lb;
        for (int64_t i = 0; i < la; ++i) dst[i] = pa[i];
        for (int64_t i = 0; i < lb; ++i) dst[la + i] = pb[i];
    }
    return Tensor<S>(out);
}

// ---------------------------------------------------------------------------
// Reductions (keepdim): mean/variance along the last axis, or any axis via
// the transpose wrappers below.
// ---------------------------------------------------------------------------

template <class S>
Tensor<S> mean_last_axis(const Tensor<S>& a) {
    if (a.rank() < 1) throw ValidationError("mean_last_axis: rank 0 tensor");
    const int64_t L = a.shape().back();
    const int64_t rows = a.numel() / L;
    Shape out_shape = a.shape();
    out_shape.back() = 1;
    auto out = detail::make_result<S>(out_shape, {a.node}, [L, rows](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        const S inv = S(1) / static_cast<S>(L);
        for (int64_t r = 0; r < rows; ++r) {
            const S g = self.grad[r] * inv;
            for (int64_t i = 0; i < L; ++i) pa.grad[r * L + i] += g;
        }
    });
    for (int64_t r = 0; r < rows; ++r) {
        S sum = S(0);
        const S* src = a.node->value.data() + r * L;
        for (int64_t i = 0; i < L; ++i) sum += src[i];
        out->value[r] = sum / static_cast<S>(L);
    }
    return Tensor<S>(out);
}

// Population (biased) variance.
template <class S>
Tensor<S> variance_last_axis(const Tensor<S>& a) {
    if (a.rank() < 1) throw ValidationError("variance_last_axis: rank 0 tensor");
    const int64_t L = a.shape().back();
    const int64_t rows = a.numel() / L;
    Shape out_shape = a.shape();
    out_shape.back() = 1;
    auto out = detail::make_result<S>(out_shape, {a.node}, [L, rows](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const S* x = pa.value.data() + r * L;
            S mean = S(0);
            for (int64_t i = 0; i < L; ++i) mean += x[i];
            mean /= static_cast<S>(L);
            const S coeff = self.grad[r] * S(2) / static_cast<S>(L);
            for (int64_t i = 0; i < L; ++i) pa.grad[r * L + i] += coeff * (x[i] - mean);
        }
    });
    for (int64_t r = 0; r < rows; ++r) {
        const S* x = a.node->value.data() + r * L;
        S mean = S(0);
        for (int64_t i = 0; i < L; ++i) mean += x[i];
        mean /= static_cast<S>(L);
        S var = S(0);
        for (int64_t i = 0; i < L; ++i) var += (x[i] - mean) * (x[i] - mean);
        out->value[r] = var / static_cast<S>(L);
    }
    return Tensor<S>(out);
}

template <class S>
Tensor<S> mean_along(const Tensor<S>& a, int axis) {
    if (axis == a.rank() - 1) return mean_last_axis(a);
    if (axis == a.rank() - 2)
        return transpose_last_two(mean_last_axis(transpose_last_two(a)));
    throw ValidationError("mean_along: axis must be one of the last two");
}

template <class S>
Tensor<S> variance_along(const Tensor<S>& a, int axis) {
    if (axis == a.rank() - 1) return variance_last_axis(a);
    if (axis == a.rank() - 2)
        return transpose_last_two(variance_last_axis(transpose_last_two(a)));
    throw ValidationError("variance_along: axis must be one of the last two");
}

template <class S>
Tensor<S> sum_all(const Tensor<S>& a) {
    auto out = detail::make_result<S>({1}, {a.node}, [](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        const S g = self.grad[0];
        for (auto& v : pa.grad) v += g;
    });
    S sum = S(0);
    for (S v : a.node->value) sum += v;
    out->value[0] = sum;
    return Tensor<S>(out);
}

// ---------------------------------------------------------------------------
// Nonlinearities.
// ---------------------------------------------------------------------------

// Exact Gaussian-CDF form x * Phi(x).
template <class S>
Tensor<S> gelu(const Tensor<S>& a) {
    auto out = detail::make_result<S>(a.shape(), {a.node}, [](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        constexpr double inv_sqrt2pi = 0.39894228040143267794;
        for (int64_t i = 0; i < self.numel(); ++i) {
            const double x = static_cast<double>(pa.value[i]);
            const double cdf = 0.5 * std::erfc(-x * inv_sqrt2);
            const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
            pa.grad[i] += self.grad[i] * static_cast<S>(cdf + x * pdf);
        }
    });
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double x = static_cast<double>(a.node->value[i]);
        out->value[i] = static_cast<S>(x * 0.5 * std::erfc(-x * inv_sqrt2));
    }
    return Tensor<S>(out);
}

// 1/sqrt(x) for x > 0.
template <class S>
Tensor<S> rsqrt(const Tensor<S>& a) {
    auto out = detail::make_result<S>(a.shape(), {a.node}, [](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (int64_t i = 0; i < self.numel(); ++i) {
            const S y = self.value[i];
            pa.grad[i] += self.grad[i] * S(-0.5) * y * y * y;
        }
    });
    for (int64_t i = 0; i < a.numel(); ++i)
        out->value[i] = S(1) / std::sqrt(a.node->value[i]);
    return Tensor<S>(out);
}

template <class S>
Tensor<S> softmax_last_axis(const Tensor<S>& a) {
    if (a.rank() < 1) throw ValidationError("softmax_last_axis: rank 0 tensor");
    const int64_t L = a.shape().back();
    const int64_t rows = a.numel() / L;
    auto out = detail::make_result<S>(a.shape(), {a.node}, [L, rows](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const S* s = self.value.data() + r * L;
            const S* g = self.grad.data() + r * L;
            S dot = S(0);
            for (int64_t i = 0; i < L; ++i) dot += g[i] * s[i];
            S* ga = pa.grad.data() + r * L;
            for (int64_t i = 0; i < L; ++i) ga[i] += s[i] * (g[i] - dot);
        }
    });
    for (int64_t r = 0; r < rows; ++r) {
        const S* x = a.node->value.data() + r * L;
        S* y = out->value.data() + r * L;
        S mx = x[0];
        for (int64_t i = 1; i < L; ++i) mx = std::max(mx, x[i]);
        S sum = S(0);
        for (int64_t i = 0; i < L; ++i) {
            y[i] = std::exp(x[i] - mx);
            sum += y[i];
        }
        for (int64_t i = 0; i < L; ++i) y[i] /= sum;
    }
    return Tensor<S>(out);
}

// (x - mean) / sqrt(var + eps) per last-axis row, then affine. Population
// variance; gain/bias have the last-axis length.
template <class S>
Tensor<S> layer_norm(const Tensor<S>& x, const Tensor<S>& gain, const Tensor<S>& bias,
                     double eps) {
    auto centered = sub(x, mean_last_axis(x));
    auto inv_std = rsqrt(add_scalar(variance_last_axis(x), static_cast<S>(eps)));
    auto normed = mul(centered, inv_std);
    return add(mul(normed, gain), bias);
}

// Inverted dropout; identity when rate == 0.
template <class S>
Tensor<S> dropout(const Tensor<S>& a, double rate, Rng& rng) {
    if (rate <= 0.0) return a;
    if (rate >= 1.0) throw ConfigError("dropout rate must be < 1");
    std::vector<S> mask(static_cast<size_t>(a.numel()));
    const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
    for (auto& m : mask) m = rng.uniform() < rate ? S(0) : keep_scale;
    auto out = detail::make_result<S>(a.shape(), {a.node}, [mask](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (int64_t i = 0; i < self.numel(); ++i) pa.grad[i] += self.grad[i] * mask[i];
    });
    for (int64_t i = 0; i < a.numel(); ++i) out->value[i] = a.node->value[i] * mask[i];
    return Tensor<S>(out);
}

// ---------------------------------------------------------------------------
// Loss.
// ---------------------------------------------------------------------------

// Mean negative log-softmax over the batch. logits: [B, C].
template <class S>
Tensor<S> cross_entropy(const Tensor<S>& logits, const std::vector<int>& targets) {
    if (logits.rank() != 2)
        throw ValidationError("cross_entropy: logits must be 2-D, got " +
                              shape_str(logits.shape()));
    const int64_t B = logits.dim(0), C = logits.dim(1);
    if (static_cast<int64_t>(targets.size()) != B)
        throw ValidationError("cross_entropy: batch " + std::to_string(B) + " vs " +
                              std::to_string(targets.size()) + " targets");
    for (int t : targets)
        if (t < 0 || t >= C)
            throw ValidationError("cross_entropy: target out of range: " + std::to_string(t));

    // Softmax probabilities are needed by both passes; cache them.
    std::vector<S> probs(static_cast<size_t>(B * C));
    double loss = 0.0;
    for (int64_t b = 0; b < B; ++b) {
        const S* x = logits.data() + b * C;
        S* p = probs.data() + b * C;
        S mx = x[0];
        for (int64_t c = 1; c < C; ++c) mx = std::max(mx, x[c]);
        double sum = 0.0;
        for (int64_t c = 0; c < C; ++c) {
            p[c] = std::exp(x[c] - mx);
            sum += static_cast<double>(p[c]);
        }
        for (int64_t c = 0; c < C; ++c) p[c] = static_cast<S>(p[c] / sum);
        loss -= std::log(static_cast<double>(p[targets[static_cast<size_t>(b)]]));
    }
    loss /= static_cast<double>(B);

    auto out = detail::make_result<S>({1}, {logits.node}, [probs, targets, B, C](Node<S>& self) {
        auto& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        const S g = self.grad[0] / static_cast<S>(B);
        for (int64_t b = 0; b < B; ++b) {
            const S* p = probs.data() + b * C;
            S* ga = pa.grad.data() + b * C;
            const int y = targets[static_cast<size_t>(b)];
            for (int64_t c = 0; c < C; ++c)
                ga[c] += g * (p[c] - (c == y ? S(1) : S(0)));
        }
    });
    out->value[0] = static_cast<S>(loss);
    return Tensor<S>(out);
}

// ---------------------------------------------------------------------------
// Reverse pass.
// ---------------------------------------------------------------------------

template <class S>
void backward(const Tensor<S>& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw ValidationError("backward: loss must be a defined scalar");

    // Iterative post-order DFS; closures on deep graphs would overflow the
    // stack if done recursively.
    std::vector<Node<S>*> order;
    std::unordered_set<Node<S>*> seen;
    std::vector<std::pair<Node<S>*, size_t>> stack;
    stack.emplace_back(loss.node.get(), 0);
    seen.insert(loss.node.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<S>* parent = node->parents[next++].get();
            if (parent->requires_grad && seen.insert(parent).second)
                stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.node->ensure_grad();
    loss.node->grad[0] = S(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<S>* node = *it;
        if (node->backward && !node->grad.empty()) node->backward(*node);
    }
}

// ---------------------------------------------------------------------------
// Gradient verification and optimization.
// ---------------------------------------------------------------------------

struct FdReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    int64_t checked = 0;
    bool pass = false;
};

// Compares the analytic gradient of f at x against central differences.
// Relative error is |a - n| / max(1, |a|, |n|) so near-zero gradients do not
// blow up the ratio. f must rebuild its graph on every call and return a
// scalar.
template <class S, class F>
FdReport finite_diff_check(F&& f, Tensor<S> x, double step, double tol) {
    x.node->requires_grad = true;
    x.node->zero_grad();
    {
        auto loss = f(x);
        backward(loss);
    }
    std::vector<S> analytic = x.node->grad;

    FdReport report;
    report.checked = x.numel();
    for (int64_t i = 0; i < x.numel(); ++i) {
        const S orig = x.data()[i];
        double lp, lm;
        {
            NoGradGuard ng;
            x.data()[i] = orig + static_cast<S>(step);
            lp = static_cast<double>(f(x).item());
            x.data()[i] = orig - static_cast<S>(step);
            lm = static_cast<double>(f(x).item());
        }
        x.data()[i] = orig;
        const double numeric = (lp - lm) / (2.0 * step);
        const double a = static_cast<double>(analytic[i]);
        const double abs_err = std::fabs(a - numeric);
        const double rel =
            abs_err / std::max({1.0, std::fabs(a), std::fabs(numeric)});
        report.max_abs_err = std::max(report.max_abs_err, abs_err);
        report.max_rel_err = std::max(report.max_rel_err, rel);
    }
    report.pass = report.max_rel_err < tol;
    return report;
}

template <class S>
struct AdamState {
    std::vector<std::vector<S>> m, v;
    int64_t step_count = 0;
};

// Bias-corrected Adam. Parameters with no gradient buffer are treated as
// having zero gradient.
template <class S>
void adam_step(const std::vector<Tensor<S>>& params, AdamState<S>& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (size_t p = 0; p < params.size(); ++p) {
            state.m[p].assign(static_cast<size_t>(params[p].numel()), S(0));
            state.v[p].assign(static_cast<size_t>(params[p].numel()), S(0));
        }
    }
    if (state.m.size() != params.size())
        throw ValidationError("adam_step: state does not match parameter list");
    ++state.step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step_count));
    for (size_t p = 0; p < params.size(); ++p) {
        auto& node = *params[p].node;
        auto& m = state.m[p];
        auto& v = state.v[p];
        const bool has_grad = !node.grad.empty();
        for (size_t i = 0; i < node.value.size(); ++i) {
            const double g = has_grad ? static_cast<double>(node.grad[i]) : 0.0;
            m[i] = static_cast<S>(beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * g);
            v[i] = static_cast<S>(beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * g * g);
            const double mhat = static_cast<double>(m[i]) / bc1;
            const double vhat = static_cast<double>(v[i]) / bc2;
            node.value[i] -= static_cast<S>(lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

} // namespace lobtrend::ad
