#pragma once

// Dense reverse-mode differentiation over row-major float64 matrices.
//
// Graphs are built define-by-run: every op allocates a Node holding its value,
// a zero-initialised gradient of the same shape, shared ownership of its
// parents and a closure that pushes its gradient into them. Leaves created
// with `parameter()` persist across graphs; everything else is released when
// the last Var referring to the loss goes away.

#include "wimp/error.hpp"
#include "wimp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace wimp::ad {

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
        check_shape();
        data_.assign(count(shape_), fill);
    }

    Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_shape();
        if (count(shape_) != data_.size()) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string(shape_));
        }
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
        return Tensor({rows, cols}, std::vector<double>(values));
    }

    static Tensor row(std::vector<double> values) {
        const std::size_t n = values.size();
        return Tensor({1, n}, std::move(values));
    }

    static Tensor scalar(double v) { return Tensor({1, 1}, std::vector<double>{v}); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    // Matrix view. Only meaningful for rank-2 tensors.
    std::size_t rows() const noexcept { return shape_.size() == 2 ? shape_[0] : 1; }
    std::size_t cols() const noexcept { return shape_.empty() ? 0 : shape_.back(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& vec() const noexcept { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    static std::size_t count(const Shape& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
    }

    void check_shape() const {
        if (shape_.empty()) throw ShapeError("tensor shape must have at least one axis");
        for (auto d : shape_) {
            if (d == 0) throw ShapeError("tensor shape " + shape_string(shape_) + " has a zero extent");
        }
    }

    Shape shape_;
    std::vector<double> data_;
};

struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_rule;
    std::string op_tag;
    std::string name;
    bool requires_grad = false;
};

// Shared handle to a graph node.
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    const Tensor& value() const { return node_->value; }
    // Optimisers update leaves in place.
    Tensor& mutable_value() { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    Tensor& grad() { return node_->grad; }
    const Shape& shape() const { return node_->value.shape(); }
    double item() const { return node_->value[0]; }

    const std::string& op_tag() const { return node_->op_tag; }
    const std::string& name() const { return node_->name; }
    bool requires_grad() const { return node_->requires_grad; }
    bool is_leaf() const { return node_->parents.empty(); }

    void zero_grad() { node_->grad.fill(0.0); }

    Node* node() const { return node_.get(); }
    const std::shared_ptr<Node>& ptr() const { return node_; }
    explicit operator bool() const { return static_cast<bool>(node_); }

private:
    std::shared_ptr<Node> node_;
};

// Trainable leaf.
inline Var parameter(Tensor value, std::string name = {}) {
    auto n = std::make_shared<Node>();
    n->grad = Tensor(value.shape(), 0.0);
    n->value = std::move(value);
    n->op_tag = "parameter";
    n->name = std::move(name);
    n->requires_grad = true;
    return Var(std::move(n));
}

// Non-trainable leaf; receives no gradient.
inline Var constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->op_tag = "constant";
    return Var(std::move(n));
}

namespace detail {

inline void require_matrix(const Var& a, const char* op) {
    if (a.value().rank() != 2) {
        throw ShapeError(std::string(op) + ": expected a rank-2 operand, got " + shape_string(a.shape()));
    }
}

inline ShapeError mismatch(const char* op, const Var& a, const Var& b) {
    return ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) + " and " +
                      shape_string(b.shape()));
}

inline Var make(Tensor value, std::vector<Var> parents, std::string tag, std::function<void(Node&)> rule) {
    auto n = std::make_shared<Node>();
    bool needs = false;
    n->parents.reserve(parents.size());
    for (auto& p : parents) {
        needs = needs || p.requires_grad();
        n->parents.push_back(p.ptr());
    }
    n->requires_grad = needs;
    if (needs) {
        n->grad = Tensor(value.shape(), 0.0);
        n->backward_rule = std::move(rule);
    }
    n->value = std::move(value);
    n->op_tag = std::move(tag);
    return Var(std::move(n));
}

inline double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace detail

// (m x k) . (k x n) -> (m x n)
inline Var matmul(const Var& a, const Var& b) {
    detail::require_matrix(a, "matmul");
    detail::require_matrix(b, "matmul");
    const auto& A = a.value();
    const auto& B = b.value();
    if (A.cols() != B.rows()) throw detail::mismatch("matmul", a, b);
    const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    Tensor out({m, n}, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = A(i, p);
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += aip * B(p, j);
        }
    }
    return detail::make(std::move(out), {a, b}, "matmul", [m, k, n](Node& self) {
        Node& na = *self.parents[0];
        Node& nb = *self.parents[1];
        const Tensor& g = self.grad;
        if (na.requires_grad) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += g(i, j) * nb.value(p, j);
                    na.grad(i, p) += acc;
                }
        }
        if (nb.requires_grad) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = na.value(i, p);
                    if (aip == 0.0) continue;
                    for (std::size_t j = 0; j < n; ++j) nb.grad(p, j) += aip * g(i, j);
                }
        }
    });
}

namespace detail {

// Elementwise a (+/-) b where either side may be a single row broadcast over
// the other's leading axis.
inline Var add_like(const Var& a, const Var& b, double sign, const char* tag) {
    require_matrix(a, tag);
    require_matrix(b, tag);
    const auto& A = a.value();
    const auto& B = b.value();
    if (A.cols() != B.cols()) throw mismatch(tag, a, b);
    const bool same = A.rows() == B.rows();
    const bool b_row = !same && B.rows() == 1;
    const bool a_row = !same && A.rows() == 1;
    if (!same && !a_row && !b_row) throw mismatch(tag, a, b);
    const std::size_t m = std::max(A.rows(), B.rows()), n = A.cols();
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(i, j) = A(a_row ? 0 : i, j) + sign * B(b_row ? 0 : i, j);
    return make(std::move(out), {a, b}, tag, [m, n, sign, a_row, b_row](Node& self) {
        Node& na = *self.parents[0];
        Node& nb = *self.parents[1];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double g = self.grad(i, j);
                if (na.requires_grad) na.grad(a_row ? 0 : i, j) += g;
                if (nb.requires_grad) nb.grad(b_row ? 0 : i, j) += sign * g;
            }
    });
}

template <typename F, typename D>
Var unary(const Var& a, const char* tag, F f, D dfdx_from_out) {
    Tensor out(a.shape());
    const auto& A = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(A[i]);
    return make(std::move(out), {a}, tag, [dfdx_from_out](Node& self) {
        Node& na = *self.parents[0];
        for (std::size_t i = 0; i < self.value.size(); ++i)
            na.grad[i] += self.grad[i] * dfdx_from_out(na.value[i], self.value[i]);
    });
}

} // namespace detail

// Elementwise sum; a single-row operand broadcasts over the leading axis.
inline Var add(const Var& a, const Var& b) { return detail::add_like(a, b, 1.0, "add"); }
inline Var sub(const Var& a, const Var& b) { return detail::add_like(a, b, -1.0, "sub"); }

inline Var mul(const Var& a, const Var& b) {
    if (a.shape() != b.shape()) throw detail::mismatch("mul", a, b);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
    return detail::make(std::move(out), {a, b}, "mul", [](Node& self) {
        Node& na = *self.parents[0];
        Node& nb = *self.parents[1];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (na.requires_grad) na.grad[i] += self.grad[i] * nb.value[i];
            if (nb.requires_grad) nb.grad[i] += self.grad[i] * na.value[i];
        }
    });
}

inline Var scale(const Var& a, double c) {
    return detail::unary(a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

inline Var sigmoid(const Var& a) {
    return detail::unary(a, "sigmoid", detail::stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

inline Var tanh(const Var& a) {
    return detail::unary(a, "tanh", [](double x) { return std::tanh(x); },
                         [](double, double y) { return 1.0 - y * y; });
}

// Pointwise max; on ties the gradient goes to `a`.
inline Var maximum(const Var& a, const Var& b) {
    if (a.shape() != b.shape()) throw detail::mismatch("maximum", a, b);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a.value()[i], b.value()[i]);
    return detail::make(std::move(out), {a, b}, "maximum", [](Node& self) {
        Node& na = *self.parents[0];
        Node& nb = *self.parents[1];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const bool left = na.value[i] >= nb.value[i];
            if (left && na.requires_grad) na.grad[i] += self.grad[i];
            if (!left && nb.requires_grad) nb.grad[i] += self.grad[i];
        }
    });
}

// Concatenate along the last axis; all parts need the same row count.
inline Var concat(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat: no operands");
    for (auto& p : parts) detail::require_matrix(p, "concat");
    const std::size_t m = parts.front().value().rows();
    std::size_t n = 0;
    for (auto& p : parts) {
        if (p.value().rows() != m) throw detail::mismatch("concat", parts.front(), p);
        n += p.value().cols();
    }
    Tensor out({m, n});
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (auto& p : parts) {
        offsets.push_back(off);
        const auto& P = p.value();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < P.cols(); ++j) out(i, off + j) = P(i, j);
        off += P.cols();
    }
    return detail::make(std::move(out), parts, "concat", [offsets, m](Node& self) {
        for (std::size_t k = 0; k < self.parents.size(); ++k) {
            Node& np = *self.parents[k];
            if (!np.requires_grad) continue;
            const std::size_t c = np.value.cols();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < c; ++j) np.grad(i, j) += self.grad(i, offsets[k] + j);
        }
    });
}

// Concatenate along the leading axis; all parts need the same column count.
inline Var stack_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("stack_rows: no operands");
    for (auto& p : parts) detail::require_matrix(p, "stack_rows");
    const std::size_t n = parts.front().value().cols();
    std::size_t m = 0;
    for (auto& p : parts) {
        if (p.value().cols() != n) throw detail::mismatch("stack_rows", parts.front(), p);
        m += p.value().rows();
    }
    Tensor out({m, n});
    std::size_t r = 0;
    for (auto& p : parts) {
        std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + r * n);
        r += p.value().rows();
    }
    return detail::make(std::move(out), parts, "stack_rows", [n](Node& self) {
        std::size_t base = 0;
        for (auto& pp : self.parents) {
            const std::size_t len = pp->value.rows() * n;
            if (pp->requires_grad)
                for (std::size_t i = 0; i < len; ++i) pp->grad[i] += self.grad[base + i];
            base += len;
        }
    });
}

// log(sum(exp(row))) for every row: (m x n) -> (m x 1). Max-shifted.
inline Var logsumexp(const Var& a) {
    detail::require_matrix(a, "logsumexp");
    const auto& A = a.value();
    const std::size_t m = A.rows(), n = A.cols();
    Tensor out({m, 1});
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, A(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::exp(A(i, j) - mx);
        out(i, 0) = mx + std::log(s);
    }
    return detail::make(std::move(out), {a}, "logsumexp", [m, n](Node& self) {
        Node& na = *self.parents[0];
        for (std::size_t i = 0; i < m; ++i) {
            const double lse = self.value(i, 0);
            const double g = self.grad(i, 0);
            for (std::size_t j = 0; j < n; ++j) na.grad(i, j) += g * std::exp(na.value(i, j) - lse);
        }
    });
}

// Sub-block [r0, r1) x [c0, c1).
inline Var slice(const Var& a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
    detail::require_matrix(a, "slice");
    const auto& A = a.value();
    if (r0 >= r1 || c0 >= c1 || r1 > A.rows() || c1 > A.cols()) {
        throw ShapeError("slice: range [" + std::to_string(r0) + "," + std::to_string(r1) + ")x[" +
                         std::to_string(c0) + "," + std::to_string(c1) + ") out of bounds for " +
                         shape_string(a.shape()));
    }
    Tensor out({r1 - r0, c1 - c0});
    for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = c0; j < c1; ++j) out(i - r0, j - c0) = A(i, j);
    return detail::make(std::move(out), {a}, "slice", [r0, r1, c0, c1](Node& self) {
        Node& na = *self.parents[0];
        for (std::size_t i = r0; i < r1; ++i)
            for (std::size_t j = c0; j < c1; ++j) na.grad(i, j) += self.grad(i - r0, j - c0);
    });
}

inline Var row(const Var& a, std::size_t r) { return slice(a, r, r + 1, 0, a.value().cols()); }

inline Var cols(const Var& a, std::size_t c0, std::size_t c1) {
    return slice(a, 0, a.value().rows(), c0, c1);
}

inline Var transpose(const Var& a) {
    detail::require_matrix(a, "transpose");
    const auto& A = a.value();
    const std::size_t m = A.rows(), n = A.cols();
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out(j, i) = A(i, j);
    return detail::make(std::move(out), {a}, "transpose", [m, n](Node& self) {
        Node& na = *self.parents[0];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) na.grad(i, j) += self.grad(j, i);
    });
}

// Sum of every element -> (1 x 1).
inline Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    return detail::make(Tensor::scalar(s), {a}, "sum", [](Node& self) {
        Node& na = *self.parents[0];
        const double g = self.grad[0];
        for (auto& v : na.grad.data()) v += g;
    });
}

// Rows of `table` picked by id -> (ids.size() x cols). Embedding lookup.
inline Var gather_rows(const Var& table, std::vector<std::size_t> ids) {
    detail::require_matrix(table, "gather_rows");
    const auto& T = table.value();
    if (ids.empty()) throw ShapeError("gather_rows: empty id list");
    for (auto id : ids) {
        if (id >= T.rows()) {
            throw ShapeError("gather_rows: id " + std::to_string(id) + " out of range for " +
                             shape_string(table.shape()));
        }
    }
    const std::size_t n = T.cols();
    Tensor out({ids.size(), n});
    for (std::size_t k = 0; k < ids.size(); ++k)
        for (std::size_t j = 0; j < n; ++j) out(k, j) = T(ids[k], j);
    return detail::make(std::move(out), {table}, "gather_rows", [ids = std::move(ids), n](Node& self) {
        Node& nt = *self.parents[0];
        for (std::size_t k = 0; k < ids.size(); ++k)
            for (std::size_t j = 0; j < n; ++j) nt.grad(ids[k], j) += self.grad(k, j);
    });
}

// Individual (row, col) entries -> (1 x positions.size()).
inline Var select(const Var& a, std::vector<std::pair<std::size_t, std::size_t>> positions) {
    detail::require_matrix(a, "select");
    const auto& A = a.value();
    if (positions.empty()) throw ShapeError("select: empty position list");
    Tensor out({1, positions.size()});
    for (std::size_t k = 0; k < positions.size(); ++k) {
        auto [r, c] = positions[k];
        if (r >= A.rows() || c >= A.cols()) {
            throw ShapeError("select: position (" + std::to_string(r) + "," + std::to_string(c) +
                             ") out of range for " + shape_string(a.shape()));
        }
        out[k] = A(r, c);
    }
    return detail::make(std::move(out), {a}, "select", [positions = std::move(positions)](Node& self) {
        Node& na = *self.parents[0];
        for (std::size_t k = 0; k < positions.size(); ++k)
            na.grad(positions[k].first, positions[k].second) += self.grad[k];
    });
}

// Multiply by a fixed mask (no gradient flows into the mask).
inline Var apply_mask(const Var& a, const Tensor& mask) {
    if (a.shape() != mask.shape()) {
        throw ShapeError("apply_mask: incompatible shapes " + shape_string(a.shape()) + " and " +
                         shape_string(mask.shape()));
    }
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * mask[i];
    return detail::make(std::move(out), {a}, "dropout", [mask](Node& self) {
        Node& na = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) na.grad[i] += self.grad[i] * mask[i];
    });
}

// Inverted dropout: kept units are scaled by 1/(1-p). Identity when p == 0.
inline Var dropout(const Var& a, double p, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("dropout: probability must be in [0, 1)");
    if (p == 0.0) return a;
    Tensor mask(a.shape());
    const double keep_scale = 1.0 / (1.0 - p);
    for (auto& m : mask.data()) m = rng.bernoulli(p) ? 0.0 : keep_scale;
    return apply_mask(a, mask);
}

// Accumulate d(loss)/d(node) into every reachable node that requires a
// gradient. Leaf gradients accumulate across calls; interior gradients are
// reset first, so a second call without zeroing exactly doubles leaf grads.
inline void backward(const Var& loss) {
    if (loss.value().size() != 1) {
        throw DomainError("backward: loss must be scalar-shaped, got " + shape_string(loss.shape()));
    }
    if (!loss.requires_grad()) return;

    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{loss.node(), 0}};
    seen.insert(loss.node());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    for (Node* n : order) {
        if (!n->parents.empty()) n->grad.fill(0.0);
    }
    loss.node()->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward_rule) (*it)->backward_rule(**it);
    }
}

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central-difference check of d(loss)/d(param) for every coordinate of every
// parameter. `loss` must rebuild its graph from the current parameter values
// on every call. Relative error is |a-b| / max(|a|, |b|, 1e-8).
inline GradCheckReport gradient_check_report(const std::function<Var()>& loss, std::span<Var> params,
                                             double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1e-2)) throw DomainError("gradient_check: epsilon must be in (0, 1e-2]");
    for (auto& p : params) p.zero_grad();
    Var l = loss();
    if (!std::isfinite(l.item())) throw NumericError("gradient_check: loss is not finite");
    backward(l);

    auto eval = [&]() {
        const double v = loss().item();
        if (!std::isfinite(v)) throw NumericError("gradient_check: loss is not finite under perturbation");
        return v;
    };

    GradCheckReport report;
    for (auto& p : params) {
        const Tensor analytic = p.grad();
        Tensor& theta = p.mutable_value();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + epsilon;
            const double up = eval();
            theta[i] = saved - epsilon;
            const double down = eval();
            theta[i] = saved;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double a = analytic[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (report.worst_param.empty() || rel > report.max_rel_error) {
                report = {rel, p.name().empty() ? "<unnamed>" : p.name(), i, a, numeric};
            }
        }
    }
    return report;
}

inline double gradient_check(const std::function<Var()>& loss, std::span<Var> params, double epsilon) {
    return gradient_check_report(loss, params, epsilon).max_rel_error;
}

// Single-tensor form: `f` maps a parameter node to a scalar node.
inline double gradient_check(const std::function<Var(const Var&)>& f, const Tensor& params, double epsilon) {
    Var theta = parameter(params, "theta");
    std::vector<Var> ps{theta};
    return gradient_check([&] { return f(theta); }, ps, epsilon);
}

} // namespace wimp::ad
