#include "eenr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace eenr {

namespace {

thread_local int t_no_grad_depth = 0;

std::shared_ptr<TensorNode> make_node(std::vector<int> shape, std::vector<double> value) {
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    return n;
}

[[noreturn]] void shape_error(const std::string& op, const std::vector<int>& a,
                              const std::vector<int>& b) {
    throw std::invalid_argument(op + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

[[noreturn]] void shape_error(const std::string& op, const std::vector<int>& a) {
    throw std::invalid_argument(op + ": unsupported shape " + shape_str(a));
}

// Attach parents + backward fn if recording applies; otherwise leave the
// node as a pure value.
void record(const std::shared_ptr<TensorNode>& out,
            std::vector<std::shared_ptr<TensorNode>> parents, std::function<void()> fn) {
    if (t_no_grad_depth > 0) return;
    bool any = false;
    for (const auto& p : parents) {
        if (p->requires_grad) {
            any = true;
            break;
        }
    }
    if (!any) return;
    out->requires_grad = true;
    out->ensure_grad();
    for (auto& p : parents) {
        if (p->requires_grad) p->ensure_grad();
    }
    out->parents = std::move(parents);
    out->backward_fn = std::move(fn);
}

double stable_lse(const double* x, int n, int stride) {
    double m = x[0];
    for (int i = 1; i < n; ++i) m = std::max(m, x[i * stride]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(x[i * stride] - m);
    return m + std::log(s);
}

}  // namespace

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

NoGradGuard::NoGradGuard() { ++t_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --t_no_grad_depth; }

bool grad_enabled() { return t_no_grad_depth == 0; }

Tensor Tensor::scalar(double v, bool requires_grad) {
    auto n = make_node({}, {v});
    if (requires_grad) {
        n->requires_grad = true;
        n->ensure_grad();
    }
    return wrap(std::move(n));
}

Tensor Tensor::from(std::vector<double> values, std::vector<int> shape, bool requires_grad) {
    int64_t want = 1;
    for (int d : shape) want *= d;
    if (want != static_cast<int64_t>(values.size())) {
        throw std::invalid_argument("Tensor::from: " + std::to_string(values.size()) +
                                    " values do not fill shape " + shape_str(shape));
    }
    auto n = make_node(std::move(shape), std::move(values));
    if (requires_grad) {
        n->requires_grad = true;
        n->ensure_grad();
    }
    return wrap(std::move(n));
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double v, bool requires_grad) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return from(std::vector<double>(static_cast<size_t>(n), v), std::move(shape), requires_grad);
}

double Tensor::item() const {
    if (node_->numel() != 1) {
        throw std::invalid_argument("Tensor::item: tensor has " + std::to_string(node_->numel()) +
                                    " elements");
    }
    return node_->value[0];
}

void backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                    shape_str(loss.shape()));
    }
    TensorNode* root = loss.node();
    if (!root->requires_grad) return;

    // iterative DFS topological order
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> visited;
    std::vector<std::pair<TensorNode*, size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            TensorNode* p = node->parents[idx].get();
            ++idx;
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    // intermediate grads are scratch space for this call; only leaves
    // (nodes without a backward fn) accumulate across calls
    for (TensorNode* node : order) {
        if (node->backward_fn) std::fill(node->grad.begin(), node->grad.end(), 0.0);
    }
    root->ensure_grad();
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward_fn) (*it)->backward_fn();
    }
}

// ---- matmul --------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    int n, k, m;
    bool a_vec = sa.size() == 1, b_vec = sb.size() == 1;
    if (sa.size() == 2 && sb.size() == 2) {
        n = sa[0], k = sa[1], m = sb[1];
        if (sb[0] != k) shape_error("matmul", sa, sb);
    } else if (sa.size() == 2 && b_vec) {
        n = sa[0], k = sa[1], m = 1;
        if (sb[0] != k) shape_error("matmul", sa, sb);
    } else if (a_vec && sb.size() == 2) {
        n = 1, k = sa[0], m = sb[1];
        if (sb[0] != k) shape_error("matmul", sa, sb);
    } else {
        shape_error("matmul", sa, sb);
    }

    std::vector<double> out(static_cast<size_t>(n) * m, 0.0);
    const double* av = a.values().data();
    const double* bv = b.values().data();
    for (int i = 0; i < n; ++i) {
        for (int l = 0; l < k; ++l) {
            double av_il = av[i * k + l];
            if (av_il == 0.0) continue;
            const double* brow = bv + static_cast<size_t>(l) * m;
            double* orow = out.data() + static_cast<size_t>(i) * m;
            for (int j = 0; j < m; ++j) orow[j] += av_il * brow[j];
        }
    }

    std::vector<int> oshape;
    if (!a_vec && !b_vec)
        oshape = {n, m};
    else if (b_vec)
        oshape = {n};
    else
        oshape = {m};
    auto node = make_node(std::move(oshape), std::move(out));
    TensorNode* an = a.node();
    TensorNode* bn = b.node();
    TensorNode* on = node.get();
    record(node, {a.node_ptr(), b.node_ptr()}, [an, bn, on, n, k, m]() {
        const double* g = on->grad.data();
        if (an->requires_grad) {
            double* ga = an->grad.data();
            const double* bv = bn->value.data();
            // dA = G * B^T
            for (int i = 0; i < n; ++i) {
                for (int l = 0; l < k; ++l) {
                    double s = 0.0;
                    const double* grow = g + static_cast<size_t>(i) * m;
                    const double* brow = bv + static_cast<size_t>(l) * m;
                    for (int j = 0; j < m; ++j) s += grow[j] * brow[j];
                    ga[i * k + l] += s;
                }
            }
        }
        if (bn->requires_grad) {
            double* gb = bn->grad.data();
            const double* av = an->value.data();
            // dB = A^T * G
            for (int l = 0; l < k; ++l) {
                for (int i = 0; i < n; ++i) {
                    double a_il = av[i * k + l];
                    if (a_il == 0.0) continue;
                    const double* grow = g + static_cast<size_t>(i) * m;
                    double* brow = gb + static_cast<size_t>(l) * m;
                    for (int j = 0; j < m; ++j) brow[j] += a_il * grow[j];
                }
            }
        }
    });
    return Tensor::wrap(std::move(node));
}

// ---- add / sub / mul -------------------------------------------------------

namespace {

enum class BcastKind { Same, ScalarRight, ScalarLeft, RowRight };

BcastKind bcast_kind(const std::string& op, const std::vector<int>& sa,
                     const std::vector<int>& sb) {
    if (sa == sb) return BcastKind::Same;
    if (sb.empty()) return BcastKind::ScalarRight;
    if (sa.empty()) return BcastKind::ScalarLeft;
    if (sa.size() == 2 && sb.size() == 1 && sb[0] == sa[1]) return BcastKind::RowRight;
    shape_error(op, sa, sb);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    BcastKind kind = bcast_kind("add", a.shape(), b.shape());
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out;
    std::vector<int> oshape;
    switch (kind) {
        case BcastKind::Same: {
            out.resize(av.size());
            for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
            oshape = a.shape();
            break;
        }
        case BcastKind::ScalarRight: {
            out.resize(av.size());
            for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[0];
            oshape = a.shape();
            break;
        }
        case BcastKind::ScalarLeft: {
            out.resize(bv.size());
            for (size_t i = 0; i < bv.size(); ++i) out[i] = av[0] + bv[i];
            oshape = b.shape();
            break;
        }
        case BcastKind::RowRight: {
            int n = a.dim(0), m = a.dim(1);
            out.resize(av.size());
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) out[i * m + j] = av[i * m + j] + bv[j];
            oshape = a.shape();
            break;
        }
    }
    auto node = make_node(std::move(oshape), std::move(out));
    TensorNode* an = a.node();
    TensorNode* bn = b.node();
    TensorNode* on = node.get();
    record(node, {a.node_ptr(), b.node_ptr()}, [an, bn, on, kind]() {
        const auto& g = on->grad;
        switch (kind) {
            case BcastKind::Same:
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
                if (bn->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) bn->grad[i] += g[i];
                break;
            case BcastKind::ScalarRight:
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
                if (bn->requires_grad)
                    for (double gi : g) bn->grad[0] += gi;
                break;
            case BcastKind::ScalarLeft:
                if (bn->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) bn->grad[i] += g[i];
                if (an->requires_grad)
                    for (double gi : g) an->grad[0] += gi;
                break;
            case BcastKind::RowRight: {
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
                if (bn->requires_grad) {
                    int m = an->shape[1];
                    int n = an->shape[0];
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < m; ++j) bn->grad[j] += g[static_cast<size_t>(i) * m + j];
                }
                break;
            }
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor sub(const Tensor& a, const Tensor& b) {
    BcastKind kind = bcast_kind("sub", a.shape(), b.shape());
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out;
    std::vector<int> oshape;
    switch (kind) {
        case BcastKind::Same: {
            out.resize(av.size());
            for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
            oshape = a.shape();
            break;
        }
        case BcastKind::ScalarRight: {
            out.resize(av.size());
            for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[0];
            oshape = a.shape();
            break;
        }
        case BcastKind::ScalarLeft: {
            out.resize(bv.size());
            for (size_t i = 0; i < bv.size(); ++i) out[i] = av[0] - bv[i];
            oshape = b.shape();
            break;
        }
        case BcastKind::RowRight: {
            int n = a.dim(0), m = a.dim(1);
            out.resize(av.size());
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) out[i * m + j] = av[i * m + j] - bv[j];
            oshape = a.shape();
            break;
        }
    }
    auto node = make_node(std::move(oshape), std::move(out));
    TensorNode* an = a.node();
    TensorNode* bn = b.node();
    TensorNode* on = node.get();
    record(node, {a.node_ptr(), b.node_ptr()}, [an, bn, on, kind]() {
        const auto& g = on->grad;
        switch (kind) {
            case BcastKind::Same:
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
                if (bn->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) bn->grad[i] -= g[i];
                break;
            case BcastKind::ScalarRight:
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
                if (bn->requires_grad)
                    for (double gi : g) bn->grad[0] -= gi;
                break;
            case BcastKind::ScalarLeft:
                if (bn->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) bn->grad[i] -= g[i];
                if (an->requires_grad)
                    for (double gi : g) an->grad[0] += gi;
                break;
            case BcastKind::RowRight: {
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
                if (bn->requires_grad) {
                    int m = an->shape[1];
                    int n = an->shape[0];
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < m; ++j) bn->grad[j] -= g[static_cast<size_t>(i) * m + j];
                }
                break;
            }
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor add_cols(const Tensor& mat, const Tensor& v) {
    if (mat.ndim() != 2 || v.ndim() != 1 || v.dim(0) != mat.dim(0)) {
        shape_error("add_cols", mat.shape(), v.shape());
    }
    int n = mat.dim(0), m = mat.dim(1);
    std::vector<double> out(mat.values());
    for (int i = 0; i < n; ++i) {
        double vi = v.values()[static_cast<size_t>(i)];
        for (int j = 0; j < m; ++j) out[static_cast<size_t>(i) * m + j] += vi;
    }
    auto node = make_node(mat.shape(), std::move(out));
    TensorNode* mn = mat.node();
    TensorNode* vn = v.node();
    TensorNode* on = node.get();
    record(node, {mat.node_ptr(), v.node_ptr()}, [mn, vn, on, n, m]() {
        const auto& g = on->grad;
        if (mn->requires_grad)
            for (size_t i = 0; i < g.size(); ++i) mn->grad[i] += g[i];
        if (vn->requires_grad) {
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int j = 0; j < m; ++j) s += g[static_cast<size_t>(i) * m + j];
                vn->grad[static_cast<size_t>(i)] += s;
            }
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor mul(const Tensor& a, const Tensor& b) {
    BcastKind kind = bcast_kind("mul", a.shape(), b.shape());
    if (kind == BcastKind::RowRight) shape_error("mul", a.shape(), b.shape());
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out;
    std::vector<int> oshape;
    switch (kind) {
        case BcastKind::Same:
            out.resize(av.size());
            for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
            oshape = a.shape();
            break;
        case BcastKind::ScalarRight:
            out.resize(av.size());
            for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[0];
            oshape = a.shape();
            break;
        case BcastKind::ScalarLeft:
            out.resize(bv.size());
            for (size_t i = 0; i < bv.size(); ++i) out[i] = av[0] * bv[i];
            oshape = b.shape();
            break;
        default:
            break;
    }
    auto node = make_node(std::move(oshape), std::move(out));
    TensorNode* an = a.node();
    TensorNode* bn = b.node();
    TensorNode* on = node.get();
    record(node, {a.node_ptr(), b.node_ptr()}, [an, bn, on, kind]() {
        const auto& g = on->grad;
        switch (kind) {
            case BcastKind::Same:
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i] * bn->value[i];
                if (bn->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) bn->grad[i] += g[i] * an->value[i];
                break;
            case BcastKind::ScalarRight:
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i] * bn->value[0];
                if (bn->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) bn->grad[0] += g[i] * an->value[i];
                break;
            case BcastKind::ScalarLeft:
                if (bn->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) bn->grad[i] += g[i] * an->value[0];
                if (an->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) an->grad[0] += g[i] * bn->value[i];
                break;
            default:
                break;
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor affine(const Tensor& t, double k, double c) {
    std::vector<double> out(t.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = k * t.values()[i] + c;
    auto node = make_node(t.shape(), std::move(out));
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on, k]() {
        for (size_t i = 0; i < on->grad.size(); ++i) tn->grad[i] += k * on->grad[i];
    });
    return Tensor::wrap(std::move(node));
}

Tensor tanh(const Tensor& t) {
    std::vector<double> out(t.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(t.values()[i]);
    auto node = make_node(t.shape(), std::move(out));
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on]() {
        for (size_t i = 0; i < on->grad.size(); ++i) {
            double y = on->value[i];
            tn->grad[i] += on->grad[i] * (1.0 - y * y);
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor sigmoid(const Tensor& t) {
    std::vector<double> out(t.values().size());
    for (size_t i = 0; i < out.size(); ++i) {
        double x = t.values()[i];
        out[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    auto node = make_node(t.shape(), std::move(out));
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on]() {
        for (size_t i = 0; i < on->grad.size(); ++i) {
            double y = on->value[i];
            tn->grad[i] += on->grad[i] * y * (1.0 - y);
        }
    });
    return Tensor::wrap(std::move(node));
}

// ---- softmaxes and reductions ---------------------------------------------

namespace {

struct AxisView {
    int n_slices;    // number of independent slices
    int slice_len;   // elements per slice
    int stride;      // stride between consecutive elements of a slice
    int slice_step;  // offset between slice starts
};

AxisView axis_view(const std::string& op, const std::vector<int>& shape, int axis) {
    if (shape.size() == 1) {
        if (axis != 0) throw std::invalid_argument(op + ": axis must be 0 for vectors");
        return {1, shape[0], 1, 0};
    }
    if (shape.size() == 2) {
        if (axis == 0) return {shape[1], shape[0], shape[1], 1};  // down each column
        if (axis == 1) return {shape[0], shape[1], 1, shape[1]};  // along each row
        throw std::invalid_argument(op + ": axis out of range for " + shape_str(shape));
    }
    throw std::invalid_argument(op + ": rank not supported for " + shape_str(shape));
}

}  // namespace

Tensor softmax(const Tensor& t, int axis) {
    AxisView v = axis_view("softmax", t.shape(), axis);
    std::vector<double> out(t.values().size());
    const double* x = t.values().data();
    for (int s = 0; s < v.n_slices; ++s) {
        const double* xs = x + static_cast<size_t>(s) * v.slice_step;
        double* os = out.data() + static_cast<size_t>(s) * v.slice_step;
        double m = xs[0];
        for (int i = 1; i < v.slice_len; ++i) m = std::max(m, xs[i * v.stride]);
        double z = 0.0;
        for (int i = 0; i < v.slice_len; ++i) z += std::exp(xs[i * v.stride] - m);
        for (int i = 0; i < v.slice_len; ++i) os[i * v.stride] = std::exp(xs[i * v.stride] - m) / z;
    }
    auto node = make_node(t.shape(), std::move(out));
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on, v]() {
        for (int s = 0; s < v.n_slices; ++s) {
            const double* ys = on->value.data() + static_cast<size_t>(s) * v.slice_step;
            const double* gs = on->grad.data() + static_cast<size_t>(s) * v.slice_step;
            double* ts = tn->grad.data() + static_cast<size_t>(s) * v.slice_step;
            double gy = 0.0;
            for (int i = 0; i < v.slice_len; ++i) gy += gs[i * v.stride] * ys[i * v.stride];
            for (int i = 0; i < v.slice_len; ++i)
                ts[i * v.stride] += ys[i * v.stride] * (gs[i * v.stride] - gy);
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor log_softmax(const Tensor& t, int axis) {
    AxisView v = axis_view("log_softmax", t.shape(), axis);
    std::vector<double> out(t.values().size());
    const double* x = t.values().data();
    for (int s = 0; s < v.n_slices; ++s) {
        const double* xs = x + static_cast<size_t>(s) * v.slice_step;
        double* os = out.data() + static_cast<size_t>(s) * v.slice_step;
        double lse = stable_lse(xs, v.slice_len, v.stride);
        for (int i = 0; i < v.slice_len; ++i) os[i * v.stride] = xs[i * v.stride] - lse;
    }
    auto node = make_node(t.shape(), std::move(out));
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on, v]() {
        for (int s = 0; s < v.n_slices; ++s) {
            const double* ys = on->value.data() + static_cast<size_t>(s) * v.slice_step;
            const double* gs = on->grad.data() + static_cast<size_t>(s) * v.slice_step;
            double* ts = tn->grad.data() + static_cast<size_t>(s) * v.slice_step;
            double gsum = 0.0;
            for (int i = 0; i < v.slice_len; ++i) gsum += gs[i * v.stride];
            for (int i = 0; i < v.slice_len; ++i)
                ts[i * v.stride] += gs[i * v.stride] - std::exp(ys[i * v.stride]) * gsum;
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor logsumexp(const Tensor& t, int axis) {
    AxisView v = axis_view("logsumexp", t.shape(), axis);
    std::vector<double> out(static_cast<size_t>(v.n_slices));
    const double* x = t.values().data();
    for (int s = 0; s < v.n_slices; ++s) {
        out[static_cast<size_t>(s)] =
            stable_lse(x + static_cast<size_t>(s) * v.slice_step, v.slice_len, v.stride);
    }
    std::vector<int> oshape;
    if (t.ndim() == 2) oshape = {v.n_slices};
    auto node = make_node(std::move(oshape), std::move(out));
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on, v]() {
        for (int s = 0; s < v.n_slices; ++s) {
            double g = on->grad[static_cast<size_t>(s)];
            double y = on->value[static_cast<size_t>(s)];
            const double* xs = tn->value.data() + static_cast<size_t>(s) * v.slice_step;
            double* ts = tn->grad.data() + static_cast<size_t>(s) * v.slice_step;
            for (int i = 0; i < v.slice_len; ++i)
                ts[i * v.stride] += g * std::exp(xs[i * v.stride] - y);
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor sum(const Tensor& t) {
    double s = 0.0;
    for (double x : t.values()) s += x;
    auto node = make_node({}, {s});
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on]() {
        double g = on->grad[0];
        for (auto& gi : tn->grad) gi += g;
    });
    return Tensor::wrap(std::move(node));
}

Tensor mean(const Tensor& t) {
    double s = 0.0;
    for (double x : t.values()) s += x;
    double inv = 1.0 / static_cast<double>(t.values().size());
    auto node = make_node({}, {s * inv});
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on, inv]() {
        double g = on->grad[0] * inv;
        for (auto& gi : tn->grad) gi += g;
    });
    return Tensor::wrap(std::move(node));
}

// ---- structure ops ----------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    std::vector<double> out;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::vector<std::pair<TensorNode*, std::pair<size_t, size_t>>> spans;  // node, (offset, len)
    for (const auto& p : parts) {
        if (p.ndim() > 1) shape_error("concat", p.shape());
        spans.push_back({p.node(), {out.size(), p.values().size()}});
        out.insert(out.end(), p.values().begin(), p.values().end());
        parents.push_back(p.node_ptr());
    }
    int total = static_cast<int>(out.size());
    auto node = make_node({total}, std::move(out));
    TensorNode* on = node.get();
    record(node, std::move(parents), [on, spans = std::move(spans)]() {
        for (const auto& [pn, span] : spans) {
            if (!pn->requires_grad) continue;
            for (size_t i = 0; i < span.second; ++i) pn->grad[i] += on->grad[span.first + i];
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor stack_rows(const std::vector<Tensor>& rows_in) {
    if (rows_in.empty()) throw std::invalid_argument("stack_rows: no inputs");
    int m = rows_in[0].ndim() == 1 ? rows_in[0].dim(0) : -1;
    if (m < 0) shape_error("stack_rows", rows_in[0].shape());
    std::vector<double> out;
    out.reserve(rows_in.size() * static_cast<size_t>(m));
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::vector<TensorNode*> raw;
    for (const auto& r : rows_in) {
        if (r.ndim() != 1 || r.dim(0) != m) shape_error("stack_rows", rows_in[0].shape(), r.shape());
        out.insert(out.end(), r.values().begin(), r.values().end());
        parents.push_back(r.node_ptr());
        raw.push_back(r.node());
    }
    auto node = make_node({static_cast<int>(rows_in.size()), m}, std::move(out));
    TensorNode* on = node.get();
    record(node, std::move(parents), [on, raw = std::move(raw), m]() {
        for (size_t r = 0; r < raw.size(); ++r) {
            if (!raw[r]->requires_grad) continue;
            const double* g = on->grad.data() + r * static_cast<size_t>(m);
            for (int j = 0; j < m; ++j) raw[r]->grad[static_cast<size_t>(j)] += g[j];
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor slice(const Tensor& t, int start, int len) {
    if (t.ndim() == 1) {
        if (start < 0 || len < 0 || start + len > t.dim(0)) {
            throw std::invalid_argument("slice: range [" + std::to_string(start) + "," +
                                        std::to_string(start + len) + ") out of bounds for " +
                                        shape_str(t.shape()));
        }
        std::vector<double> out(t.values().begin() + start, t.values().begin() + start + len);
        auto node = make_node({len}, std::move(out));
        TensorNode* tn = t.node();
        TensorNode* on = node.get();
        record(node, {t.node_ptr()}, [tn, on, start, len]() {
            for (int i = 0; i < len; ++i)
                tn->grad[static_cast<size_t>(start + i)] += on->grad[static_cast<size_t>(i)];
        });
        return Tensor::wrap(std::move(node));
    }
    if (t.ndim() == 2) {
        int n = t.dim(0), m = t.dim(1);
        if (start < 0 || len < 0 || start + len > m) {
            throw std::invalid_argument("slice: column range [" + std::to_string(start) + "," +
                                        std::to_string(start + len) + ") out of bounds for " +
                                        shape_str(t.shape()));
        }
        std::vector<double> out(static_cast<size_t>(n) * len);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < len; ++j)
                out[static_cast<size_t>(i) * len + j] = t.values()[static_cast<size_t>(i) * m + start + j];
        auto node = make_node({n, len}, std::move(out));
        TensorNode* tn = t.node();
        TensorNode* on = node.get();
        record(node, {t.node_ptr()}, [tn, on, start, len, n, m]() {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < len; ++j)
                    tn->grad[static_cast<size_t>(i) * m + start + j] +=
                        on->grad[static_cast<size_t>(i) * len + j];
        });
        return Tensor::wrap(std::move(node));
    }
    shape_error("slice", t.shape());
}

Tensor row(const Tensor& mat, int index) {
    if (mat.ndim() != 2 || index < 0 || index >= mat.dim(0)) {
        throw std::invalid_argument("row: index " + std::to_string(index) + " invalid for " +
                                    shape_str(mat.shape()));
    }
    int m = mat.dim(1);
    std::vector<double> out(mat.values().begin() + static_cast<size_t>(index) * m,
                            mat.values().begin() + static_cast<size_t>(index + 1) * m);
    auto node = make_node({m}, std::move(out));
    TensorNode* tn = mat.node();
    TensorNode* on = node.get();
    record(node, {mat.node_ptr()}, [tn, on, index, m]() {
        for (int j = 0; j < m; ++j)
            tn->grad[static_cast<size_t>(index) * m + j] += on->grad[static_cast<size_t>(j)];
    });
    return Tensor::wrap(std::move(node));
}

Tensor rows(const Tensor& mat, const std::vector<int>& indices) {
    if (mat.ndim() != 2) shape_error("rows", mat.shape());
    int m = mat.dim(1);
    std::vector<double> out;
    out.reserve(indices.size() * static_cast<size_t>(m));
    for (int idx : indices) {
        if (idx < 0 || idx >= mat.dim(0)) {
            throw std::invalid_argument("rows: index " + std::to_string(idx) + " out of range for " +
                                        shape_str(mat.shape()));
        }
        out.insert(out.end(), mat.values().begin() + static_cast<size_t>(idx) * m,
                   mat.values().begin() + static_cast<size_t>(idx + 1) * m);
    }
    auto node = make_node({static_cast<int>(indices.size()), m}, std::move(out));
    TensorNode* tn = mat.node();
    TensorNode* on = node.get();
    record(node, {mat.node_ptr()}, [tn, on, indices, m]() {
        for (size_t r = 0; r < indices.size(); ++r) {
            double* dst = tn->grad.data() + static_cast<size_t>(indices[r]) * m;
            const double* src = on->grad.data() + r * static_cast<size_t>(m);
            for (int j = 0; j < m; ++j) dst[j] += src[j];
        }
    });
    return Tensor::wrap(std::move(node));
}

Tensor gather_flat(const Tensor& t, const std::vector<int>& flat_indices) {
    for (int idx : flat_indices) {
        if (idx < 0 || idx >= static_cast<int>(t.values().size())) {
            throw std::invalid_argument("gather_flat: flat index " + std::to_string(idx) +
                                        " out of range for " + shape_str(t.shape()));
        }
    }
    std::vector<double> out;
    out.reserve(flat_indices.size());
    for (int idx : flat_indices) out.push_back(t.values()[static_cast<size_t>(idx)]);
    auto node = make_node({static_cast<int>(flat_indices.size())}, std::move(out));
    TensorNode* tn = t.node();
    TensorNode* on = node.get();
    record(node, {t.node_ptr()}, [tn, on, flat_indices]() {
        for (size_t i = 0; i < flat_indices.size(); ++i)
            tn->grad[static_cast<size_t>(flat_indices[i])] += on->grad[i];
    });
    return Tensor::wrap(std::move(node));
}

Tensor dot(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 1 || b.ndim() != 1 || a.dim(0) != b.dim(0)) {
        shape_error("dot", a.shape(), b.shape());
    }
    double s = 0.0;
    for (size_t i = 0; i < a.values().size(); ++i) s += a.values()[i] * b.values()[i];
    auto node = make_node({}, {s});
    TensorNode* an = a.node();
    TensorNode* bn = b.node();
    TensorNode* on = node.get();
    record(node, {a.node_ptr(), b.node_ptr()}, [an, bn, on]() {
        double g = on->grad[0];
        if (an->requires_grad)
            for (size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g * bn->value[i];
        if (bn->requires_grad)
            for (size_t i = 0; i < bn->grad.size(); ++i) bn->grad[i] += g * an->value[i];
    });
    return Tensor::wrap(std::move(node));
}

}  // namespace eenr
