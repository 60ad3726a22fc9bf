#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace eenr {

/// Dense 64-bit float tensor (rank 0, 1 or 2) with reverse-mode autodiff.
///
/// Tensors are cheap handles onto shared nodes. Any op whose inputs require
/// grad records itself on the implicit tape (the parent graph); backward()
/// walks that graph in reverse topological order and accumulates gradients
/// into every reachable leaf. Repeated backward() calls accumulate; clearing
/// is the optimizer's job (ParamStore::step / zero_grad).
struct TensorNode {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;  // sized iff requires_grad
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void()> backward_fn;  // accumulates this node's grad into parents

    int64_t numel() const {
        int64_t n = 1;
        for (int d : shape) n *= d;
        return n;
    }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

class Tensor {
public:
    Tensor() = default;

    static Tensor scalar(double v, bool requires_grad = false);
    static Tensor from(std::vector<double> values, std::vector<int> shape,
                       bool requires_grad = false);
    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double v, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const { return node_->shape; }
    int ndim() const { return static_cast<int>(node_->shape.size()); }
    int dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }
    int64_t numel() const { return node_->numel(); }
    bool requires_grad() const { return node_->requires_grad; }

    std::vector<double>& values() { return node_->value; }
    const std::vector<double>& values() const { return node_->value; }
    std::vector<double>& grad() { return node_->grad; }
    const std::vector<double>& grad() const { return node_->grad; }

    /// Value of a rank-0/1-element tensor.
    double item() const;

    TensorNode* node() const { return node_.get(); }
    const std::shared_ptr<TensorNode>& node_ptr() const { return node_; }

    static Tensor wrap(std::shared_ptr<TensorNode> n) {
        Tensor t;
        t.node_ = std::move(n);
        return t;
    }

private:
    std::shared_ptr<TensorNode> node_;
};

/// While alive, ops do not record on the tape (pure value computation).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_enabled();

/// Backpropagate from a scalar loss into every reachable grad-requiring leaf.
void backward(const Tensor& loss);

// ---- ops ---------------------------------------------------------------
// Shape rules are strict; violations throw std::invalid_argument naming the
// op and the offending shapes.

// (n,k)x(k,m)->(n,m); (n,k)x(k)->(n); (k)x(k,m)->(m)
Tensor matmul(const Tensor& a, const Tensor& b);
// same shape; or one side rank-0; or (n,m)+(m) broadcast over rows
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// v[i] added to every element of row i
Tensor add_cols(const Tensor& mat, const Tensor& v);
// elementwise; same shape or one side rank-0
Tensor mul(const Tensor& a, const Tensor& b);
// k * t + c with double constants
Tensor affine(const Tensor& t, double k, double c);
Tensor tanh(const Tensor& t);
Tensor sigmoid(const Tensor& t);
// axis is 0 or 1 for matrices and must be 0 for vectors
Tensor softmax(const Tensor& t, int axis);
Tensor log_softmax(const Tensor& t, int axis);
Tensor logsumexp(const Tensor& t, int axis);
Tensor sum(const Tensor& t);
Tensor mean(const Tensor& t);
// vectors (or scalars) joined along the last axis
Tensor concat(const std::vector<Tensor>& parts);
// equal-length vectors stacked into a matrix, one per row
Tensor stack_rows(const std::vector<Tensor>& rows);
// last-axis slice: vector -> vector, matrix -> column range
Tensor slice(const Tensor& t, int start, int len);
Tensor row(const Tensor& mat, int index);
// gather rows of an embedding table; backward scatter-adds
Tensor rows(const Tensor& mat, const std::vector<int>& indices);
// pick arbitrary flat offsets into a vector of them
Tensor gather_flat(const Tensor& t, const std::vector<int>& flat_indices);
Tensor dot(const Tensor& a, const Tensor& b);

std::string shape_str(const std::vector<int>& shape);

}  // namespace eenr
