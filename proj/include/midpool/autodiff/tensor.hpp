#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace midpool {

/// Dense row-major matrix of doubles. All numeric buffers in the library use it.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace autodiff {

namespace detail {

struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::uint64_t id = 0;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into parents' grads.
    std::function<void(Node&)> backward_fn;

    bool is_leaf() const noexcept { return !backward_fn; }
};

std::uint64_t next_node_id();

}  // namespace detail

/// Handle to a value on the define-by-run tape.
///
/// Copies share the underlying node, so a parameter handed to an optimizer and
/// the same parameter used in a forward pass refer to one buffer. Ops never
/// write into an input's value; every op allocates a fresh node.
class Tensor {
public:
    Tensor() = default;

    /// Leaf that does not participate in differentiation.
    static Tensor constant(Matrix value);
    /// Leaf whose gradient is accumulated by `backward`.
    static Tensor parameter(Matrix value);
    static Tensor zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad = false);
    static Tensor scalar(double v);

    /// Builds an op result. `backward` is only retained when some parent requires grad.
    static Tensor from_op(Matrix value, std::vector<Tensor> parents,
                          std::function<void(detail::Node&)> backward);

    bool defined() const noexcept { return static_cast<bool>(node_); }
    Eigen::Index rows() const { return node_->value.rows(); }
    Eigen::Index cols() const { return node_->value.cols(); }
    Eigen::Index size() const { return node_->value.size(); }
    std::string shape_str() const;

    const Matrix& value() const { return node_->value; }
    /// Mutable access for optimizers and tests; never used by ops.
    Matrix& mutable_value() { return node_->value; }
    double item() const;

    /// Gradient buffer; zero-sized until the tensor requires grad.
    const Matrix& grad() const { return node_->grad; }
    Matrix& mutable_grad() { return node_->grad; }
    void zero_grad();

    bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
    std::uint64_t id() const noexcept { return node_ ? node_->id : 0; }

    const std::shared_ptr<detail::Node>& node() const noexcept { return node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::Node> node_;
};

/// Reverse-mode sweep from a scalar root.
///
/// Gradients are accumulated into every leaf that requires grad and is
/// reachable from `root`. Intermediate gradients are reset at the start of each
/// call, so a second call on the same root adds the same leaf contribution
/// again (leaf grads double). Throws ShapeError for a non-scalar root.
void backward(const Tensor& root);

}  // namespace autodiff
}  // namespace midpool
