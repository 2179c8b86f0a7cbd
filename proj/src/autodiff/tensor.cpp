#include "midpool/autodiff/tensor.hpp"

#include <atomic>
#include <unordered_set>

#include "midpool/errors.hpp"

namespace midpool::autodiff {

namespace detail {

std::uint64_t next_node_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace detail

namespace {

std::shared_ptr<detail::Node> make_leaf(Matrix value, bool requires_grad) {
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    node->id = detail::next_node_id();
    if (requires_grad) node->grad = Matrix::Zero(node->value.rows(), node->value.cols());
    return node;
}

}  // namespace

Tensor Tensor::constant(Matrix value) { return Tensor(make_leaf(std::move(value), false)); }

Tensor Tensor::parameter(Matrix value) { return Tensor(make_leaf(std::move(value), true)); }

Tensor Tensor::zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad) {
    return Tensor(make_leaf(Matrix::Zero(rows, cols), requires_grad));
}

Tensor Tensor::scalar(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
}

Tensor Tensor::from_op(Matrix value, std::vector<Tensor> parents,
                       std::function<void(detail::Node&)> backward) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || p.requires_grad();
    auto node = make_leaf(std::move(value), false);
    if (needs) {
        node->requires_grad = true;
        node->grad = Matrix::Zero(node->value.rows(), node->value.cols());
        node->parents.reserve(parents.size());
        for (auto& p : parents) node->parents.push_back(p.node_);
        node->backward_fn = std::move(backward);
    }
    return Tensor(std::move(node));
}

std::string Tensor::shape_str() const {
    if (!node_) return "(undefined)";
    return "(" + std::to_string(rows()) + "x" + std::to_string(cols()) + ")";
}

double Tensor::item() const {
    if (size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str());
    return node_->value(0, 0);
}

void Tensor::zero_grad() {
    if (node_ && node_->requires_grad) node_->grad.setZero();
}

void backward(const Tensor& root) {
    if (!root.defined() || root.size() != 1) {
        throw ShapeError("backward requires a scalar root, got " + root.shape_str());
    }
    if (!root.requires_grad()) return;

    // Iterative post-order DFS gives a topological order (parents before children).
    std::vector<detail::Node*> order;
    std::unordered_set<const detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    visited.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node* parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (detail::Node* node : order) {
        if (!node->is_leaf()) node->grad.setZero();
    }
    detail::Node* top = root.node().get();
    if (top->is_leaf()) {
        top->grad.array() += 1.0;
        return;
    }
    top->grad.setOnes();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (!(*it)->is_leaf()) (*it)->backward_fn(**it);
    }
}

}  // namespace midpool::autodiff
