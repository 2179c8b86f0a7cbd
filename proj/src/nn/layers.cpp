#include "midpool/nn/layers.hpp"

#include <cmath>

#include "midpool/errors.hpp"

namespace midpool::nn {

using autodiff::Axis;
using autodiff::ReduceKind;

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> unit(-limit, limit);
    Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = unit(rng);
    return w;
}

GcnLayer::GcnLayer(std::size_t in_dim, std::size_t out_dim, UnaryKind activation, Rng& rng,
                   bool with_bias)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      weight_(Tensor::parameter(glorot(in_dim, out_dim, rng))),
      activation_(activation) {
    if (in_dim == 0 || out_dim == 0) throw ConfigError("GcnLayer dimensions must be non-zero");
    if (with_bias) bias_ = Tensor::parameter(Matrix::Zero(1, static_cast<Eigen::Index>(out_dim)));
}

Tensor GcnLayer::forward(const Tensor& x, const Tensor& a_norm) const {
    if (static_cast<std::size_t>(x.cols()) != in_dim_) {
        throw ConfigError("GcnLayer expects " + std::to_string(in_dim_) + " input columns, got " +
                          x.shape_str());
    }
    if (a_norm.rows() != x.rows() || a_norm.cols() != x.rows()) {
        throw ConfigError("GcnLayer: adjacency " + a_norm.shape_str() + " does not match features " +
                          x.shape_str());
    }
    // (A X) W and A (X W) agree; pick the cheaper association.
    Tensor h = in_dim_ <= out_dim_ ? autodiff::matmul(autodiff::matmul(a_norm, x), weight_)
                                   : autodiff::matmul(a_norm, autodiff::matmul(x, weight_));
    if (bias_.defined()) h = autodiff::add_row(h, bias_);
    if (activation_ == UnaryKind::identity) return h;
    return autodiff::apply_unary(h, activation_);
}

void GcnLayer::collect_parameters(std::vector<Tensor>& out) const {
    out.push_back(weight_);
    if (bias_.defined()) out.push_back(bias_);
}

Linear::Linear(std::size_t in_dim, std::size_t out_dim, Rng& rng, bool with_bias)
    : in_dim_(in_dim), out_dim_(out_dim), weight_(Tensor::parameter(glorot(in_dim, out_dim, rng))) {
    if (in_dim == 0 || out_dim == 0) throw ConfigError("Linear dimensions must be non-zero");
    if (with_bias) bias_ = Tensor::parameter(Matrix::Zero(1, static_cast<Eigen::Index>(out_dim)));
}

Tensor Linear::forward(const Tensor& x) const {
    if (static_cast<std::size_t>(x.cols()) != in_dim_) {
        throw ConfigError("Linear expects " + std::to_string(in_dim_) + " input columns, got " +
                          x.shape_str());
    }
    Tensor h = autodiff::matmul(x, weight_);
    return bias_.defined() ? autodiff::add_row(h, bias_) : h;
}

void Linear::collect_parameters(std::vector<Tensor>& out) const {
    out.push_back(weight_);
    if (bias_.defined()) out.push_back(bias_);
}

MlpHead::MlpHead(std::size_t in_dim, std::size_t hidden, std::size_t num_classes, Rng& rng)
    : first_(in_dim, hidden, rng), second_(hidden, num_classes, rng) {}

Tensor MlpHead::forward(const Tensor& readout) const {
    return second_.forward(autodiff::apply_unary(first_.forward(readout), UnaryKind::relu));
}

void MlpHead::collect_parameters(std::vector<Tensor>& out) const {
    first_.collect_parameters(out);
    second_.collect_parameters(out);
}

std::string to_string(ReadoutKind kind) {
    return kind == ReadoutKind::mean_max ? "mean-max" : "sum-max";
}

ReadoutKind readout_kind_from_string(const std::string& name) {
    if (name == "mean-max") return ReadoutKind::mean_max;
    if (name == "sum-max") return ReadoutKind::sum_max;
    throw ConfigError("unknown readout '" + name + "' (expected mean-max or sum-max)");
}

Tensor readout(const Tensor& x, ReadoutKind kind) {
    const ReduceKind first = kind == ReadoutKind::mean_max ? ReduceKind::mean : ReduceKind::sum;
    return autodiff::concat_cols({autodiff::reduce(x, Axis::rows, first),
                                  autodiff::reduce(x, Axis::rows, ReduceKind::max)});
}

}  // namespace midpool::nn
