#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "midpool/autodiff/ops.hpp"
#include "midpool/random.hpp"

namespace midpool::nn {

using autodiff::Tensor;
using autodiff::UnaryKind;

/// Glorot/Xavier uniform initialization.
Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Graph convolution: activation(A_norm X W + b).
class GcnLayer {
public:
    GcnLayer() = default;
    GcnLayer(std::size_t in_dim, std::size_t out_dim, UnaryKind activation, Rng& rng,
             bool with_bias = true);

    Tensor forward(const Tensor& x, const Tensor& a_norm) const;

    std::size_t in_dim() const noexcept { return in_dim_; }
    std::size_t out_dim() const noexcept { return out_dim_; }
    const Tensor& weight() const noexcept { return weight_; }
    const Tensor& bias() const noexcept { return bias_; }
    bool has_bias() const noexcept { return bias_.defined(); }
    UnaryKind activation() const noexcept { return activation_; }
    void collect_parameters(std::vector<Tensor>& out) const;

private:
    std::size_t in_dim_ = 0;
    std::size_t out_dim_ = 0;
    Tensor weight_;
    Tensor bias_;
    UnaryKind activation_ = UnaryKind::identity;
};

/// Affine map x W + b.
class Linear {
public:
    Linear() = default;
    Linear(std::size_t in_dim, std::size_t out_dim, Rng& rng, bool with_bias = true);

    Tensor forward(const Tensor& x) const;

    std::size_t in_dim() const noexcept { return in_dim_; }
    std::size_t out_dim() const noexcept { return out_dim_; }
    const Tensor& weight() const noexcept { return weight_; }
    void collect_parameters(std::vector<Tensor>& out) const;

private:
    std::size_t in_dim_ = 0;
    std::size_t out_dim_ = 0;
    Tensor weight_;
    Tensor bias_;
};

/// Two affine layers with relu between; produces 1 x num_classes logits.
class MlpHead {
public:
    MlpHead() = default;
    MlpHead(std::size_t in_dim, std::size_t hidden, std::size_t num_classes, Rng& rng);

    Tensor forward(const Tensor& readout) const;
    void collect_parameters(std::vector<Tensor>& out) const;
    std::size_t num_classes() const noexcept { return second_.out_dim(); }

private:
    Linear first_;
    Linear second_;
};

enum class ReadoutKind {
    mean_max,  ///< [column mean || column max]
    sum_max,   ///< [column sum || column max]; keeps node counts visible
};

std::string to_string(ReadoutKind kind);
ReadoutKind readout_kind_from_string(const std::string& name);

/// A 1 x 2c row, invariant to row order.
Tensor readout(const Tensor& x, ReadoutKind kind = ReadoutKind::mean_max);

}  // namespace midpool::nn
