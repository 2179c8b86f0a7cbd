#pragma once

#include <cstdint>
#include <vector>

#include "midpool/autodiff/tensor.hpp"

namespace midpool::autodiff {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

/// Per-parameter moment buffers plus the shared step counter.
struct AdamState {
    AdamOptions options;
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    std::int64_t t = 0;

    static AdamState for_params(const std::vector<Tensor>& params, AdamOptions options);
};

/// One Adam update with bias correction.
///
/// Decoupled weight decay (theta -= lr * wd * theta) is applied before the
/// moment update. Gradients are zeroed afterwards. Throws ConfigError when the
/// state was built for differently shaped parameters.
void adam_step(std::vector<Tensor>& params, AdamState& state);

void zero_grads(std::vector<Tensor>& params);

}  // namespace midpool::autodiff
