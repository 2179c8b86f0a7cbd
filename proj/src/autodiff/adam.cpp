#include "midpool/autodiff/adam.hpp"

#include <cmath>
#include <string>

#include "midpool/errors.hpp"

namespace midpool::autodiff {

AdamState AdamState::for_params(const std::vector<Tensor>& params, AdamOptions options) {
    AdamState state;
    state.options = options;
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const auto& p : params) {
        state.m.push_back(Matrix::Zero(p.rows(), p.cols()));
        state.v.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
    return state;
}

void adam_step(std::vector<Tensor>& params, AdamState& state) {
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ConfigError("adam_step: state holds " + std::to_string(state.m.size()) +
                          " buffers for " + std::to_string(params.size()) + " parameters");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.m[i].rows() != params[i].rows() || state.m[i].cols() != params[i].cols() ||
            state.v[i].rows() != params[i].rows() || state.v[i].cols() != params[i].cols()) {
            throw ConfigError("adam_step: state shape mismatch for parameter " +
                              std::to_string(i) + " " + params[i].shape_str());
        }
    }

    const AdamOptions& o = state.options;
    state.t += 1;
    const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i];
        if (!p.requires_grad()) continue;
        Matrix& theta = p.mutable_value();
        const Matrix& g = p.grad();
        if (o.weight_decay != 0.0) theta *= (1.0 - o.lr * o.weight_decay);
        state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
        state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g.cwiseProduct(g);
        theta.array() -= o.lr * (state.m[i].array() / c1) /
                         ((state.v[i].array() / c2).sqrt() + o.eps);
        p.zero_grad();
    }
}

void zero_grads(std::vector<Tensor>& params) {
    for (auto& p : params) p.zero_grad();
}

}  // namespace midpool::autodiff
