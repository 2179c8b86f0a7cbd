#include "midpool/pooling/framework.hpp"

#include <algorithm>
#include <cmath>

#include "midpool/errors.hpp"
#include "midpool/graph/graph.hpp"

namespace midpool::pooling {

namespace ad = autodiff;

Gating default_gating(ScorerKind kind) {
    return kind == ScorerKind::topk ? Gating::sigma_gate : Gating::raw_gate;
}

void PoolConfig::validate() const {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw ConfigError("pooling ratio must lie in (0, 1], got " + std::to_string(ratio));
    }
    if (!(gsa_alpha >= 0.0 && gsa_alpha <= 1.0)) {
        throw ConfigError("gsa alpha must lie in [0, 1], got " + std::to_string(gsa_alpha));
    }
}

GraphState PooledGraph::state() const { return GraphState::make(adjacency, x); }

std::size_t kept_count(double ratio, std::size_t n) {
    const double raw = std::ceil(ratio * static_cast<double>(n) - 1e-9);
    return raw <= 0.0 ? 0 : static_cast<std::size_t>(raw);
}

std::vector<std::size_t> select_topk(std::span<const double> scores, double ratio,
                                     std::span<const std::size_t> excluded) {
    const std::size_t n = scores.size();
    const std::size_t keep = kept_count(ratio, n);
    if (keep < 1) {
        throw SelectionError("top-k keeps no nodes (ratio " + std::to_string(ratio) + ", n " +
                             std::to_string(n) + ")");
    }
    std::vector<char> is_excluded(n, 0);
    for (std::size_t e : excluded) {
        if (e >= n) throw IndexError("excluded node index out of range");
        is_excluded[e] = 1;
    }
    std::vector<std::size_t> candidates;
    candidates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_excluded[i]) candidates.push_back(i);
    }
    if (candidates.size() < keep) {
        throw SelectionError("only " + std::to_string(candidates.size()) +
                             " candidates for " + std::to_string(keep) + " kept nodes");
    }
    auto better = [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), better);
    candidates.resize(keep);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

Tensor gate_values(const Tensor& scores, Gating gating) {
    return gating == Gating::sigma_gate ? ad::apply_unary(scores, ad::UnaryKind::sigmoid) : scores;
}

Tensor gate_product(const Tensor& x, const Tensor& gates) {
    if (gates.cols() == 1) return ad::mul_col(x, gates);
    std::vector<Tensor> parts;
    parts.reserve(static_cast<std::size_t>(gates.cols()));
    for (Eigen::Index j = 0; j < gates.cols(); ++j) {
        parts.push_back(ad::mul_col(x, ad::slice_cols(gates, j, j + 1)));
    }
    return ad::concat_cols(parts);
}

PooledGraph make_pooled(const Matrix& parent_adjacency, Tensor features,
                        std::vector<std::size_t> idx) {
    if (idx.empty()) throw SelectionError("coarsening with an empty selection");
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= static_cast<std::size_t>(parent_adjacency.rows())) {
            throw IndexError("kept index " + std::to_string(idx[j]) + " out of range");
        }
        if (j > 0 && idx[j] <= idx[j - 1]) throw SelectionError("kept indices must be ascending");
    }
    PooledGraph out;
    out.parent_n = static_cast<std::size_t>(parent_adjacency.rows());
    out.adjacency = graph::induced_adjacency(parent_adjacency, idx);
    out.x = std::move(features);
    out.idx = std::move(idx);
    return out;
}

PooledGraph coarsen(const GraphState& state, const ScoreMatrix& scores,
                    const std::vector<std::size_t>& idx, Gating gating) {
    if (idx.empty()) throw SelectionError("coarsening with an empty selection");
    if (scores.rows() != state.num_nodes()) {
        throw DimensionError("score rows (" + std::to_string(scores.rows()) +
                             ") differ from node count (" + std::to_string(state.num_nodes()) + ")");
    }
    Tensor kept_x = ad::gather_rows(state.x, idx);
    Tensor kept_gate = gate_values(ad::gather_rows(scores.scores, idx), gating);
    return make_pooled(state.adjacency, gate_product(kept_x, kept_gate), idx);
}

Tensor unpool(const PooledGraph& pooled, std::size_t parent_n) {
    return ad::scatter_rows(pooled.x, pooled.idx, static_cast<Eigen::Index>(parent_n));
}

PooledGraph base_pool(const ScoreGenerator& scorer, const GraphState& state,
                      const PoolConfig& config) {
    ScoreMatrix s = scorer.score(state);
    if (s.dims() != 1) throw ConfigError("base pooling expects a single score column");
    const Matrix& v = s.scores.value();
    const auto idx = select_topk(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
                                 config.ratio);
    return coarsen(state, s, idx, config.effective_gating());
}

}  // namespace midpool::pooling
