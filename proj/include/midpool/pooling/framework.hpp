#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "midpool/pooling/scorers.hpp"

namespace midpool::pooling {

/// How kept-node scores gate features in the coarser.
enum class Gating {
    sigma_gate,  ///< X_idx * sigmoid(S_idx), the TopKPool rule
    raw_gate,    ///< X_idx * S_idx, the SAGPool / GSAPool rule
};

Gating default_gating(ScorerKind kind);

struct PoolConfig {
    double ratio = 0.5;
    ScorerKind scorer = ScorerKind::sag;
    double gsa_alpha = 0.5;
    /// Unset means the backbone's own rule (default_gating).
    std::optional<Gating> gating;

    Gating effective_gating() const { return gating.value_or(default_gating(scorer)); }
    /// Throws ConfigError on ratio outside (0, 1] or alpha outside [0, 1].
    void validate() const;
};

/// Coarsened graph produced by one pooling layer.
struct PooledGraph {
    Tensor x;
    Matrix adjacency;
    std::vector<std::size_t> idx;  ///< kept parent indices, strictly increasing
    std::size_t parent_n = 0;

    GraphState state() const;
};

/// ceil(ratio * n). A 1e-9 slack keeps products such as 0.1 * 30 from rounding up.
std::size_t kept_count(double ratio, std::size_t n);

/// Indices of the ceil(ratio * n) largest scores, ties to the lower index,
/// returned ascending. `excluded` (sorted or not) removes candidates without
/// changing the kept count. Throws SelectionError when nothing would be kept or
/// too few candidates survive.
std::vector<std::size_t> select_topk(std::span<const double> scores, double ratio,
                                     std::span<const std::size_t> excluded = {});

/// Gating transform applied to scores before they multiply features.
Tensor gate_values(const Tensor& scores, Gating gating);

/// Column-wise gate product {X * g_1 || ... || X * g_h}; for h = 1 the plain
/// broadcast product.
Tensor gate_product(const Tensor& x, const Tensor& gates);

/// Builds a PooledGraph from already gated kept-node features.
PooledGraph make_pooled(const Matrix& parent_adjacency, Tensor features,
                        std::vector<std::size_t> idx);

/// Graph coarser: gated kept features plus the induced subgraph A[idx][:, idx].
PooledGraph coarsen(const GraphState& state, const ScoreMatrix& scores,
                    const std::vector<std::size_t>& idx, Gating gating);

/// Graph U-Net unpooling: kept rows scattered back to their parent positions.
Tensor unpool(const PooledGraph& pooled, std::size_t parent_n);

/// Score, select, coarsen with a single-column scorer.
PooledGraph base_pool(const ScoreGenerator& scorer, const GraphState& state,
                      const PoolConfig& config);

}  // namespace midpool::pooling
