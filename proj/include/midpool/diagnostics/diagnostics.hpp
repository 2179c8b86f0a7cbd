#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "midpool/graph/graph.hpp"
#include "midpool/nn/model.hpp"

namespace midpool::diagnostics {

/// Leave-one-node-out influence of every node on the model's prediction.
struct GroundTruthScores {
    std::vector<double> scores;  ///< normalized |y_i - y|, sums to 1
    std::vector<double> deltas;  ///< unnormalized |y_i - y|
    double reference = 0.0;      ///< y, the eval-mode probability of the target class
    std::size_t target_class = 0;
    bool uniform_fallback = false;  ///< every delta was zero
};

/// Target class defaults to the graph label, or the predicted class if unlabeled.
/// Throws DiagnosticError for single-node graphs.
GroundTruthScores ground_truth_scores(const nn::HierarchicalClassifier& model, const graph::Graph& g,
                                      std::optional<std::size_t> target_class = std::nullopt);

struct AucResult {
    double auc = 0.5;
    bool degenerate = false;  ///< labels were all positive or all negative
};

/// Rank-based (Mann-Whitney) AUC with midranks for tied predictions.
AucResult auc_from_labels(const std::vector<double>& predicted, const std::vector<bool>& positive);

/// Positives are the top-ceil(ratio * n) ground-truth nodes (ties to the lower index).
AucResult score_correctness_auc(const std::vector<double>& predicted, const GroundTruthScores& gt,
                                double ratio);

/// ||sum_{v in SEL} (sum_{u in N(v)} (x_v - x_u))^2||_1 / (|E| c), square taken elementwise.
/// Throws DiagnosticError for an empty selection or an edgeless graph.
double info_gain(const Matrix& adjacency, const Matrix& features,
                 const std::vector<std::size_t>& selected);
double info_gain(const graph::Graph& g, const std::vector<std::size_t>& selected);

struct TrappedBoundReport {
    std::size_t pairs = 0;
    std::size_t violations = 0;
    double max_gap = 0.0;  ///< largest |s_u - s_v| - ||x_u - x_v||, <= slack when no violation
};

/// Checks |s_u - s_v| <= ||x_u - x_v||_2 over every node pair for s = x p / ||p||.
/// `projection` must be c x 1.
TrappedBoundReport trapped_bound_check(const Matrix& features, const Matrix& projection,
                                       double slack = 1e-9);

/// Mean pairwise BFS hop distance among selected nodes, computed per connected
/// component holding at least two of them and averaged over those components.
/// Throws DiagnosticError when no two selected nodes share a component.
double selection_spread(const Matrix& adjacency, const std::vector<std::size_t>& idx);

struct ExpressivenessOptions {
    std::size_t feature_dim = 4;
    std::size_t hidden = 16;
    /// Drop rate chosen so exactly one node is dropped from a 6-node graph at ratio 0.5.
    double p_s = 0.1;
    bool enable_drop = true;
    std::uint64_t seed = 7;
};

struct ExpressivenessReport {
    double base_distance = 0.0;  ///< readout distance with no drop mask
    bool distinguishing_found = false;
    double best_distance = 0.0;
    std::optional<std::size_t> dropped_first;   ///< mask on the 2 x K3 graph
    std::optional<std::size_t> dropped_second;  ///< mask on the C6 graph
    std::size_t mask_pairs = 0;
};

/// The 2 x K3 / C6 pair. Node labels are chosen so the tie-broken base selection
/// {0, 1, 2} induces isomorphic subgraphs in both.
graph::Graph two_triangles(std::size_t feature_dim);
graph::Graph hexagon(std::size_t feature_dim);

/// GCN -> pool -> GCN -> readout on both graphs, first without any mask, then over
/// every pair of single-node drop masks (only the empty mask when drop is off).
ExpressivenessReport expressiveness_pair_test(const pooling::PoolConfig& pool,
                                              const ExpressivenessOptions& options = {});

}  // namespace midpool::diagnostics
