#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "midpool/nn/layers.hpp"
#include "midpool/pooling/framework.hpp"

namespace midpool::mid {

using autodiff::Tensor;
using pooling::GraphState;
using pooling::PoolConfig;
using pooling::PooledGraph;
using pooling::ScoreMatrix;

enum class Mode { train, eval };

/// Pooled feature-map construction.
enum class FeatureMap {
    concat,         ///< {X*s_1 || ... || X*s_h}, width c*h
    multi_head,     ///< block j of X gated by s_j, d = ceil(c/h), width c
    repeat_expand,  ///< h copies of X*s, width c*h (scalar score)
    mlp_expand,     ///< relu((X*s) W + b), W: c -> c*h (scalar score)
};

/// Aggregation of an n x h score matrix into one ranking value per node.
enum class RankReduction { sum, max, mean };

std::string to_string(FeatureMap map);
FeatureMap feature_map_from_string(const std::string& name);
std::string to_string(RankReduction reduction);
RankReduction rank_reduction_from_string(const std::string& name);

struct MidConfig {
    std::size_t h = 1;
    double p_s = 0.0;
    bool flip = false;
    bool drop = false;
    FeatureMap feature_map = FeatureMap::concat;
    RankReduction reduction = RankReduction::sum;
    /// Gate features with |S| instead of S when flip is on. Off by default: the
    /// coarser's feature update uses the scores as generated.
    bool gate_with_flipped = false;
    /// Apply the drop mask before flipping; only the selected set matters, so
    /// the result is identical either way.
    bool drop_before_flip = false;

    static MidConfig disabled() { return {}; }
    bool is_disabled() const { return h == 1 && !flip && !drop; }
    /// Score columns the scorer must produce (1 for the expand maps).
    std::size_t score_dim() const;
    /// Width multiplier of the pooled feature map relative to its input.
    std::size_t width_factor() const;
    /// Throws ConfigError for h < 1, p_s outside [0, 1), or h > c under multi-head.
    void validate(std::size_t in_dim) const;
};

/// Nodes excluded from one top-k selection.
struct DropMask {
    std::vector<std::size_t> dropped;  ///< ascending
    std::uint64_t draw_seed = 0;

    bool empty() const noexcept { return dropped.empty(); }
};

/// Multidimensional score generation: the scorer invoked with h output columns.
ScoreMatrix multiscore(const pooling::ScoreGenerator& scorer, const GraphState& state);

/// Elementwise |S|.
ScoreMatrix flipscore(const ScoreMatrix& s);

/// min(ceil(p_s * n), n - ceil(ratio * n)).
std::size_t drop_count(std::size_t n, double p_s, double ratio);

/// Uniform draw of drop_count(n, p_s, ratio) node indices without replacement.
DropMask draw_drop_mask(std::size_t n, double p_s, double ratio, std::uint64_t seed);

/// Training-time score dropping. Scores pass through unchanged; the mask tells
/// the selector which nodes leave the candidate set. Eval mode and p_s = 0 give
/// an empty mask.
std::pair<ScoreMatrix, DropMask> dropscore(const ScoreMatrix& s, double p_s, double ratio,
                                           Mode mode, std::uint64_t seed);

/// One scalar per node. Sum by default; h = 1 is the identity.
std::vector<double> rank_reduce(const ScoreMatrix& s, RankReduction reduction = RankReduction::sum);

Tensor feature_map_concat(const Tensor& x, const Tensor& s, const std::vector<std::size_t>& idx);
Tensor feature_map_multihead(const Tensor& x, const Tensor& s, const std::vector<std::size_t>& idx);
Tensor feature_map_repeat(const Tensor& x, const Tensor& s, const std::vector<std::size_t>& idx,
                          std::size_t h);
Tensor feature_map_mlp_expand(const Tensor& x, const Tensor& s, const std::vector<std::size_t>& idx,
                              const nn::Linear& expand);

/// Everything one MID pooling step produced.
struct MidPoolResult {
    PooledGraph pooled;
    ScoreMatrix scores;                ///< raw multiscore output
    std::vector<double> rank_scores;  ///< values the selector ranked
    DropMask mask;
};

/// multiscore -> flipscore -> dropscore -> rank_reduce -> select_topk ->
/// feature map -> coarsen. With MidConfig::disabled() the result is
/// bit-identical to pooling::base_pool.
///
/// `fixed_mask`, when given, replaces the random draw in every mode.
MidPoolResult mid_pool(const pooling::ScoreGenerator& scorer, const nn::Linear* expand,
                       const GraphState& state, const PoolConfig& pool, const MidConfig& mid,
                       Mode mode, std::uint64_t seed,
                       const std::optional<DropMask>& fixed_mask = std::nullopt);

/// Owns a scorer (and the expand layer for mlp-expand) configured for one block.
class MidPoolLayer {
public:
    MidPoolLayer() = default;
    MidPoolLayer(std::size_t in_dim, PoolConfig pool, MidConfig mid, Rng& rng);

    MidPoolResult forward(const GraphState& state, Mode mode, std::uint64_t seed,
                          const std::optional<DropMask>& fixed_mask = std::nullopt) const;

    std::size_t in_dim() const noexcept { return in_dim_; }
    std::size_t out_dim() const noexcept { return in_dim_ * mid_.width_factor(); }
    const PoolConfig& pool_config() const noexcept { return pool_; }
    const MidConfig& mid_config() const noexcept { return mid_; }
    const pooling::ScoreGenerator& scorer() const { return *scorer_; }
    void collect_parameters(std::vector<Tensor>& out) const;

private:
    std::size_t in_dim_ = 0;
    PoolConfig pool_;
    MidConfig mid_;
    std::shared_ptr<const pooling::ScoreGenerator> scorer_;
    std::optional<nn::Linear> expand_;
};

}  // namespace midpool::mid
