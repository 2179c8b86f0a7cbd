#include "midpool/mid/mid.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "midpool/errors.hpp"

namespace midpool::mid {

namespace ad = autodiff;

std::string to_string(FeatureMap map) {
    switch (map) {
        case FeatureMap::concat: return "concat";
        case FeatureMap::multi_head: return "multi-head";
        case FeatureMap::repeat_expand: return "repeat-expand";
        case FeatureMap::mlp_expand: return "mlp-expand";
    }
    return "unknown";
}

FeatureMap feature_map_from_string(const std::string& name) {
    if (name == "concat") return FeatureMap::concat;
    if (name == "multi-head" || name == "multihead") return FeatureMap::multi_head;
    if (name == "repeat-expand" || name == "repeat") return FeatureMap::repeat_expand;
    if (name == "mlp-expand" || name == "mlp") return FeatureMap::mlp_expand;
    throw ConfigError("unknown feature map '" + name +
                      "' (expected concat, multi-head, repeat-expand or mlp-expand)");
}

std::string to_string(RankReduction reduction) {
    switch (reduction) {
        case RankReduction::sum: return "sum";
        case RankReduction::max: return "max";
        case RankReduction::mean: return "mean";
    }
    return "unknown";
}

RankReduction rank_reduction_from_string(const std::string& name) {
    if (name == "sum") return RankReduction::sum;
    if (name == "max") return RankReduction::max;
    if (name == "mean") return RankReduction::mean;
    throw ConfigError("unknown rank reduction '" + name + "' (expected sum, max or mean)");
}

std::size_t MidConfig::score_dim() const {
    return feature_map == FeatureMap::concat || feature_map == FeatureMap::multi_head ? h : 1;
}

std::size_t MidConfig::width_factor() const {
    return feature_map == FeatureMap::multi_head ? 1 : h;
}

void MidConfig::validate(std::size_t in_dim) const {
    if (h < 1) throw ConfigError("score dimension h must be at least 1");
    if (!(p_s >= 0.0 && p_s < 1.0)) {
        throw ConfigError("score drop rate p_s must lie in [0, 1), got " + std::to_string(p_s));
    }
    if (feature_map == FeatureMap::multi_head && h > in_dim) {
        throw ConfigError("multi-head feature map needs h <= c (h = " + std::to_string(h) +
                          ", c = " + std::to_string(in_dim) + ")");
    }
}

ScoreMatrix multiscore(const pooling::ScoreGenerator& scorer, const GraphState& state) {
    ScoreMatrix s = scorer.score(state);
    if (s.rows() != state.num_nodes()) {
        throw DimensionError("scorer produced " + std::to_string(s.rows()) + " rows for " +
                             std::to_string(state.num_nodes()) + " nodes");
    }
    return s;
}

ScoreMatrix flipscore(const ScoreMatrix& s) {
    return {ad::apply_unary(s.scores, ad::UnaryKind::abs), s.produced_by};
}

std::size_t drop_count(std::size_t n, double p_s, double ratio) {
    const std::size_t wanted = p_s <= 0.0 ? 0 : pooling::kept_count(p_s, n);
    const std::size_t kept = pooling::kept_count(ratio, n);
    const std::size_t room = n > kept ? n - kept : 0;
    return std::min(wanted, room);
}

DropMask draw_drop_mask(std::size_t n, double p_s, double ratio, std::uint64_t seed) {
    DropMask mask;
    mask.draw_seed = seed;
    const std::size_t m = drop_count(n, p_s, ratio);
    if (m == 0) return mask;
    Rng rng(seed);
    mask.dropped = sample_without_replacement(rng, n, m);
    std::sort(mask.dropped.begin(), mask.dropped.end());
    return mask;
}

std::pair<ScoreMatrix, DropMask> dropscore(const ScoreMatrix& s, double p_s, double ratio,
                                           Mode mode, std::uint64_t seed) {
    if (mode == Mode::eval || p_s <= 0.0) {
        DropMask empty;
        empty.draw_seed = seed;
        return {s, empty};
    }
    return {s, draw_drop_mask(s.rows(), p_s, ratio, seed)};
}

std::vector<double> rank_reduce(const ScoreMatrix& s, RankReduction reduction) {
    const Matrix& v = s.scores.value();
    std::vector<double> out(static_cast<std::size_t>(v.rows()));
    if (v.cols() == 1) {
        for (Eigen::Index i = 0; i < v.rows(); ++i) out[static_cast<std::size_t>(i)] = v(i, 0);
        return out;
    }
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        double acc = reduction == RankReduction::max ? v(i, 0) : 0.0;
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            if (reduction == RankReduction::max) {
                acc = std::max(acc, v(i, j));
            } else {
                acc += v(i, j);
            }
        }
        if (reduction == RankReduction::mean) acc /= static_cast<double>(v.cols());
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

namespace {

void check_rows(const Tensor& x, const Tensor& s) {
    if (x.rows() != s.rows()) {
        throw DimensionError("feature rows " + x.shape_str() + " differ from score rows " +
                             s.shape_str());
    }
}

void require_scalar_scores(const Tensor& s, const char* what) {
    if (s.cols() != 1) {
        throw ConfigError(std::string(what) + " expects a single score column, got " + s.shape_str());
    }
}

}  // namespace

Tensor feature_map_concat(const Tensor& x, const Tensor& s, const std::vector<std::size_t>& idx) {
    check_rows(x, s);
    return pooling::gate_product(ad::gather_rows(x, idx), ad::gather_rows(s, idx));
}

Tensor feature_map_multihead(const Tensor& x, const Tensor& s, const std::vector<std::size_t>& idx) {
    check_rows(x, s);
    const Eigen::Index c = x.cols();
    const Eigen::Index h = s.cols();
    if (h > c) {
        throw ConfigError("multi-head feature map needs h <= c (h = " + std::to_string(h) +
                          ", c = " + std::to_string(c) + ")");
    }
    Tensor kx = ad::gather_rows(x, idx);
    Tensor ks = ad::gather_rows(s, idx);
    if (h == 1) return ad::mul_col(kx, ks);
    const Eigen::Index d = (c + h - 1) / h;
    std::vector<Tensor> blocks;
    // Under the ceil partition trailing heads can own no columns; they gate nothing.
    for (Eigen::Index j = 0; j < h && j * d < c; ++j) {
        const Eigen::Index begin = j * d;
        const Eigen::Index end = std::min(c, begin + d);
        blocks.push_back(ad::mul_col(ad::slice_cols(kx, begin, end), ad::slice_cols(ks, j, j + 1)));
    }
    return ad::concat_cols(blocks);
}

Tensor feature_map_repeat(const Tensor& x, const Tensor& s, const std::vector<std::size_t>& idx,
                          std::size_t h) {
    check_rows(x, s);
    require_scalar_scores(s, "repeat-expand");
    if (h < 1) throw ConfigError("repeat-expand needs h >= 1");
    Tensor gated = ad::mul_col(ad::gather_rows(x, idx), ad::gather_rows(s, idx));
    if (h == 1) return gated;
    return ad::concat_cols(std::vector<Tensor>(h, gated));
}

Tensor feature_map_mlp_expand(const Tensor& x, const Tensor& s, const std::vector<std::size_t>& idx,
                              const nn::Linear& expand) {
    check_rows(x, s);
    require_scalar_scores(s, "mlp-expand");
    if (expand.in_dim() != static_cast<std::size_t>(x.cols())) {
        throw ConfigError("mlp-expand layer expects " + std::to_string(expand.in_dim()) +
                          " input columns, got " + x.shape_str());
    }
    Tensor gated = ad::mul_col(ad::gather_rows(x, idx), ad::gather_rows(s, idx));
    return ad::apply_unary(expand.forward(gated), ad::UnaryKind::relu);
}

MidPoolResult mid_pool(const pooling::ScoreGenerator& scorer, const nn::Linear* expand,
                       const GraphState& state, const PoolConfig& pool, const MidConfig& mid,
                       Mode mode, std::uint64_t seed, const std::optional<DropMask>& fixed_mask) {
    mid.validate(static_cast<std::size_t>(state.x.cols()));
    const std::size_t n = state.num_nodes();

    ScoreMatrix raw = multiscore(scorer, state);
    if (raw.dims() != mid.score_dim()) {
        throw ConfigError("scorer produces " + std::to_string(raw.dims()) + " columns, " +
                          to_string(mid.feature_map) + " needs " + std::to_string(mid.score_dim()));
    }

    const double p_s = mid.drop ? mid.p_s : 0.0;
    ScoreMatrix ranked = raw;
    DropMask mask;
    if (mid.drop_before_flip) {
        std::tie(ranked, mask) = dropscore(ranked, p_s, pool.ratio, mode, seed);
        if (mid.flip) ranked = flipscore(ranked);
    } else {
        if (mid.flip) ranked = flipscore(ranked);
        std::tie(ranked, mask) = dropscore(ranked, p_s, pool.ratio, mode, seed);
    }
    if (fixed_mask) {
        for (std::size_t v : fixed_mask->dropped) {
            if (v >= n) throw IndexError("drop mask index " + std::to_string(v) + " out of range");
        }
        mask = *fixed_mask;
    }

    std::vector<double> rank = rank_reduce(ranked, mid.reduction);
    std::vector<std::size_t> idx = pooling::select_topk(rank, pool.ratio, mask.dropped);

    const Tensor& gate_source = mid.flip && mid.gate_with_flipped ? ranked.scores : raw.scores;
    Tensor gates = pooling::gate_values(gate_source, pool.effective_gating());

    Tensor features;
    switch (mid.feature_map) {
        case FeatureMap::concat: features = feature_map_concat(state.x, gates, idx); break;
        case FeatureMap::multi_head: features = feature_map_multihead(state.x, gates, idx); break;
        case FeatureMap::repeat_expand:
            features = feature_map_repeat(state.x, gates, idx, mid.h);
            break;
        case FeatureMap::mlp_expand:
            if (expand == nullptr) throw ConfigError("mlp-expand feature map needs an expand layer");
            features = feature_map_mlp_expand(state.x, gates, idx, *expand);
            break;
    }

    MidPoolResult result;
    result.pooled = pooling::make_pooled(state.adjacency, std::move(features), std::move(idx));
    result.scores = std::move(raw);
    result.rank_scores = std::move(rank);
    result.mask = std::move(mask);
    return result;
}

MidPoolLayer::MidPoolLayer(std::size_t in_dim, PoolConfig pool, MidConfig mid, Rng& rng)
    : in_dim_(in_dim), pool_(std::move(pool)), mid_(mid) {
    pool_.validate();
    mid_.validate(in_dim);
    scorer_ = pooling::make_scorer(pool_.scorer, in_dim, mid_.score_dim(), pool_.gsa_alpha, rng);
    if (mid_.feature_map == FeatureMap::mlp_expand) expand_.emplace(in_dim, in_dim * mid_.h, rng);
}

MidPoolResult MidPoolLayer::forward(const GraphState& state, Mode mode, std::uint64_t seed,
                                    const std::optional<DropMask>& fixed_mask) const {
    return mid_pool(*scorer_, expand_ ? &*expand_ : nullptr, state, pool_, mid_, mode, seed,
                    fixed_mask);
}

void MidPoolLayer::collect_parameters(std::vector<Tensor>& out) const {
    scorer_->collect_parameters(out);
    if (expand_) expand_->collect_parameters(out);
}

}  // namespace midpool::mid
