#include "midpool/diagnostics/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "midpool/errors.hpp"

namespace midpool::diagnostics {

namespace ad = autodiff;
using autodiff::Tensor;

GroundTruthScores ground_truth_scores(const nn::HierarchicalClassifier& model, const graph::Graph& g,
                                      std::optional<std::size_t> target_class) {
    const std::size_t n = g.num_nodes();
    if (n < 2) throw DiagnosticError("ground-truth scores need at least two nodes");

    const Matrix proba = nn::predict_proba(model, g);
    GroundTruthScores gt;
    if (target_class) {
        gt.target_class = *target_class;
    } else if (g.label()) {
        gt.target_class = *g.label();
    } else {
        Eigen::Index arg = 0;
        proba.row(0).maxCoeff(&arg);
        gt.target_class = static_cast<std::size_t>(arg);
    }
    if (gt.target_class >= static_cast<std::size_t>(proba.cols())) {
        throw DiagnosticError("target class outside the model's output range");
    }
    const auto target = static_cast<Eigen::Index>(gt.target_class);
    gt.reference = proba(0, target);

    gt.deltas.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix p = nn::predict_proba(model, graph::remove_node(g, i));
        gt.deltas[i] = std::abs(p(0, target) - gt.reference);
        total += gt.deltas[i];
    }
    gt.scores.resize(n);
    if (total == 0.0) {
        gt.uniform_fallback = true;
        std::fill(gt.scores.begin(), gt.scores.end(), 1.0 / static_cast<double>(n));
    } else {
        for (std::size_t i = 0; i < n; ++i) gt.scores[i] = gt.deltas[i] / total;
    }
    return gt;
}

AucResult auc_from_labels(const std::vector<double>& predicted, const std::vector<bool>& positive) {
    if (predicted.size() != positive.size()) {
        throw DimensionError("AUC inputs differ in length");
    }
    const std::size_t n = predicted.size();
    const auto n_pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return {0.5, true};

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return predicted[a] < predicted[b]; });
    double pos_rank_sum = 0.0;
    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo;
        while (hi + 1 < n && predicted[order[hi + 1]] == predicted[order[lo]]) ++hi;
        // 1-based midrank of the tie block [lo, hi].
        const double midrank = 0.5 * static_cast<double>(lo + hi) + 1.0;
        for (std::size_t t = lo; t <= hi; ++t) {
            if (positive[order[t]]) pos_rank_sum += midrank;
        }
        lo = hi + 1;
    }
    const double p = static_cast<double>(n_pos);
    const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
    return {u / (p * static_cast<double>(n_neg)), false};
}

AucResult score_correctness_auc(const std::vector<double>& predicted, const GroundTruthScores& gt,
                                double ratio) {
    if (predicted.size() != gt.scores.size()) {
        throw DimensionError("predicted scores and ground truth differ in length");
    }
    if (predicted.size() < 2) throw DiagnosticError("score correctness needs at least two nodes");
    std::vector<bool> positive(predicted.size(), false);
    for (std::size_t i : pooling::select_topk(gt.scores, ratio)) positive[i] = true;
    return auc_from_labels(predicted, positive);
}

double info_gain(const Matrix& adjacency, const Matrix& features,
                 const std::vector<std::size_t>& selected) {
    if (selected.empty()) throw DiagnosticError("information gain needs a non-empty selection");
    const Eigen::Index n = adjacency.rows();
    if (features.rows() != n) throw DimensionError("feature rows differ from node count");
    const double edges = adjacency.sum() / 2.0;
    if (edges <= 0.0) throw DiagnosticError("information gain is undefined on an edgeless graph");

    Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(features.cols());
    for (std::size_t v : selected) {
        if (v >= static_cast<std::size_t>(n)) throw IndexError("selected node out of range");
        const auto vi = static_cast<Eigen::Index>(v);
        const double degree = adjacency.row(vi).sum();
        // sum_u A_vu (x_v - x_u) = deg(v) x_v - (A X)_v
        Eigen::RowVectorXd diff = degree * features.row(vi) - adjacency.row(vi) * features;
        total += diff.array().square().matrix();
    }
    return total.cwiseAbs().sum() / (edges * static_cast<double>(features.cols()));
}

double info_gain(const graph::Graph& g, const std::vector<std::size_t>& selected) {
    return info_gain(g.adjacency(), g.features(), selected);
}

TrappedBoundReport trapped_bound_check(const Matrix& features, const Matrix& projection,
                                       double slack) {
    if (projection.cols() != 1 || projection.rows() != features.cols()) {
        throw DimensionError("trapped-bound check needs a c x 1 projection");
    }
    const double norm = projection.norm();
    if (norm == 0.0) throw NormalizationError("zero projection vector");
    const Eigen::VectorXd s = features * (projection / norm);

    TrappedBoundReport report;
    report.max_gap = -std::numeric_limits<double>::infinity();
    const Eigen::Index n = features.rows();
    for (Eigen::Index u = 0; u < n; ++u) {
        for (Eigen::Index v = u + 1; v < n; ++v) {
            const double gap = std::abs(s(u) - s(v)) - (features.row(u) - features.row(v)).norm();
            report.max_gap = std::max(report.max_gap, gap);
            ++report.pairs;
            if (gap > slack) ++report.violations;
        }
    }
    if (report.pairs == 0) report.max_gap = 0.0;
    return report;
}

double selection_spread(const Matrix& adjacency, const std::vector<std::size_t>& idx) {
    if (idx.size() < 2) throw DiagnosticError("selection spread needs at least two selected nodes");
    const auto n = static_cast<std::size_t>(adjacency.rows());
    for (std::size_t v : idx) {
        if (v >= n) throw IndexError("selected node out of range");
    }

    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) {
                adj[i].push_back(j);
            }
        }
    }
    auto bfs = [&](std::size_t source) {
        std::vector<long> dist(n, -1);
        std::queue<std::size_t> q;
        dist[source] = 0;
        q.push(source);
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t w : adj[u]) {
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    q.push(w);
                }
            }
        }
        return dist;
    };

    std::vector<long> component(n, -1);
    long next = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (component[v] >= 0) continue;
        const auto dist = bfs(v);
        for (std::size_t u = 0; u < n; ++u) {
            if (dist[u] >= 0) component[u] = next;
        }
        ++next;
    }

    std::map<long, std::vector<std::size_t>> groups;
    for (std::size_t v : idx) groups[component[v]].push_back(v);

    double sum_of_means = 0.0;
    std::size_t counted = 0;
    for (const auto& [comp, members] : groups) {
        if (members.size() < 2) continue;
        double total = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < members.size(); ++a) {
            const auto dist = bfs(members[a]);
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                total += static_cast<double>(dist[members[b]]);
                ++pairs;
            }
        }
        sum_of_means += total / static_cast<double>(pairs);
        ++counted;
    }
    if (counted == 0) throw DiagnosticError("no two selected nodes share a connected component");
    return sum_of_means / static_cast<double>(counted);
}

graph::Graph two_triangles(std::size_t feature_dim) {
    const Matrix adj = graph::adjacency_from_edges(6, {{0, 1}, {1, 3}, {3, 0}, {2, 4}, {4, 5}, {5, 2}});
    return graph::Graph(adj, Matrix::Ones(6, static_cast<Eigen::Index>(feature_dim)));
}

graph::Graph hexagon(std::size_t feature_dim) {
    const Matrix adj = graph::adjacency_from_edges(6, {{0, 1}, {1, 3}, {3, 2}, {2, 4}, {4, 5}, {5, 0}});
    return graph::Graph(adj, Matrix::Ones(6, static_cast<Eigen::Index>(feature_dim)));
}

namespace {

struct PairPipeline {
    nn::GcnLayer pre;
    mid::MidPoolLayer pool;
    nn::GcnLayer post;

    Matrix run(const graph::Graph& g, const mid::DropMask& mask) const {
        Tensor a_norm = Tensor::constant(g.normalized_adjacency());
        Tensor h = pre.forward(Tensor::constant(g.features()), a_norm);
        auto state = pooling::GraphState::make(g.adjacency(), h);
        mid::MidPoolResult r = pool.forward(state, mid::Mode::train, 0, mask);
        Tensor pooled_norm = Tensor::constant(graph::normalize_adjacency(r.pooled.adjacency));
        return nn::readout(post.forward(r.pooled.x, pooled_norm)).value();
    }
};

}  // namespace

ExpressivenessReport expressiveness_pair_test(const pooling::PoolConfig& pool,
                                              const ExpressivenessOptions& options) {
    mid::MidConfig mid_config;
    mid_config.drop = options.enable_drop;
    mid_config.p_s = options.enable_drop ? options.p_s : 0.0;

    Rng rng(derive_seed(options.seed, {0xE4}));
    nn::GcnLayer pre(options.feature_dim, options.hidden, nn::UnaryKind::relu, rng);
    mid::MidPoolLayer pool_layer(options.hidden, pool, mid_config, rng);
    nn::GcnLayer post(pool_layer.out_dim(), options.hidden, nn::UnaryKind::relu, rng);
    const PairPipeline pipeline{pre, pool_layer, post};

    const graph::Graph first = two_triangles(options.feature_dim);
    const graph::Graph second = hexagon(options.feature_dim);

    ExpressivenessReport report;
    report.base_distance = (pipeline.run(first, {}) - pipeline.run(second, {})).norm();

    std::vector<mid::DropMask> masks;
    const std::size_t dropped = mid::drop_count(6, mid_config.p_s, pool.ratio);
    if (!options.enable_drop || dropped == 0) {
        masks.push_back({});
    } else {
        for (std::size_t v = 0; v < 6; ++v) masks.push_back({{v}, 0});
    }
    std::vector<Matrix> first_out;
    std::vector<Matrix> second_out;
    for (const auto& m : masks) {
        first_out.push_back(pipeline.run(first, m));
        second_out.push_back(pipeline.run(second, m));
    }
    for (std::size_t a = 0; a < masks.size(); ++a) {
        for (std::size_t b = 0; b < masks.size(); ++b) {
            ++report.mask_pairs;
            const double d = (first_out[a] - second_out[b]).norm();
            if (d > report.best_distance) {
                report.best_distance = d;
                if (!masks[a].empty()) report.dropped_first = masks[a].dropped.front();
                if (!masks[b].empty()) report.dropped_second = masks[b].dropped.front();
            }
        }
    }
    report.distinguishing_found = report.best_distance > 1e-6;
    return report;
}

}  // namespace midpool::diagnostics
