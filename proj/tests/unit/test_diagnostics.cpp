#include <doctest.h>

#include <cmath>
#include <numeric>

#include "midpool/diagnostics/diagnostics.hpp"
#include "midpool/errors.hpp"
#include "support.hpp"

using namespace midpool;
using namespace midpool::diagnostics;

namespace {

nn::HierarchicalClassifier tiny_model(std::size_t in_dim, std::uint64_t seed) {
    nn::ModelConfig c;
    c.in_dim = in_dim;
    c.num_classes = 2;
    c.hidden = 8;
    c.blocks = 2;
    c.pool.scorer = pooling::ScorerKind::sag;
    return nn::HierarchicalClassifier(c, seed);
}

double target_probability(const nn::HierarchicalClassifier& model, const Matrix& adj, const Matrix& x,
                          std::size_t target) {
    const Matrix logits = model.forward(adj, x, mid::Mode::eval).value();
    const Eigen::RowVectorXd e = (logits.array() - logits.maxCoeff()).exp();
    return e(static_cast<Eigen::Index>(target)) / e.sum();
}

double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

TEST_CASE("ground-truth scores") {
    Rng rng(71);
    SUBCASE("match a leave-one-out oracle") {
        const auto model = tiny_model(3, 2);
        for (int trial = 0; trial < 20; ++trial) {
            const graph::Graph g = support::random_graph(3 + trial % 10, 3, rng, 0.4, trial % 2);
            const GroundTruthScores gt = ground_truth_scores(model, g);
            const std::size_t n = g.num_nodes();
            const std::size_t target = static_cast<std::size_t>(trial % 2);
            CHECK(gt.target_class == target);
            const double ref = target_probability(model, g.adjacency(), g.features(), target);
            CHECK(std::abs(gt.reference - ref) < 1e-12);
            std::vector<double> deltas(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<std::size_t> keep;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j != i) keep.push_back(j);
                }
                Matrix x(static_cast<Eigen::Index>(n - 1), g.features().cols());
                for (std::size_t r = 0; r < keep.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = g.features().row(keep[r]);
                deltas[i] = std::abs(target_probability(model, support::naive_subgraph(g.adjacency(), keep), x, target) - ref);
                CHECK(std::abs(gt.deltas[i] - deltas[i]) < 1e-12);
            }
            CHECK(std::accumulate(gt.scores.begin(), gt.scores.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
            for (double s : gt.scores) CHECK(s >= 0.0);
        }
    }
    SUBCASE("constant model falls back to uniform") {
        const auto model = tiny_model(3, 3);
        for (auto p : model.parameters()) p.mutable_value().setZero();
        const graph::Graph g = support::random_graph(6, 3, rng, 0.5, 0);
        const GroundTruthScores gt = ground_truth_scores(model, g);
        CHECK(gt.uniform_fallback);
        for (double s : gt.scores) CHECK(s == doctest::Approx(1.0 / 6.0));
    }
    SUBCASE("errors") {
        const auto model = tiny_model(3, 4);
        CHECK_THROWS_AS(ground_truth_scores(model, support::random_graph(1, 3, rng)), DiagnosticError);
        CHECK_THROWS_AS(ground_truth_scores(model, support::random_graph(4, 3, rng), 5), DiagnosticError);
    }
}

TEST_CASE("AUC") {
    CHECK(auc_from_labels({0.9, 0.8, 0.1, 0.2}, {true, true, false, false}).auc == 1.0);
    CHECK(auc_from_labels({0.1, 0.2, 0.9, 0.8}, {true, true, false, false}).auc == 0.0);
    CHECK(auc_from_labels({0.5, 0.5}, {true, false}).auc == 0.5);
    const AucResult degenerate = auc_from_labels({0.1, 0.2}, {true, true});
    CHECK(degenerate.degenerate);
    CHECK(degenerate.auc == 0.5);
    CHECK_THROWS_AS(auc_from_labels({0.1}, {true, false}), DimensionError);

    Rng rng(72);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 30);
        std::vector<double> pred(n);
        std::vector<bool> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse values so ties occur.
            pred[i] = std::round(unit(rng) * 8.0) / 8.0;
            pos[i] = unit(rng) < 0.4;
        }
        pos[0] = true;
        pos[1] = false;
        const double auc = auc_from_labels(pred, pos).auc;
        CHECK(std::abs(auc - support::pairwise_auc(pred, pos)) < 1e-12);
        std::vector<double> warped(n);
        for (std::size_t i = 0; i < n; ++i) warped[i] = std::exp(3.0 * pred[i]) - 7.0;
        CHECK(std::abs(auc_from_labels(warped, pos).auc - auc) < 1e-12);
    }

    GroundTruthScores gt;
    gt.scores = {0.4, 0.1, 0.3, 0.2};
    CHECK(score_correctness_auc({4, 1, 3, 2}, gt, 0.5).auc == 1.0);
    CHECK(score_correctness_auc({1, 4, 2, 3}, gt, 0.5).auc == 0.0);
}

TEST_CASE("information gain") {
    const Matrix a = graph::adjacency_from_edges(2, {{0, 1}});
    Matrix x(2, 1);
    x << 1.0, 0.0;
    CHECK(info_gain(a, x, {0}) == doctest::Approx(1.0));
    CHECK(info_gain(a, x, {0, 1}) == doctest::Approx(2.0));
    Matrix same(2, 1);
    same << 0.7, 0.7;
    CHECK(info_gain(a, same, {0, 1}) == 0.0);

    Rng rng(73);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 20;
        const Matrix adj = support::connected_adjacency(n, 0.3, rng);
        const Matrix feats = support::uniform_matrix(static_cast<Eigen::Index>(n), 3, rng);
        std::vector<std::size_t> sel;
        for (std::size_t v = 0; v < n; ++v) {
            if (unit(rng) < 0.5) sel.push_back(v);
        }
        if (sel.empty()) sel.push_back(n - 1);
        const double oracle = support::naive_info_gain(adj, feats, sel);
        CHECK(std::abs(info_gain(adj, feats, sel) - oracle) <= 1e-12 * std::max(1.0, oracle));
    }
    CHECK_THROWS_AS(info_gain(a, x, {}), DiagnosticError);
    CHECK_THROWS_AS(info_gain(Matrix::Zero(2, 2), x, {0}), DiagnosticError);
}

TEST_CASE("trapped bound") {
    Rng rng(74);
    const Matrix p = support::uniform_matrix(4, 1, rng);
    const Matrix identical = Matrix::Ones(5, 4) * 0.3;
    const TrappedBoundReport flat = trapped_bound_check(identical, p);
    CHECK(flat.pairs == 10);
    CHECK(flat.violations == 0);

    const TrappedBoundReport wide = trapped_bound_check(support::uniform_matrix(142, 4, rng, -3, 3), p);
    CHECK(wide.pairs >= 10000);
    CHECK(wide.violations == 0);
    CHECK(wide.max_gap <= 1e-9);

    Matrix colinear(6, 4);
    for (int i = 0; i < 6; ++i) colinear.row(i) = p.transpose() * (0.5 * i - 1.0);
    const TrappedBoundReport tight = trapped_bound_check(colinear, p);
    CHECK(tight.violations == 0);
    CHECK(std::abs(tight.max_gap) < 1e-12);

    CHECK_THROWS(trapped_bound_check(identical, Matrix::Ones(4, 2)));
}

TEST_CASE("expressiveness pair") {
    const graph::Graph a = two_triangles(4);
    const graph::Graph b = hexagon(4);
    CHECK(a.num_nodes() == 6);
    CHECK(b.num_nodes() == 6);
    CHECK(a.num_edges() == 6);
    CHECK(b.num_edges() == 6);
    CHECK(support::naive_triangles(a.adjacency()) == 2);
    CHECK(support::naive_triangles(b.adjacency()) == 0);
    CHECK(support::naive_subgraph(a.adjacency(), {0, 1, 2}).sum() ==
          support::naive_subgraph(b.adjacency(), {0, 1, 2}).sum());

    for (pooling::ScorerKind kind : {pooling::ScorerKind::topk, pooling::ScorerKind::sag, pooling::ScorerKind::gsa}) {
        pooling::PoolConfig pool;
        pool.scorer = kind;
        const ExpressivenessReport with_drop = expressiveness_pair_test(pool);
        CHECK(with_drop.base_distance < 1e-9);
        CHECK(with_drop.distinguishing_found);
        CHECK(with_drop.best_distance > 1e-6);
        CHECK(with_drop.mask_pairs == 36);

        ExpressivenessOptions off;
        off.enable_drop = false;
        const ExpressivenessReport without = expressiveness_pair_test(pool, off);
        CHECK(!without.distinguishing_found);
        CHECK(without.mask_pairs == 1);
    }
}

TEST_CASE("selection spread") {
    Matrix clique = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
    CHECK(selection_spread(clique, {0, 1, 3}) == 1.0);
    const Matrix p5 = graph::adjacency_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    CHECK(selection_spread(p5, {0, 4}) == 4.0);
    CHECK(selection_spread(p5, {0, 2, 4}) == doctest::Approx(8.0 / 3.0));

    Rng rng(75);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + trial % 20;
        const Matrix adj = support::random_adjacency(n, 0.2, rng);
        std::vector<std::size_t> idx;
        for (std::size_t v = 0; v < n; ++v) {
            if (unit(rng) < 0.6) idx.push_back(v);
        }
        const double oracle = support::naive_spread(adj, idx);
        if (std::isnan(oracle)) {
            CHECK_THROWS_AS(selection_spread(adj, idx), DiagnosticError);
        } else {
            CHECK(std::abs(selection_spread(adj, idx) - oracle) < 1e-12);
        }
    }
    CHECK_THROWS_AS(selection_spread(p5, {2}), DiagnosticError);
    CHECK_THROWS_AS(selection_spread(Matrix::Zero(3, 3), {0, 1, 2}), DiagnosticError);
}
