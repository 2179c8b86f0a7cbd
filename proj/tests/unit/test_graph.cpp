#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "midpool/errors.hpp"
#include "midpool/graph/generators.hpp"
#include "midpool/graph/splits.hpp"
#include "midpool/graph/tu_format.hpp"
#include "support.hpp"

using namespace midpool;
using namespace midpool::graph;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("midpool_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p);
    for (const auto& l : lines) out << l << "\n";
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    return lines;
}

std::multiset<std::size_t> degree_multiset(const Graph& g) {
    const auto d = g.degrees();
    return {d.begin(), d.end()};
}

Dataset balanced_dataset(std::size_t per_class, Rng& rng) {
    Dataset ds;
    ds.name = "balanced";
    ds.num_classes = 2;
    ds.feature_dim = 2;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        ds.graphs.push_back(support::random_graph(4, 2, rng, 0.3, i % 2).with_id(static_cast<std::int64_t>(i)));
    }
    return ds;
}

}  // namespace

TEST_CASE("graph invariants are enforced") {
    CHECK_THROWS_AS(Graph(Matrix::Zero(0, 0), Matrix::Zero(0, 1)), ArgumentError);
    Matrix asym = Matrix::Zero(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(Graph(asym, Matrix::Zero(2, 1)), ArgumentError);
    CHECK_THROWS_AS(Graph(Matrix::Identity(2, 2), Matrix::Zero(2, 1)), ArgumentError);
    CHECK_THROWS_AS(Graph(Matrix::Zero(3, 3), Matrix::Zero(2, 1)), ArgumentError);
}

TEST_CASE("normalized adjacency") {
    const Graph single(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
    CHECK(single.normalized_adjacency() == Matrix::Ones(1, 1));

    const Graph pair(adjacency_from_edges(2, {{0, 1}}), Matrix::Ones(2, 1));
    CHECK(pair.normalized_adjacency().isApproxToConstant(0.5, 1e-15));

    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = support::random_adjacency(8, 0.4, rng);
        const Matrix norm = normalize_adjacency(a);
        CHECK((norm - norm.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((norm - support::naive_normalized_adjacency(a)).cwiseAbs().maxCoeff() < 1e-12);
        for (Eigen::Index i = 0; i < 8; ++i) {
            for (Eigen::Index j = 0; j < 8; ++j) {
                const bool support_entry = i == j || a(i, j) != 0.0;
                CHECK((norm(i, j) != 0.0) == support_entry);
            }
        }
        // Power iteration on a symmetric non-negative matrix converges to its spectral radius.
        Eigen::VectorXd v = Eigen::VectorXd::Ones(8);
        double radius = 0.0;
        for (int it = 0; it < 500; ++it) {
            Eigen::VectorXd next = norm * v;
            radius = next.norm() / v.norm();
            v = next / next.norm();
        }
        CHECK(radius <= 1.0 + 1e-9);
    }
}

TEST_CASE("TU loader: minimal handwritten fixture") {
    const fs::path dir = scratch_dir("tu_min");
    write_lines(dir / "TINY_A.txt", {"1, 2", "2, 1"});
    write_lines(dir / "TINY_graph_indicator.txt", {"1", "1"});
    write_lines(dir / "TINY_graph_labels.txt", {"1"});
    write_lines(dir / "TINY_node_labels.txt", {"1", "1"});
    const Dataset ds = load_tu_dataset(dir, "TINY");
    REQUIRE(ds.graphs.size() == 1);
    CHECK(ds.graphs[0].num_nodes() == 2);
    CHECK(ds.graphs[0].adjacency() == adjacency_from_edges(2, {{0, 1}}));
    CHECK(ds.num_classes == 1);
    CHECK(ds.graphs[0].label() == std::optional<std::size_t>(0));
}

TEST_CASE("TU loader: features, labels and errors") {
    const fs::path dir = scratch_dir("tu_feat");
    write_lines(dir / "T_A.txt", {"1, 2", "2, 1", "3, 4", "4, 3", "4, 5", "5, 4"});
    write_lines(dir / "T_graph_indicator.txt", {"1", "1", "2", "2", "2"});
    write_lines(dir / "T_graph_labels.txt", {"-1", "1"});
    write_lines(dir / "T_node_labels.txt", {"0", "2", "2", "1", "0"});
    write_lines(dir / "T_node_attributes.txt", {"0.5, 1", "1.5, 2", "2.5, 3", "3.5, 4", "4.5, 5"});
    const Dataset ds = load_tu_dataset(dir, "T");
    REQUIRE(ds.graphs.size() == 2);
    CHECK(ds.num_classes == 2);
    CHECK(ds.feature_dim == 5);
    CHECK(ds.graphs[0].label() == std::optional<std::size_t>(0));
    CHECK(ds.graphs[1].label() == std::optional<std::size_t>(1));
    Matrix expected(3, 5);
    expected << 0, 0, 1, 2.5, 3,  //
        0, 1, 0, 3.5, 4,          //
        1, 0, 0, 4.5, 5;
    CHECK(ds.graphs[1].features() == expected);
    CHECK(ds.graphs[1].num_edges() == 2);

    SUBCASE("no labels or attributes gives a normalized-degree column") {
        fs::remove(dir / "T_node_labels.txt");
        fs::remove(dir / "T_node_attributes.txt");
        const Dataset bare = load_tu_dataset(dir, "T");
        CHECK(bare.feature_dim == 1);
        CHECK(bare.graphs[1].features() == normalized_degree_features(bare.graphs[1].adjacency()));
    }
    SUBCASE("missing mandatory file names it") {
        fs::remove(dir / "T_graph_labels.txt");
        try {
            load_tu_dataset(dir, "T");
            FAIL("expected an ingestion error");
        } catch (const IngestionError& e) {
            CHECK(std::string(e.what()).find("T_graph_labels.txt") != std::string::npos);
        }
    }
    SUBCASE("ragged attribute row reports its line") {
        write_lines(dir / "T_node_attributes.txt", {"0.5, 1", "1.5, 2", "2.5", "3.5, 4", "4.5, 5"});
        try {
            load_tu_dataset(dir, "T");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
}

TEST_CASE("TU writer conventions and round trips") {
    SUBCASE("single edge is written in both directions") {
        Dataset ds;
        ds.name = "ONE";
        ds.num_classes = 1;
        ds.feature_dim = 1;
        ds.graphs.emplace_back(adjacency_from_edges(2, {{0, 1}}), Matrix::Ones(2, 1), 0);
        const fs::path dir = scratch_dir("tu_one");
        write_tu_dataset(ds, dir);
        CHECK(read_lines(dir / "ONE_A.txt") == std::vector<std::string>{"1, 2", "2, 1"});
    }
    SUBCASE("zero-width features emit no attribute file") {
        Dataset ds;
        ds.name = "BARE";
        ds.num_classes = 1;
        ds.feature_dim = 0;
        ds.graphs.emplace_back(adjacency_from_edges(2, {{0, 1}}), Matrix::Zero(2, 0), 0);
        const fs::path dir = scratch_dir("tu_bare");
        write_tu_dataset(ds, dir);
        CHECK(fs::exists(dir / "BARE_A.txt"));
        CHECK_FALSE(fs::exists(dir / "BARE_node_attributes.txt"));
    }
    SUBCASE("three random graphs survive write then load") {
        Rng rng(22);
        Dataset ds;
        ds.name = "RT";
        ds.num_classes = 3;
        ds.feature_dim = 2;
        for (std::size_t i = 0; i < 3; ++i) ds.graphs.push_back(support::random_graph(3 + 2 * i, 2, rng, 0.4, i));
        const fs::path dir = scratch_dir("tu_rt");
        write_tu_dataset(ds, dir);
        const Dataset back = load_tu_dataset(dir, "RT");
        REQUIRE(back.graphs.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) CHECK(back.graphs[i].same_structure(ds.graphs[i]));
    }
    SUBCASE("MUTAG-style fixture survives write then load") {
        const Dataset fixture = load_tu_dataset(support::data_dir() + "/MUTAG_FIXTURE", "MUTAG_FIXTURE");
        const fs::path dir = scratch_dir("tu_fixture");
        Dataset copy = fixture;
        copy.name = "COPY";
        write_tu_dataset(copy, dir);
        const Dataset back = load_tu_dataset(dir, "COPY");
        REQUIRE(back.graphs.size() == fixture.graphs.size());
        CHECK(back.num_classes == fixture.num_classes);
        for (std::size_t i = 0; i < back.graphs.size(); ++i) CHECK(back.graphs[i].same_structure(fixture.graphs[i]));
    }
}

TEST_CASE("COLORS-3 generator") {
    CHECK(colors3_label({1, 1, 1, 1}) == 0);
    CHECK(colors3_label({0, 0, 1, 2}) == 2);
    CHECK(colors3_label(std::vector<std::size_t>(15, 0)) == kColorsCountCap);

    const Dataset ds = gen_colors3(5500, 4, 25, 3);
    std::set<std::size_t> labels;
    for (const Graph& g : ds.graphs) {
        const std::size_t n = g.num_nodes();
        CHECK(n >= 4);
        CHECK(n <= 25);
        CHECK(g.feature_dim() == 3);
        CHECK((g.features().rowwise().sum().array() == 1.0).all());
        const auto zeros = static_cast<std::size_t>(g.features().col(0).sum());
        CHECK(*g.label() == std::min(zeros, kColorsCountCap));
        CHECK(g.num_edges() >= n - 1);
        labels.insert(*g.label());
    }
    CHECK(labels.size() >= 8);
}

TEST_CASE("TRIANGLES generator") {
    const Graph triangle(adjacency_from_edges(3, {{0, 1}, {1, 2}, {0, 2}}), Matrix::Ones(3, 1));
    CHECK(triangle_count(triangle.adjacency()) == 1);
    CHECK(triangle_count(Matrix::Ones(4, 4) - Matrix::Identity(4, 4)) == 4);

    const Dataset ds = gen_triangles(100, 4, 25, 5);
    for (const Graph& g : ds.graphs) {
        CHECK(*g.label() == std::min<std::size_t>(support::naive_triangles(g.adjacency()), 9));
        CHECK(g.features() == normalized_degree_features(g.adjacency()));
    }
}

TEST_CASE("generators are pure functions of their arguments") {
    const Dataset a = gen_colors3(50, 4, 25, 9);
    const Dataset b = gen_colors3(50, 4, 25, 9);
    const Dataset c = gen_triangles(50, 4, 25, 9);
    const Dataset d = gen_triangles(50, 4, 25, 9);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(a.graphs[i].same_structure(b.graphs[i]));
        CHECK(c.graphs[i].same_structure(d.graphs[i]));
    }
    CHECK(gen_erdos_renyi(30, 4).same_structure(gen_erdos_renyi(30, 4)));
}

TEST_CASE("Erdos-Renyi generator") {
    CHECK(gen_erdos_renyi(2, 1).num_edges() == 1);
    const Graph g = gen_erdos_renyi(100, 2);
    CHECK(g.num_edges() == 200);
    CHECK(g.feature_dim() == 128);
    CHECK(g.adjacency().diagonal().isZero());
    CHECK((g.features().array().abs() < 1.0).all());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Graph r = gen_erdos_renyi(5 + seed % 20, seed);
        std::size_t degree_sum = 0;
        for (std::size_t d : r.degrees()) degree_sum += d;
        CHECK(degree_sum == 2 * r.num_edges());
        const std::size_t n = r.num_nodes();
        CHECK(r.num_edges() == std::min(2 * n, n * (n - 1) / 2));
    }
}

TEST_CASE("edge perturbation") {
    Rng rng(23);
    const Graph g = support::random_graph(12, 2, rng, 0.5);
    CHECK(perturb_edges(g, 0.0, 1).same_structure(g));
    CHECK(perturb_edges(g, 1.0, 1).num_edges() == 0);

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < 40; ++i) edges.emplace_back(i, i + 1);
    const Graph path(adjacency_from_edges(41, edges), Matrix::Ones(41, 1), 1);
    const Graph half = perturb_edges(path, 0.5, 7);
    CHECK(half.num_edges() == 20);
    CHECK(half.features() == path.features());
    CHECK(half.label() == path.label());
    for (const auto& [u, v] : half.edges()) CHECK(path.has_edge(u, v));
    CHECK_THROWS_AS(perturb_edges(g, 1.5, 1), ArgumentError);
}

TEST_CASE("graph permutation") {
    Rng rng(24);
    const Graph g = support::random_graph(9, 3, rng, 0.4, 1);
    std::vector<std::size_t> identity(9);
    std::iota(identity.begin(), identity.end(), 0);
    CHECK(permute_graph(g, identity).same_structure(g));

    for (int trial = 0; trial < 100; ++trial) {
        const auto perm = random_permutation(rng, 9);
        const Graph p = permute_graph(g, perm);
        CHECK(degree_multiset(p) == degree_multiset(g));
        CHECK(triangle_count(p.adjacency()) == triangle_count(g.adjacency()));
        CHECK(p.label() == g.label());
        for (std::size_t i = 0; i < 9; ++i) CHECK(p.features().row(i) == g.features().row(perm[i]));
        CHECK(permute_graph(p, inverse_permutation(perm)).same_structure(g));
    }
    CHECK_THROWS_AS(permute_graph(g, {0, 0, 1, 2, 3, 4, 5, 6, 7}), ArgumentError);
    CHECK_THROWS_AS(permute_graph(g, {0, 1}), ArgumentError);
}

TEST_CASE("k-fold splits") {
    Rng rng(25);
    const Dataset ds = balanced_dataset(50, rng);
    const FoldPlan plan = kfold_split(ds, 10, 0.1, 3);
    REQUIRE(plan.folds.size() == 10);
    CHECK(plan.stratified);
    std::set<std::size_t> seen;
    for (const FoldSplit& f : plan.folds) {
        CHECK(f.test.size() == 10);
        check_partition(f, ds.graphs.size());
        for (std::size_t i : f.test) CHECK(seen.insert(i).second);
        std::size_t ones = 0;
        for (std::size_t i : f.test) ones += *ds.graphs[i].label();
        // Global ratio is 1/2, so a 10-graph fold should hold 5 +- 1 positives.
        CHECK(ones >= 4);
        CHECK(ones <= 6);
        CHECK_FALSE(f.val.empty());
    }
    CHECK(seen.size() == ds.graphs.size());

    const FoldPlan again = kfold_split(ds, 10, 0.1, 3);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(again.folds[k].train == plan.folds[k].train);
        CHECK(again.folds[k].val == plan.folds[k].val);
        CHECK(again.folds[k].test == plan.folds[k].test);
    }

    SUBCASE("a rare class falls back to an unstratified split with a warning") {
        Dataset skewed = balanced_dataset(10, rng);
        for (std::size_t i = 0; i < skewed.graphs.size(); ++i) {
            skewed.graphs[i] = skewed.graphs[i].with_label(i < 3 ? 1 : 0);
        }
        const FoldPlan fallback = kfold_split(skewed, 5, 0.1, 1);
        CHECK_FALSE(fallback.stratified);
        CHECK_FALSE(fallback.warnings.empty());
        for (const auto& f : fallback.folds) check_partition(f, skewed.graphs.size());
    }
    CHECK_THROWS_AS(kfold_split(balanced_dataset(2, rng), 10, 0.1, 1), ArgumentError);
}
