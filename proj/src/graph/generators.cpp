#include "midpool/graph/generators.hpp"

#include <algorithm>
#include <cmath>

#include "midpool/errors.hpp"
#include "midpool/random.hpp"

namespace midpool::graph {

namespace {

void check_sizes(std::size_t count, std::size_t n_min, std::size_t n_max) {
    if (count < 1) throw ArgumentError("generator count must be >= 1");
    if (n_min < 1 || n_min > n_max) {
        throw ArgumentError("generator requires 1 <= n_min <= n_max, got [" +
                            std::to_string(n_min) + ", " + std::to_string(n_max) + "]");
    }
}

Matrix random_gnp(Rng& rng, std::size_t n, double p) {
    std::bernoulli_distribution coin(p);
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (coin(rng)) {
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
                a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
            }
        }
    }
    return a;
}

}  // namespace

std::size_t colors3_label(const std::vector<std::size_t>& colors) {
    const auto zeros = static_cast<std::size_t>(std::count(colors.begin(), colors.end(), 0U));
    return std::min(zeros, kColorsCountCap);
}

Dataset gen_colors3(std::size_t count, std::size_t n_min, std::size_t n_max, std::uint64_t seed,
                    std::int64_t id_offset) {
    check_sizes(count, n_min, n_max);
    Dataset ds;
    ds.name = "COLORS-3";
    ds.num_classes = kColorsNumClasses;
    ds.feature_dim = 3;
    ds.graphs.reserve(count);
    for (std::size_t g = 0; g < count; ++g) {
        Rng rng(derive_seed(seed, {0xC0105, g}));
        const std::size_t n = std::uniform_int_distribution<std::size_t>(n_min, n_max)(rng);
        std::vector<std::size_t> colors(n);
        std::uniform_int_distribution<std::size_t> pick(0, 2);
        for (auto& c : colors) c = pick(rng);

        Matrix a = random_gnp(rng, n, 0.1);
        const auto chain = random_permutation(rng, n);
        for (std::size_t i = 1; i < n; ++i) {
            const auto u = static_cast<Eigen::Index>(chain[i - 1]);
            const auto v = static_cast<Eigen::Index>(chain[i]);
            a(u, v) = 1.0;
            a(v, u) = 1.0;
        }
        Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n), 3);
        for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(colors[i])) = 1.0;
        ds.graphs.emplace_back(std::move(a), std::move(x), colors3_label(colors),
                               id_offset + static_cast<std::int64_t>(g));
    }
    return ds;
}

Dataset gen_triangles(std::size_t count, std::size_t n_min, std::size_t n_max, std::uint64_t seed,
                      std::int64_t id_offset) {
    check_sizes(count, n_min, n_max);
    Dataset ds;
    ds.name = "TRIANGLES";
    ds.num_classes = kTrianglesNumClasses;
    ds.feature_dim = 1;
    ds.graphs.reserve(count);
    for (std::size_t g = 0; g < count; ++g) {
        Rng rng(derive_seed(seed, {0x7819, g}));
        const std::size_t n = std::uniform_int_distribution<std::size_t>(n_min, n_max)(rng);
        const double p = std::uniform_real_distribution<double>(0.05, 0.35)(rng);
        Matrix a = random_gnp(rng, n, p);
        const std::size_t label = std::min<std::size_t>(triangle_count(a), kTrianglesNumClasses - 1);
        Matrix x = normalized_degree_features(a);
        ds.graphs.emplace_back(std::move(a), std::move(x), label,
                               id_offset + static_cast<std::int64_t>(g));
    }
    return ds;
}

Graph gen_erdos_renyi(std::size_t n, std::uint64_t seed, std::size_t m_factor,
                      std::size_t feature_dim) {
    if (n < 2) throw ArgumentError("gen_erdos_renyi requires n >= 2");
    Rng rng(derive_seed(seed, {0xE5D05, n}));
    const std::size_t max_edges = n * (n - 1) / 2;
    const std::size_t m = std::min(m_factor * n, max_edges);
    // Draw m distinct pair codes from the upper triangle.
    const auto codes = sample_without_replacement(rng, max_edges, m);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(m);
    for (std::size_t code : codes) {
        // Row i holds pairs (i, i+1..n-1); walk rows to decode.
        std::size_t i = 0;
        std::size_t rest = code;
        while (rest >= n - 1 - i) {
            rest -= n - 1 - i;
            ++i;
        }
        edges.emplace_back(i, i + 1 + rest);
    }
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_dim));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = unit(rng);
    return Graph(adjacency_from_edges(n, edges), std::move(x), std::nullopt,
                 static_cast<std::int64_t>(seed));
}

Matrix perturb_adjacency(const Matrix& adjacency, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ArgumentError("perturbation rate must lie in [0, 1]");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j) {
            if (adjacency(i, j) != 0.0) edges.emplace_back(i, j);
        }
    }
    const auto remove = static_cast<std::size_t>(std::floor(rate * static_cast<double>(edges.size()) + 1e-9));
    Matrix out = adjacency;
    if (remove == 0) return out;
    Rng rng(seed);
    for (std::size_t e : sample_without_replacement(rng, edges.size(), remove)) {
        const auto [i, j] = edges[e];
        out(i, j) = 0.0;
        out(j, i) = 0.0;
    }
    return out;
}

Graph perturb_edges(const Graph& g, double rate, std::uint64_t seed) {
    return Graph(perturb_adjacency(g.adjacency(), rate, seed), g.features(), g.label(), g.id());
}

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& perm) {
    std::vector<std::size_t> inv(perm.size(), perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] >= perm.size() || inv[perm[i]] != perm.size()) {
            throw ArgumentError("permutation is not a bijection");
        }
        inv[perm[i]] = i;
    }
    return inv;
}

Graph permute_graph(const Graph& g, const std::vector<std::size_t>& perm) {
    if (perm.size() != g.num_nodes()) {
        throw ArgumentError("permutation length " + std::to_string(perm.size()) + " for " +
                            std::to_string(g.num_nodes()) + " nodes");
    }
    (void)inverse_permutation(perm);  // bijection check
    const auto n = static_cast<Eigen::Index>(perm.size());
    Matrix a(n, n);
    Matrix x(n, g.features().cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto pi = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
        x.row(i) = g.features().row(pi);
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = g.adjacency()(pi, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
        }
    }
    return Graph(std::move(a), std::move(x), g.label(), g.id());
}

}  // namespace midpool::graph
