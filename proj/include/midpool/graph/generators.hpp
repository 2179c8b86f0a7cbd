#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "midpool/graph/graph.hpp"

namespace midpool::graph {

/// Color counts above this value share the top class.
inline constexpr std::size_t kColorsCountCap = 10;
inline constexpr std::size_t kColorsNumClasses = kColorsCountCap + 1;
inline constexpr std::size_t kTrianglesNumClasses = 10;

/// Label of a COLORS-3 graph: number of color-0 nodes, capped at kColorsCountCap.
std::size_t colors3_label(const std::vector<std::size_t>& colors);

/// COLORS-3 style counting task. Each graph: n ~ U[n_min, n_max], one-hot
/// colors from {0,1,2}, G(n, 0.1) edges plus a random spanning chain. Graph i is
/// generated from its own derived stream, so the output is a pure function of
/// the arguments. `id_offset` shifts graph ids (to keep split ids disjoint).
Dataset gen_colors3(std::size_t count, std::size_t n_min, std::size_t n_max, std::uint64_t seed,
                    std::int64_t id_offset = 0);

/// TRIANGLES style counting task: G(n, p) with p ~ U[0.05, 0.35], label = exact
/// triangle count clamped to [0, 9], normalized-degree features.
Dataset gen_triangles(std::size_t count, std::size_t n_min, std::size_t n_max, std::uint64_t seed,
                      std::int64_t id_offset = 0);

/// Exactly min(m_factor * n, n(n-1)/2) distinct undirected edges, features ~ U(-1, 1).
Graph gen_erdos_renyi(std::size_t n, std::uint64_t seed, std::size_t m_factor = 2,
                      std::size_t feature_dim = 128);

/// Removes floor(rate * |E|) undirected edges uniformly without replacement.
Graph perturb_edges(const Graph& g, double rate, std::uint64_t seed);
/// Same rule applied to a bare adjacency matrix.
Matrix perturb_adjacency(const Matrix& adjacency, double rate, std::uint64_t seed);

/// X' = P X, A' = P A P^T where row i of the result is old node perm[i].
/// Throws ArgumentError if perm is not a bijection on [0, n).
Graph permute_graph(const Graph& g, const std::vector<std::size_t>& perm);

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& perm);

}  // namespace midpool::graph
