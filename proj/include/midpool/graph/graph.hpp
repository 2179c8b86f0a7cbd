#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "midpool/autodiff/tensor.hpp"

namespace midpool::graph {

/// Undirected simple graph with dense adjacency and a node feature matrix.
///
/// Invariants (checked on construction): square symmetric 0/1 adjacency with an
/// empty diagonal, at least one node, and one feature row per node. Instances
/// are immutable; the normalized adjacency is computed once and shared between
/// copies.
class Graph {
public:
    Graph(Matrix adjacency, Matrix features, std::optional<std::size_t> label = std::nullopt,
          std::int64_t id = 0);

    std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(adjacency_.rows()); }
    std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    std::size_t num_edges() const noexcept { return num_edges_; }

    const Matrix& adjacency() const noexcept { return adjacency_; }
    const Matrix& features() const noexcept { return features_; }
    const std::optional<std::size_t>& label() const noexcept { return label_; }
    std::int64_t id() const noexcept { return id_; }

    bool has_edge(std::size_t i, std::size_t j) const {
        return adjacency_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0;
    }
    std::vector<std::size_t> neighbors(std::size_t i) const;
    std::vector<std::size_t> degrees() const;
    /// Undirected edge list with i < j, in row-major order.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

    /// D^-1/2 (A + I) D^-1/2, cached.
    const Matrix& normalized_adjacency() const;

    Graph with_features(Matrix features) const;
    Graph with_label(std::optional<std::size_t> label) const;
    Graph with_id(std::int64_t id) const;

    /// Structural equality: adjacency, features and label (ids ignored).
    bool same_structure(const Graph& other, double feature_tol = 0.0) const;

private:
    struct Cache;

    Matrix adjacency_;
    Matrix features_;
    std::optional<std::size_t> label_;
    std::int64_t id_;
    std::size_t num_edges_ = 0;
    std::shared_ptr<Cache> cache_;
};

/// D^-1/2 (A + I) D^-1/2 for an arbitrary symmetric 0/1 adjacency.
Matrix normalize_adjacency(const Matrix& adjacency);

/// Free-function form of Graph::normalized_adjacency.
const Matrix& normalized_adjacency(const Graph& g);

/// Builds a symmetric adjacency from undirected edges. Self-loops are ignored
/// and duplicates collapse.
Matrix adjacency_from_edges(std::size_t n,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Exact triangle count, trace(A^3) / 6.
std::size_t triangle_count(const Matrix& adjacency);

/// Column vector of degree / max(1, n - 1); the fallback node feature.
Matrix normalized_degree_features(const Matrix& adjacency);

/// Subgraph induced by `keep` (in the given order).
Matrix induced_adjacency(const Matrix& adjacency, const std::vector<std::size_t>& keep);

/// Graph with node `removed` and its incident edges deleted.
Graph remove_node(const Graph& g, std::size_t removed);

struct Dataset {
    std::string name;
    std::vector<Graph> graphs;
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;

    /// Throws ArgumentError when feature dims or labels violate the dataset invariants.
    void validate() const;
    double mean_nodes() const;
};

}  // namespace midpool::graph
