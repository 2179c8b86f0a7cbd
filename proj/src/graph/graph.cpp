#include "midpool/graph/graph.hpp"

#include <cmath>
#include <mutex>

#include "midpool/errors.hpp"

namespace midpool::graph {

struct Graph::Cache {
    std::once_flag once;
    Matrix normalized;
};

Graph::Graph(Matrix adjacency, Matrix features, std::optional<std::size_t> label, std::int64_t id)
    : adjacency_(std::move(adjacency)),
      features_(std::move(features)),
      label_(label),
      id_(id),
      cache_(std::make_shared<Cache>()) {
    const Eigen::Index n = adjacency_.rows();
    if (n < 1) throw ArgumentError("graph must have at least one node");
    if (adjacency_.cols() != n) {
        throw ArgumentError("adjacency must be square, got " + std::to_string(n) + "x" +
                            std::to_string(adjacency_.cols()));
    }
    if (features_.rows() != n) {
        throw ArgumentError("feature rows (" + std::to_string(features_.rows()) +
                            ") differ from node count (" + std::to_string(n) + ")");
    }
    std::size_t twice_edges = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (adjacency_(i, i) != 0.0) throw ArgumentError("adjacency has a self-loop");
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = adjacency_(i, j);
            if (a != 0.0 && a != 1.0) throw ArgumentError("adjacency must be binary");
            if (a != adjacency_(j, i)) throw ArgumentError("adjacency must be symmetric");
            if (a != 0.0) ++twice_edges;
        }
    }
    num_edges_ = twice_edges / 2;
}

std::vector<std::size_t> Graph::neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < adjacency_.cols(); ++j) {
        if (adjacency_(row, j) != 0.0) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> out(num_nodes());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::size_t>(adjacency_.row(static_cast<Eigen::Index>(i)).sum());
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(num_edges_);
    const std::size_t n = num_nodes();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (has_edge(i, j)) out.emplace_back(i, j);
        }
    }
    return out;
}

const Matrix& Graph::normalized_adjacency() const {
    std::call_once(cache_->once, [this] { cache_->normalized = normalize_adjacency(adjacency_); });
    return cache_->normalized;
}

Graph Graph::with_features(Matrix features) const {
    return Graph(adjacency_, std::move(features), label_, id_);
}

Graph Graph::with_label(std::optional<std::size_t> label) const {
    Graph g = *this;
    g.label_ = label;
    return g;
}

Graph Graph::with_id(std::int64_t id) const {
    Graph g = *this;
    g.id_ = id;
    return g;
}

bool Graph::same_structure(const Graph& other, double feature_tol) const {
    if (num_nodes() != other.num_nodes() || feature_dim() != other.feature_dim()) return false;
    if (label_ != other.label_) return false;
    if (adjacency_ != other.adjacency_) return false;
    if (features_.size() == 0) return true;
    return (features_ - other.features_).cwiseAbs().maxCoeff() <= feature_tol;
}

Matrix normalize_adjacency(const Matrix& adjacency) {
    const Eigen::Index n = adjacency.rows();
    Matrix tilde = adjacency + Matrix::Identity(n, n);
    Eigen::VectorXd inv_sqrt = tilde.rowwise().sum().array().rsqrt();
    return inv_sqrt.asDiagonal() * tilde * inv_sqrt.asDiagonal();
}

const Matrix& normalized_adjacency(const Graph& g) { return g.normalized_adjacency(); }

Matrix adjacency_from_edges(std::size_t n,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) {
            throw IndexError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                             ") outside " + std::to_string(n) + " nodes");
        }
        if (u == v) continue;
        a(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
        a(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = 1.0;
    }
    return a;
}

std::size_t triangle_count(const Matrix& adjacency) {
    const Matrix a2 = adjacency * adjacency;
    const double trace = a2.cwiseProduct(adjacency.transpose()).sum();
    return static_cast<std::size_t>(std::llround(trace / 6.0));
}

Matrix normalized_degree_features(const Matrix& adjacency) {
    const Eigen::Index n = adjacency.rows();
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    Matrix x = adjacency.rowwise().sum() / denom;
    return x;
}

Matrix induced_adjacency(const Matrix& adjacency, const std::vector<std::size_t>& keep) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    Matrix out(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            out(i, j) = adjacency(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(i)]),
                                  static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)]));
        }
    }
    return out;
}

Graph remove_node(const Graph& g, std::size_t removed) {
    const std::size_t n = g.num_nodes();
    if (removed >= n) throw IndexError("remove_node: index out of range");
    if (n < 2) throw ArgumentError("remove_node: cannot empty a single-node graph");
    std::vector<std::size_t> keep;
    keep.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i != removed) keep.push_back(i);
    }
    Matrix x(static_cast<Eigen::Index>(keep.size()), g.features().cols());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        x.row(static_cast<Eigen::Index>(j)) = g.features().row(static_cast<Eigen::Index>(keep[j]));
    }
    return Graph(induced_adjacency(g.adjacency(), keep), std::move(x), g.label(), g.id());
}

void Dataset::validate() const {
    for (const auto& g : graphs) {
        if (g.feature_dim() != feature_dim) {
            throw ArgumentError("graph " + std::to_string(g.id()) + " has feature dim " +
                                std::to_string(g.feature_dim()) + ", dataset expects " +
                                std::to_string(feature_dim));
        }
        if (g.label() && *g.label() >= num_classes) {
            throw ArgumentError("graph " + std::to_string(g.id()) + " label " +
                                std::to_string(*g.label()) + " outside [0, " +
                                std::to_string(num_classes) + ")");
        }
    }
}

double Dataset::mean_nodes() const {
    if (graphs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& g : graphs) total += static_cast<double>(g.num_nodes());
    return total / static_cast<double>(graphs.size());
}

}  // namespace midpool::graph
