#pragma once

// Shared fixtures and independent oracles for the unit and acceptance suites.
// Nothing here calls into the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "midpool/autodiff/ops.hpp"
#include "midpool/graph/graph.hpp"
#include "midpool/random.hpp"

namespace support {

using midpool::Matrix;
using midpool::Rng;
using midpool::autodiff::Tensor;

inline Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0,
                             double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

inline Matrix random_adjacency(std::size_t n, double p, Rng& rng) {
    std::bernoulli_distribution edge(p);
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (edge(rng)) a(i, j) = a(j, i) = 1.0;
        }
    }
    return a;
}

/// G(n, p) plus a random spanning path, so every node has a neighbour when n > 1.
inline Matrix connected_adjacency(std::size_t n, double p, Rng& rng) {
    Matrix a = random_adjacency(n, p, rng);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 1; i < n; ++i) a(order[i - 1], order[i]) = a(order[i], order[i - 1]) = 1.0;
    return a;
}

inline midpool::graph::Graph random_graph(std::size_t n, std::size_t c, Rng& rng, double p = 0.3,
                                          std::optional<std::size_t> label = std::nullopt) {
    return midpool::graph::Graph(connected_adjacency(n, p, rng), uniform_matrix(n, c, rng), label);
}

// ---- autodiff oracle -------------------------------------------------------

/// Central finite differences of `loss` with respect to every entry of every
/// parameter, compared with the analytic gradient from one backward pass.
/// Returns the worst per-tensor error max|g_a - g_n| / max(max|g_n|, floor).
inline double gradient_error(std::vector<Tensor> params, const std::function<Tensor()>& loss,
                             double eps = 1e-5, double floor = 1e-6) {
    for (auto& p : params) p.zero_grad();
    midpool::autodiff::backward(loss());
    std::vector<Matrix> analytic;
    for (const auto& p : params) analytic.push_back(p.grad());

    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& v = params[k].mutable_value();
        Matrix numeric(v.rows(), v.cols());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double saved = v.data()[i];
            v.data()[i] = saved + eps;
            const double up = loss().item();
            v.data()[i] = saved - eps;
            const double down = loss().item();
            v.data()[i] = saved;
            numeric.data()[i] = (up - down) / (2.0 * eps);
        }
        const double scale = std::max(numeric.cwiseAbs().maxCoeff(), floor);
        const double diff = (analytic[k] - numeric).cwiseAbs().maxCoeff();
        worst = std::max(worst, diff / scale);
    }
    for (auto& p : params) p.zero_grad();
    return worst;
}

// ---- graph oracles ---------------------------------------------------------

inline Matrix naive_normalized_adjacency(const Matrix& a) {
    const Eigen::Index n = a.rows();
    std::vector<double> deg(static_cast<std::size_t>(n), 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) deg[i] += a(i, j);
    }
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double aij = a(i, j) + (i == j ? 1.0 : 0.0);
            out(i, j) = aij / std::sqrt(deg[i] * deg[j]);
        }
    }
    return out;
}

/// act(A_norm X W + b) with explicit loops.
inline Matrix naive_gcn(const Matrix& a_norm, const Matrix& x, const Matrix& w, const Matrix& b,
                        const std::function<double(double)>& act) {
    const Eigen::Index n = x.rows();
    const Eigen::Index out = w.cols();
    Matrix y(n, out);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index o = 0; o < out; ++o) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index t = 0; t < x.cols(); ++t) acc += a_norm(i, j) * x(j, t) * w(t, o);
            }
            y(i, o) = act(acc + (b.size() > 0 ? b(0, o) : 0.0));
        }
    }
    return y;
}

inline std::size_t naive_triangles(const Matrix& a) {
    std::size_t count = 0;
    const Eigen::Index n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            for (Eigen::Index k = j + 1; k < n; ++k) {
                if (a(i, j) != 0.0 && a(j, k) != 0.0 && a(i, k) != 0.0) ++count;
            }
        }
    }
    return count;
}

inline Matrix naive_subgraph(const Matrix& a, const std::vector<std::size_t>& keep) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    Matrix out(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) out(i, j) = a(keep[i], keep[j]);
    }
    return out;
}

/// Ranks indices by descending score with ties to the lower index, keeps the
/// first `keep` not excluded, and returns them ascending.
inline std::vector<std::size_t> sort_topk(const std::vector<double>& scores, std::size_t keep,
                                          const std::vector<std::size_t>& excluded = {}) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::find(excluded.begin(), excluded.end(), i) == excluded.end()) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return scores[l] > scores[r]; });
    order.resize(std::min(keep, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

/// sum over selected v of (sum over neighbours u of (x_v - x_u))^2, elementwise,
/// then summed over columns and divided by |E| c. Plain loops throughout.
inline double naive_info_gain(const Matrix& a, const Matrix& x, const std::vector<std::size_t>& sel) {
    const Eigen::Index n = a.rows();
    const Eigen::Index c = x.cols();
    double edges = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) edges += a(i, j);
    }
    double total = 0.0;
    for (Eigen::Index t = 0; t < c; ++t) {
        double column = 0.0;
        for (std::size_t v : sel) {
            double diff = 0.0;
            for (Eigen::Index u = 0; u < n; ++u) {
                if (a(v, u) != 0.0) diff += x(v, t) - x(u, t);
            }
            column += diff * diff;
        }
        total += std::abs(column);
    }
    return total / (edges * static_cast<double>(c));
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting half.
inline double pairwise_auc(const std::vector<double>& pred, const std::vector<bool>& positive) {
    double good = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < pred.size(); ++j) {
            if (positive[j]) continue;
            pairs += 1.0;
            if (pred[i] > pred[j]) good += 1.0;
            else if (pred[i] == pred[j]) good += 0.5;
        }
    }
    return good / pairs;
}

inline std::vector<int> bfs_distances(const Matrix& a, std::size_t source) {
    std::vector<int> dist(static_cast<std::size_t>(a.rows()), -1);
    std::queue<std::size_t> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const std::size_t v = q.front();
        q.pop();
        for (Eigen::Index u = 0; u < a.rows(); ++u) {
            if (a(v, u) != 0.0 && dist[u] < 0) {
                dist[u] = dist[v] + 1;
                q.push(static_cast<std::size_t>(u));
            }
        }
    }
    return dist;
}

/// Mean pairwise hop distance per connected component (components holding at
/// least two selected nodes), averaged over those components.
inline double naive_spread(const Matrix& a, const std::vector<std::size_t>& idx) {
    std::vector<int> component(idx.size(), -1);
    std::vector<double> sums;
    std::vector<double> counts;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto dist = bfs_distances(a, idx[i]);
        if (component[i] < 0) {
            component[i] = static_cast<int>(sums.size());
            sums.push_back(0.0);
            counts.push_back(0.0);
        }
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            if (dist[idx[j]] < 0) continue;
            component[j] = component[i];
            sums[component[i]] += dist[idx[j]];
            counts[component[i]] += 1.0;
        }
    }
    double total = 0.0;
    double used = 0.0;
    for (std::size_t k = 0; k < sums.size(); ++k) {
        if (counts[k] > 0.0) {
            total += sums[k] / counts[k];
            used += 1.0;
        }
    }
    return used > 0.0 ? total / used : std::numeric_limits<double>::quiet_NaN();
}

/// Test-data directory baked in by CMake.
inline std::string data_dir() { return MIDPOOL_TEST_DATA_DIR; }

}  // namespace support
