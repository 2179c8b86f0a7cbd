#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "midpool/nn/layers.hpp"

namespace midpool::pooling {

using autodiff::Tensor;

enum class ScorerKind { topk, sag, gsa };

std::string to_string(ScorerKind kind);
ScorerKind scorer_kind_from_string(const std::string& name);

/// Graph as seen by a pooling layer: binary adjacency, its normalized form, and
/// the current node features on the tape.
struct GraphState {
    Matrix adjacency;
    Tensor a_norm;
    Tensor x;

    static GraphState make(Matrix adjacency, Tensor x);
    std::size_t num_nodes() const { return static_cast<std::size_t>(adjacency.rows()); }
};

/// Per-node significance scores, n x h.
struct ScoreMatrix {
    Tensor scores;
    ScorerKind produced_by = ScorerKind::sag;

    std::size_t rows() const { return static_cast<std::size_t>(scores.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(scores.cols()); }
};

/// Score generator stage. New backbones (for instance an LEConv-based scorer for
/// ASAP or HGP-SL's Manhattan-distance scores) plug in by implementing this.
class ScoreGenerator {
public:
    virtual ~ScoreGenerator() = default;
    virtual ScoreMatrix score(const GraphState& state) const = 0;
    virtual ScorerKind kind() const = 0;
    virtual std::size_t in_dim() const = 0;
    virtual std::size_t score_dim() const = 0;
    virtual void collect_parameters(std::vector<Tensor>& out) const = 0;
};

/// S = X (P / ||P||_col). Each projection column normalized independently.
class TopKScorer final : public ScoreGenerator {
public:
    TopKScorer(std::size_t in_dim, std::size_t score_dim, Rng& rng);
    explicit TopKScorer(Tensor projection);

    ScoreMatrix score(const GraphState& state) const override;
    ScorerKind kind() const override { return ScorerKind::topk; }
    std::size_t in_dim() const override { return static_cast<std::size_t>(projection_.rows()); }
    std::size_t score_dim() const override { return static_cast<std::size_t>(projection_.cols()); }
    void collect_parameters(std::vector<Tensor>& out) const override;
    const Tensor& projection() const noexcept { return projection_; }

private:
    Tensor projection_;
};

/// S = tanh(A_norm X W), a bias-free auxiliary GCN.
class SagScorer final : public ScoreGenerator {
public:
    SagScorer(std::size_t in_dim, std::size_t score_dim, Rng& rng);

    ScoreMatrix score(const GraphState& state) const override;
    ScorerKind kind() const override { return ScorerKind::sag; }
    std::size_t in_dim() const override { return gcn_.in_dim(); }
    std::size_t score_dim() const override { return gcn_.out_dim(); }
    void collect_parameters(std::vector<Tensor>& out) const override;
    const nn::GcnLayer& gcn() const noexcept { return gcn_; }

private:
    nn::GcnLayer gcn_;
};

/// S = alpha tanh(A_norm X W1) + (1 - alpha) tanh(X W2).
class GsaScorer final : public ScoreGenerator {
public:
    GsaScorer(std::size_t in_dim, std::size_t score_dim, double alpha, Rng& rng);

    ScoreMatrix score(const GraphState& state) const override;
    ScorerKind kind() const override { return ScorerKind::gsa; }
    std::size_t in_dim() const override { return structure_.in_dim(); }
    std::size_t score_dim() const override { return structure_.out_dim(); }
    void collect_parameters(std::vector<Tensor>& out) const override;

    double alpha() const noexcept { return alpha_; }
    Tensor structure_branch(const GraphState& state) const;
    Tensor feature_branch(const GraphState& state) const;

private:
    nn::GcnLayer structure_;
    nn::Linear feature_;
    double alpha_;
};

std::unique_ptr<ScoreGenerator> make_scorer(ScorerKind kind, std::size_t in_dim,
                                            std::size_t score_dim, double gsa_alpha, Rng& rng);

}  // namespace midpool::pooling
