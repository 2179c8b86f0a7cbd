#include "midpool/pooling/scorers.hpp"

#include "midpool/errors.hpp"
#include "midpool/graph/graph.hpp"

namespace midpool::pooling {

namespace ad = autodiff;

std::string to_string(ScorerKind kind) {
    switch (kind) {
        case ScorerKind::topk: return "topk";
        case ScorerKind::sag: return "sag";
        case ScorerKind::gsa: return "gsa";
    }
    return "unknown";
}

ScorerKind scorer_kind_from_string(const std::string& name) {
    if (name == "topk") return ScorerKind::topk;
    if (name == "sag") return ScorerKind::sag;
    if (name == "gsa") return ScorerKind::gsa;
    throw ConfigError("unknown backbone '" + name + "' (expected topk, sag or gsa)");
}

GraphState GraphState::make(Matrix adjacency, Tensor x) {
    GraphState state;
    state.a_norm = Tensor::constant(graph::normalize_adjacency(adjacency));
    state.adjacency = std::move(adjacency);
    state.x = std::move(x);
    return state;
}

TopKScorer::TopKScorer(std::size_t in_dim, std::size_t score_dim, Rng& rng)
    : projection_(Tensor::parameter(nn::glorot(in_dim, score_dim, rng))) {
    if (in_dim == 0 || score_dim == 0) throw ConfigError("TopKScorer dimensions must be non-zero");
}

TopKScorer::TopKScorer(Tensor projection) : projection_(std::move(projection)) {}

ScoreMatrix TopKScorer::score(const GraphState& state) const {
    if (state.x.cols() != projection_.rows()) {
        throw ConfigError("TopKScorer expects " + std::to_string(projection_.rows()) +
                          " feature columns, got " + state.x.shape_str());
    }
    return {ad::matmul(state.x, ad::normalize_columns(projection_)), ScorerKind::topk};
}

void TopKScorer::collect_parameters(std::vector<Tensor>& out) const { out.push_back(projection_); }

SagScorer::SagScorer(std::size_t in_dim, std::size_t score_dim, Rng& rng)
    : gcn_(in_dim, score_dim, ad::UnaryKind::tanh, rng, /*with_bias=*/false) {}

ScoreMatrix SagScorer::score(const GraphState& state) const {
    return {gcn_.forward(state.x, state.a_norm), ScorerKind::sag};
}

void SagScorer::collect_parameters(std::vector<Tensor>& out) const { gcn_.collect_parameters(out); }

GsaScorer::GsaScorer(std::size_t in_dim, std::size_t score_dim, double alpha, Rng& rng)
    : structure_(in_dim, score_dim, ad::UnaryKind::tanh, rng, /*with_bias=*/false),
      feature_(in_dim, score_dim, rng, /*with_bias=*/false),
      alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ConfigError("gsa alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
}

Tensor GsaScorer::structure_branch(const GraphState& state) const {
    return structure_.forward(state.x, state.a_norm);
}

Tensor GsaScorer::feature_branch(const GraphState& state) const {
    return ad::apply_unary(feature_.forward(state.x), ad::UnaryKind::tanh);
}

ScoreMatrix GsaScorer::score(const GraphState& state) const {
    Tensor mixed = ad::add(ad::scale(structure_branch(state), alpha_),
                           ad::scale(feature_branch(state), 1.0 - alpha_));
    return {mixed, ScorerKind::gsa};
}

void GsaScorer::collect_parameters(std::vector<Tensor>& out) const {
    structure_.collect_parameters(out);
    feature_.collect_parameters(out);
}

std::unique_ptr<ScoreGenerator> make_scorer(ScorerKind kind, std::size_t in_dim,
                                            std::size_t score_dim, double gsa_alpha, Rng& rng) {
    switch (kind) {
        case ScorerKind::topk: return std::make_unique<TopKScorer>(in_dim, score_dim, rng);
        case ScorerKind::sag: return std::make_unique<SagScorer>(in_dim, score_dim, rng);
        case ScorerKind::gsa: return std::make_unique<GsaScorer>(in_dim, score_dim, gsa_alpha, rng);
    }
    throw ConfigError("unknown scorer kind");
}

}  // namespace midpool::pooling
