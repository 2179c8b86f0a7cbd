#include "midpool/nn/model.hpp"

#include "midpool/errors.hpp"
#include "midpool/graph/generators.hpp"

namespace midpool::nn {

namespace ad = autodiff;

std::size_t ModelConfig::block_width() const {
    return pooling_enabled() ? hidden * mid.width_factor() : hidden;
}

void ModelConfig::validate() const {
    if (in_dim == 0) throw ConfigError("model input dimension must be positive");
    if (num_classes < 2) throw ConfigError("a classifier needs at least two classes");
    if (hidden == 0) throw ConfigError("hidden dimension must be positive");
    if (blocks == 0) throw ConfigError("the model needs at least one block");
    if (!(pool_edge_drop_rate >= 0.0 && pool_edge_drop_rate <= 1.0)) {
        throw ConfigError("pool edge drop rate must lie in [0, 1]");
    }
    pool.validate();
    mid.validate(hidden);
}

HierarchicalClassifier::HierarchicalClassifier(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
    config_.validate();
    Rng rng(derive_seed(seed, {0x30DE1}));
    std::size_t width = config_.in_dim;
    for (std::size_t b = 0; b < config_.blocks; ++b) {
        gcns_.emplace_back(width, config_.hidden, UnaryKind::relu, rng);
        if (config_.pooling_enabled()) pools_.emplace_back(config_.hidden, config_.pool, config_.mid, rng);
        width = config_.block_width();
    }
    const std::size_t head_hidden = config_.head_hidden == 0 ? config_.hidden : config_.head_hidden;
    head_ = MlpHead(2 * config_.block_width(), head_hidden, config_.num_classes, rng);
}

Tensor HierarchicalClassifier::forward(const graph::Graph& g, Mode mode, std::uint64_t stream_seed,
                                       ForwardTrace* trace) const {
    return forward(g.adjacency(), g.features(), mode, stream_seed, trace);
}

Tensor HierarchicalClassifier::forward(const Matrix& adjacency, const Matrix& features, Mode mode,
                                       std::uint64_t stream_seed, ForwardTrace* trace,
                                       const std::vector<std::optional<mid::DropMask>>& fixed_masks) const {
    if (static_cast<std::size_t>(features.cols()) != config_.in_dim) {
        throw ConfigError("model expects " + std::to_string(config_.in_dim) +
                          " input features, got " + std::to_string(features.cols()));
    }
    if (trace != nullptr) trace->blocks.clear();

    Matrix adj = adjacency;
    Tensor a_norm = Tensor::constant(graph::normalize_adjacency(adj));
    Tensor x = Tensor::constant(features);
    Tensor summed;

    for (std::size_t b = 0; b < config_.blocks; ++b) {
        x = gcns_[b].forward(x, a_norm);
        if (config_.pooling_enabled()) {
            Matrix pool_adj = adj;
            if (config_.pool_edge_drop_rate > 0.0) {
                pool_adj = graph::perturb_adjacency(adj, config_.pool_edge_drop_rate,
                                                    derive_seed(stream_seed, {b, 0xED6E}));
            }
            auto state = pooling::GraphState::make(std::move(pool_adj), x);
            std::optional<mid::DropMask> fixed;
            if (b < fixed_masks.size()) fixed = fixed_masks[b];
            mid::MidPoolResult r = pools_[b].forward(state, mode, derive_seed(stream_seed, {b}), fixed);
            if (trace != nullptr) {
                trace->blocks.push_back({x.value(), state.adjacency, r.scores.scores.value(),
                                         r.rank_scores, r.pooled.idx, r.mask});
            }
            x = r.pooled.x;
            adj = std::move(r.pooled.adjacency);
            a_norm = Tensor::constant(graph::normalize_adjacency(adj));
        }
        if (config_.readout_every_block || b + 1 == config_.blocks) {
            Tensor r = readout(x, config_.readout);
            summed = summed.defined() ? ad::add(summed, r) : r;
        }
    }
    if (trace != nullptr) trace->readout = summed.value();
    return head_.forward(summed);
}

std::vector<Tensor> HierarchicalClassifier::parameters() const {
    std::vector<Tensor> out;
    for (std::size_t b = 0; b < gcns_.size(); ++b) {
        gcns_[b].collect_parameters(out);
        if (b < pools_.size()) pools_[b].collect_parameters(out);
    }
    head_.collect_parameters(out);
    return out;
}

std::vector<Matrix> HierarchicalClassifier::snapshot() const {
    std::vector<Matrix> values;
    for (const Tensor& p : parameters()) values.push_back(p.value());
    return values;
}

void HierarchicalClassifier::restore(const std::vector<Matrix>& values) {
    std::vector<Tensor> params = parameters();
    if (params.size() != values.size()) throw ConfigError("snapshot does not match the model");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].rows() != values[i].rows() || params[i].cols() != values[i].cols()) {
            throw ConfigError("snapshot tensor " + std::to_string(i) + " has the wrong shape");
        }
        params[i].mutable_value() = values[i];
    }
}

Matrix predict_proba(const HierarchicalClassifier& model, const graph::Graph& g) {
    return ad::softmax_row(model.forward(g, Mode::eval).value());
}

GraphAutoencoder::GraphAutoencoder(const AutoencoderConfig& config, std::uint64_t seed)
    : config_(config) {
    if (config_.in_dim == 0 || config_.hidden == 0) {
        throw ConfigError("autoencoder dimensions must be positive");
    }
    config_.pool.validate();
    config_.mid.validate(config_.hidden);
    Rng rng(derive_seed(seed, {0xAE}));
    encoder_ = GcnLayer(config_.in_dim, config_.hidden, UnaryKind::relu, rng);
    std::size_t width = config_.hidden;
    if (config_.pooling_enabled()) {
        pool_.emplace(config_.hidden, config_.pool, config_.mid, rng);
        width = pool_->out_dim();
    }
    bottleneck_ = GcnLayer(width, config_.hidden, UnaryKind::relu, rng);
    decoder_ = GcnLayer(config_.hidden, config_.in_dim, UnaryKind::identity, rng);
}

Tensor GraphAutoencoder::forward(const graph::Graph& g, Mode mode, std::uint64_t stream_seed,
                                 AutoencoderTrace* trace) const {
    Tensor a_norm = Tensor::constant(g.normalized_adjacency());
    Tensor h = encoder_.forward(Tensor::constant(g.features()), a_norm);
    Tensor unpooled;
    std::vector<std::size_t> idx;
    if (pool_) {
        auto state = pooling::GraphState::make(g.adjacency(), h);
        mid::MidPoolResult r = pool_->forward(state, mode, stream_seed);
        auto pooled_norm = Tensor::constant(graph::normalize_adjacency(r.pooled.adjacency));
        pooling::PooledGraph inner = r.pooled;
        inner.x = bottleneck_.forward(r.pooled.x, pooled_norm);
        unpooled = pooling::unpool(inner, g.num_nodes());
        idx = r.pooled.idx;
    } else {
        unpooled = bottleneck_.forward(h, a_norm);
        for (std::size_t i = 0; i < g.num_nodes(); ++i) idx.push_back(i);
    }
    if (trace != nullptr) {
        trace->idx = idx;
        trace->unpooled = unpooled.value();
    }
    return decoder_.forward(unpooled, a_norm);
}

std::vector<Tensor> GraphAutoencoder::parameters() const {
    std::vector<Tensor> out;
    encoder_.collect_parameters(out);
    if (pool_) pool_->collect_parameters(out);
    bottleneck_.collect_parameters(out);
    decoder_.collect_parameters(out);
    return out;
}

}  // namespace midpool::nn
