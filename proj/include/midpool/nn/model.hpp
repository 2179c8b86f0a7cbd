#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "midpool/graph/graph.hpp"
#include "midpool/mid/mid.hpp"
#include "midpool/nn/layers.hpp"

namespace midpool::nn {

using mid::Mode;

struct ModelConfig {
    std::size_t in_dim = 0;
    std::size_t num_classes = 2;
    std::size_t hidden = 128;
    std::size_t blocks = 3;
    pooling::PoolConfig pool;
    mid::MidConfig mid;
    /// Sum a readout after every block; otherwise only the last block is read out.
    bool readout_every_block = true;
    ReadoutKind readout = ReadoutKind::mean_max;
    /// Fraction of edges removed from each pooling layer's input graph.
    double pool_edge_drop_rate = 0.0;
    /// Hidden width of the MLP head; 0 means `hidden`.
    std::size_t head_hidden = 0;

    /// Pooling ratio 1.0 keeps every node, so no pooling layer is built at all.
    bool pooling_enabled() const { return pool.ratio < 1.0; }
    /// Feature width leaving every block.
    std::size_t block_width() const;
    void validate() const;
};

/// What one block's pooling layer saw and chose.
struct BlockTrace {
    Matrix pool_input;   ///< features entering the pooling layer
    Matrix adjacency;    ///< adjacency entering the pooling layer
    Matrix scores;       ///< raw scorer output
    std::vector<double> rank_scores;
    std::vector<std::size_t> idx;
    mid::DropMask mask;
};

struct ForwardTrace {
    std::vector<BlockTrace> blocks;
    Matrix readout;  ///< summed readout fed to the head
};

/// L blocks of (GCN -> pooling), summed per-block readouts, MLP head.
class HierarchicalClassifier {
public:
    HierarchicalClassifier() = default;
    HierarchicalClassifier(const ModelConfig& config, std::uint64_t seed);

    /// 1 x num_classes logits. `stream_seed` feeds dropscore and edge dropping;
    /// eval mode with no edge dropping ignores it.
    Tensor forward(const graph::Graph& g, Mode mode, std::uint64_t stream_seed = 0,
                   ForwardTrace* trace = nullptr) const;
    Tensor forward(const Matrix& adjacency, const Matrix& features, Mode mode,
                   std::uint64_t stream_seed = 0, ForwardTrace* trace = nullptr,
                   const std::vector<std::optional<mid::DropMask>>& fixed_masks = {}) const;

    const ModelConfig& config() const noexcept { return config_; }
    std::vector<Tensor> parameters() const;
    std::vector<Matrix> snapshot() const;
    void restore(const std::vector<Matrix>& values);
    const mid::MidPoolLayer& pool_layer(std::size_t block) const { return pools_.at(block); }
    const GcnLayer& gcn_layer(std::size_t block) const { return gcns_.at(block); }

private:
    ModelConfig config_;
    std::vector<GcnLayer> gcns_;
    std::vector<mid::MidPoolLayer> pools_;
    MlpHead head_;
};

/// Softmax of eval-mode logits.
Matrix predict_proba(const HierarchicalClassifier& model, const graph::Graph& g);

struct AutoencoderConfig {
    std::size_t in_dim = 2;
    std::size_t hidden = 32;
    pooling::PoolConfig pool;
    mid::MidConfig mid;

    bool pooling_enabled() const { return pool.ratio < 1.0; }
};

struct AutoencoderTrace {
    std::vector<std::size_t> idx;
    Matrix unpooled;  ///< decoder input right after unpooling
};

/// GCN -> pool -> GCN -> unpool -> GCN, trained to reproduce node features.
class GraphAutoencoder {
public:
    GraphAutoencoder() = default;
    GraphAutoencoder(const AutoencoderConfig& config, std::uint64_t seed);

    Tensor forward(const graph::Graph& g, Mode mode, std::uint64_t stream_seed = 0,
                   AutoencoderTrace* trace = nullptr) const;

    const AutoencoderConfig& config() const noexcept { return config_; }
    std::vector<Tensor> parameters() const;

private:
    AutoencoderConfig config_;
    GcnLayer encoder_;
    std::optional<mid::MidPoolLayer> pool_;
    GcnLayer bottleneck_;
    GcnLayer decoder_;
};

}  // namespace midpool::nn
