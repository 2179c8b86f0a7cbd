#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "midpool/experiment/config.hpp"
#include "midpool/experiment/report.hpp"
#include "midpool/graph/splits.hpp"

namespace midpool::experiment {

/// Resolves the configured dataset: generators for colors3/triangles (their
/// training split), the TU loader otherwise. Applies `subsample`.
graph::Dataset resolve_dataset(const ExperimentConfig& config);

/// Random subset of `count` graphs (all if count is 0 or too large), original order kept.
graph::Dataset subsample_dataset(const graph::Dataset& dataset, std::size_t count, std::uint64_t seed);

/// Model configuration with input width and class count taken from the dataset.
nn::ModelConfig model_for(const ExperimentConfig& config, const graph::Dataset& dataset);

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainOutcome {
    std::size_t best_epoch = 0;  ///< 1-based epoch of the restored checkpoint
    std::size_t epochs_run = 0;
    double best_val_loss = 0.0;
    std::vector<EpochLog> history;
};

/// Adam with per-graph gradient accumulation (loss / batch length per graph),
/// early stopping on validation loss with the given patience, and the best
/// checkpoint restored at the end. An empty validation set monitors training
/// loss instead. Throws TrainingDivergedError on a non-finite loss.
TrainOutcome train_model(nn::HierarchicalClassifier& model, const graph::Dataset& dataset,
                         const std::vector<std::size_t>& train, const std::vector<std::size_t>& val,
                         const TrainingConfig& training, std::uint64_t stream_seed);

/// Stream seed for deterministic eval-mode forwards (only edge dropping uses it).
std::uint64_t eval_stream(std::uint64_t run_seed, const graph::Graph& g);

double mean_loss(const nn::HierarchicalClassifier& model, const graph::Dataset& dataset,
                 const std::vector<std::size_t>& idx, std::uint64_t run_seed);
/// Fraction of graphs whose arg-max logit (ties to the lower class) equals the label.
double accuracy(const nn::HierarchicalClassifier& model, const graph::Dataset& dataset,
                const std::vector<std::size_t>& idx, std::uint64_t run_seed);

/// Trains a fresh model on one fold and reports test accuracy at the best
/// validation checkpoint.
struct FoldOutcome {
    double test_accuracy = 0.0;
    double val_accuracy = 0.0;
    TrainOutcome training;
};
FoldOutcome run_fold(const graph::Dataset& dataset, const graph::FoldSplit& fold,
                     const nn::ModelConfig& model_config, const TrainingConfig& training,
                     std::uint64_t seed);

/// "<backbone>" or "<backbone>+mid".
std::string variant_name(const nn::ModelConfig& model);

/// Cross-validated classification over every seed: one "test_acc" record per
/// fold and seed, labelled with `variant` and `setting`.
std::vector<Record> cross_validate(const ExperimentConfig& config, const graph::Dataset& dataset,
                                   const nn::ModelConfig& model_config, const std::string& variant,
                                   const std::string& setting, std::vector<std::string>* warnings);

RunResult train_classifier(const ExperimentConfig& config);
RunResult run_robustness(const ExperimentConfig& config);
RunResult run_generalization(const ExperimentConfig& config);
RunResult run_ablation(const ExperimentConfig& config);
RunResult run_sweep(const ExperimentConfig& config);
RunResult run_reconstruction(const ExperimentConfig& config);
RunResult run_diagnose(const ExperimentConfig& config);

/// The five ablation rows: full MID, w/o flipscore, w/o dropscore, w/o multiscore, base.
std::vector<std::pair<std::string, mid::MidConfig>> ablation_variants(const mid::MidConfig& full);

/// Dispatches on config.task and stamps version, config echo and wall time.
RunResult run_experiment(const ExperimentConfig& config);

/// Coordinate graphs for reconstruction: features are 2-D node positions.
graph::Graph grid_graph(std::size_t rows, std::size_t cols);
graph::Graph ring_graph(std::size_t n);
graph::Graph reconstruction_graph(const std::string& name);

/// Final eval-mode feature MSE of an autoencoder trained on one graph.
struct ReconstructionOutcome {
    double mse = 0.0;
    std::vector<std::size_t> idx;
};
ReconstructionOutcome train_reconstruction(const graph::Graph& g, const nn::AutoencoderConfig& config,
                                           std::size_t epochs, double lr, std::uint64_t seed);

/// Mean over graphs of the information gain of the first pooling layer's
/// selection, measured on the graph's input node features (the smoothness
/// quantity is defined on the dataset's feature space, not on hidden layers).
double mean_first_layer_info_gain(const nn::HierarchicalClassifier& model,
                                  const graph::Dataset& dataset, const std::vector<std::size_t>& idx);

}  // namespace midpool::experiment
