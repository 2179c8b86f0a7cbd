#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "midpool/nn/model.hpp"

namespace midpool::experiment {

inline constexpr const char* kVersion = "midpool 0.1.0";

enum class Task { classify, robustness, generalize, ablation, sweep, reconstruct, diagnose };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

struct TrainingConfig {
    double lr = 1e-3;
    double weight_decay = 1e-4;
    std::size_t max_epochs = 500;
    std::size_t patience = 50;
    /// Graphs per optimizer step; gradients are accumulated per graph.
    std::size_t batch_size = 128;
};

struct ExperimentConfig {
    Task task = Task::classify;

    /// A TU dataset name, or "colors3" / "triangles" for the generators.
    std::string dataset = "MUTAG";
    /// Directory holding {name}_A.txt and friends; overrides data_dir/name.
    std::string dataset_path;
    /// Root containing one directory per TU dataset. Empty means $MIDPOOL_DATA_DIR
    /// or "data".
    std::string data_dir;
    /// Keep a random subset of this many graphs (0 keeps all).
    std::size_t subsample = 0;
    std::uint64_t data_seed = 1;

    std::size_t gen_train = 1000;
    std::size_t gen_test = 200;
    std::size_t gen_n_min = 4;
    std::size_t gen_n_max = 25;
    std::size_t gen_large_n_min = 25;
    std::size_t gen_large_n_max = 200;

    /// in_dim and num_classes are filled from the dataset at run time.
    nn::ModelConfig model;
    TrainingConfig training;

    std::size_t folds = 10;
    double val_fraction = 0.1;
    /// Run only the first max_folds folds (0 runs all).
    std::size_t max_folds = 0;
    std::vector<std::uint64_t> seeds{0, 1, 2};

    std::vector<double> robustness_rates{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};

    /// Empty sweep axes hold the base value.
    std::vector<double> sweep_ratio;
    std::vector<std::size_t> sweep_blocks;
    std::vector<std::size_t> sweep_h;
    std::vector<double> sweep_p_s;

    std::vector<std::string> recon_graphs{"grid", "ring"};
    std::vector<double> recon_ratios{0.1, 0.2, 0.3, 0.4, 0.5};
    std::size_t recon_epochs = 500;
    std::size_t recon_hidden = 32;
    double recon_lr = 1e-2;

    std::string output;
    std::string format = "json";

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// MID switches used when a run asks for MID without further detail.
mid::MidConfig default_mid();

/// Sets one key. Throws ConfigError for unknown keys or malformed values.
void set_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` lines; `#` starts a comment; blank lines ignored.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::string& path);

/// Applies "key=value". Later overrides win over earlier ones and over the file.
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Every key with its current value, in key order.
std::map<std::string, std::string> echo(const ExperimentConfig& config);

/// Resolved dataset root: config.data_dir, then $MIDPOOL_DATA_DIR, then "data".
std::string data_root(const ExperimentConfig& config);

}  // namespace midpool::experiment
