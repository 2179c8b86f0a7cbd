#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "midpool/graph/graph.hpp"

namespace midpool::graph {

/// Indices into Dataset::graphs for one cross-validation fold.
struct FoldSplit {
    std::size_t fold_index = 0;
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct FoldPlan {
    std::vector<FoldSplit> folds;
    bool stratified = true;
    /// Non-fatal notes, e.g. the unstratified fallback.
    std::vector<std::string> warnings;
};

/// Stratified k-fold split with a validation slice carved from each training
/// portion. Classes are shuffled independently and dealt round-robin with a
/// running offset, so fold sizes differ by at most one and per-fold class counts
/// by at most one from the global proportion. When a class has fewer than k
/// members the split falls back to an unstratified shuffle and records a warning.
FoldPlan kfold_split(const Dataset& dataset, std::size_t k, double val_fraction, std::uint64_t seed);

/// Throws if train/val/test of a fold overlap or miss a dataset index.
void check_partition(const FoldSplit& fold, std::size_t dataset_size);

}  // namespace midpool::graph
