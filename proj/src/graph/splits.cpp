#include "midpool/graph/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "midpool/errors.hpp"
#include "midpool/random.hpp"

namespace midpool::graph {

FoldPlan kfold_split(const Dataset& dataset, std::size_t k, double val_fraction, std::uint64_t seed) {
    const std::size_t total = dataset.graphs.size();
    if (k < 2) throw ArgumentError("kfold_split requires k >= 2");
    if (total < k) {
        throw ArgumentError("kfold_split: " + std::to_string(total) + " graphs for " +
                            std::to_string(k) + " folds");
    }
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
        throw ArgumentError("kfold_split: val_fraction must lie in [0, 1)");
    }

    FoldPlan plan;
    Rng rng(derive_seed(seed, {0xF01D}));

    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < total; ++i) {
        const auto& label = dataset.graphs[i].label();
        by_class[label ? *label : 0].push_back(i);
    }
    for (const auto& [cls, members] : by_class) {
        if (members.size() < k) {
            plan.stratified = false;
            plan.warnings.push_back("class " + std::to_string(cls) + " has " +
                                    std::to_string(members.size()) +
                                    " graphs (< k); using an unstratified split");
        }
    }

    std::vector<std::vector<std::size_t>> buckets(k);
    std::size_t deal = 0;
    auto deal_all = [&](const std::vector<std::size_t>& members) {
        const auto order = random_permutation(rng, members.size());
        for (std::size_t pos : order) buckets[deal++ % k].push_back(members[pos]);
    };
    if (plan.stratified) {
        for (const auto& [cls, members] : by_class) deal_all(members);
    } else {
        std::vector<std::size_t> all(total);
        for (std::size_t i = 0; i < total; ++i) all[i] = i;
        deal_all(all);
    }

    for (std::size_t f = 0; f < k; ++f) {
        FoldSplit split;
        split.fold_index = f;
        split.test = buckets[f];
        std::sort(split.test.begin(), split.test.end());

        std::vector<std::size_t> rest;
        for (std::size_t b = 0; b < k; ++b) {
            if (b != f) rest.insert(rest.end(), buckets[b].begin(), buckets[b].end());
        }
        std::sort(rest.begin(), rest.end());
        Rng fold_rng(derive_seed(seed, {0xF01D, f}));
        const auto order = random_permutation(fold_rng, rest.size());
        const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(rest.size())));
        for (std::size_t i = 0; i < order.size(); ++i) {
            (i < n_val ? split.val : split.train).push_back(rest[order[i]]);
        }
        std::sort(split.val.begin(), split.val.end());
        std::sort(split.train.begin(), split.train.end());
        plan.folds.push_back(std::move(split));
    }
    return plan;
}

void check_partition(const FoldSplit& fold, std::size_t dataset_size) {
    std::vector<int> seen(dataset_size, 0);
    for (const auto* part : {&fold.train, &fold.val, &fold.test}) {
        for (std::size_t i : *part) {
            if (i >= dataset_size) throw IndexError("fold index out of range");
            if (seen[i]++ != 0) {
                throw Error("fold " + std::to_string(fold.fold_index) + ": graph " +
                            std::to_string(i) + " appears in more than one split");
            }
        }
    }
    for (std::size_t i = 0; i < dataset_size; ++i) {
        if (seen[i] == 0) {
            throw Error("fold " + std::to_string(fold.fold_index) + ": graph " +
                        std::to_string(i) + " is in no split");
        }
    }
}

}  // namespace midpool::graph
