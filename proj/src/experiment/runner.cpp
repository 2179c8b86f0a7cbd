#include "midpool/experiment/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "midpool/autodiff/adam.hpp"
#include "midpool/diagnostics/diagnostics.hpp"
#include "midpool/errors.hpp"
#include "midpool/graph/generators.hpp"
#include "midpool/graph/tu_format.hpp"

namespace midpool::experiment {

namespace ad = autodiff;
using autodiff::Tensor;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

RunResult make_result(const ExperimentConfig& config, Task task, std::vector<Record> records,
                      std::vector<std::string> warnings, Clock::time_point start) {
    RunResult r;
    r.task = to_string(task);
    r.version = kVersion;
    r.config = echo(config);
    r.config["task"] = r.task;
    r.records = std::move(records);
    r.aggregates = aggregate(r.records);
    r.warnings = std::move(warnings);
    r.wall_time_s = seconds_since(start);
    return r;
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::size_t label_of(const graph::Graph& g) {
    if (!g.label()) throw ConfigError("graph " + std::to_string(g.id()) + " has no label");
    return *g.label();
}

std::size_t arg_max(const Matrix& row) {
    std::size_t best = 0;
    for (Eigen::Index j = 1; j < row.cols(); ++j) {
        if (row(0, j) > row(0, static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(j);
    }
    return best;
}

bool is_generated(const std::string& name) { return name == "colors3" || name == "triangles"; }

graph::Dataset generate(const std::string& name, std::size_t count, std::size_t n_min, std::size_t n_max,
                        std::uint64_t seed, std::int64_t id_offset) {
    if (name == "colors3") return graph::gen_colors3(count, n_min, n_max, seed, id_offset);
    return graph::gen_triangles(count, n_min, n_max, seed, id_offset);
}

}  // namespace

graph::Dataset subsample_dataset(const graph::Dataset& dataset, std::size_t count, std::uint64_t seed) {
    if (count == 0 || count >= dataset.graphs.size()) return dataset;
    Rng rng(derive_seed(seed, {0x5AB5}));
    std::vector<std::size_t> pick = sample_without_replacement(rng, dataset.graphs.size(), count);
    std::sort(pick.begin(), pick.end());
    graph::Dataset out;
    out.name = dataset.name;
    out.num_classes = dataset.num_classes;
    out.feature_dim = dataset.feature_dim;
    for (std::size_t i : pick) out.graphs.push_back(dataset.graphs[i]);
    return out;
}

graph::Dataset resolve_dataset(const ExperimentConfig& config) {
    graph::Dataset ds;
    if (is_generated(config.dataset)) {
        ds = generate(config.dataset, config.gen_train, config.gen_n_min, config.gen_n_max,
                      config.data_seed, 0);
    } else {
        const std::filesystem::path dir = config.dataset_path.empty()
                                              ? std::filesystem::path(data_root(config)) / config.dataset
                                              : std::filesystem::path(config.dataset_path);
        ds = graph::load_tu_dataset(dir, config.dataset);
    }
    return subsample_dataset(ds, config.subsample, config.data_seed);
}

nn::ModelConfig model_for(const ExperimentConfig& config, const graph::Dataset& dataset) {
    nn::ModelConfig m = config.model;
    m.in_dim = dataset.feature_dim;
    m.num_classes = std::max<std::size_t>(dataset.num_classes, 2);
    return m;
}

std::uint64_t eval_stream(std::uint64_t run_seed, const graph::Graph& g) {
    return derive_seed(run_seed, {0xE7A1, static_cast<std::uint64_t>(g.id())});
}

double mean_loss(const nn::HierarchicalClassifier& model, const graph::Dataset& dataset,
                 const std::vector<std::size_t>& idx, std::uint64_t run_seed) {
    if (idx.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i : idx) {
        const graph::Graph& g = dataset.graphs[i];
        Tensor logits = model.forward(g, nn::Mode::eval, eval_stream(run_seed, g));
        total += ad::cross_entropy(logits, label_of(g)).item();
    }
    return total / static_cast<double>(idx.size());
}

double accuracy(const nn::HierarchicalClassifier& model, const graph::Dataset& dataset,
                const std::vector<std::size_t>& idx, std::uint64_t run_seed) {
    if (idx.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i : idx) {
        const graph::Graph& g = dataset.graphs[i];
        const Matrix logits = model.forward(g, nn::Mode::eval, eval_stream(run_seed, g)).value();
        if (arg_max(logits) == label_of(g)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

TrainOutcome train_model(nn::HierarchicalClassifier& model, const graph::Dataset& dataset,
                         const std::vector<std::size_t>& train, const std::vector<std::size_t>& val,
                         const TrainingConfig& training, std::uint64_t stream_seed) {
    if (train.empty()) throw ConfigError("training split is empty");
    std::vector<Tensor> params = model.parameters();
    ad::AdamOptions opts;
    opts.lr = training.lr;
    opts.weight_decay = training.weight_decay;
    ad::AdamState state = ad::AdamState::for_params(params, opts);

    TrainOutcome out;
    out.best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<Matrix> best = model.snapshot();
    std::size_t wait = 0;
    std::vector<std::size_t> order = train;

    for (std::size_t epoch = 1; epoch <= training.max_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(stream_seed, {epoch, 0x5F}));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += training.batch_size) {
            const std::size_t end = std::min(order.size(), start + training.batch_size);
            const double inv_len = 1.0 / static_cast<double>(end - start);
            for (std::size_t p = start; p < end; ++p) {
                const std::size_t i = order[p];
                const graph::Graph& g = dataset.graphs[i];
                Tensor logits = model.forward(g, nn::Mode::train, derive_seed(stream_seed, {epoch, i}));
                Tensor loss = ad::cross_entropy(logits, label_of(g));
                const double value = loss.item();
                if (!std::isfinite(value)) throw TrainingDivergedError(static_cast<int>(epoch));
                total += value;
                ad::backward(ad::scale(loss, inv_len));
            }
            ad::adam_step(params, state);
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = total / static_cast<double>(order.size());
        log.val_loss = val.empty() ? log.train_loss : mean_loss(model, dataset, val, stream_seed);
        if (!std::isfinite(log.val_loss)) throw TrainingDivergedError(static_cast<int>(epoch));
        out.history.push_back(log);
        out.epochs_run = epoch;

        if (log.val_loss < out.best_val_loss) {
            out.best_val_loss = log.val_loss;
            out.best_epoch = epoch;
            best = model.snapshot();
            wait = 0;
        } else if (++wait >= training.patience) {
            break;
        }
    }
    model.restore(best);
    return out;
}

FoldOutcome run_fold(const graph::Dataset& dataset, const graph::FoldSplit& fold,
                     const nn::ModelConfig& model_config, const TrainingConfig& training,
                     std::uint64_t seed) {
    graph::check_partition(fold, dataset.graphs.size());
    // Fold isolation also holds at the level of graph ids.
    std::set<std::int64_t> seen;
    for (std::size_t i : fold.train) seen.insert(dataset.graphs[i].id());
    for (std::size_t i : fold.val) seen.insert(dataset.graphs[i].id());
    for (std::size_t i : fold.test) {
        if (seen.count(dataset.graphs[i].id()) != 0) {
            throw std::logic_error("test graph id " + std::to_string(dataset.graphs[i].id()) +
                                   " also appears in the training data");
        }
    }

    const std::uint64_t run_seed = derive_seed(seed, {fold.fold_index, 0x57});
    nn::HierarchicalClassifier model(model_config, derive_seed(seed, {fold.fold_index, 0x30DE}));
    FoldOutcome out;
    out.training = train_model(model, dataset, fold.train, fold.val, training, run_seed);
    out.test_accuracy = accuracy(model, dataset, fold.test, run_seed);
    out.val_accuracy = accuracy(model, dataset, fold.val, run_seed);
    return out;
}

std::string variant_name(const nn::ModelConfig& model) {
    const std::string backbone = pooling::to_string(model.pool.scorer);
    return model.mid.is_disabled() ? backbone : backbone + "+mid";
}

std::vector<Record> cross_validate(const ExperimentConfig& config, const graph::Dataset& dataset,
                                   const nn::ModelConfig& model_config, const std::string& variant,
                                   const std::string& setting, std::vector<std::string>* warnings) {
    std::vector<Record> records;
    for (std::uint64_t seed : config.seeds) {
        const graph::FoldPlan plan =
            graph::kfold_split(dataset, config.folds, config.val_fraction, derive_seed(seed, {0xF01D}));
        if (warnings != nullptr) {
            for (const auto& w : plan.warnings) {
                if (std::find(warnings->begin(), warnings->end(), w) == warnings->end()) warnings->push_back(w);
            }
        }
        const std::size_t n_folds =
            config.max_folds == 0 ? plan.folds.size() : std::min(config.max_folds, plan.folds.size());
        for (std::size_t f = 0; f < n_folds; ++f) {
            const FoldOutcome o = run_fold(dataset, plan.folds[f], model_config, config.training, seed);
            records.push_back({variant, setting, seed, static_cast<std::int64_t>(f), "test_acc",
                               o.test_accuracy, static_cast<std::int64_t>(o.training.best_epoch),
                               static_cast<std::int64_t>(o.training.epochs_run)});
        }
    }
    return records;
}

RunResult train_classifier(const ExperimentConfig& config) {
    const auto start = Clock::now();
    config.validate();
    const graph::Dataset ds = resolve_dataset(config);
    const nn::ModelConfig mc = model_for(config, ds);
    std::vector<std::string> warnings;
    auto records = cross_validate(config, ds, mc, variant_name(mc), "", &warnings);
    return make_result(config, Task::classify, std::move(records), std::move(warnings), start);
}

RunResult run_robustness(const ExperimentConfig& config) {
    const auto start = Clock::now();
    config.validate();
    const graph::Dataset ds = resolve_dataset(config);
    std::vector<std::string> warnings;
    std::vector<Record> records;
    for (double rate : config.robustness_rates) {
        nn::ModelConfig mc = model_for(config, ds);
        mc.pool_edge_drop_rate = rate;
        auto part = cross_validate(config, ds, mc, variant_name(mc), "edge_drop=" + fmt_num(rate), &warnings);
        records.insert(records.end(), part.begin(), part.end());
    }
    return make_result(config, Task::robustness, std::move(records), std::move(warnings), start);
}

RunResult run_generalization(const ExperimentConfig& config) {
    const auto start = Clock::now();
    config.validate();
    if (!is_generated(config.dataset)) {
        throw ConfigError("generalization needs a generated dataset (colors3 or triangles)");
    }
    const auto n_train = static_cast<std::int64_t>(config.gen_train);
    const auto n_test = static_cast<std::int64_t>(config.gen_test);
    graph::Dataset all = generate(config.dataset, config.gen_train, config.gen_n_min, config.gen_n_max,
                                  derive_seed(config.data_seed, {0}), 0);
    const graph::Dataset origin = generate(config.dataset, config.gen_test, config.gen_n_min,
                                           config.gen_n_max, derive_seed(config.data_seed, {1}), n_train);
    const graph::Dataset large = generate(config.dataset, config.gen_test, config.gen_large_n_min,
                                          config.gen_large_n_max, derive_seed(config.data_seed, {2}),
                                          n_train + n_test);
    all.graphs.insert(all.graphs.end(), origin.graphs.begin(), origin.graphs.end());
    all.graphs.insert(all.graphs.end(), large.graphs.begin(), large.graphs.end());

    std::vector<std::size_t> origin_idx;
    std::vector<std::size_t> large_idx;
    for (std::size_t i = 0; i < config.gen_test; ++i) {
        origin_idx.push_back(config.gen_train + i);
        large_idx.push_back(config.gen_train + config.gen_test + i);
    }

    const nn::ModelConfig mc = model_for(config, all);
    const std::string variant = variant_name(mc);
    std::vector<Record> records;
    for (std::uint64_t seed : config.seeds) {
        std::vector<std::size_t> pool(config.gen_train);
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        Rng rng(derive_seed(seed, {0x7A1}));
        std::shuffle(pool.begin(), pool.end(), rng);
        const auto n_val = static_cast<std::size_t>(
            std::llround(config.val_fraction * static_cast<double>(pool.size())));
        std::vector<std::size_t> val(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
        std::vector<std::size_t> train(pool.begin() + static_cast<std::ptrdiff_t>(n_val), pool.end());
        std::sort(val.begin(), val.end());
        std::sort(train.begin(), train.end());

        const std::uint64_t run_seed = derive_seed(seed, {0x57});
        nn::HierarchicalClassifier model(mc, derive_seed(seed, {0x30DE}));
        const TrainOutcome t = train_model(model, all, train, val, config.training, run_seed);
        const auto best = static_cast<std::int64_t>(t.best_epoch);
        const auto ran = static_cast<std::int64_t>(t.epochs_run);
        records.push_back({variant, "", seed, -1, "test_origin_acc", accuracy(model, all, origin_idx, run_seed),
                           best, ran});
        records.push_back({variant, "", seed, -1, "test_large_acc", accuracy(model, all, large_idx, run_seed),
                           best, ran});
    }
    return make_result(config, Task::generalize, std::move(records), {}, start);
}

std::vector<std::pair<std::string, mid::MidConfig>> ablation_variants(const mid::MidConfig& full) {
    mid::MidConfig no_flip = full;
    no_flip.flip = false;
    mid::MidConfig no_drop = full;
    no_drop.drop = false;
    mid::MidConfig no_multi = full;
    no_multi.h = 1;
    return {{"mid", full},
            {"w/o flipscore", no_flip},
            {"w/o dropscore", no_drop},
            {"w/o multiscore", no_multi},
            {"base", mid::MidConfig::disabled()}};
}

namespace {

std::string describe_mid(const mid::MidConfig& m) {
    return "h=" + std::to_string(m.h) + ",p_s=" + fmt_num(m.p_s) + ",flip=" + (m.flip ? "true" : "false") +
           ",drop=" + (m.drop ? "true" : "false") + ",feature_map=" + mid::to_string(m.feature_map);
}

}  // namespace

RunResult run_ablation(const ExperimentConfig& config) {
    const auto start = Clock::now();
    config.validate();
    const mid::MidConfig& full = config.model.mid;
    if (!(full.h > 1 && full.flip && full.drop && full.p_s > 0.0)) {
        throw ConfigError("ablation needs every MID component on (h > 1, flip, drop with p_s > 0)");
    }
    const graph::Dataset ds = resolve_dataset(config);
    std::vector<std::string> warnings;
    std::vector<Record> records;
    std::vector<std::pair<std::string, std::string>> described;
    for (const auto& [name, m] : ablation_variants(full)) {
        nn::ModelConfig mc = model_for(config, ds);
        mc.mid = m;
        described.emplace_back(name, describe_mid(m));
        auto part = cross_validate(config, ds, mc, name, "", &warnings);
        records.insert(records.end(), part.begin(), part.end());
    }
    RunResult r = make_result(config, Task::ablation, std::move(records), std::move(warnings), start);
    for (const auto& [name, text] : described) r.config["variant." + name] = text;
    return r;
}

RunResult run_sweep(const ExperimentConfig& config) {
    const auto start = Clock::now();
    config.validate();
    const graph::Dataset ds = resolve_dataset(config);
    const nn::ModelConfig base = model_for(config, ds);
    const std::vector<double> ratios = config.sweep_ratio.empty() ? std::vector<double>{base.pool.ratio}
                                                                  : config.sweep_ratio;
    const std::vector<std::size_t> blocks = config.sweep_blocks.empty() ? std::vector<std::size_t>{base.blocks}
                                                                        : config.sweep_blocks;
    const std::vector<std::size_t> hs = config.sweep_h.empty() ? std::vector<std::size_t>{base.mid.h}
                                                               : config.sweep_h;
    const std::vector<double> pss = config.sweep_p_s.empty() ? std::vector<double>{base.mid.p_s}
                                                             : config.sweep_p_s;
    std::vector<std::string> warnings;
    std::vector<Record> records;
    for (double ratio : ratios) {
        for (std::size_t b : blocks) {
            for (std::size_t h : hs) {
                for (double p_s : pss) {
                    nn::ModelConfig mc = base;
                    mc.pool.ratio = ratio;
                    mc.blocks = b;
                    mc.mid.h = h;
                    mc.mid.p_s = p_s;
                    const std::string setting = "ratio=" + fmt_num(ratio) + ";blocks=" + std::to_string(b) +
                                                ";h=" + std::to_string(h) + ";p_s=" + fmt_num(p_s);
                    const auto per_fold = cross_validate(config, ds, mc, variant_name(mc), setting, &warnings);
                    for (std::uint64_t seed : config.seeds) {
                        double sum = 0.0;
                        std::size_t count = 0;
                        for (const Record& r : per_fold) {
                            if (r.seed == seed) {
                                sum += r.value;
                                ++count;
                            }
                        }
                        records.push_back({variant_name(mc), setting, seed, -1, "mean_test_acc",
                                           sum / static_cast<double>(count), -1, -1});
                    }
                }
            }
        }
    }
    return make_result(config, Task::sweep, std::move(records), std::move(warnings), start);
}

graph::Graph grid_graph(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw ConfigError("grid dimensions must be positive");
    const std::size_t n = rows * cols;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    Matrix pos(static_cast<Eigen::Index>(n), 2);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t v = r * cols + c;
            pos(static_cast<Eigen::Index>(v), 0) = cols > 1 ? 2.0 * static_cast<double>(c) / static_cast<double>(cols - 1) - 1.0 : 0.0;
            pos(static_cast<Eigen::Index>(v), 1) = rows > 1 ? 2.0 * static_cast<double>(r) / static_cast<double>(rows - 1) - 1.0 : 0.0;
            if (c + 1 < cols) edges.emplace_back(v, v + 1);
            if (r + 1 < rows) edges.emplace_back(v, v + cols);
        }
    }
    return graph::Graph(graph::adjacency_from_edges(n, edges), pos);
}

graph::Graph ring_graph(std::size_t n) {
    if (n < 3) throw ConfigError("a ring needs at least three nodes");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    Matrix pos(static_cast<Eigen::Index>(n), 2);
    for (std::size_t v = 0; v < n; ++v) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(v) / static_cast<double>(n);
        pos(static_cast<Eigen::Index>(v), 0) = std::cos(angle);
        pos(static_cast<Eigen::Index>(v), 1) = std::sin(angle);
        edges.emplace_back(v, (v + 1) % n);
    }
    return graph::Graph(graph::adjacency_from_edges(n, edges), pos);
}

graph::Graph reconstruction_graph(const std::string& name) {
    if (name == "grid") return grid_graph(6, 6);
    if (name == "ring") return ring_graph(24);
    throw ConfigError("unknown reconstruction graph '" + name + "' (expected grid or ring)");
}

ReconstructionOutcome train_reconstruction(const graph::Graph& g, const nn::AutoencoderConfig& config,
                                           std::size_t epochs, double lr, std::uint64_t seed) {
    nn::GraphAutoencoder ae(config, derive_seed(seed, {0xAE0}));
    std::vector<Tensor> params = ae.parameters();
    ad::AdamOptions opts;
    opts.lr = lr;
    ad::AdamState state = ad::AdamState::for_params(params, opts);
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        Tensor loss = ad::mse_loss(ae.forward(g, nn::Mode::train, derive_seed(seed, {epoch})), g.features());
        if (!std::isfinite(loss.item())) throw TrainingDivergedError(static_cast<int>(epoch));
        ad::backward(loss);
        ad::adam_step(params, state);
    }
    nn::AutoencoderTrace trace;
    ReconstructionOutcome out;
    out.mse = ad::mse_loss(ae.forward(g, nn::Mode::eval, 0, &trace), g.features()).item();
    out.idx = trace.idx;
    return out;
}

RunResult run_reconstruction(const ExperimentConfig& config) {
    const auto start = Clock::now();
    config.validate();
    std::vector<std::pair<std::string, mid::MidConfig>> variants{{"base", mid::MidConfig::disabled()}};
    if (!config.model.mid.is_disabled()) variants.emplace_back("mid", config.model.mid);

    std::vector<Record> records;
    for (const std::string& name : config.recon_graphs) {
        const graph::Graph g = reconstruction_graph(name);
        for (double ratio : config.recon_ratios) {
            for (const auto& [variant, m] : variants) {
                nn::AutoencoderConfig ac;
                ac.in_dim = g.feature_dim();
                ac.hidden = config.recon_hidden;
                ac.pool = config.model.pool;
                ac.pool.ratio = ratio;
                ac.mid = m;
                for (std::uint64_t seed : config.seeds) {
                    const auto o = train_reconstruction(g, ac, config.recon_epochs, config.recon_lr, seed);
                    records.push_back({variant, "graph=" + name + ";ratio=" + fmt_num(ratio), seed, -1, "mse",
                                       o.mse, -1, static_cast<std::int64_t>(config.recon_epochs)});
                }
            }
        }
    }
    return make_result(config, Task::reconstruct, std::move(records), {}, start);
}

double mean_first_layer_info_gain(const nn::HierarchicalClassifier& model,
                                  const graph::Dataset& dataset, const std::vector<std::size_t>& idx) {
    if (!model.config().pooling_enabled()) throw DiagnosticError("the model has no pooling layer");
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t i : idx) {
        const graph::Graph& g = dataset.graphs[i];
        if (g.num_edges() == 0) continue;
        nn::ForwardTrace trace;
        model.forward(g, nn::Mode::eval, 0, &trace);
        const nn::BlockTrace& b = trace.blocks.front();
        total += diagnostics::info_gain(b.adjacency, g.features(), b.idx);
        ++counted;
    }
    if (counted == 0) throw DiagnosticError("no graph with edges to measure");
    return total / static_cast<double>(counted);
}

RunResult run_diagnose(const ExperimentConfig& config) {
    const auto start = Clock::now();
    config.validate();
    const graph::Dataset ds = resolve_dataset(config);
    const nn::ModelConfig mc = model_for(config, ds);
    if (!mc.pooling_enabled()) throw ConfigError("diagnose needs a pooling ratio below 1");
    const std::uint64_t seed = config.seeds.front();
    const graph::FoldPlan plan =
        graph::kfold_split(ds, config.folds, config.val_fraction, derive_seed(seed, {0xF01D}));
    const graph::FoldSplit& fold = plan.folds.front();
    const std::uint64_t run_seed = derive_seed(seed, {fold.fold_index, 0x57});
    nn::HierarchicalClassifier model(mc, derive_seed(seed, {fold.fold_index, 0x30DE}));
    const TrainOutcome t = train_model(model, ds, fold.train, fold.val, config.training, run_seed);

    const auto* topk = dynamic_cast<const pooling::TopKScorer*>(&model.pool_layer(0).scorer());
    double auc_sum = 0.0, gain_sum = 0.0, spread_sum = 0.0;
    std::size_t auc_n = 0, gain_n = 0, spread_n = 0, violations = 0;
    for (std::size_t i : fold.test) {
        const graph::Graph& g = ds.graphs[i];
        nn::ForwardTrace trace;
        model.forward(g, nn::Mode::eval, 0, &trace);
        const nn::BlockTrace& b = trace.blocks.front();
        if (g.num_nodes() >= 2) {
            const auto auc = diagnostics::score_correctness_auc(
                b.rank_scores, diagnostics::ground_truth_scores(model, g), mc.pool.ratio);
            if (!auc.degenerate) {
                auc_sum += auc.auc;
                ++auc_n;
            }
        }
        if (g.num_edges() > 0) {
            gain_sum += diagnostics::info_gain(b.adjacency, g.features(), b.idx);
            ++gain_n;
        }
        if (topk != nullptr && topk->score_dim() == 1) {
            violations += diagnostics::trapped_bound_check(b.pool_input, topk->projection().value()).violations;
        }
        try {
            spread_sum += diagnostics::selection_spread(b.adjacency, b.idx);
            ++spread_n;
        } catch (const DiagnosticError&) {
            // Selections with no two nodes in one component have no spread.
        }
    }

    const std::string variant = variant_name(mc);
    const auto best = static_cast<std::int64_t>(t.best_epoch);
    const auto ran = static_cast<std::int64_t>(t.epochs_run);
    std::vector<Record> records;
    records.push_back({variant, "", seed, 0, "test_acc", accuracy(model, ds, fold.test, run_seed), best, ran});
    if (auc_n > 0) records.push_back({variant, "", seed, 0, "auc", auc_sum / static_cast<double>(auc_n), best, ran});
    if (gain_n > 0) {
        records.push_back({variant, "", seed, 0, "info_gain", gain_sum / static_cast<double>(gain_n), best, ran});
    }
    if (topk != nullptr && topk->score_dim() == 1) {
        records.push_back({variant, "", seed, 0, "trapped_violations", static_cast<double>(violations), best, ran});
    }
    if (spread_n > 0) {
        records.push_back({variant, "", seed, 0, "spread", spread_sum / static_cast<double>(spread_n), best, ran});
    }
    return make_result(config, Task::diagnose, std::move(records), plan.warnings, start);
}

RunResult run_experiment(const ExperimentConfig& config) {
    switch (config.task) {
        case Task::classify: return train_classifier(config);
        case Task::robustness: return run_robustness(config);
        case Task::generalize: return run_generalization(config);
        case Task::ablation: return run_ablation(config);
        case Task::sweep: return run_sweep(config);
        case Task::reconstruct: return run_reconstruction(config);
        case Task::diagnose: return run_diagnose(config);
    }
    throw ConfigError("unknown task");
}

}  // namespace midpool::experiment
