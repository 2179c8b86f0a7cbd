// midpool command-line front end: run experiments, diagnose pooling layers,
// generate synthetic datasets.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "midpool/errors.hpp"
#include "midpool/experiment/runner.hpp"
#include "midpool/graph/generators.hpp"
#include "midpool/graph/tu_format.hpp"

namespace {

namespace ex = midpool::experiment;

constexpr int kExitConfig = 2;
constexpr int kExitIngestion = 3;
constexpr int kExitDiverged = 4;

struct OutputOptions {
    std::string out;
    std::string format;
    std::vector<std::string> overrides;
    std::int64_t seed = -1;
};

void apply_common(ex::ExperimentConfig& config, const OutputOptions& o) {
    for (const auto& kv : o.overrides) ex::apply_override(config, kv);
    if (o.seed >= 0) config.seeds = {static_cast<std::uint64_t>(o.seed)};
    if (!o.out.empty()) config.output = o.out;
    if (!o.format.empty()) config.format = o.format;
}

void deliver(const ex::RunResult& result, const ex::ExperimentConfig& config) {
    if (config.output.empty()) {
        std::cout << (config.format == "csv" ? ex::to_csv(result.records) : ex::to_json(result));
        return;
    }
    ex::emit_report(result, config.output, config.format);
    for (const auto& a : result.aggregates) {
        std::cerr << a.variant << (a.setting.empty() ? "" : " [" + a.setting + "]") << " " << a.metric
                  << ": " << a.mean << " +- " << a.std << " (n=" << a.count << ")\n";
    }
    std::cerr << "report written to " << config.output << "\n";
}

void add_output_options(CLI::App* cmd, OutputOptions& o) {
    cmd->add_option("--override", o.overrides, "Configuration override key=value (repeatable)");
    cmd->add_option("--seed", o.seed, "Run with this single seed");
    cmd->add_option("--out", o.out, "Report path (stdout when omitted)");
    cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Node-drop graph pooling with multidimensional, flipped and dropped scores"};
    app.require_subcommand(1);

    OutputOptions run_opts;
    std::string config_path;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Flat key = value config file")->required();
    add_output_options(run, run_opts);

    OutputOptions diag_opts;
    std::string diag_dataset;
    std::string diag_backbone = "sag";
    bool diag_mid = false;
    std::string diag_data_dir;
    auto* diagnose = app.add_subcommand("diagnose", "Train on one fold and report pooling diagnostics");
    diagnose->add_option("dataset", diag_dataset, "TU dataset name, colors3 or triangles")->required();
    diagnose->add_option("--backbone", diag_backbone, "Score generator")
        ->check(CLI::IsMember({"topk", "sag", "gsa"}));
    diagnose->add_flag("--mid", diag_mid, "Enable multiscore, flipscore and dropscore");
    diagnose->add_option("--data-dir", diag_data_dir, "Dataset root (default $MIDPOOL_DATA_DIR or data)");
    add_output_options(diagnose, diag_opts);

    std::string gen_kind;
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    std::size_t gen_count = 1000;
    std::size_t gen_n_min = 4;
    std::size_t gen_n_max = 25;
    std::size_t gen_nodes = 100;
    auto* gen = app.add_subcommand("gen", "Write a synthetic dataset in TU text format");
    gen->add_option("kind", gen_kind, "Generator")->required()->check(CLI::IsMember({"colors3", "triangles", "er"}));
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--count", gen_count, "Number of graphs (colors3, triangles)");
    gen->add_option("--n-min", gen_n_min, "Minimum node count");
    gen->add_option("--n-max", gen_n_max, "Maximum node count");
    gen->add_option("--nodes", gen_nodes, "Node count (er)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            ex::ExperimentConfig config = ex::load_config(config_path);
            apply_common(config, run_opts);
            deliver(ex::run_experiment(config), config);
        } else if (*diagnose) {
            ex::ExperimentConfig config;
            config.task = ex::Task::diagnose;
            config.dataset = diag_dataset;
            config.data_dir = diag_data_dir;
            config.model.pool.scorer = midpool::pooling::scorer_kind_from_string(diag_backbone);
            if (diag_mid) config.model.mid = ex::default_mid();
            apply_common(config, diag_opts);
            deliver(ex::run_experiment(config), config);
        } else if (*gen) {
            midpool::graph::Dataset ds;
            if (gen_kind == "colors3") {
                ds = midpool::graph::gen_colors3(gen_count, gen_n_min, gen_n_max, gen_seed);
            } else if (gen_kind == "triangles") {
                ds = midpool::graph::gen_triangles(gen_count, gen_n_min, gen_n_max, gen_seed);
            } else {
                ds.name = "ER";
                ds.num_classes = 1;
                ds.graphs.push_back(midpool::graph::gen_erdos_renyi(gen_nodes, gen_seed).with_label(0));
                ds.feature_dim = ds.graphs.front().feature_dim();
            }
            std::filesystem::create_directories(gen_out);
            midpool::graph::write_tu_dataset(ds, gen_out);
            std::cerr << "wrote " << ds.graphs.size() << " graphs (" << ds.name << ") to " << gen_out << "\n";
        }
    } catch (const midpool::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const midpool::IngestionError& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return kExitIngestion;
    } catch (const midpool::TrainingDivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_FAILURE;
    }
    return 0;
}
