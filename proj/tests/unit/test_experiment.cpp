#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sys/wait.h>

#include "midpool/errors.hpp"
#include "midpool/experiment/runner.hpp"
#include "midpool/graph/generators.hpp"
#include "midpool/graph/tu_format.hpp"
#include "support.hpp"

using namespace midpool;
using namespace midpool::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("midpool_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig fixture_config() {
    ExperimentConfig c;
    c.dataset = "MUTAG_FIXTURE";
    c.dataset_path = support::data_dir() + "/MUTAG_FIXTURE";
    c.subsample = 40;
    c.folds = 2;
    c.max_folds = 1;
    c.seeds = {0};
    c.model.hidden = 8;
    c.training.max_epochs = 3;
    c.training.patience = 3;
    c.training.batch_size = 16;
    c.training.lr = 0.01;
    return c;
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(MIDPOOL_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(
        "# comment\n"
        "task = sweep\n"
        "dataset = NCI1\n"
        "\n"
        "backbone = gsa\n"
        "ratio = 0.25\n"
        "mid = on\n"
        "seeds = 3, 4\n"
        "sweep_h = 1,3\n"
        "lr = 0.005  \n");
    CHECK(c.task == Task::sweep);
    CHECK(c.dataset == "NCI1");
    CHECK(c.model.pool.scorer == pooling::ScorerKind::gsa);
    CHECK(c.model.pool.ratio == 0.25);
    CHECK(c.model.mid.h == default_mid().h);
    CHECK(c.model.mid.flip);
    CHECK(c.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(c.sweep_h == std::vector<std::size_t>{1, 3});
    CHECK(c.training.lr == 0.005);

    ExperimentConfig o = c;
    apply_override(o, "h=7");
    apply_override(o, "h = 2");
    CHECK(o.model.mid.h == 2);
    apply_override(o, "mid=off");
    CHECK(o.model.mid.is_disabled());

    const auto echoed = echo(c);
    CHECK(echoed.at("ratio") == "0.25");
    CHECK(echoed.at("seeds") == "3,4");
    CHECK(echoed.at("readout") == "mean-max");
    ExperimentConfig replay;
    for (const auto& [k, v] : echoed) {
        if (!v.empty()) set_value(replay, k, v);
    }
    CHECK(echo(replay) == echoed);

    CHECK_THROWS_AS(parse_config("nonsense = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("ratio = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just a line\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("flip = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("backbone = diffpool\n"), ConfigError);
    CHECK_THROWS_AS(apply_override(o, "no_equals_sign"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/midpool.cfg"), Error);

    ExperimentConfig bad;
    bad.seeds.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ExperimentConfig{};
    bad.training.patience = bad.training.max_epochs + 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ExperimentConfig{};
    bad.folds = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ExperimentConfig{};
    bad.format = "xml";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("reports round trip") {
    RunResult r;
    r.task = "classify";
    r.version = "x";
    r.config = {{"lr", "0.01"}, {"dataset", "MUTAG"}};
    r.records = {{"topk", "", 0, 0, "test_acc", 0.5, 3, 7},
                 {"topk", "", 0, 1, "test_acc", 0.75, 2, 6},
                 {"topk", "", 1, 0, "test_acc", 1.0, 4, 9},
                 {"topk+mid", "rate=0.1", 0, -1, "mse", 0.125, -1, -1}};
    r.aggregates = aggregate(r.records);
    r.warnings = {"something, with a comma"};
    r.wall_time_s = 1.5;

    REQUIRE(r.aggregates.size() == 2);
    const Aggregate& a = find_aggregate(r, "topk", "test_acc");
    CHECK(a.count == 3);
    CHECK(a.mean == doctest::Approx(0.75));
    CHECK(a.std == doctest::Approx(0.25));
    CHECK(find_aggregate(r, "topk+mid", "mse", "rate=0.1").std == 0.0);
    CHECK_THROWS_AS(find_aggregate(r, "sag", "test_acc"), ArgumentError);

    const RunResult back = from_json(to_json(r));
    CHECK(back.records == r.records);
    CHECK(back.aggregates == r.aggregates);
    CHECK(back.config == r.config);
    CHECK(back.warnings == r.warnings);
    CHECK(back.wall_time_s == r.wall_time_s);
    CHECK(to_json(r, false) == to_json(back, false));

    const std::string csv = to_csv(r.records);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    const auto rows = records_from_csv(csv);
    CHECK(rows == r.records);
    CHECK(aggregate(rows) == r.aggregates);

    const fs::path dir = scratch("report");
    emit_report(r, (dir / "r.json").string(), "json");
    emit_report(r, (dir / "r.csv").string(), "csv");
    CHECK(read_report_json((dir / "r.json").string()).records == r.records);
    CHECK(read_records_csv((dir / "r.csv").string()) == r.records);
    CHECK_THROWS_AS(emit_report(r, (dir / "missing" / "r.json").string(), "json"), IoError);
}

TEST_CASE("classification runs are deterministic") {
    ExperimentConfig c = fixture_config();
    c.model.mid = default_mid();
    const RunResult a = train_classifier(c);
    const RunResult b = train_classifier(c);
    REQUIRE(a.records.size() == 1);
    CHECK(a.records == b.records);
    CHECK(to_json(a, false) == to_json(b, false));
    CHECK(a.records.front().value >= 0.0);
    CHECK(a.records.front().value <= 1.0);
    CHECK(a.records.front().variant == "sag+mid");

    c.seeds = {0, 1};
    c.max_folds = 0;
    const RunResult all = train_classifier(c);
    CHECK(all.records.size() == 4);
    CHECK(all.aggregates.size() == 1);
    CHECK(all.aggregates.front().count == 4);
}

TEST_CASE("pooling ratio 1.0 gives the plain GCN classifier") {
    const graph::Dataset ds = subsample_dataset(
        graph::load_tu_dataset(support::data_dir() + "/MUTAG_FIXTURE", "MUTAG_FIXTURE"), 20, 2);
    nn::ModelConfig c;
    c.in_dim = ds.feature_dim;
    c.num_classes = ds.num_classes;
    c.hidden = 8;
    c.blocks = 2;
    c.pool.ratio = 1.0;
    const nn::HierarchicalClassifier model(c, 3);
    CHECK(!c.pooling_enabled());
    for (const auto& g : ds.graphs) {
        nn::ForwardTrace trace;
        model.forward(g, nn::Mode::eval, 0, &trace);
        for (const auto& b : trace.blocks) CHECK(b.idx.size() == g.num_nodes());
    }
}

TEST_CASE("a single graph is memorized") {
    Rng rng(81);
    graph::Dataset ds;
    ds.name = "one";
    ds.num_classes = 2;
    ds.graphs.push_back(support::random_graph(9, 3, rng, 0.4, 1));
    ds.feature_dim = 3;
    for (const mid::MidConfig& m : {mid::MidConfig::disabled(), default_mid()}) {
        nn::ModelConfig c;
        c.in_dim = 3;
        c.num_classes = 2;
        c.hidden = 8;
        c.mid = m;
        nn::HierarchicalClassifier model(c, 4);
        TrainingConfig t;
        t.lr = 0.01;
        t.max_epochs = 200;
        t.patience = 200;
        t.batch_size = 1;
        const TrainOutcome out = train_model(model, ds, {0}, {}, t, 5);
        CHECK(out.best_val_loss < 0.05);
        CHECK(accuracy(model, ds, {0}, 5) == 1.0);
    }
}

TEST_CASE("robustness, ablation and sweep record layout") {
    ExperimentConfig c = fixture_config();
    c.training.max_epochs = 1;
    c.training.patience = 1;
    c.subsample = 24;

    c.robustness_rates = {0.0, 0.3};
    const RunResult robust = run_robustness(c);
    CHECK(robust.records.size() == 2);
    std::set<std::string> settings;
    for (const auto& r : robust.records) settings.insert(r.setting);
    CHECK(settings == std::set<std::string>{"edge_drop=0", "edge_drop=0.3"});

    c.model.mid = default_mid();
    const RunResult ablation = run_ablation(c);
    CHECK(ablation.records.size() == 5);
    CHECK(ablation.aggregates.size() == 5);
    CHECK(ablation.config.count("variant.w/o flipscore") == 1);
    const auto variants = ablation_variants(default_mid());
    CHECK(!variants[1].second.flip);
    CHECK(!variants[2].second.drop);
    CHECK(variants[3].second.h == 1);
    CHECK(variants[4].second.is_disabled());

    ExperimentConfig no_mid = c;
    no_mid.model.mid = mid::MidConfig::disabled();
    CHECK_THROWS_AS(run_ablation(no_mid), ConfigError);

    c.seeds = {0, 1};
    c.sweep_ratio = {0.3, 0.6};
    c.sweep_h = {1, 2};
    const RunResult sweep = run_sweep(c);
    CHECK(sweep.records.size() == 4 * 2);
    for (const auto& r : sweep.records) CHECK(r.metric == "mean_test_acc");
}

TEST_CASE("generalization splits are disjoint") {
    const graph::Dataset train = graph::gen_colors3(30, 4, 25, 5, 0);
    const graph::Dataset origin = graph::gen_colors3(10, 4, 25, 6, 30);
    const graph::Dataset large = graph::gen_colors3(10, 25, 60, 7, 40);
    std::set<std::int64_t> ids;
    for (const auto* ds : {&train, &origin, &large}) {
        for (const auto& g : ds->graphs) ids.insert(g.id());
    }
    CHECK(ids.size() == 50);
    for (const auto& g : large.graphs) CHECK(g.num_nodes() >= 25);

    ExperimentConfig c;
    c.task = Task::generalize;
    c.dataset = "colors3";
    c.gen_train = 30;
    c.gen_test = 10;
    c.gen_large_n_max = 40;
    c.seeds = {0};
    c.model.hidden = 8;
    c.training.max_epochs = 2;
    c.training.patience = 2;
    const RunResult r = run_generalization(c);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].metric == "test_origin_acc");
    CHECK(r.records[1].metric == "test_large_acc");

    c.dataset = "MUTAG";
    CHECK_THROWS_AS(run_generalization(c), ConfigError);
}

TEST_CASE("reconstruction") {
    const graph::Graph grid = grid_graph(3, 4);
    CHECK(grid.num_nodes() == 12);
    CHECK(grid.num_edges() == 17);
    CHECK(ring_graph(10).num_edges() == 10);
    CHECK_THROWS_AS(reconstruction_graph("torus"), ConfigError);

    nn::AutoencoderConfig ac;
    ac.in_dim = 2;
    ac.hidden = 8;
    ac.pool.ratio = 0.5;
    const auto first = train_reconstruction(ring_graph(12), ac, 5, 0.01, 1);
    const auto second = train_reconstruction(ring_graph(12), ac, 5, 0.01, 1);
    CHECK(first.mse == second.mse);
    CHECK(first.idx.size() == 6);
    CHECK(std::isfinite(first.mse));

    ExperimentConfig c;
    c.task = Task::reconstruct;
    c.recon_graphs = {"ring"};
    c.recon_ratios = {0.25, 0.5};
    c.recon_epochs = 2;
    c.recon_hidden = 4;
    c.seeds = {0, 1};
    c.model.mid = default_mid();
    const RunResult r = run_experiment(c);
    CHECK(r.records.size() == 2 * 2 * 2);
    CHECK(r.task == "reconstruct");
}

TEST_CASE("command line") {
    const fs::path dir = scratch("cli");
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("run " + (dir / "absent.cfg").string()) != 0);

    write_file(dir / "bad.cfg", "ratio = 2.5x\n");
    CHECK(run_cli("run " + (dir / "bad.cfg").string()) == 2);

    write_file(dir / "missing.cfg", "dataset = NOPE\ndata_dir = " + (dir / "nowhere").string() + "\n");
    CHECK(run_cli("run " + (dir / "missing.cfg").string()) == 3);

    write_file(dir / "ok.cfg",
               "dataset = MUTAG_FIXTURE\n"
               "dataset_path = " + support::data_dir() + "/MUTAG_FIXTURE\n"
               "subsample = 20\nfolds = 2\nmax_folds = 1\nhidden = 4\nmax_epochs = 1\npatience = 1\n");
    const fs::path out = dir / "out.csv";
    CHECK(run_cli("run " + (dir / "ok.cfg").string() + " --seed 3 --format csv --out " + out.string() +
                  " --override mid=on") == 0);
    const auto rows = read_records_csv(out.string());
    REQUIRE(rows.size() == 1);
    CHECK(rows.front().seed == 3);
    CHECK(rows.front().variant == "sag+mid");

    CHECK(run_cli("gen colors3 --out " + (dir / "c3").string() + " --count 12 --seed 2") == 0);
    const graph::Dataset generated = graph::load_tu_dataset(dir / "c3", "COLORS-3");
    const graph::Dataset expected = graph::gen_colors3(12, 4, 25, 2);
    REQUIRE(generated.graphs.size() == 12);
    // The loader remaps labels to a contiguous range, so compare structure and features only.
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(generated.graphs[i].adjacency() == expected.graphs[i].adjacency());
        CHECK(generated.graphs[i].features() == expected.graphs[i].features());
    }
}
