#include "midpool/experiment/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "midpool/errors.hpp"

namespace midpool::experiment {

std::string to_string(Task task) {
    switch (task) {
        case Task::classify: return "classify";
        case Task::robustness: return "robustness";
        case Task::generalize: return "generalize";
        case Task::ablation: return "ablation";
        case Task::sweep: return "sweep";
        case Task::reconstruct: return "reconstruct";
        case Task::diagnose: return "diagnose";
    }
    return "unknown";
}

Task task_from_string(const std::string& name) {
    for (Task t : {Task::classify, Task::robustness, Task::generalize, Task::ablation, Task::sweep,
                   Task::reconstruct, Task::diagnose}) {
        if (to_string(t) == name) return t;
    }
    throw ConfigError("unknown task '" + name + "'");
}

mid::MidConfig default_mid() {
    mid::MidConfig m;
    m.h = 5;
    m.p_s = 0.1;
    m.flip = true;
    m.drop = true;
    return m;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    if (training.patience > training.max_epochs) {
        throw ConfigError("patience (" + std::to_string(training.patience) +
                          ") exceeds max_epochs (" + std::to_string(training.max_epochs) + ")");
    }
    if (training.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(training.lr > 0.0)) throw ConfigError("lr must be positive");
    if (training.weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    if (folds < 2) throw ConfigError("folds must be at least 2");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in [0, 1)");
    if (gen_n_min < 1 || gen_n_min > gen_n_max) throw ConfigError("need 1 <= gen_n_min <= gen_n_max");
    if (gen_large_n_min < 1 || gen_large_n_min > gen_large_n_max) {
        throw ConfigError("need 1 <= gen_large_n_min <= gen_large_n_max");
    }
    if (format != "json" && format != "csv") throw ConfigError("format must be json or csv");
    if (model.hidden == 0 || model.blocks == 0) throw ConfigError("hidden and blocks must be positive");
    model.pool.validate();
    model.mid.validate(model.hidden);
    if (!(model.pool_edge_drop_rate >= 0.0 && model.pool_edge_drop_rate <= 1.0)) {
        throw ConfigError("pool_edge_drop_rate must lie in [0, 1]");
    }
    for (double r : robustness_rates) {
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("robustness rates must lie in [0, 1]");
    }
    for (double r : recon_ratios) {
        if (!(r > 0.0 && r <= 1.0)) throw ConfigError("reconstruction ratios must lie in (0, 1]");
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
    }
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError("key '" + key + "' expects a non-negative integer, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = trim(value);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "' expects a boolean, got '" + value + "'");
}

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <typename T>
std::string fmt_list(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ",";
        if constexpr (std::is_same_v<T, std::string>) {
            out += values[i];
        } else if constexpr (std::is_floating_point_v<T>) {
            out += fmt(static_cast<double>(values[i]));
        } else {
            out += fmt(static_cast<std::uint64_t>(values[i]));
        }
    }
    return out;
}

std::string gating_name(const pooling::PoolConfig& pool) {
    if (!pool.gating) return "auto";
    return *pool.gating == pooling::Gating::sigma_gate ? "sigma" : "raw";
}

struct KeyHandler {
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::map<std::string, KeyHandler>& handlers() {
    using C = ExperimentConfig;
    using S = const std::string&;
    static const std::map<std::string, KeyHandler> table = {
        {"task", {[](C& c, S, S v) { c.task = task_from_string(trim(v)); },
                  [](const C& c) { return to_string(c.task); }}},
        {"dataset", {[](C& c, S, S v) { c.dataset = trim(v); }, [](const C& c) { return c.dataset; }}},
        {"dataset_path",
         {[](C& c, S, S v) { c.dataset_path = trim(v); }, [](const C& c) { return c.dataset_path; }}},
        {"data_dir", {[](C& c, S, S v) { c.data_dir = trim(v); }, [](const C& c) { return c.data_dir; }}},
        {"subsample", {[](C& c, S k, S v) { c.subsample = parse_uint(k, v); },
                       [](const C& c) { return fmt(std::uint64_t{c.subsample}); }}},
        {"data_seed", {[](C& c, S k, S v) { c.data_seed = parse_uint(k, v); },
                       [](const C& c) { return fmt(c.data_seed); }}},
        {"gen_train", {[](C& c, S k, S v) { c.gen_train = parse_uint(k, v); },
                       [](const C& c) { return fmt(std::uint64_t{c.gen_train}); }}},
        {"gen_test", {[](C& c, S k, S v) { c.gen_test = parse_uint(k, v); },
                      [](const C& c) { return fmt(std::uint64_t{c.gen_test}); }}},
        {"gen_n_min", {[](C& c, S k, S v) { c.gen_n_min = parse_uint(k, v); },
                       [](const C& c) { return fmt(std::uint64_t{c.gen_n_min}); }}},
        {"gen_n_max", {[](C& c, S k, S v) { c.gen_n_max = parse_uint(k, v); },
                       [](const C& c) { return fmt(std::uint64_t{c.gen_n_max}); }}},
        {"gen_large_n_min", {[](C& c, S k, S v) { c.gen_large_n_min = parse_uint(k, v); },
                             [](const C& c) { return fmt(std::uint64_t{c.gen_large_n_min}); }}},
        {"gen_large_n_max", {[](C& c, S k, S v) { c.gen_large_n_max = parse_uint(k, v); },
                             [](const C& c) { return fmt(std::uint64_t{c.gen_large_n_max}); }}},
        {"backbone", {[](C& c, S, S v) { c.model.pool.scorer = pooling::scorer_kind_from_string(trim(v)); },
                      [](const C& c) { return pooling::to_string(c.model.pool.scorer); }}},
        {"ratio", {[](C& c, S k, S v) { c.model.pool.ratio = parse_double(k, v); },
                   [](const C& c) { return fmt(c.model.pool.ratio); }}},
        {"gsa_alpha", {[](C& c, S k, S v) { c.model.pool.gsa_alpha = parse_double(k, v); },
                       [](const C& c) { return fmt(c.model.pool.gsa_alpha); }}},
        {"gating", {[](C& c, S k, S v) {
                        const std::string g = trim(v);
                        if (g == "auto") c.model.pool.gating.reset();
                        else if (g == "sigma") c.model.pool.gating = pooling::Gating::sigma_gate;
                        else if (g == "raw") c.model.pool.gating = pooling::Gating::raw_gate;
                        else throw ConfigError("key '" + k + "' expects auto, sigma or raw");
                    },
                    [](const C& c) { return gating_name(c.model.pool); }}},
        {"mid", {[](C& c, S k, S v) {
                     // Shorthand: on applies the default MID switches, off disables all.
                     c.model.mid = parse_bool(k, v) ? default_mid() : mid::MidConfig::disabled();
                 },
                 [](const C& c) { return fmt(!c.model.mid.is_disabled()); }}},
        {"h", {[](C& c, S k, S v) { c.model.mid.h = parse_uint(k, v); },
               [](const C& c) { return fmt(std::uint64_t{c.model.mid.h}); }}},
        {"p_s", {[](C& c, S k, S v) { c.model.mid.p_s = parse_double(k, v); },
                 [](const C& c) { return fmt(c.model.mid.p_s); }}},
        {"flip", {[](C& c, S k, S v) { c.model.mid.flip = parse_bool(k, v); },
                  [](const C& c) { return fmt(c.model.mid.flip); }}},
        {"drop", {[](C& c, S k, S v) { c.model.mid.drop = parse_bool(k, v); },
                  [](const C& c) { return fmt(c.model.mid.drop); }}},
        {"feature_map", {[](C& c, S, S v) { c.model.mid.feature_map = mid::feature_map_from_string(trim(v)); },
                         [](const C& c) { return mid::to_string(c.model.mid.feature_map); }}},
        {"rank_reduction",
         {[](C& c, S, S v) { c.model.mid.reduction = mid::rank_reduction_from_string(trim(v)); },
          [](const C& c) { return mid::to_string(c.model.mid.reduction); }}},
        {"gate_with_flipped", {[](C& c, S k, S v) { c.model.mid.gate_with_flipped = parse_bool(k, v); },
                               [](const C& c) { return fmt(c.model.mid.gate_with_flipped); }}},
        {"hidden", {[](C& c, S k, S v) { c.model.hidden = parse_uint(k, v); },
                    [](const C& c) { return fmt(std::uint64_t{c.model.hidden}); }}},
        {"blocks", {[](C& c, S k, S v) { c.model.blocks = parse_uint(k, v); },
                    [](const C& c) { return fmt(std::uint64_t{c.model.blocks}); }}},
        {"readout_every_block",
         {[](C& c, S k, S v) { c.model.readout_every_block = parse_bool(k, v); },
          [](const C& c) { return fmt(c.model.readout_every_block); }}},
        {"readout", {[](C& c, S, S v) { c.model.readout = nn::readout_kind_from_string(trim(v)); },
                     [](const C& c) { return nn::to_string(c.model.readout); }}},
        {"head_hidden", {[](C& c, S k, S v) { c.model.head_hidden = parse_uint(k, v); },
                         [](const C& c) { return fmt(std::uint64_t{c.model.head_hidden}); }}},
        {"pool_edge_drop_rate",
         {[](C& c, S k, S v) { c.model.pool_edge_drop_rate = parse_double(k, v); },
          [](const C& c) { return fmt(c.model.pool_edge_drop_rate); }}},
        {"lr", {[](C& c, S k, S v) { c.training.lr = parse_double(k, v); },
                [](const C& c) { return fmt(c.training.lr); }}},
        {"weight_decay", {[](C& c, S k, S v) { c.training.weight_decay = parse_double(k, v); },
                          [](const C& c) { return fmt(c.training.weight_decay); }}},
        {"max_epochs", {[](C& c, S k, S v) { c.training.max_epochs = parse_uint(k, v); },
                        [](const C& c) { return fmt(std::uint64_t{c.training.max_epochs}); }}},
        {"patience", {[](C& c, S k, S v) { c.training.patience = parse_uint(k, v); },
                      [](const C& c) { return fmt(std::uint64_t{c.training.patience}); }}},
        {"batch_size", {[](C& c, S k, S v) { c.training.batch_size = parse_uint(k, v); },
                        [](const C& c) { return fmt(std::uint64_t{c.training.batch_size}); }}},
        {"folds", {[](C& c, S k, S v) { c.folds = parse_uint(k, v); },
                   [](const C& c) { return fmt(std::uint64_t{c.folds}); }}},
        {"val_fraction", {[](C& c, S k, S v) { c.val_fraction = parse_double(k, v); },
                          [](const C& c) { return fmt(c.val_fraction); }}},
        {"max_folds", {[](C& c, S k, S v) { c.max_folds = parse_uint(k, v); },
                       [](const C& c) { return fmt(std::uint64_t{c.max_folds}); }}},
        {"seeds", {[](C& c, S k, S v) {
                       c.seeds.clear();
                       for (const auto& item : split_list(v)) c.seeds.push_back(parse_uint(k, item));
                   },
                   [](const C& c) { return fmt_list(c.seeds); }}},
        {"robustness_rates", {[](C& c, S k, S v) {
                                  c.robustness_rates.clear();
                                  for (const auto& item : split_list(v)) {
                                      c.robustness_rates.push_back(parse_double(k, item));
                                  }
                              },
                              [](const C& c) { return fmt_list(c.robustness_rates); }}},
        {"sweep_ratio", {[](C& c, S k, S v) {
                             c.sweep_ratio.clear();
                             for (const auto& item : split_list(v)) c.sweep_ratio.push_back(parse_double(k, item));
                         },
                         [](const C& c) { return fmt_list(c.sweep_ratio); }}},
        {"sweep_blocks", {[](C& c, S k, S v) {
                              c.sweep_blocks.clear();
                              for (const auto& item : split_list(v)) c.sweep_blocks.push_back(parse_uint(k, item));
                          },
                          [](const C& c) { return fmt_list(c.sweep_blocks); }}},
        {"sweep_h", {[](C& c, S k, S v) {
                         c.sweep_h.clear();
                         for (const auto& item : split_list(v)) c.sweep_h.push_back(parse_uint(k, item));
                     },
                     [](const C& c) { return fmt_list(c.sweep_h); }}},
        {"sweep_p_s", {[](C& c, S k, S v) {
                           c.sweep_p_s.clear();
                           for (const auto& item : split_list(v)) c.sweep_p_s.push_back(parse_double(k, item));
                       },
                       [](const C& c) { return fmt_list(c.sweep_p_s); }}},
        {"recon_graphs", {[](C& c, S, S v) { c.recon_graphs = split_list(v); },
                          [](const C& c) { return fmt_list(c.recon_graphs); }}},
        {"recon_ratios", {[](C& c, S k, S v) {
                              c.recon_ratios.clear();
                              for (const auto& item : split_list(v)) c.recon_ratios.push_back(parse_double(k, item));
                          },
                          [](const C& c) { return fmt_list(c.recon_ratios); }}},
        {"recon_epochs", {[](C& c, S k, S v) { c.recon_epochs = parse_uint(k, v); },
                          [](const C& c) { return fmt(std::uint64_t{c.recon_epochs}); }}},
        {"recon_hidden", {[](C& c, S k, S v) { c.recon_hidden = parse_uint(k, v); },
                          [](const C& c) { return fmt(std::uint64_t{c.recon_hidden}); }}},
        {"recon_lr", {[](C& c, S k, S v) { c.recon_lr = parse_double(k, v); },
                      [](const C& c) { return fmt(c.recon_lr); }}},
        {"output", {[](C& c, S, S v) { c.output = trim(v); }, [](const C& c) { return c.output; }}},
        {"format", {[](C& c, S, S v) { c.format = trim(v); }, [](const C& c) { return c.format; }}},
    };
    return table;
}

}  // namespace

void set_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    const auto it = handlers().find(k);
    if (it == handlers().end()) throw ConfigError("unknown configuration key '" + k + "'");
    it->second.set(config, k, value);
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            set_value(config, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    set_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::map<std::string, std::string> echo(const ExperimentConfig& config) {
    std::map<std::string, std::string> out;
    for (const auto& [key, handler] : handlers()) {
        if (key == "mid") continue;  // shorthand, fully described by the other MID keys
        out[key] = handler.get(config);
    }
    return out;
}

std::string data_root(const ExperimentConfig& config) {
    if (!config.data_dir.empty()) return config.data_dir;
    if (const char* env = std::getenv("MIDPOOL_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return "data";
}

}  // namespace midpool::experiment
