#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace midpool::experiment {

/// One metric value from one (variant, setting, seed, fold) run. Fold -1 marks a
/// value that is not tied to a fold.
struct Record {
    std::string variant;
    std::string setting;
    std::uint64_t seed = 0;
    std::int64_t fold = -1;
    std::string metric;
    double value = 0.0;
    std::int64_t best_epoch = -1;
    std::int64_t epochs = -1;

    bool operator==(const Record&) const = default;
};

/// Mean and sample standard deviation (n - 1 denominator, 0 for one value).
struct Aggregate {
    std::string variant;
    std::string setting;
    std::string metric;
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;

    bool operator==(const Aggregate&) const = default;
};

struct RunResult {
    std::string task;
    std::string version;
    std::map<std::string, std::string> config;
    std::vector<Record> records;
    std::vector<Aggregate> aggregates;
    std::vector<std::string> warnings;
    double wall_time_s = 0.0;
};

/// Groups by (variant, setting, metric) in order of first appearance.
std::vector<Aggregate> aggregate(const std::vector<Record>& records);

/// Aggregate for one group; throws ArgumentError if absent.
const Aggregate& find_aggregate(const RunResult& result, const std::string& variant,
                                const std::string& metric, const std::string& setting = "");

std::string to_json(const RunResult& result, bool include_wall_time = true);
RunResult from_json(const std::string& text);

/// Header plus one line per record, stable column order.
std::string to_csv(const std::vector<Record>& records);
std::vector<Record> records_from_csv(const std::string& text);

/// Writes JSON or CSV ("json" | "csv"). Throws IoError when the file cannot be written.
void emit_report(const RunResult& result, const std::string& path, const std::string& format);
RunResult read_report_json(const std::string& path);
std::vector<Record> read_records_csv(const std::string& path);

}  // namespace midpool::experiment
