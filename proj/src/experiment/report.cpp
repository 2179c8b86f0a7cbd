#include "midpool/experiment/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "midpool/errors.hpp"

namespace midpool::experiment {

using json = nlohmann::ordered_json;

std::vector<Aggregate> aggregate(const std::vector<Record>& records) {
    std::vector<Aggregate> out;
    std::vector<std::vector<double>> values;
    for (const Record& r : records) {
        std::size_t slot = out.size();
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i].variant == r.variant && out[i].setting == r.setting && out[i].metric == r.metric) {
                slot = i;
                break;
            }
        }
        if (slot == out.size()) {
            out.push_back({r.variant, r.setting, r.metric, 0, 0.0, 0.0});
            values.emplace_back();
        }
        values[slot].push_back(r.value);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& v = values[i];
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        out[i].count = v.size();
        out[i].mean = mean;
        out[i].std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    }
    return out;
}

const Aggregate& find_aggregate(const RunResult& result, const std::string& variant,
                                const std::string& metric, const std::string& setting) {
    for (const Aggregate& a : result.aggregates) {
        if (a.variant == variant && a.metric == metric && a.setting == setting) return a;
    }
    throw ArgumentError("no aggregate for variant '" + variant + "', metric '" + metric +
                        "', setting '" + setting + "'");
}

std::string to_json(const RunResult& result, bool include_wall_time) {
    json j;
    j["task"] = result.task;
    j["version"] = result.version;
    json cfg = json::object();
    for (const auto& [k, v] : result.config) cfg[k] = v;
    j["config"] = cfg;
    json recs = json::array();
    for (const Record& r : result.records) {
        recs.push_back({{"variant", r.variant}, {"setting", r.setting}, {"seed", r.seed},
                        {"fold", r.fold}, {"metric", r.metric}, {"value", r.value},
                        {"best_epoch", r.best_epoch}, {"epochs", r.epochs}});
    }
    j["records"] = recs;
    json aggs = json::array();
    for (const Aggregate& a : result.aggregates) {
        aggs.push_back({{"variant", a.variant}, {"setting", a.setting}, {"metric", a.metric},
                        {"count", a.count}, {"mean", a.mean}, {"std", a.std}});
    }
    j["aggregates"] = aggs;
    j["warnings"] = result.warnings;
    if (include_wall_time) j["wall_time_s"] = result.wall_time_s;
    return j.dump(2) + "\n";
}

RunResult from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IngestionError(std::string("malformed report JSON: ") + e.what());
    }
    RunResult r;
    try {
        r.task = j.at("task").get<std::string>();
        r.version = j.at("version").get<std::string>();
        for (const auto& [k, v] : j.at("config").items()) r.config[k] = v.get<std::string>();
        for (const auto& rec : j.at("records")) {
            Record x;
            x.variant = rec.at("variant").get<std::string>();
            x.setting = rec.at("setting").get<std::string>();
            x.seed = rec.at("seed").get<std::uint64_t>();
            x.fold = rec.at("fold").get<std::int64_t>();
            x.metric = rec.at("metric").get<std::string>();
            x.value = rec.at("value").get<double>();
            x.best_epoch = rec.at("best_epoch").get<std::int64_t>();
            x.epochs = rec.at("epochs").get<std::int64_t>();
            r.records.push_back(std::move(x));
        }
        for (const auto& a : j.at("aggregates")) {
            r.aggregates.push_back({a.at("variant").get<std::string>(), a.at("setting").get<std::string>(),
                                    a.at("metric").get<std::string>(), a.at("count").get<std::size_t>(),
                                    a.at("mean").get<double>(), a.at("std").get<double>()});
        }
        if (j.contains("warnings")) r.warnings = j.at("warnings").get<std::vector<std::string>>();
        if (j.contains("wall_time_s")) r.wall_time_s = j.at("wall_time_s").get<double>();
    } catch (const json::exception& e) {
        throw IngestionError(std::string("report JSON is missing fields: ") + e.what());
    }
    return r;
}

namespace {

const char* kCsvHeader = "variant,setting,seed,fold,metric,value,best_epoch,epochs";

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string fmt_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T>
T parse_field(const std::string& s, std::size_t line) {
    T out{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("<csv>", line, "bad numeric field '" + s + "'");
    }
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

std::string to_csv(const std::vector<Record>& records) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const Record& r : records) {
        out += quote(r.variant) + "," + quote(r.setting) + "," + std::to_string(r.seed) + "," +
               std::to_string(r.fold) + "," + quote(r.metric) + "," + fmt_double(r.value) + "," +
               std::to_string(r.best_epoch) + "," + std::to_string(r.epochs) + "\n";
    }
    return out;
}

std::vector<Record> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw ParseError("<csv>", 1, "unexpected CSV header");
    }
    std::vector<Record> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw ParseError("<csv>", line_no, "expected 8 fields");
        Record r;
        r.variant = f[0];
        r.setting = f[1];
        r.seed = parse_field<std::uint64_t>(f[2], line_no);
        r.fold = parse_field<std::int64_t>(f[3], line_no);
        r.metric = f[4];
        r.value = parse_field<double>(f[5], line_no);
        r.best_epoch = parse_field<std::int64_t>(f[6], line_no);
        r.epochs = parse_field<std::int64_t>(f[7], line_no);
        out.push_back(std::move(r));
    }
    return out;
}

void emit_report(const RunResult& result, const std::string& path, const std::string& format) {
    std::string body;
    if (format == "json") {
        body = to_json(result);
    } else if (format == "csv") {
        body = to_csv(result.records);
    } else {
        throw ConfigError("unknown report format '" + format + "'");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << body;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

RunResult read_report_json(const std::string& path) { return from_json(slurp(path)); }

std::vector<Record> read_records_csv(const std::string& path) { return records_from_csv(slurp(path)); }

}  // namespace midpool::experiment
