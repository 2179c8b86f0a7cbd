#include "midpool/graph/tu_format.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "midpool/errors.hpp"

namespace midpool::graph {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Non-empty lines paired with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open dataset file " + path.string());
    std::vector<std::pair<std::size_t, std::string>> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string t = trim(line);
        if (!t.empty()) out.emplace_back(number, std::move(t));
    }
    return out;
}

long long parse_int(const std::string& token, const fs::path& file, std::size_t line) {
    const std::string t = trim(token);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || errno != 0 || end != t.c_str() + t.size()) {
        throw ParseError(file.filename().string(), line, "expected integer, got '" + t + "'");
    }
    return v;
}

double parse_double(const std::string& token, const fs::path& file, std::size_t line) {
    const std::string t = trim(token);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || errno == ERANGE || end != t.c_str() + t.size()) {
        throw ParseError(file.filename().string(), line, "expected number, got '" + t + "'");
    }
    return v;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(part);
    return out;
}

fs::path require(const fs::path& dir, const std::string& name, const std::string& suffix) {
    fs::path p = dir / (name + suffix);
    if (!fs::exists(p)) throw IngestionError("missing dataset file " + p.string());
    return p;
}

}  // namespace

Dataset load_tu_dataset(const fs::path& dir, const std::string& name) {
    const fs::path a_path = require(dir, name, "_A.txt");
    const fs::path ind_path = require(dir, name, "_graph_indicator.txt");
    const fs::path gl_path = require(dir, name, "_graph_labels.txt");
    const fs::path nl_path = dir / (name + "_node_labels.txt");
    const fs::path na_path = dir / (name + "_node_attributes.txt");

    // Node -> graph assignment (TU ids are 1-based and contiguous per graph).
    const auto ind_lines = read_lines(ind_path);
    std::vector<std::size_t> node_graph;
    node_graph.reserve(ind_lines.size());
    for (const auto& [line, text] : ind_lines) {
        const long long gid = parse_int(text, ind_path, line);
        if (gid < 1) throw ParseError(ind_path.filename().string(), line, "graph id must be >= 1");
        node_graph.push_back(static_cast<std::size_t>(gid - 1));
    }
    const std::size_t total_nodes = node_graph.size();

    const auto gl_lines = read_lines(gl_path);
    std::vector<long long> raw_graph_labels;
    for (const auto& [line, text] : gl_lines) raw_graph_labels.push_back(parse_int(text, gl_path, line));
    const std::size_t num_graphs = raw_graph_labels.size();
    for (std::size_t v = 0; v < total_nodes; ++v) {
        if (node_graph[v] >= num_graphs) {
            throw ParseError(ind_path.filename().string(), ind_lines[v].first,
                             "graph id exceeds the number of graph labels");
        }
    }

    // Global node index -> (graph, local index).
    std::vector<std::size_t> graph_sizes(num_graphs, 0);
    std::vector<std::size_t> local_index(total_nodes);
    for (std::size_t v = 0; v < total_nodes; ++v) local_index[v] = graph_sizes[node_graph[v]]++;
    for (std::size_t g = 0; g < num_graphs; ++g) {
        if (graph_sizes[g] == 0) {
            throw IngestionError("graph " + std::to_string(g + 1) + " in " + gl_path.string() +
                                 " has no nodes");
        }
    }

    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> graph_edges(num_graphs);
    for (const auto& [line, text] : read_lines(a_path)) {
        const auto parts = split_commas(text);
        if (parts.size() != 2) {
            throw ParseError(a_path.filename().string(), line, "expected 'i, j'");
        }
        const long long i = parse_int(parts[0], a_path, line);
        const long long j = parse_int(parts[1], a_path, line);
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > total_nodes ||
            static_cast<std::size_t>(j) > total_nodes) {
            throw ParseError(a_path.filename().string(), line, "node index out of range");
        }
        const auto u = static_cast<std::size_t>(i - 1);
        const auto w = static_cast<std::size_t>(j - 1);
        if (node_graph[u] != node_graph[w]) {
            throw ParseError(a_path.filename().string(), line, "edge crosses graphs");
        }
        graph_edges[node_graph[u]].emplace_back(local_index[u], local_index[w]);
    }

    // Optional one-hot node labels, category order by ascending raw value.
    std::vector<std::size_t> node_label_index;
    std::size_t label_width = 0;
    if (fs::exists(nl_path)) {
        const auto lines = read_lines(nl_path);
        if (lines.size() != total_nodes) {
            throw IngestionError(nl_path.string() + " has " + std::to_string(lines.size()) +
                                 " rows for " + std::to_string(total_nodes) + " nodes");
        }
        std::vector<long long> raw;
        raw.reserve(lines.size());
        for (const auto& [line, text] : lines) {
            // Some TU files carry several label columns; the first one is the node label.
            raw.push_back(parse_int(split_commas(text).front(), nl_path, line));
        }
        std::set<long long> distinct(raw.begin(), raw.end());
        std::map<long long, std::size_t> code;
        for (long long value : distinct) code.emplace(value, code.size());
        label_width = code.size();
        node_label_index.reserve(raw.size());
        for (long long value : raw) node_label_index.push_back(code.at(value));
    }

    std::vector<std::vector<double>> attributes;
    std::size_t attr_width = 0;
    if (fs::exists(na_path)) {
        const auto lines = read_lines(na_path);
        if (lines.size() != total_nodes) {
            throw IngestionError(na_path.string() + " has " + std::to_string(lines.size()) +
                                 " rows for " + std::to_string(total_nodes) + " nodes");
        }
        attributes.reserve(lines.size());
        for (const auto& [line, text] : lines) {
            std::vector<double> row;
            for (const auto& part : split_commas(text)) row.push_back(parse_double(part, na_path, line));
            if (attributes.empty()) {
                attr_width = row.size();
            } else if (row.size() != attr_width) {
                throw ParseError(na_path.filename().string(), line,
                                 "ragged attribute row: " + std::to_string(row.size()) +
                                     " values, expected " + std::to_string(attr_width));
            }
            attributes.push_back(std::move(row));
        }
    }

    std::set<long long> distinct_graph_labels(raw_graph_labels.begin(), raw_graph_labels.end());
    std::map<long long, std::size_t> graph_code;
    for (long long value : distinct_graph_labels) graph_code.emplace(value, graph_code.size());

    const bool degree_only = label_width == 0 && attr_width == 0;
    const std::size_t width = degree_only ? 1 : label_width + attr_width;

    std::vector<Matrix> features(num_graphs);
    for (std::size_t g = 0; g < num_graphs; ++g) {
        features[g] = Matrix::Zero(static_cast<Eigen::Index>(graph_sizes[g]),
                                   static_cast<Eigen::Index>(width));
    }
    if (!degree_only) {
        for (std::size_t v = 0; v < total_nodes; ++v) {
            Matrix& x = features[node_graph[v]];
            const auto row = static_cast<Eigen::Index>(local_index[v]);
            if (label_width > 0) x(row, static_cast<Eigen::Index>(node_label_index[v])) = 1.0;
            for (std::size_t a = 0; a < attr_width; ++a) {
                x(row, static_cast<Eigen::Index>(label_width + a)) = attributes[v][a];
            }
        }
    }

    Dataset ds;
    ds.name = name;
    ds.num_classes = graph_code.size();
    ds.feature_dim = width;
    ds.graphs.reserve(num_graphs);
    for (std::size_t g = 0; g < num_graphs; ++g) {
        Matrix adjacency = adjacency_from_edges(graph_sizes[g], graph_edges[g]);
        Matrix x = degree_only ? normalized_degree_features(adjacency) : std::move(features[g]);
        ds.graphs.emplace_back(std::move(adjacency), std::move(x),
                               graph_code.at(raw_graph_labels[g]), static_cast<std::int64_t>(g));
    }
    return ds;
}

void write_tu_dataset(const Dataset& dataset, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    auto open = [&](const std::string& suffix) {
        fs::path p = dir / (dataset.name + suffix);
        std::ofstream out(p, std::ios::trunc);
        if (!out) throw IoError("cannot write " + p.string());
        out.precision(17);
        return std::make_pair(std::move(out), p);
    };
    auto finish = [](std::ofstream& out, const fs::path& p) {
        out.flush();
        if (!out) throw IoError("write failed for " + p.string());
    };

    auto [a_out, a_path] = open("_A.txt");
    auto [ind_out, ind_path] = open("_graph_indicator.txt");
    auto [gl_out, gl_path] = open("_graph_labels.txt");
    const bool with_attributes = dataset.feature_dim > 0;
    std::optional<std::pair<std::ofstream, fs::path>> attr;
    if (with_attributes) attr.emplace(open("_node_attributes.txt"));

    std::size_t offset = 0;
    for (std::size_t g = 0; g < dataset.graphs.size(); ++g) {
        const Graph& graph = dataset.graphs[g];
        const std::size_t n = graph.num_nodes();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (graph.has_edge(i, j)) a_out << (offset + i + 1) << ", " << (offset + j + 1) << '\n';
            }
            ind_out << (g + 1) << '\n';
            if (with_attributes) {
                auto& out = attr->first;
                const auto row = graph.features().row(static_cast<Eigen::Index>(i));
                for (Eigen::Index c = 0; c < row.size(); ++c) {
                    if (c > 0) out << ", ";
                    out << row(c);
                }
                out << '\n';
            }
        }
        gl_out << (graph.label() ? static_cast<long long>(*graph.label()) : 0LL) << '\n';
        offset += n;
    }
    finish(a_out, a_path);
    finish(ind_out, ind_path);
    finish(gl_out, gl_path);
    if (attr) finish(attr->first, attr->second);
}

}  // namespace midpool::graph
