#pragma once

#include <filesystem>
#include <string>

#include "midpool/graph/graph.hpp"

namespace midpool::graph {

/// Reads a dataset in the TUDataset text layout from `dir`.
///
/// Required files: {name}_A.txt, {name}_graph_indicator.txt,
/// {name}_graph_labels.txt. Optional: {name}_node_labels.txt (one-hot encoded)
/// and {name}_node_attributes.txt (appended after the one-hot block). Graphs with
/// neither get a normalized-degree column. Graph labels are remapped to
/// [0, num_classes) in ascending order of the raw values.
///
/// Throws IngestionError naming a missing file, ParseError with a line number on
/// malformed content.
Dataset load_tu_dataset(const std::filesystem::path& dir, const std::string& name);

/// Emits the file set load_tu_dataset reads, 1-indexed and newline-terminated.
/// Features are written as node attributes; no attribute file when the feature
/// dim is zero.
void write_tu_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace midpool::graph
