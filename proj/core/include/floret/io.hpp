#pragma once

// File formats.
//
// Model file (JSON):
//
//   {
//     "florets": [ {"id": "theta", "outcomes": ["Yes", "No"]} ],
//     "tree": {"floret": "theta",
//              "children": {"Yes": {"floret": "theta",
//                                   "children": {"Yes": "leaf", "No": "leaf"}},
//                           "No": "leaf"}}
//   }
//
// Every node names its floret and maps each of that floret's outcome labels
// to either a nested node or the string "leaf". Leaves are numbered
// depth-first, children in the floret's `outcomes` order, independent of key
// order in the file.
//
// Data file: a JSON array of I non-negative integers in leaf order, or CSV
// rows `leaf_path,count` where leaf_path joins outcome labels with '/'. A
// header row `leaf_path,count` is optional; leaves not listed count as 0.

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "floret/estimation.hpp"
#include "floret/model.hpp"

namespace floret {

// Validates a parsed model description. Errors carry a JSON pointer.
SequentialTree validate_tree(const nlohmann::json& spec);

// Parses model text. JSON syntax errors report line and column.
SequentialTree parse_model(std::string_view text);
Model load_model(const std::filesystem::path& path);

nlohmann::json model_to_json(const SequentialTree& tree);

// Detects the format from the first non-blank character ('[' means JSON).
ObservedCounts parse_counts(std::string_view text, const SequentialTree& tree);
ObservedCounts load_counts(const std::filesystem::path& path, const SequentialTree& tree);

enum class CountsFormat { json, csv };

std::string format_counts(const ObservedCounts& y, const SequentialTree& tree, CountsFormat format);

std::string read_file(const std::filesystem::path& path);

}  // namespace floret
