#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ultrafield/tree.hpp"

namespace ultrafield {

/// A parsed tree-spec document: the tree plus the raw "T" entries, indexed
/// by vertex id (absent entries are nullopt).
struct TreeDocument {
  std::string name;
  BallTree tree;
  std::vector<std::optional<double>> symbol;
};

/// Parses the JSON tree-spec format:
///
///   { "name": "T2",
///     "nodes": [ {"id": "R", "children": ["A","B"], "T": 1.0},
///                {"id": "a1", "measure": 0.25}, ... ] }
///
/// Leaves carry "measure"; interior nodes carry "children" and optionally
/// "T" and a "measure" that must match the sum of their children.
TreeDocument parse_tree(std::string_view text);

TreeDocument load_tree(const std::filesystem::path& path);

/// Inverse of parse_tree. Doubles are written so that they read back exactly.
std::string serialize_tree(const BallTree& tree, std::string_view name,
                           std::span<const double> symbol = {});

}  // namespace ultrafield
