#include "ultrafield/tree_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ultrafield/error.hpp"

namespace ultrafield {

namespace {

using nlohmann::json;

double number_field(const json& node, const char* key, const std::string& id) {
  const auto& value = node.at(key);
  if (!value.is_number()) {
    throw Error(ErrorKind::MalformedSpec, "field '" + std::string(key) + "' of node '" + id +
                                              "' is not a number");
  }
  return value.get<double>();
}

NodeSpec read_node(const json& node) {
  if (!node.is_object()) throw Error(ErrorKind::MalformedSpec, "node entry is not an object");
  if (!node.contains("id") || !node["id"].is_string()) {
    throw Error(ErrorKind::MalformedSpec, "node without a string 'id'");
  }
  NodeSpec spec;
  spec.id = node["id"].get<std::string>();
  for (const auto& [key, value] : node.items()) {
    if (key != "id" && key != "children" && key != "measure" && key != "T") {
      throw Error(ErrorKind::MalformedSpec, "node '" + spec.id + "' has unknown field '" + key + "'");
    }
  }
  if (node.contains("children")) {
    const auto& children = node["children"];
    if (!children.is_array()) {
      throw Error(ErrorKind::MalformedSpec, "'children' of node '" + spec.id + "' is not an array");
    }
    for (const auto& child : children) {
      if (!child.is_string()) {
        throw Error(ErrorKind::MalformedSpec, "child of node '" + spec.id + "' is not a string id");
      }
      spec.children.push_back(child.get<std::string>());
    }
  }
  if (node.contains("measure")) spec.measure = number_field(node, "measure", spec.id);
  if (node.contains("T")) {
    if (spec.children.empty()) {
      throw Error(ErrorKind::MalformedSpec, "leaf '" + spec.id + "' carries a symbol value 'T'");
    }
    spec.symbol = number_field(node, "T", spec.id);
  }
  return spec;
}

}  // namespace

TreeDocument parse_tree(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedSpec, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::MalformedSpec, "document is not a JSON object");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw Error(ErrorKind::MalformedSpec, "document has no 'nodes' array");
  }
  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw Error(ErrorKind::MalformedSpec, "'name' is not a string");
    name = doc["name"].get<std::string>();
  }

  std::vector<NodeSpec> nodes;
  for (const auto& node : doc["nodes"]) nodes.push_back(read_node(node));

  BallTree tree = BallTree::from_nodes(nodes);
  std::vector<std::optional<double>> symbol(tree.vertex_count());
  for (const auto& node : nodes) {
    if (node.symbol) symbol[tree.at(node.id).value] = node.symbol;
  }
  return TreeDocument{std::move(name), std::move(tree), std::move(symbol)};
}

TreeDocument load_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_tree(buffer.str());
}

std::string serialize_tree(const BallTree& tree, std::string_view name, std::span<const double> symbol) {
  using nlohmann::ordered_json;
  ordered_json nodes = ordered_json::array();
  for (const auto& node : to_nodes(tree, symbol)) {
    ordered_json entry{{"id", node.id}};
    if (!node.children.empty()) entry["children"] = node.children;
    if (node.measure) entry["measure"] = *node.measure;
    if (node.symbol) entry["T"] = *node.symbol;
    nodes.push_back(std::move(entry));
  }
  ordered_json doc{{"name", std::string(name)}, {"nodes", std::move(nodes)}};
  return doc.dump(2) + "\n";
}

}  // namespace ultrafield
