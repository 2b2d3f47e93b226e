#include "ultrafield/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/random/uniform_int_distribution.hpp>

#include "ultrafield/error.hpp"
#include "ultrafield/rng.hpp"

namespace ultrafield {

namespace {

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();
constexpr double kMeasureRelTol = 1e-12;
constexpr double kMaxGeneratedLeaves = 1 << 22;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

BallTree BallTree::from_nodes(std::span<const NodeSpec> nodes) {
  if (nodes.empty()) throw Error(ErrorKind::MalformedSpec, "tree has no nodes");

  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    if (node.id.empty()) throw Error(ErrorKind::MalformedSpec, "node with empty id");
    if (!index.emplace(node.id, i).second) {
      throw Error(ErrorKind::DuplicateId, "id '" + node.id + "' appears more than once");
    }
  }

  std::vector<std::size_t> parent(nodes.size(), kNoParent);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    if (node.children.size() == 1) {
      throw Error(ErrorKind::BranchingOne, "node '" + node.id + "' has exactly one child");
    }
    if (node.children.empty()) {
      if (!node.measure) {
        throw Error(ErrorKind::MalformedSpec, "leaf '" + node.id + "' has no measure");
      }
    }
    if (node.measure && !positive_finite(*node.measure)) {
      throw Error(ErrorKind::NonPositiveMeasure, "node '" + node.id + "' has measure " +
                                                     std::to_string(*node.measure));
    }
    for (const auto& child : node.children) {
      auto it = index.find(child);
      if (it == index.end()) {
        throw Error(ErrorKind::MalformedSpec,
                    "node '" + node.id + "' lists unknown child '" + child + "'");
      }
      if (parent[it->second] != kNoParent) {
        throw Error(ErrorKind::MalformedSpec, "node '" + child + "' has more than one parent");
      }
      parent[it->second] = i;
    }
  }

  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (parent[i] == kNoParent) roots.push_back(i);
  }
  if (roots.empty()) throw Error(ErrorKind::Cycle, "no root: every node has a parent");
  if (roots.size() > 1) {
    throw Error(ErrorKind::MalformedSpec, "multiple roots: '" + nodes[roots[0]].id +
                                              "' and '" + nodes[roots[1]].id + "'");
  }

  // Preorder numbering with children in document order.
  BallTree tree;
  const std::size_t n = nodes.size();
  std::vector<std::size_t> order;  // preorder position -> input index
  order.reserve(n);
  std::vector<std::uint32_t> id_of(n, kNoParent);
  std::vector<std::size_t> stack{roots[0]};
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (id_of[i] != kNoParent) throw Error(ErrorKind::Cycle, "node '" + nodes[i].id + "' revisited");
    id_of[i] = static_cast<std::uint32_t>(order.size());
    order.push_back(i);
    const auto& children = nodes[i].children;
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(index.at(*it));
  }
  if (order.size() != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (id_of[i] == kNoParent) {
        throw Error(ErrorKind::Cycle, "node '" + nodes[i].id + "' is not reachable from the root");
      }
    }
  }

  tree.parent_.resize(n);
  tree.child_offset_.resize(n + 1);
  tree.child_rank_.assign(n, 0);
  tree.depth_.assign(n, 0);
  tree.measure_.assign(n, 0.0);
  tree.names_.resize(n);
  tree.leaf_slot_.assign(n, kNoParent);
  tree.leaf_begin_.assign(n, 0);
  tree.leaf_end_.assign(n, 0);
  tree.child_list_.reserve(n - 1);

  for (std::uint32_t v = 0; v < n; ++v) {
    const auto& node = nodes[order[v]];
    tree.names_[v] = node.id;
    tree.parent_[v] = v == 0 ? kNoParent : id_of[parent[order[v]]];
    tree.child_offset_[v] = static_cast<std::uint32_t>(tree.child_list_.size());
    std::uint32_t rank = 0;
    for (const auto& child : node.children) {
      const std::uint32_t c = id_of[index.at(child)];
      tree.child_list_.push_back(VertexId{c});
      tree.child_rank_[c] = rank++;
    }
    if (v != 0) {
      tree.depth_[v] = tree.depth_[tree.parent_[v]] + 1;
      tree.height_ = std::max<std::size_t>(tree.height_, tree.depth_[v]);
    }
    if (node.children.empty()) {
      tree.leaf_slot_[v] = static_cast<std::uint32_t>(tree.leaves_.size());
      tree.leaf_begin_[v] = static_cast<std::uint32_t>(tree.leaves_.size());
      tree.leaf_end_[v] = tree.leaf_begin_[v] + 1;
      tree.leaves_.push_back(VertexId{v});
      tree.measure_[v] = *node.measure;
    } else {
      tree.interior_.push_back(VertexId{v});
    }
    tree.by_name_.emplace(node.id, VertexId{v});
  }
  tree.child_offset_[n] = static_cast<std::uint32_t>(tree.child_list_.size());

  // Bottom-up: derived measures and leaf ranges.
  for (std::size_t k = n; k-- > 0;) {
    const VertexId v{static_cast<std::uint32_t>(k)};
    const auto kids = tree.children(v);
    if (kids.empty()) continue;
    double sum = 0.0;
    for (VertexId c : kids) sum += tree.measure_[c.value];
    tree.measure_[k] = sum;
    tree.leaf_begin_[k] = tree.leaf_begin_[kids.front().value];
    tree.leaf_end_[k] = tree.leaf_end_[kids.back().value];
    const auto& declared = nodes[order[k]].measure;
    if (declared && std::abs(*declared - sum) > kMeasureRelTol * sum) {
      throw Error(ErrorKind::MeasureMismatch,
                  "node '" + tree.names_[k] + "' declares measure " + std::to_string(*declared) +
                      " but its children sum to " + std::to_string(sum));
    }
  }
  return tree;
}

VertexId BallTree::parent(VertexId v) const {
  if (!contains(v) || is_root(v)) throw Error(ErrorKind::OutOfRange, "vertex has no parent");
  return VertexId{parent_[v.value]};
}

std::span<const VertexId> BallTree::children(VertexId v) const {
  const auto begin = child_offset_.at(v.value);
  const auto end = child_offset_[v.value + 1];
  return std::span<const VertexId>(child_list_).subspan(begin, end - begin);
}

std::size_t BallTree::leaf_index(VertexId leaf) const {
  if (!contains(leaf) || leaf_slot_[leaf.value] == kNoParent) {
    throw Error(ErrorKind::ForeignLeaf, "vertex " + std::to_string(leaf.value) + " is not a leaf of this tree");
  }
  return leaf_slot_[leaf.value];
}

bool BallTree::within(VertexId descendant, VertexId ancestor) const {
  // Preorder ids: the subtree of `ancestor` is a contiguous block whose
  // leaves are exactly leaf_begin..leaf_end.
  if (descendant < ancestor) return false;
  if (descendant == ancestor) return true;
  if (is_leaf(ancestor)) return false;
  const VertexId last_leaf = leaves_[leaf_end_[ancestor.value] - 1];
  return descendant <= last_leaf;
}

std::optional<VertexId> BallTree::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

VertexId BallTree::at(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw Error(ErrorKind::MalformedSpec, "no vertex named '" + std::string(name) + "'");
}

VertexId sup(const BallTree& tree, VertexId x, VertexId y) {
  tree.leaf_index(x);
  tree.leaf_index(y);
  while (x != y) {
    if (tree.depth(x) >= tree.depth(y)) {
      x = tree.parent(x);
    } else {
      y = tree.parent(y);
    }
  }
  return x;
}

VertexId child_toward(const BallTree& tree, VertexId ancestor, VertexId descendant) {
  if (!tree.contains(ancestor) || !tree.contains(descendant) || ancestor == descendant ||
      !tree.within(descendant, ancestor)) {
    throw Error(ErrorKind::NotDescendant, "'" + (tree.contains(descendant) ? tree.name(descendant) : "?") +
                                              "' is not a strict descendant of '" +
                                              (tree.contains(ancestor) ? tree.name(ancestor) : "?") + "'");
  }
  while (tree.parent(descendant) != ancestor) descendant = tree.parent(descendant);
  return descendant;
}

double distance(const BallTree& tree, VertexId x, VertexId y) {
  const VertexId s = sup(tree, x, y);
  return s == x ? 0.0 : tree.measure(s);
}

namespace {

void check_leaf_budget(double leaves) {
  if (leaves > kMaxGeneratedLeaves) {
    throw Error(ErrorKind::OutOfRange, "generated tree would exceed " +
                                           std::to_string(static_cast<long>(kMaxGeneratedLeaves)) + " leaves");
  }
}

}  // namespace

BallTree generate_homogeneous(int branching, int depth, double total_measure) {
  if (branching < 2) throw Error(ErrorKind::OutOfRange, "branching must be >= 2");
  if (depth < 1) throw Error(ErrorKind::OutOfRange, "depth must be >= 1");
  if (!positive_finite(total_measure)) throw Error(ErrorKind::OutOfRange, "total measure must be positive");
  check_leaf_budget(std::pow(static_cast<double>(branching), depth));

  const double leaf_measure = total_measure / std::pow(static_cast<double>(branching), depth);
  std::vector<NodeSpec> nodes;
  // Breadth-first expansion; level by level.
  std::vector<std::size_t> level{0};
  nodes.push_back(NodeSpec{"R", {}, std::nullopt, std::nullopt});
  for (int d = 1; d <= depth; ++d) {
    std::vector<std::size_t> next;
    next.reserve(level.size() * static_cast<std::size_t>(branching));
    for (std::size_t parent : level) {
      for (int c = 0; c < branching; ++c) {
        NodeSpec child{nodes[parent].id + "." + std::to_string(c), {}, std::nullopt, std::nullopt};
        if (d == depth) child.measure = leaf_measure;
        nodes[parent].children.push_back(child.id);
        next.push_back(nodes.size());
        nodes.push_back(std::move(child));
      }
    }
    level = std::move(next);
  }
  return BallTree::from_nodes(nodes);
}

BallTree generate_random(std::uint64_t seed, const RandomTreeParams& params) {
  if (params.max_depth < 1) throw Error(ErrorKind::OutOfRange, "max_depth must be >= 1");
  if (params.max_branching < 2) throw Error(ErrorKind::OutOfRange, "max_branching must be >= 2");
  if (!positive_finite(params.measure_low) || !(params.measure_high >= params.measure_low) ||
      !std::isfinite(params.measure_high)) {
    throw Error(ErrorKind::OutOfRange, "measure law needs 0 < low <= high");
  }
  if (!(params.split_probability >= 0.0 && params.split_probability <= 1.0)) {
    throw Error(ErrorKind::OutOfRange, "split_probability must lie in [0, 1]");
  }
  check_leaf_budget(std::pow(static_cast<double>(params.max_branching), params.max_depth));

  RandomStream rng(seed);
  boost::random::uniform_int_distribution<int> fanout(2, params.max_branching);

  std::vector<NodeSpec> nodes;
  nodes.push_back(NodeSpec{"R", {}, std::nullopt, std::nullopt});
  struct Pending {
    std::size_t node;
    int depth;
  };
  std::vector<Pending> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [node, depth] = stack.back();
    stack.pop_back();
    const bool split = depth == 0 ||
                       (depth < params.max_depth && rng.uniform(0.0, 1.0) < params.split_probability);
    if (!split) {
      nodes[node].measure = rng.uniform(params.measure_low, params.measure_high);
      continue;
    }
    const int count = fanout(rng.engine());
    std::vector<std::size_t> created;
    for (int c = 0; c < count; ++c) {
      NodeSpec child{nodes[node].id + "." + std::to_string(c), {}, std::nullopt, std::nullopt};
      nodes[node].children.push_back(child.id);
      created.push_back(nodes.size());
      nodes.push_back(std::move(child));
    }
    for (auto it = created.rbegin(); it != created.rend(); ++it) stack.push_back({*it, depth + 1});
  }
  return BallTree::from_nodes(nodes);
}

std::vector<NodeSpec> to_nodes(const BallTree& tree, std::span<const double> symbol) {
  std::vector<NodeSpec> nodes;
  nodes.reserve(tree.vertex_count());
  for (std::uint32_t k = 0; k < tree.vertex_count(); ++k) {
    const VertexId v{k};
    NodeSpec node{tree.name(v), {}, std::nullopt, std::nullopt};
    if (tree.is_leaf(v)) {
      node.measure = tree.measure(v);
    } else {
      for (VertexId c : tree.children(v)) node.children.push_back(tree.name(c));
      if (!symbol.empty()) node.symbol = symbol[k];
    }
    nodes.push_back(std::move(node));
  }
  return nodes;
}

}  // namespace ultrafield
