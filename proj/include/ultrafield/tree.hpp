#pragma once

#include <cstdint>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ultrafield {

/// Dense index of a ball in a BallTree. Vertices are numbered in preorder
/// (children in canonical order), so every subtree is a contiguous id range
/// and every ancestor has a smaller id than its descendants.
struct VertexId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(VertexId, VertexId) = default;
};

/// One node of a tree description, as read from a tree-spec document or
/// produced by a generator. Interior nodes list children; leaves carry a
/// measure. An interior measure, when present, is checked against the sum
/// of its children.
struct NodeSpec {
  std::string id;
  std::vector<std::string> children;
  std::optional<double> measure;
  std::optional<double> symbol;
};

/// Finite measured tree of balls of a regular ultrametric space.
///
/// Leaves are atoms (balls of zero diameter) with positive measure; every
/// interior ball is the disjoint union of at least two maximal subballs and
/// its measure is the sum of theirs. Immutable after construction.
class BallTree {
 public:
  /// Validates `nodes` and builds the tree. Interior measures are derived
  /// bottom-up from leaf measures.
  static BallTree from_nodes(std::span<const NodeSpec> nodes);

  std::size_t vertex_count() const { return parent_.size(); }
  std::size_t leaf_count() const { return leaves_.size(); }
  std::size_t interior_count() const { return interior_.size(); }

  VertexId root() const { return VertexId{0}; }
  bool is_root(VertexId v) const { return v.value == 0; }
  bool is_leaf(VertexId v) const { return children(v).empty(); }
  bool contains(VertexId v) const { return v.value < parent_.size(); }

  /// Parent of a non-root vertex.
  VertexId parent(VertexId v) const;
  std::span<const VertexId> children(VertexId v) const;
  std::size_t branching(VertexId v) const { return children(v).size(); }
  /// Position of `v` among its parent's children.
  std::size_t child_rank(VertexId v) const { return child_rank_[v.value]; }
  std::size_t depth(VertexId v) const { return depth_[v.value]; }
  std::size_t height() const { return height_; }
  double measure(VertexId v) const { return measure_[v.value]; }
  double total_measure() const { return measure_[0]; }

  /// Leaves in preorder; leaf-value vectors are indexed in this order.
  std::span<const VertexId> leaves() const { return leaves_; }
  /// Interior vertices in preorder.
  std::span<const VertexId> interior() const { return interior_; }

  /// Index of a leaf in leaves(); throws ForeignLeaf for non-leaves.
  std::size_t leaf_index(VertexId leaf) const;
  VertexId leaf_at(std::size_t index) const { return leaves_.at(index); }
  /// Half-open range of leaf indices covered by the ball `v`.
  std::size_t leaf_begin(VertexId v) const { return leaf_begin_[v.value]; }
  std::size_t leaf_end(VertexId v) const { return leaf_end_[v.value]; }

  /// True if `descendant` lies in the ball `ancestor` (including equality).
  bool within(VertexId descendant, VertexId ancestor) const;

  const std::string& name(VertexId v) const { return names_[v.value]; }
  std::optional<VertexId> find(std::string_view name) const;
  /// Like find(), but throws MalformedSpec naming the missing id.
  VertexId at(std::string_view name) const;

 private:
  BallTree() = default;

  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> child_offset_;
  std::vector<VertexId> child_list_;
  std::vector<std::uint32_t> child_rank_;
  std::vector<std::uint32_t> depth_;
  std::vector<double> measure_;
  std::vector<std::string> names_;
  std::vector<VertexId> leaves_;
  std::vector<VertexId> interior_;
  std::vector<std::uint32_t> leaf_slot_;
  std::vector<std::uint32_t> leaf_begin_;
  std::vector<std::uint32_t> leaf_end_;
  std::unordered_map<std::string, VertexId> by_name_;
  std::size_t height_ = 0;
};

/// Minimal ball containing both leaves (their lowest common ancestor).
/// sup(x, x) is x itself.
VertexId sup(const BallTree& tree, VertexId x, VertexId y);

/// The child of `ancestor` on the path down to `descendant`.
VertexId child_toward(const BallTree& tree, VertexId ancestor, VertexId descendant);

/// Canonical ultrametric d(x, y) = measure of sup(x, y), and 0 on the diagonal.
double distance(const BallTree& tree, VertexId x, VertexId y);

/// Perfect p-ary tree of the given depth with uniform leaf measure.
BallTree generate_homogeneous(int branching, int depth, double total_measure);

struct RandomTreeParams {
  int max_depth = 3;
  int max_branching = 4;
  /// Leaf measures are drawn uniformly from [measure_low, measure_high].
  double measure_low = 0.1;
  double measure_high = 1.0;
  /// Probability that a non-root vertex above max_depth is split further.
  double split_probability = 0.6;
};

/// Random valid tree, deterministic in `seed`. The root is always split;
/// vertices at max_depth are always leaves.
BallTree generate_random(std::uint64_t seed, const RandomTreeParams& params);

/// Node list describing `tree`, in preorder. `symbol` (indexed by vertex id,
/// interior entries only) is attached as the "T" field when given.
std::vector<NodeSpec> to_nodes(const BallTree& tree,
                               std::span<const double> symbol = {});

}  // namespace ultrafield

template <>
struct std::hash<ultrafield::VertexId> {
  std::size_t operator()(ultrafield::VertexId v) const noexcept {
    return std::hash<std::uint32_t>{}(v.value);
  }
};
