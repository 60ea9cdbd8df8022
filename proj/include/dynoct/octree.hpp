#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynoct/errors.hpp"
#include "dynoct/geometry.hpp"

namespace dynoct {

/// Structure parameters. A tree built with capacity scale K and slack alpha
/// keeps every leaf at or below floor(alpha*K) points and every internal node
/// strictly above floor(K/alpha) points; the two bounds are what splitting
/// and merging maintain.
struct OctreeConfig {
  int K = 10;
  double alpha = 2.0;
  int max_depth = 32;
  double expansion_factor = 2.0;

  std::size_t leaf_capacity() const {
    return static_cast<std::size_t>(alpha * static_cast<double>(K));
  }
  std::size_t internal_floor() const {
    return static_cast<std::size_t>(static_cast<double>(K) / alpha);
  }

  void validate() const {
    if (K < 1) throw ConfigError("K must be a positive integer");
    if (!(alpha >= 1.0) || !std::isfinite(alpha))
      throw ConfigError("alpha must be finite and >= 1");
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (!(expansion_factor > 1.0) || !std::isfinite(expansion_factor))
      throw ConfigError("expansion_factor must be finite and > 1");
  }
};

using NodeHandle = std::uint32_t;
inline constexpr NodeHandle kNullNode = std::numeric_limits<NodeHandle>::max();

/// Arena-resident node. Leaves carry their points in parallel id/position
/// arrays; internal nodes carry up to eight child handles, kNullNode where an
/// octant holds no points. subtree_count is the number of points under the
/// node, itself included for leaves. center is the split plane of an internal
/// node, stored explicitly so that routing and the derived child boxes agree
/// bitwise (a recomputed midpoint would not, after a re-root).
struct Node {
  Aabb bounds;
  Vec3 center{0.0, 0.0, 0.0};
  NodeHandle parent = kNullNode;
  std::size_t subtree_count = 0;
  bool leaf = true;
  std::array<NodeHandle, 8> children{kNullNode, kNullNode, kNullNode,
                                     kNullNode, kNullNode, kNullNode,
                                     kNullNode, kNullNode};
  std::vector<PointId> ids;
  std::vector<Vec3> pts;
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::size_t depth_capped_leaves = 0;
  std::size_t nodes_checked = 0;
  bool ok() const { return violations.empty(); }
};

struct TreeStats {
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  std::size_t points = 0;
  std::size_t height = 0;
};

struct OctreeTestAccess;

/// Dynamic octree over 3-d points with caller-supplied ids. Single writer;
/// any number of concurrent readers between mutations. Point membership per
/// octant is half-open, [min, max) on each axis, with the top-most max face
/// closed, so every coordinate in the root box belongs to exactly one leaf.
class Octree {
 public:
  Octree(const OctreeConfig& config, const Aabb& initial_bounds);

  /// Inserts a new point. Grows the root box by re-rooting when pos lies
  /// outside it. Throws DuplicateIdError / InputError.
  void insert(PointId id, const Vec3& pos);

  /// Removes a live point. Throws NotFoundError.
  void remove(PointId id);

  /// Moves a live point. A move within its current leaf touches only the
  /// stored coordinate; otherwise the point migrates between the two leaves
  /// under their lowest common ancestor, splitting and merging only nodes on
  /// those two paths. Observationally equal to remove followed by insert.
  void update_position(PointId id, const Vec3& new_pos);

  std::size_t size() const { return registry_.size(); }
  bool contains(PointId id) const { return registry_.count(id) != 0; }
  Vec3 position_of(PointId id) const;

  const OctreeConfig& config() const { return config_; }
  const Aabb& bounds() const { return nodes_[root_].bounds; }

  NodeHandle root_handle() const { return root_; }
  const Node& node(NodeHandle h) const { return nodes_[h]; }

  /// Visits every live point as fn(id, position). Order is unspecified.
  template <typename Fn>
  void for_each_point(Fn&& fn) const {
    for (const auto& [id, rec] : registry_) fn(id, rec.pos);
  }

  /// Full structural audit: both admissibility bounds, subtree-count sums,
  /// point/box membership, and registry agreement. Leaves at the depth cap
  /// are exempt from the capacity bound and reported separately.
  ValidationReport validate_admissibility() const;

  TreeStats stats() const;

 private:
  friend struct OctreeTestAccess;

  struct PointRecord {
    NodeHandle leaf = kNullNode;
    Vec3 pos{};
  };

  NodeHandle create_node();
  void free_node(NodeHandle h);

  int octant_of(const Vec3& center, const Vec3& p) const;
  Aabb octant_bounds(const Node& parent, int oct) const;
  bool node_contains(const Node& n, const Vec3& p) const;

  NodeHandle ensure_child(NodeHandle h, int oct);
  void split_leaf(NodeHandle h, int depth);
  void collapse_to_leaf(NodeHandle h);

  /// Detaches an emptied leaf, then collapses the highest ancestor strictly
  /// below stop (all ancestors when stop is kNullNode) whose subtree count
  /// fell to the merge threshold.
  void rebalance_after_removal(NodeHandle leaf, NodeHandle stop);

  /// Collapses the highest node on from's ancestor chain (inclusive) that
  /// violates the internal-node floor. Used after re-rooting, which can
  /// stack low-count internal nodes above the old root.
  void collapse_violating_ancestors(NodeHandle from);

  /// Re-roots until target is inside the root box. Returns the pre-growth
  /// root, or kNullNode when no re-root happened (empty tree grows in
  /// place).
  NodeHandle expand_to_cover(const Vec3& target);

  void validate_node(NodeHandle h, int depth, ValidationReport& report,
                     std::size_t& points_seen) const;

  OctreeConfig config_;
  std::size_t leaf_cap_;
  std::size_t merge_floor_;
  int doublings_per_expansion_;
  NodeHandle root_;
  std::vector<Node> nodes_;
  std::vector<NodeHandle> free_list_;
  std::unordered_map<PointId, PointRecord> registry_;
};

/// Test-only backdoor for constructing trees in states the public interface
/// would never produce.
struct OctreeTestAccess {
  static std::vector<Node>& nodes(Octree& t) { return t.nodes_; }
  static NodeHandle& root(Octree& t) { return t.root_; }
  static std::unordered_map<PointId, Octree::PointRecord>& registry(
      Octree& t) {
    return t.registry_;
  }
  static void put_record(Octree& t, PointId id, NodeHandle leaf,
                         const Vec3& pos) {
    t.registry_[id] = {leaf, pos};
  }
};

}  // namespace dynoct
