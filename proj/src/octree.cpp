#include "dynoct/octree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynoct {

namespace {

std::string fmt_id(PointId id) { return std::to_string(id); }

}  // namespace

Octree::Octree(const OctreeConfig& config, const Aabb& initial_bounds)
    : config_(config) {
  config_.validate();
  if (!initial_bounds.non_degenerate() || !is_finite(initial_bounds.min) ||
      !is_finite(initial_bounds.max)) {
    throw InputError("initial bounds must be finite and non-degenerate");
  }
  leaf_cap_ = config_.leaf_capacity();
  merge_floor_ = config_.internal_floor();
  doublings_per_expansion_ = std::max(
      1, static_cast<int>(std::ceil(std::log2(config_.expansion_factor))));
  root_ = create_node();
  nodes_[root_].bounds = initial_bounds;
}

NodeHandle Octree::create_node() {
  if (!free_list_.empty()) {
    NodeHandle h = free_list_.back();
    free_list_.pop_back();
    Node& n = nodes_[h];
    n.parent = kNullNode;
    n.subtree_count = 0;
    n.leaf = true;
    n.children.fill(kNullNode);
    n.ids.clear();
    n.pts.clear();
    return h;
  }
  if (nodes_.size() >= kNullNode) throw StateError("node arena exhausted");
  nodes_.emplace_back();
  return static_cast<NodeHandle>(nodes_.size() - 1);
}

void Octree::free_node(NodeHandle h) {
  Node& n = nodes_[h];
  n.ids.clear();
  n.pts.clear();
  n.children.fill(kNullNode);
  n.parent = kNullNode;
  n.leaf = true;
  n.subtree_count = 0;
  free_list_.push_back(h);
}

int Octree::octant_of(const Vec3& center, const Vec3& p) const {
  int oct = 0;
  if (p[0] >= center[0]) oct |= 1;
  if (p[1] >= center[1]) oct |= 2;
  if (p[2] >= center[2]) oct |= 4;
  return oct;
}

Aabb Octree::octant_bounds(const Node& parent, int oct) const {
  Aabb b;
  for (int i = 0; i < 3; ++i) {
    if (oct & (1 << i)) {
      b.min[i] = parent.center[i];
      b.max[i] = parent.bounds.max[i];
    } else {
      b.min[i] = parent.bounds.min[i];
      b.max[i] = parent.center[i];
    }
  }
  return b;
}

bool Octree::node_contains(const Node& n, const Vec3& p) const {
  // Half-open per axis. A face on the root's max face is closed, as is a
  // zero-width axis (possible only at extreme subdivision depths).
  const Aabb& root_box = nodes_[root_].bounds;
  for (int i = 0; i < 3; ++i) {
    if (p[i] < n.bounds.min[i]) return false;
    if (p[i] < n.bounds.max[i]) continue;
    const bool closed = (p[i] == n.bounds.max[i]) &&
                        (n.bounds.max[i] == root_box.max[i] ||
                         n.bounds.min[i] == n.bounds.max[i]);
    if (!closed) return false;
  }
  return true;
}

NodeHandle Octree::ensure_child(NodeHandle h, int oct) {
  NodeHandle child = nodes_[h].children[oct];
  if (child != kNullNode) return child;
  child = create_node();  // may grow the arena; re-index afterwards
  nodes_[child].bounds = octant_bounds(nodes_[h], oct);
  nodes_[child].parent = h;
  nodes_[h].children[oct] = child;
  return child;
}

void Octree::split_leaf(NodeHandle h, int depth) {
  if (depth >= config_.max_depth) return;  // cap-exempt overflow leaf
  if (nodes_[h].ids.size() <= leaf_cap_) return;

  std::vector<PointId> ids = std::move(nodes_[h].ids);
  std::vector<Vec3> pts = std::move(nodes_[h].pts);
  nodes_[h].ids.clear();
  nodes_[h].pts.clear();
  nodes_[h].leaf = false;
  nodes_[h].center = nodes_[h].bounds.center();

  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int oct = octant_of(nodes_[h].center, pts[i]);
    const NodeHandle child = ensure_child(h, oct);
    nodes_[child].ids.push_back(ids[i]);
    nodes_[child].pts.push_back(pts[i]);
    ++nodes_[child].subtree_count;
    registry_[ids[i]].leaf = child;
  }
  for (int oct = 0; oct < 8; ++oct) {
    const NodeHandle child = nodes_[h].children[oct];
    if (child != kNullNode && nodes_[child].ids.size() > leaf_cap_) {
      split_leaf(child, depth + 1);
    }
  }
}

void Octree::collapse_to_leaf(NodeHandle h) {
  std::vector<PointId> ids;
  std::vector<Vec3> pts;
  ids.reserve(nodes_[h].subtree_count);
  pts.reserve(nodes_[h].subtree_count);

  std::vector<NodeHandle> stack;
  for (NodeHandle c : nodes_[h].children) {
    if (c != kNullNode) stack.push_back(c);
  }
  while (!stack.empty()) {
    const NodeHandle n = stack.back();
    stack.pop_back();
    if (nodes_[n].leaf) {
      ids.insert(ids.end(), nodes_[n].ids.begin(), nodes_[n].ids.end());
      pts.insert(pts.end(), nodes_[n].pts.begin(), nodes_[n].pts.end());
    } else {
      for (NodeHandle c : nodes_[n].children) {
        if (c != kNullNode) stack.push_back(c);
      }
    }
    free_node(n);
  }

  Node& node = nodes_[h];
  node.leaf = true;
  node.children.fill(kNullNode);
  node.ids = std::move(ids);
  node.pts = std::move(pts);
  for (PointId id : node.ids) registry_[id].leaf = h;
}

void Octree::rebalance_after_removal(NodeHandle leaf, NodeHandle stop) {
  NodeHandle cursor;
  if (nodes_[leaf].ids.empty() && leaf != root_) {
    const NodeHandle parent = nodes_[leaf].parent;
    for (int oct = 0; oct < 8; ++oct) {
      if (nodes_[parent].children[oct] == leaf) {
        nodes_[parent].children[oct] = kNullNode;
        break;
      }
    }
    free_node(leaf);
    cursor = parent;
  } else {
    cursor = nodes_[leaf].parent;
  }

  NodeHandle highest = kNullNode;
  while (cursor != kNullNode && cursor != stop) {
    if (!nodes_[cursor].leaf && nodes_[cursor].subtree_count <= merge_floor_) {
      highest = cursor;
    }
    cursor = nodes_[cursor].parent;
  }
  if (highest == kNullNode) return;

  collapse_to_leaf(highest);
  if (nodes_[highest].ids.empty() && highest != root_) {
    const NodeHandle parent = nodes_[highest].parent;
    for (int oct = 0; oct < 8; ++oct) {
      if (nodes_[parent].children[oct] == highest) {
        nodes_[parent].children[oct] = kNullNode;
        break;
      }
    }
    free_node(highest);
  }
}

void Octree::collapse_violating_ancestors(NodeHandle from) {
  NodeHandle highest = kNullNode;
  NodeHandle cursor = from;
  while (cursor != kNullNode) {
    if (!nodes_[cursor].leaf && nodes_[cursor].subtree_count <= merge_floor_) {
      highest = cursor;
    }
    cursor = nodes_[cursor].parent;
  }
  if (highest != kNullNode) collapse_to_leaf(highest);
}

NodeHandle Octree::expand_to_cover(const Vec3& target) {
  if (nodes_[root_].bounds.contains_closed(target)) return kNullNode;
  const NodeHandle old_root = root_;
  const bool in_place = nodes_[root_].leaf && nodes_[root_].ids.empty();

  while (!nodes_[root_].bounds.contains_closed(target)) {
    for (int step = 0; step < doublings_per_expansion_; ++step) {
      const Aabb cur = nodes_[root_].bounds;
      Aabb grown;
      Vec3 seam;  // becomes the new root's split plane: the old box's face
      int old_oct = 0;
      for (int i = 0; i < 3; ++i) {
        const double w = cur.max[i] - cur.min[i];
        if (target[i] < cur.min[i]) {
          // grow downward, anchored at the max corner; old box = upper half
          grown.min[i] = cur.max[i] - 2.0 * w;
          grown.max[i] = cur.max[i];
          seam[i] = cur.min[i];
          old_oct |= (1 << i);
        } else {
          // grow upward, anchored at the min corner; old box = lower half
          grown.min[i] = cur.min[i];
          grown.max[i] = cur.min[i] + 2.0 * w;
          seam[i] = cur.max[i];
        }
      }
      if (!is_finite(grown.min) || !is_finite(grown.max)) {
        throw InputError("bounds expansion overflow toward target");
      }
      if (in_place) {
        nodes_[root_].bounds = grown;
        continue;
      }
      const NodeHandle new_root = create_node();
      nodes_[new_root].bounds = grown;
      nodes_[new_root].center = seam;
      nodes_[new_root].leaf = false;
      nodes_[new_root].subtree_count = nodes_[root_].subtree_count;
      nodes_[new_root].children[old_oct] = root_;
      nodes_[root_].parent = new_root;
      root_ = new_root;
    }
  }
  return in_place ? kNullNode : old_root;
}

void Octree::insert(PointId id, const Vec3& pos) {
  if (!is_finite(pos)) {
    throw InputError("insert: non-finite coordinate for id " + fmt_id(id));
  }
  if (registry_.count(id)) {
    throw DuplicateIdError("insert: id " + fmt_id(id) + " is already live");
  }

  const NodeHandle pre_growth_root = expand_to_cover(pos);

  NodeHandle h = root_;
  int depth = 0;
  ++nodes_[h].subtree_count;
  while (!nodes_[h].leaf) {
    const int oct = octant_of(nodes_[h].center, pos);
    h = ensure_child(h, oct);
    ++depth;
    ++nodes_[h].subtree_count;
  }
  nodes_[h].ids.push_back(id);
  nodes_[h].pts.push_back(pos);
  registry_[id] = PointRecord{h, pos};

  if (nodes_[h].ids.size() > leaf_cap_) split_leaf(h, depth);
  if (pre_growth_root != kNullNode) {
    // Re-rooting stacks single-child internal nodes whose counts may sit at
    // or below the merge floor; fold them back into one leaf if so.
    collapse_violating_ancestors(pre_growth_root);
  }
}

void Octree::remove(PointId id) {
  const auto it = registry_.find(id);
  if (it == registry_.end()) {
    throw NotFoundError("remove: id " + fmt_id(id) + " is not live");
  }
  const NodeHandle leaf = it->second.leaf;

  Node& ln = nodes_[leaf];
  const auto pos_it = std::find(ln.ids.begin(), ln.ids.end(), id);
  const std::size_t idx = static_cast<std::size_t>(pos_it - ln.ids.begin());
  ln.ids[idx] = ln.ids.back();
  ln.pts[idx] = ln.pts.back();
  ln.ids.pop_back();
  ln.pts.pop_back();
  registry_.erase(it);

  for (NodeHandle c = leaf; c != kNullNode; c = nodes_[c].parent) {
    --nodes_[c].subtree_count;
  }
  rebalance_after_removal(leaf, kNullNode);
}

void Octree::update_position(PointId id, const Vec3& new_pos) {
  if (!is_finite(new_pos)) {
    throw InputError("update_position: non-finite coordinate for id " +
                     fmt_id(id));
  }
  const auto it = registry_.find(id);
  if (it == registry_.end()) {
    throw NotFoundError("update_position: id " + fmt_id(id) + " is not live");
  }
  const NodeHandle src_leaf = it->second.leaf;
  const Vec3 old_pos = it->second.pos;

  if (node_contains(nodes_[src_leaf], new_pos)) {
    Node& ln = nodes_[src_leaf];
    const auto pos_it = std::find(ln.ids.begin(), ln.ids.end(), id);
    ln.pts[static_cast<std::size_t>(pos_it - ln.ids.begin())] = new_pos;
    it->second.pos = new_pos;
    return;
  }

  const NodeHandle pre_growth_root = expand_to_cover(new_pos);

  // Lowest common ancestor of the two positions: descend while both route to
  // the same octant. Every node visited lies on the old position's path, so
  // the lca is an ancestor of src_leaf.
  NodeHandle lca = root_;
  int lca_depth = 0;
  while (!nodes_[lca].leaf) {
    const int oct_old = octant_of(nodes_[lca].center, old_pos);
    const int oct_new = octant_of(nodes_[lca].center, new_pos);
    if (oct_old != oct_new) break;
    const NodeHandle child = nodes_[lca].children[oct_old];
    if (child == kNullNode) break;
    lca = child;
    ++lca_depth;
  }
  if (nodes_[lca].leaf) {
    // Routing reached the source leaf itself; treat as an in-leaf move.
    Node& ln = nodes_[lca];
    const auto pos_it = std::find(ln.ids.begin(), ln.ids.end(), id);
    ln.pts[static_cast<std::size_t>(pos_it - ln.ids.begin())] = new_pos;
    it->second.pos = new_pos;
    return;
  }

  // Detach from the source leaf; adjust counts up to (excluding) the lca.
  {
    Node& ln = nodes_[src_leaf];
    const auto pos_it = std::find(ln.ids.begin(), ln.ids.end(), id);
    const std::size_t idx = static_cast<std::size_t>(pos_it - ln.ids.begin());
    ln.ids[idx] = ln.ids.back();
    ln.pts[idx] = ln.pts.back();
    ln.ids.pop_back();
    ln.pts.pop_back();
  }
  for (NodeHandle c = src_leaf; c != lca; c = nodes_[c].parent) {
    --nodes_[c].subtree_count;
  }

  // Route into the destination branch.
  NodeHandle dst = lca;
  int dst_depth = lca_depth;
  while (!nodes_[dst].leaf) {
    const int oct = octant_of(nodes_[dst].center, new_pos);
    dst = ensure_child(dst, oct);
    ++dst_depth;
    ++nodes_[dst].subtree_count;
  }
  nodes_[dst].ids.push_back(id);
  nodes_[dst].pts.push_back(new_pos);
  it->second = PointRecord{dst, new_pos};

  if (nodes_[dst].ids.size() > leaf_cap_) split_leaf(dst, dst_depth);

  // Without a re-root, counts at or above the lca did not change, so the
  // merge scan may stop there. A re-root can leave low-count internal nodes
  // anywhere up the chain, so sweep the whole ancestor path in that case.
  rebalance_after_removal(src_leaf,
                          pre_growth_root == kNullNode ? lca : kNullNode);
}

Vec3 Octree::position_of(PointId id) const {
  const auto it = registry_.find(id);
  if (it == registry_.end()) {
    throw NotFoundError("position_of: id " + fmt_id(id) + " is not live");
  }
  return it->second.pos;
}

void Octree::validate_node(NodeHandle h, int depth, ValidationReport& report,
                           std::size_t& points_seen) const {
  const Node& n = nodes_[h];
  ++report.nodes_checked;
  auto flag = [&](const std::string& what) {
    std::ostringstream os;
    os << "node " << h << " (depth " << depth << "): " << what;
    report.violations.push_back(os.str());
  };

  if (n.leaf) {
    if (n.subtree_count != n.ids.size() || n.ids.size() != n.pts.size()) {
      flag("leaf subtree_count disagrees with stored points");
    }
    if (n.ids.size() > leaf_cap_) {
      if (depth >= config_.max_depth) {
        ++report.depth_capped_leaves;
      } else {
        flag("leaf holds " + std::to_string(n.ids.size()) +
             " points, capacity " + std::to_string(leaf_cap_));
      }
    }
    if (n.ids.empty() && h != root_) flag("empty non-root leaf");
    for (std::size_t i = 0; i < n.ids.size(); ++i) {
      ++points_seen;
      if (!node_contains(n, n.pts[i])) {
        flag("point " + fmt_id(n.ids[i]) + " lies outside its leaf box");
      }
      const auto it = registry_.find(n.ids[i]);
      if (it == registry_.end()) {
        flag("point " + fmt_id(n.ids[i]) + " missing from registry");
      } else if (it->second.leaf != h || it->second.pos != n.pts[i]) {
        flag("registry record for point " + fmt_id(n.ids[i]) + " is stale");
      }
    }
    return;
  }

  if (n.subtree_count <= merge_floor_) {
    flag("internal node holds " + std::to_string(n.subtree_count) +
         " points, floor " + std::to_string(merge_floor_));
  }
  std::size_t child_sum = 0;
  std::size_t child_count = 0;
  for (int oct = 0; oct < 8; ++oct) {
    const NodeHandle c = n.children[oct];
    if (c == kNullNode) continue;
    ++child_count;
    child_sum += nodes_[c].subtree_count;
    if (nodes_[c].parent != h) flag("child back-link broken");
    const Aabb expect = octant_bounds(n, oct);
    if (nodes_[c].bounds.min != expect.min ||
        nodes_[c].bounds.max != expect.max) {
      flag("child box does not tile its octant");
    }
    validate_node(c, depth + 1, report, points_seen);
  }
  if (child_count == 0) flag("internal node with no children");
  if (child_sum != n.subtree_count) {
    flag("subtree_count " + std::to_string(n.subtree_count) +
         " != sum of children " + std::to_string(child_sum));
  }
}

ValidationReport Octree::validate_admissibility() const {
  ValidationReport report;
  std::size_t points_seen = 0;
  validate_node(root_, 0, report, points_seen);
  if (points_seen != registry_.size()) {
    report.violations.push_back("tree holds " + std::to_string(points_seen) +
                                " points, registry " +
                                std::to_string(registry_.size()));
  }
  if (nodes_[root_].subtree_count != registry_.size()) {
    report.violations.push_back("root subtree_count disagrees with size()");
  }
  return report;
}

TreeStats Octree::stats() const {
  TreeStats s;
  s.points = registry_.size();
  std::vector<std::pair<NodeHandle, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    const auto [h, depth] = stack.back();
    stack.pop_back();
    ++s.nodes;
    s.height = std::max(s.height, depth);
    if (nodes_[h].leaf) {
      ++s.leaves;
      continue;
    }
    for (NodeHandle c : nodes_[h].children) {
      if (c != kNullNode) stack.emplace_back(c, depth + 1);
    }
  }
  return s;
}

}  // namespace dynoct
