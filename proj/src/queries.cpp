#include "dynoct/queries.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace dynoct {

namespace {

// Sort key shared by all exact queries: squared distance first, id second.
// Squared distances order identically to true distances and avoid the sqrt
// until reporting.
struct Candidate {
  double d2;
  PointId id;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.d2 != b.d2) return a.d2 < b.d2;
  return a.id < b.id;
}

std::vector<QueryHit> finalize(std::vector<Candidate> cands) {
  std::sort(cands.begin(), cands.end(), candidate_less);
  std::vector<QueryHit> out;
  out.reserve(cands.size());
  for (const Candidate& c : cands) out.push_back({c.id, std::sqrt(c.d2)});
  return out;
}

}  // namespace

std::vector<QueryHit> range_query(const Octree& tree, const Vec3& center,
                                  double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw InputError("range_query: radius must be finite and >= 0");
  }
  if (!is_finite(center)) {
    throw InputError("range_query: non-finite query point");
  }
  const double r2 = radius * radius;
  std::vector<Candidate> cands;
  std::vector<NodeHandle> stack{tree.root_handle()};
  while (!stack.empty()) {
    const NodeHandle h = stack.back();
    stack.pop_back();
    const Node& n = tree.node(h);
    if (n.bounds.min_squared_distance(center) > r2) continue;
    if (n.leaf) {
      for (std::size_t i = 0; i < n.ids.size(); ++i) {
        const double d2 = squared_distance(n.pts[i], center);
        if (d2 <= r2) cands.push_back({d2, n.ids[i]});
      }
      continue;
    }
    for (NodeHandle c : n.children) {
      if (c != kNullNode) stack.push_back(c);
    }
  }
  return finalize(std::move(cands));
}

std::vector<QueryHit> k_nearest(const Octree& tree, const Vec3& query,
                                std::size_t k) {
  if (k == 0) throw InputError("k_nearest: k must be >= 1");
  if (!is_finite(query)) throw InputError("k_nearest: non-finite query point");

  // Best-first search over nodes keyed by smallest possible distance, with a
  // max-heap of the k best points seen so far. (d2, id) ordering everywhere.
  using NodeKey = std::pair<double, NodeHandle>;
  std::priority_queue<NodeKey, std::vector<NodeKey>, std::greater<NodeKey>>
      frontier;
  frontier.push({0.0, tree.root_handle()});

  auto worse = [](const Candidate& a, const Candidate& b) {
    return candidate_less(a, b);
  };
  // max-heap: top is the current worst of the best k
  auto heap_cmp = [&](const Candidate& a, const Candidate& b) {
    return worse(a, b);
  };
  std::vector<Candidate> best;

  while (!frontier.empty()) {
    const auto [d2, h] = frontier.top();
    frontier.pop();
    if (best.size() == k && d2 > best.front().d2) break;
    const Node& n = tree.node(h);
    if (!n.leaf) {
      for (NodeHandle c : n.children) {
        if (c == kNullNode) continue;
        const double cd2 =
            tree.node(c).bounds.min_squared_distance(query);
        if (best.size() < k || cd2 <= best.front().d2) {
          frontier.push({cd2, c});
        }
      }
      continue;
    }
    for (std::size_t i = 0; i < n.ids.size(); ++i) {
      const Candidate cand{squared_distance(n.pts[i], query), n.ids[i]};
      if (best.size() < k) {
        best.push_back(cand);
        std::push_heap(best.begin(), best.end(), heap_cmp);
      } else if (candidate_less(cand, best.front())) {
        std::pop_heap(best.begin(), best.end(), heap_cmp);
        best.back() = cand;
        std::push_heap(best.begin(), best.end(), heap_cmp);
      }
    }
  }
  return finalize(std::move(best));
}

namespace {

struct LeafPair {
  NodeHandle a;
  NodeHandle b;  // a == b marks a within-leaf pair
};

void collect_leaf_pairs(const Octree& tree, NodeHandle a, NodeHandle b,
                        double cutoff2, std::vector<LeafPair>& out) {
  const Node& na = tree.node(a);
  const Node& nb = tree.node(b);
  if (a == b) {
    if (na.leaf) {
      if (!na.ids.empty()) out.push_back({a, a});
      return;
    }
    std::array<NodeHandle, 8> kids{};
    int nk = 0;
    for (NodeHandle c : na.children) {
      if (c != kNullNode) kids[nk++] = c;
    }
    for (int i = 0; i < nk; ++i) {
      collect_leaf_pairs(tree, kids[i], kids[i], cutoff2, out);
      for (int j = i + 1; j < nk; ++j) {
        collect_leaf_pairs(tree, kids[i], kids[j], cutoff2, out);
      }
    }
    return;
  }
  if (na.bounds.min_squared_distance(nb.bounds) > cutoff2) return;
  if (na.leaf && nb.leaf) {
    if (!na.ids.empty() && !nb.ids.empty()) out.push_back({a, b});
    return;
  }
  // Expand the internal node; when both are internal, the geometrically
  // larger one, so box extents shrink on both sides of the recursion.
  auto volume = [](const Aabb& box) {
    return (box.max[0] - box.min[0]) * (box.max[1] - box.min[1]) *
           (box.max[2] - box.min[2]);
  };
  const bool expand_a =
      !na.leaf && (nb.leaf || volume(na.bounds) >= volume(nb.bounds));
  if (expand_a) {
    for (NodeHandle c : na.children) {
      if (c != kNullNode) collect_leaf_pairs(tree, c, b, cutoff2, out);
    }
  } else {
    for (NodeHandle c : nb.children) {
      if (c != kNullNode) collect_leaf_pairs(tree, a, c, cutoff2, out);
    }
  }
}

struct HitPair {
  PointId u;
  PointId v;
  double distance;
};

}  // namespace

NeighborList build_neighbor_lists(const Octree& tree, double cutoff) {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
    throw InputError("build_neighbor_lists: cutoff must be finite and > 0");
  }
  const double cutoff2 = cutoff * cutoff;

  NeighborList result;
  result.cutoff = cutoff;
  result.lists.reserve(tree.size() * 2);
  tree.for_each_point(
      [&](PointId id, const Vec3&) { result.lists.emplace(id, 0); });

  std::vector<LeafPair> pairs;
  collect_leaf_pairs(tree, tree.root_handle(), tree.root_handle(), cutoff2,
                     pairs);

  // Each unordered point pair is tested exactly once, in the slot of its
  // leaf pair; per-slot outputs make the result independent of scheduling.
  std::vector<std::vector<HitPair>> hits(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(pairs.size());
       ++p) {
    const Node& na = tree.node(pairs[p].a);
    std::vector<HitPair>& out = hits[p];
    if (pairs[p].a == pairs[p].b) {
      for (std::size_t i = 0; i < na.ids.size(); ++i) {
        for (std::size_t j = i + 1; j < na.ids.size(); ++j) {
          const double d2 = squared_distance(na.pts[i], na.pts[j]);
          if (d2 <= cutoff2) {
            out.push_back({na.ids[i], na.ids[j], std::sqrt(d2)});
          }
        }
      }
    } else {
      const Node& nb = tree.node(pairs[p].b);
      for (std::size_t i = 0; i < na.ids.size(); ++i) {
        for (std::size_t j = 0; j < nb.ids.size(); ++j) {
          const double d2 = squared_distance(na.pts[i], nb.pts[j]);
          if (d2 <= cutoff2) {
            out.push_back({na.ids[i], nb.ids[j], std::sqrt(d2)});
          }
        }
      }
    }
  }

  for (const auto& block : hits) {
    for (const HitPair& h : block) {
      result.lists[h.u].push_back({h.v, h.distance});
      result.lists[h.v].push_back({h.u, h.distance});
    }
  }

  std::vector<std::vector<NeighborEntry>*> to_sort;
  to_sort.reserve(result.lists.size());
  for (auto& [id, list] : result.lists) to_sort.push_back(&list);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(to_sort.size());
       ++i) {
    std::sort(to_sort[i]->begin(), to_sort[i]->end(),
              [](const NeighborEntry& a, const NeighborEntry& b) {
                if (a.distance != b.distance) return a.distance < b.distance;
                return a.id < b.id;
              });
  }
  return result;
}

}  // namespace dynoct
