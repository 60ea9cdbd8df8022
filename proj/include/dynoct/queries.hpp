#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "dynoct/octree.hpp"

namespace dynoct {

struct QueryHit {
  PointId id;
  double distance;
};

/// All points within radius of center (inclusive), sorted by
/// (distance, id) ascending. radius must be finite and >= 0.
std::vector<QueryHit> range_query(const Octree& tree, const Vec3& center,
                                  double radius);

/// The k nearest points to query under (distance, id) lexicographic order;
/// all points when k >= size. k must be >= 1.
std::vector<QueryHit> k_nearest(const Octree& tree, const Vec3& query,
                                std::size_t k);

struct NeighborEntry {
  PointId id;
  double distance;
};

/// Symmetric fixed-radius neighbor lists. Every live point has an entry
/// (possibly empty); no self pairs; each list sorted by (distance, id).
struct NeighborList {
  double cutoff = 0.0;
  std::unordered_map<PointId, std::vector<NeighborEntry>> lists;

  std::size_t total_directed_pairs() const {
    std::size_t n = 0;
    for (const auto& [id, l] : lists) n += l.size();
    return n;
  }
};

/// Builds neighbor lists for every live point at the given cutoff
/// (inclusive) with a simultaneous traversal over node pairs, pruning a pair
/// when the smallest box-to-box distance exceeds the cutoff. Results do not
/// depend on thread count or schedule. cutoff must be finite and > 0.
NeighborList build_neighbor_lists(const Octree& tree, double cutoff);

}  // namespace dynoct
