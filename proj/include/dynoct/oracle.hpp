#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "dynoct/geometry.hpp"
#include "dynoct/queries.hpp"

namespace dynoct::oracle {

/// Flat id/position array with the same operation contract as the tree.
/// Deliberately kept serial and allocation-simple: it is the reference
/// implementation the tree is checked against, and the baseline structure in
/// the benchmark harness (where "update" means rebuild).
class FlatPointSet {
 public:
  FlatPointSet() = default;

  void insert(PointId id, const Vec3& pos);
  void remove(PointId id);
  void update_position(PointId id, const Vec3& pos);

  std::size_t size() const { return entries_.size(); }
  bool contains(PointId id) const { return index_.count(id) != 0; }
  void clear();

  struct Entry {
    PointId id;
    Vec3 pos;
    bool operator==(const Entry&) const = default;
  };
  const std::vector<Entry>& entries() const { return entries_; }

  /// Entries sorted by id; the canonical observable state.
  std::vector<Entry> sorted_entries() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<PointId, std::size_t> index_;
};

std::vector<QueryHit> brute_range(const FlatPointSet& set, const Vec3& center,
                                  double radius);
std::vector<QueryHit> brute_knn(const FlatPointSet& set, const Vec3& query,
                                std::size_t k);
NeighborList brute_pairs(const FlatPointSet& set, double cutoff);

/// Copies a tree's live points into a flat set (sorted by id).
FlatPointSet snapshot(const Octree& tree);

}  // namespace dynoct::oracle
