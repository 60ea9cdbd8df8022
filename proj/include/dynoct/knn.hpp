#pragma once

#include <unordered_map>
#include <vector>

#include "dynoct/octree.hpp"
#include "dynoct/queries.hpp"

namespace dynoct {

struct LabeledPoint {
  PointId id;
  Vec3 pos;
  int label;  // non-negative class id
};

/// Majority label among hits. Tie-break order: higher vote count, then
/// smaller summed distance among tied classes, then smaller class id.
/// labels[i] is the class of hits[i].
int majority_vote(const std::vector<QueryHit>& hits,
                  const std::vector<int>& labels);

/// Incremental KNN classifier: points live in a dynamic octree, batches are
/// inserted without any rebuild. classify/evaluate are read-only and safe to
/// call concurrently; add_batch requires exclusive access.
class KnnClassifier {
 public:
  KnnClassifier(const OctreeConfig& config, const Aabb& initial_bounds, int k);

  /// All-or-nothing: the whole batch is validated (finite positions,
  /// non-negative labels, ids fresh and unique) before anything is inserted.
  void add_batch(const std::vector<LabeledPoint>& batch);

  int classify(const Vec3& query) const;

  /// Fraction of test points whose prediction matches their label.
  double evaluate(const std::vector<LabeledPoint>& test) const;

  std::size_t size() const { return tree_.size(); }
  int k() const { return k_; }
  const Octree& tree() const { return tree_; }
  int label_of(PointId id) const;

 private:
  Octree tree_;
  std::unordered_map<PointId, int> labels_;
  int k_;
};

}  // namespace dynoct
