#include "dynoct/knn.hpp"

#include <map>
#include <unordered_set>

#include "dynoct/errors.hpp"

namespace dynoct {

int majority_vote(const std::vector<QueryHit>& hits,
                  const std::vector<int>& labels) {
  if (hits.empty()) throw InputError("majority vote over no hits");
  if (hits.size() != labels.size()) {
    throw ConsistencyError("hits and labels differ in length");
  }
  struct Tally {
    int count = 0;
    double dist_sum = 0.0;
  };
  std::map<int, Tally> tallies;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    Tally& t = tallies[labels[i]];
    t.count += 1;
    t.dist_sum += hits[i].distance;
  }
  int best_label = tallies.begin()->first;
  Tally best = tallies.begin()->second;
  for (const auto& [label, t] : tallies) {
    if (t.count > best.count ||
        (t.count == best.count && t.dist_sum < best.dist_sum)) {
      best_label = label;
      best = t;
    }
  }
  return best_label;  // map order makes the final tie favor the smaller id
}

KnnClassifier::KnnClassifier(const OctreeConfig& config,
                             const Aabb& initial_bounds, int k)
    : tree_(config, initial_bounds), k_(k) {
  if (k < 1) throw ConfigError("k must be >= 1");
}

void KnnClassifier::add_batch(const std::vector<LabeledPoint>& batch) {
  std::unordered_set<PointId> seen;
  seen.reserve(batch.size());
  for (const LabeledPoint& p : batch) {
    if (!is_finite(p.pos)) throw InputError("non-finite position in batch");
    if (p.label < 0) throw InputError("negative class label in batch");
    if (labels_.count(p.id) || !seen.insert(p.id).second) {
      throw DuplicateIdError("duplicate id in batch");
    }
  }
  for (const LabeledPoint& p : batch) {
    tree_.insert(p.id, p.pos);
    labels_.emplace(p.id, p.label);
  }
}

int KnnClassifier::classify(const Vec3& query) const {
  if (tree_.size() == 0) throw StateError("classifier has no training points");
  const std::vector<QueryHit> hits =
      k_nearest(tree_, query, static_cast<std::size_t>(k_));
  std::vector<int> labels;
  labels.reserve(hits.size());
  for (const QueryHit& h : hits) labels.push_back(labels_.at(h.id));
  return majority_vote(hits, labels);
}

double KnnClassifier::evaluate(const std::vector<LabeledPoint>& test) const {
  if (test.empty()) throw InputError("empty test set");
  std::size_t correct = 0;
#pragma omp parallel for schedule(static) reduction(+ : correct)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(test.size());
       ++i) {
    const LabeledPoint& p = test[static_cast<std::size_t>(i)];
    if (classify(p.pos) == p.label) correct += 1;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

int KnnClassifier::label_of(PointId id) const {
  auto it = labels_.find(id);
  if (it == labels_.end()) throw NotFoundError("unknown point id");
  return it->second;
}

}  // namespace dynoct
