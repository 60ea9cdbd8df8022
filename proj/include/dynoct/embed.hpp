#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dynoct/octree.hpp"

namespace dynoct {

/// Row-major storage of D-dimensional vectors keyed by id, kept in
/// insertion order.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim);

  void insert(PointId id, const std::vector<double>& v);
  bool contains(PointId id) const { return index_.count(id) != 0; }
  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }

  /// Pointer to the id's D contiguous components.
  const double* row(PointId id) const;
  const double* row_at(std::size_t position) const {
    return data_.data() + position * dim_;
  }
  const std::vector<PointId>& ids() const { return ids_; }

 private:
  std::size_t dim_;
  std::vector<double> data_;
  std::vector<PointId> ids_;
  std::unordered_map<PointId, std::size_t> index_;
};

/// Squared Euclidean distance between two D-vectors, accumulated in index
/// order; every exact D-dimensional comparison in this module runs through
/// here so ranking ties are reproducible.
double squared_distance_nd(const double* a, const double* b, std::size_t dim);

struct IndexResult {
  PointId id;
  double distance;  // exact D-dimensional distance
};

/// Exact top-k by (distance, id) over the whole store; the ground truth that
/// recall is measured against.
std::vector<IndexResult> exhaustive_query(const EmbeddingStore& store,
                                          const std::vector<double>& query,
                                          std::size_t k);

/// Three-phase vector index: k-means partition of the build set, per-cluster
/// rank-3 PCA projection to 3D, one dynamic octree per cluster. Queries probe
/// the nearest clusters, gather candidates from the 3D trees, and re-rank
/// them by exact D-dimensional distance. Centroids and projections are
/// frozen at build time; later inserts join the nearest frozen centroid.
class HybridIndex {
 public:
  struct BuildParams {
    std::size_t num_clusters = 8;
    std::uint64_t seed = 0;
    int max_kmeans_iterations = 100;
    int power_iterations = 30;
    OctreeConfig octree;
  };

  HybridIndex(const EmbeddingStore& store, const BuildParams& params);

  void insert(PointId id, const std::vector<double>& v);

  std::vector<IndexResult> query(const std::vector<double>& q,
                                 std::size_t top_k, std::size_t probe_clusters,
                                 std::size_t candidate_multiplier) const;

  /// Mean fraction of the exact top-k recovered by query() over the given
  /// query set.
  double recall_at_k(const std::vector<std::vector<double>>& queries,
                     std::size_t k, std::size_t probe_clusters,
                     std::size_t candidate_multiplier) const;

  std::size_t size() const { return store_.size(); }
  std::size_t dim() const { return store_.dim(); }
  /// Non-empty clusters that survived the build; may be fewer than requested.
  std::size_t num_clusters() const { return clusters_.size(); }
  std::size_t cluster_of(PointId id) const;
  const Octree& cluster_tree(std::size_t cluster) const;
  const std::vector<double>& centroid(std::size_t cluster) const;
  const EmbeddingStore& store() const { return store_; }

  /// Project a D-vector with a cluster's frozen operator.
  Vec3 project(std::size_t cluster, const double* v) const;

 private:
  struct Cluster {
    std::vector<double> centroid;      // D
    std::vector<double> mean;          // D, PCA centering point
    std::vector<double> basis;         // 3 x D, row-major orthonormal rows
    Octree tree;
    Cluster(const OctreeConfig& cfg, const Aabb& box) : tree(cfg, box) {}
  };

  EmbeddingStore store_;
  std::vector<Cluster> clusters_;
  std::unordered_map<PointId, std::size_t> assignment_;

  std::size_t nearest_cluster(const double* v) const;
};

}  // namespace dynoct
