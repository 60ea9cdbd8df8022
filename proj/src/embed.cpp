#include "dynoct/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dynoct/errors.hpp"
#include "dynoct/queries.hpp"
#include "dynoct/rng.hpp"

namespace dynoct {

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
}

void EmbeddingStore::insert(PointId id, const std::vector<double>& v) {
  if (v.size() != dim_) throw InputError("vector dimension mismatch");
  for (double x : v) {
    if (!std::isfinite(x)) throw InputError("non-finite vector component");
  }
  if (index_.count(id)) throw DuplicateIdError("id already stored");
  index_.emplace(id, ids_.size());
  ids_.push_back(id);
  data_.insert(data_.end(), v.begin(), v.end());
}

const double* EmbeddingStore::row(PointId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("unknown vector id");
  return row_at(it->second);
}

double squared_distance_nd(const double* a, const double* b,
                           std::size_t dim) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return d2;
}

std::vector<IndexResult> exhaustive_query(const EmbeddingStore& store,
                                          const std::vector<double>& query,
                                          std::size_t k) {
  if (query.size() != store.dim()) throw InputError("query dimension mismatch");
  if (k < 1) throw InputError("k must be >= 1");
  struct Cand {
    double d2;
    PointId id;
  };
  std::vector<Cand> cands;
  cands.reserve(store.size());
  for (std::size_t p = 0; p < store.size(); ++p) {
    cands.push_back(
        {squared_distance_nd(query.data(), store.row_at(p), store.dim()),
         store.ids()[p]});
  }
  const std::size_t keep = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(),
                    [](const Cand& a, const Cand& b) {
                      return a.d2 != b.d2 ? a.d2 < b.d2 : a.id < b.id;
                    });
  std::vector<IndexResult> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back({cands[i].id, std::sqrt(cands[i].d2)});
  }
  return out;
}

namespace {

Aabb box_around(const std::vector<Vec3>& pts) {
  Aabb b{pts.front(), pts.front()};
  for (const Vec3& p : pts) {
    for (int a = 0; a < 3; ++a) {
      b.min[a] = std::min(b.min[a], p[a]);
      b.max[a] = std::max(b.max[a], p[a]);
    }
  }
  double extent = 0.0;
  for (int a = 0; a < 3; ++a) extent = std::max(extent, b.max[a] - b.min[a]);
  const double pad = std::max(0.5, 0.1 * extent);
  for (int a = 0; a < 3; ++a) {
    b.min[a] -= pad;
    b.max[a] += pad;
  }
  return b;
}

}  // namespace

std::size_t HybridIndex::nearest_cluster(const double* v) const {
  const std::size_t D = store_.dim();
  std::size_t best = 0;
  double best_d2 = squared_distance_nd(v, clusters_[0].centroid.data(), D);
  for (std::size_t c = 1; c < clusters_.size(); ++c) {
    const double d2 = squared_distance_nd(v, clusters_[c].centroid.data(), D);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

Vec3 HybridIndex::project(std::size_t cluster, const double* v) const {
  const Cluster& cl = clusters_[cluster];
  const std::size_t D = store_.dim();
  Vec3 z{0.0, 0.0, 0.0};
  for (int r = 0; r < 3; ++r) {
    const double* row = cl.basis.data() + static_cast<std::size_t>(r) * D;
    double acc = 0.0;
    for (std::size_t d = 0; d < D; ++d) acc += row[d] * (v[d] - cl.mean[d]);
    z[static_cast<std::size_t>(r)] = acc;
  }
  return z;
}

HybridIndex::HybridIndex(const EmbeddingStore& store, const BuildParams& params)
    : store_(store) {
  const std::size_t n = store_.size();
  const std::size_t D = store_.dim();
  if (params.num_clusters < 1) throw ConfigError("need at least one cluster");
  if (n < params.num_clusters) {
    throw InputError("fewer stored vectors than requested clusters");
  }
  std::mt19937_64 gen(params.seed);

  // k-means++ seeding over stored rows.
  std::vector<std::vector<double>> centroids;
  centroids.reserve(params.num_clusters);
  {
    const double* first = store_.row_at(rng::uniform_index(gen, n));
    centroids.emplace_back(first, first + D);
  }
  std::vector<double> best_d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    best_d2[i] = squared_distance_nd(store_.row_at(i), centroids[0].data(), D);
  }
  while (centroids.size() < params.num_clusters) {
    const double total = std::accumulate(best_d2.begin(), best_d2.end(), 0.0);
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double u = rng::uniform01(gen) * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += best_d2[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng::uniform_index(gen, n);
    }
    const double* row = store_.row_at(pick);
    centroids.emplace_back(row, row + D);
    for (std::size_t i = 0; i < n; ++i) {
      best_d2[i] = std::min(
          best_d2[i], squared_distance_nd(store_.row_at(i), row, D));
    }
  }

  // Lloyd iterations until the assignment is stable.
  const std::size_t C = centroids.size();
  std::vector<std::size_t> assign(n);
  auto assign_all = [&](std::vector<std::size_t>& out) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      const double* x = store_.row_at(i);
      std::size_t best = 0;
      double bd2 = squared_distance_nd(x, centroids[0].data(), D);
      for (std::size_t c = 1; c < C; ++c) {
        const double d2 = squared_distance_nd(x, centroids[c].data(), D);
        if (d2 < bd2) {
          bd2 = d2;
          best = c;
        }
      }
      out[i] = best;
    }
  };
  assign_all(assign);
  std::vector<std::size_t> next(n);
  for (int iter = 0; iter < params.max_kmeans_iterations; ++iter) {
    // Means of the current assignment; empty clusters keep their centroid.
    std::vector<std::vector<double>> sums(C, std::vector<double>(D, 0.0));
    std::vector<std::size_t> counts(C, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = store_.row_at(i);
      std::vector<double>& s = sums[assign[i]];
      for (std::size_t d = 0; d < D; ++d) s[d] += x[d];
      counts[assign[i]] += 1;
    }
    for (std::size_t c = 0; c < C; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < D; ++d) {
        centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
    assign_all(next);
    const bool stable = next == assign;
    assign.swap(next);
    if (stable) break;
  }

  // Survivors keep their relative order; empty clusters are dropped.
  std::vector<std::size_t> members_per(C, 0);
  for (std::size_t i = 0; i < n; ++i) members_per[assign[i]] += 1;
  std::vector<std::size_t> remap(C, SIZE_MAX);
  std::vector<std::vector<std::size_t>> members;  // row positions per cluster
  for (std::size_t c = 0; c < C; ++c) {
    if (members_per[c] == 0) continue;
    remap[c] = members.size();
    members.emplace_back();
    members.back().reserve(members_per[c]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    members[remap[assign[i]]].push_back(i);
  }

  // Per cluster: mean, covariance, top-3 eigenvectors by power iteration
  // with deflation, then the 3D octree over the projections.
  for (std::size_t cc = 0; cc < members.size(); ++cc) {
    const std::vector<std::size_t>& rows = members[cc];
    const std::size_t m = rows.size();

    std::vector<double> mean(D, 0.0);
    for (std::size_t r : rows) {
      const double* x = store_.row_at(r);
      for (std::size_t d = 0; d < D; ++d) mean[d] += x[d];
    }
    for (double& v : mean) v /= static_cast<double>(m);

    std::vector<double> cov(D * D, 0.0);
    std::vector<double> centered(D);
    for (std::size_t r : rows) {
      const double* x = store_.row_at(r);
      for (std::size_t d = 0; d < D; ++d) centered[d] = x[d] - mean[d];
      for (std::size_t a = 0; a < D; ++a) {
        const double ca = centered[a];
        if (ca == 0.0) continue;
        double* covrow = cov.data() + a * D;
        for (std::size_t b = 0; b < D; ++b) covrow[b] += ca * centered[b];
      }
    }

    std::vector<double> basis(3 * D, 0.0);
    std::vector<double> w(D);
    for (int e = 0; e < 3; ++e) {
      double* v = basis.data() + static_cast<std::size_t>(e) * D;
      for (std::size_t d = 0; d < D; ++d) v[d] = rng::normal(gen);
      auto orthonormalize = [&](double* vec) {
        for (int p = 0; p < e; ++p) {
          const double* prev = basis.data() + static_cast<std::size_t>(p) * D;
          double dot = 0.0;
          for (std::size_t d = 0; d < D; ++d) dot += vec[d] * prev[d];
          for (std::size_t d = 0; d < D; ++d) vec[d] -= dot * prev[d];
        }
        double norm2 = 0.0;
        for (std::size_t d = 0; d < D; ++d) norm2 += vec[d] * vec[d];
        const double norm = std::sqrt(norm2);
        if (norm < 1e-12) {
          for (std::size_t d = 0; d < D; ++d) vec[d] = 0.0;
          return false;
        }
        for (std::size_t d = 0; d < D; ++d) vec[d] /= norm;
        return true;
      };
      if (!orthonormalize(v)) continue;  // dim < 3: dead component
      for (int it = 0; it < params.power_iterations; ++it) {
        for (std::size_t a = 0; a < D; ++a) {
          const double* covrow = cov.data() + a * D;
          double acc = 0.0;
          for (std::size_t d = 0; d < D; ++d) acc += covrow[d] * v[d];
          w[a] = acc;
        }
        double norm2 = 0.0;
        for (std::size_t d = 0; d < D; ++d) norm2 += w[d] * w[d];
        if (std::sqrt(norm2) < 1e-300) break;  // rank-deficient: keep start
        std::copy(w.begin(), w.end(), v);
        if (!orthonormalize(v)) break;
      }
    }

    std::vector<Vec3> projected(m);
    Cluster proto(params.octree, Aabb{});  // tree replaced below
    proto.mean = mean;
    proto.basis = basis;
    clusters_.push_back(std::move(proto));
    const std::size_t ci = clusters_.size() - 1;
    for (std::size_t k = 0; k < m; ++k) {
      projected[k] = project(ci, store_.row_at(rows[k]));
    }
    Octree tree(params.octree, box_around(projected));
    for (std::size_t k = 0; k < m; ++k) {
      const PointId id = store_.ids()[rows[k]];
      tree.insert(id, projected[k]);
      assignment_.emplace(id, ci);
    }
    clusters_[ci].tree = std::move(tree);
  }

  // Route by the frozen Lloyd centroids of the surviving clusters.
  for (std::size_t c = 0; c < C; ++c) {
    if (remap[c] != SIZE_MAX) clusters_[remap[c]].centroid = centroids[c];
  }
}

void HybridIndex::insert(PointId id, const std::vector<double>& v) {
  store_.insert(id, v);  // validates dimension, finiteness, freshness
  const std::size_t c = nearest_cluster(v.data());
  clusters_[c].tree.insert(id, project(c, v.data()));
  assignment_.emplace(id, c);
}

std::vector<IndexResult> HybridIndex::query(
    const std::vector<double>& q, std::size_t top_k,
    std::size_t probe_clusters, std::size_t candidate_multiplier) const {
  if (q.size() != store_.dim()) throw InputError("query dimension mismatch");
  for (double x : q) {
    if (!std::isfinite(x)) throw InputError("non-finite query component");
  }
  if (top_k < 1) throw InputError("top_k must be >= 1");
  if (probe_clusters < 1) throw InputError("probe_clusters must be >= 1");
  if (candidate_multiplier < 1) {
    throw InputError("candidate_multiplier must be >= 1");
  }
  if (store_.size() == 0) throw StateError("index is empty");

  const std::size_t D = store_.dim();
  struct Ranked {
    double d2;
    std::size_t cluster;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(clusters_.size());
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    ranked.push_back({squared_distance_nd(q.data(), clusters_[c].centroid.data(), D), c});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.d2 != b.d2 ? a.d2 < b.d2 : a.cluster < b.cluster;
  });
  const std::size_t probes = std::min(probe_clusters, ranked.size());

  std::vector<PointId> candidates;  // disjoint trees: ids never repeat
  for (std::size_t p = 0; p < probes; ++p) {
    const std::size_t c = ranked[p].cluster;
    const Vec3 z = project(c, q.data());
    const std::vector<QueryHit> hits =
        k_nearest(clusters_[c].tree, z, candidate_multiplier * top_k);
    for (const QueryHit& h : hits) candidates.push_back(h.id);
  }

  struct Cand {
    double d2;
    PointId id;
  };
  std::vector<Cand> rer;
  rer.reserve(candidates.size());
  for (PointId id : candidates) {
    rer.push_back({squared_distance_nd(q.data(), store_.row(id), D), id});
  }
  std::sort(rer.begin(), rer.end(), [](const Cand& a, const Cand& b) {
    return a.d2 != b.d2 ? a.d2 < b.d2 : a.id < b.id;
  });
  const std::size_t keep = std::min(top_k, rer.size());
  std::vector<IndexResult> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back({rer[i].id, std::sqrt(rer[i].d2)});
  }
  return out;
}

double HybridIndex::recall_at_k(const std::vector<std::vector<double>>& queries,
                                std::size_t k, std::size_t probe_clusters,
                                std::size_t candidate_multiplier) const {
  if (queries.empty()) throw InputError("empty query set");
  std::vector<double> per_query(queries.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(queries.size());
       ++qi) {
    const std::vector<double>& q = queries[static_cast<std::size_t>(qi)];
    const std::vector<IndexResult> approx =
        query(q, k, probe_clusters, candidate_multiplier);
    const std::vector<IndexResult> exact = exhaustive_query(store_, q, k);
    std::size_t hit = 0;
    for (const IndexResult& e : exact) {
      for (const IndexResult& a : approx) {
        if (a.id == e.id) {
          hit += 1;
          break;
        }
      }
    }
    per_query[static_cast<std::size_t>(qi)] =
        static_cast<double>(hit) / static_cast<double>(exact.size());
  }
  double sum = 0.0;
  for (double r : per_query) sum += r;
  return sum / static_cast<double>(per_query.size());
}

std::size_t HybridIndex::cluster_of(PointId id) const {
  auto it = assignment_.find(id);
  if (it == assignment_.end()) throw NotFoundError("unknown vector id");
  return it->second;
}

const Octree& HybridIndex::cluster_tree(std::size_t cluster) const {
  if (cluster >= clusters_.size()) throw InputError("cluster out of range");
  return clusters_[cluster].tree;
}

const std::vector<double>& HybridIndex::centroid(std::size_t cluster) const {
  if (cluster >= clusters_.size()) throw InputError("cluster out of range");
  return clusters_[cluster].centroid;
}

}  // namespace dynoct
