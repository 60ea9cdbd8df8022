#include "dynoct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynoct/errors.hpp"
#include "dynoct/octree.hpp"
#include "dynoct/queries.hpp"

namespace dynoct {

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

Octree index_points(const std::vector<Vec3>& pts) {
  Octree tree(OctreeConfig{}, box_around(pts));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!is_finite(pts[i])) throw InputError("non-finite point");
    tree.insert(static_cast<PointId>(i), pts[i]);
  }
  return tree;
}

void check_pairs(const PairedPointSets& pairs) {
  if (pairs.X.size() != pairs.Z.size()) {
    throw InputError("X and Z differ in size");
  }
  if (pairs.k < 1) throw InputError("k must be >= 1");
  if (pairs.X.size() < static_cast<std::size_t>(pairs.k) + 1) {
    throw InputError("need at least k+1 points");
  }
}

// The point's k nearest neighbors excluding itself: query k+1, drop the
// self hit if present, otherwise drop the most distant extra.
std::vector<PointId> knn_ids(const Octree& tree, const std::vector<Vec3>& pts,
                             std::size_t i, int k) {
  const std::vector<QueryHit> hits =
      k_nearest(tree, pts[i], static_cast<std::size_t>(k) + 1);
  std::vector<PointId> ids;
  ids.reserve(static_cast<std::size_t>(k));
  for (const QueryHit& h : hits) {
    if (h.id == static_cast<PointId>(i)) continue;
    if (ids.size() == static_cast<std::size_t>(k)) break;
    ids.push_back(h.id);
  }
  return ids;
}

double finish_mean(MetricReport& report) {
  double sum = 0.0;
  for (double v : report.per_point) sum += v;
  return sum / static_cast<double>(report.per_point.size());
}

}  // namespace

MetricReport neighborhood_distortion(const PairedPointSets& pairs) {
  check_pairs(pairs);
  const std::size_t n = pairs.X.size();
  const Octree tree_x = index_points(pairs.X);
  for (const Vec3& z : pairs.Z) {
    if (!is_finite(z)) throw InputError("non-finite point");
  }

  MetricReport report;
  report.per_point.assign(n, 0.0);
  std::vector<std::size_t> degenerate;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const std::vector<PointId> neigh = knn_ids(tree_x, pairs.X, i, pairs.k);
    double num = 0.0;
    double den = 0.0;
    for (PointId j : neigh) {
      const std::size_t sj = static_cast<std::size_t>(j);
      num += distance(pairs.Z[i], pairs.Z[sj]);
      den += distance(pairs.X[i], pairs.X[sj]);
    }
    if (den == 0.0) {
#pragma omp critical
      degenerate.push_back(i);
    } else {
      report.per_point[i] = num / den;
    }
  }
  if (!degenerate.empty()) {
    const std::size_t worst = *std::min_element(degenerate.begin(), degenerate.end());
    throw DegenerateInputError("point " + std::to_string(worst) +
                               " has k coincident input-space neighbors");
  }
  report.mean = finish_mean(report);
  return report;
}

MetricReport neighborhood_jaccard(const PairedPointSets& pairs) {
  check_pairs(pairs);
  const std::size_t n = pairs.X.size();
  const Octree tree_x = index_points(pairs.X);
  const Octree tree_z = index_points(pairs.Z);

  MetricReport report;
  report.per_point.assign(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    std::vector<PointId> nx = knn_ids(tree_x, pairs.X, i, pairs.k);
    std::vector<PointId> nz = knn_ids(tree_z, pairs.Z, i, pairs.k);
    std::sort(nx.begin(), nx.end());
    std::sort(nz.begin(), nz.end());
    std::size_t both = 0;
    std::size_t a = 0, b = 0;
    while (a < nx.size() && b < nz.size()) {
      if (nx[a] == nz[b]) {
        ++both;
        ++a;
        ++b;
      } else if (nx[a] < nz[b]) {
        ++a;
      } else {
        ++b;
      }
    }
    const std::size_t uni = nx.size() + nz.size() - both;
    report.per_point[i] =
        static_cast<double>(both) / static_cast<double>(uni);
  }
  report.mean = finish_mean(report);
  return report;
}

MetricReport trajectory_curvature(const Trajectory& traj) {
  if (traj.samples.empty()) throw InputError("empty trajectory set");
  const std::size_t T = traj.samples.front().size();
  if (T < 3) throw InputError("trajectories need at least 3 samples");
  for (const auto& s : traj.samples) {
    if (s.size() != T) throw InputError("trajectories differ in length");
  }

  MetricReport report;
  report.per_point.assign(traj.samples.size(), 0.0);
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const std::vector<Vec3>& z = traj.samples[i];
    double sum = 0.0;
    for (std::size_t t = 1; t + 1 < T; ++t) {
      const Vec3 dd{z[t + 1][0] - 2.0 * z[t][0] + z[t - 1][0],
                    z[t + 1][1] - 2.0 * z[t][1] + z[t - 1][1],
                    z[t + 1][2] - 2.0 * z[t][2] + z[t - 1][2]};
      sum += std::sqrt(dd[0] * dd[0] + dd[1] * dd[1] + dd[2] * dd[2]);
    }
    report.per_point[i] = sum / static_cast<double>(T - 2);
  }
  report.mean = finish_mean(report);
  return report;
}

}  // namespace dynoct
