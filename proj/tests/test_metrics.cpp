#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "dynoct/errors.hpp"
#include "dynoct/metrics.hpp"
#include "dynoct/rng.hpp"

using namespace dynoct;

namespace {

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<Vec3> out(n);
  const Aabb box{{-10.0, -10.0, -10.0}, {10.0, 10.0, 10.0}};
  for (Vec3& p : out) p = rng::uniform_vec3(g, box);
  return out;
}

// A smooth, invertible-enough warp so Z is a nontrivial deformation of X.
Vec3 warp(const Vec3& p) {
  return {p[0] + 0.3 * std::sin(p[1]), p[1] + 0.2 * std::cos(p[2]),
          1.1 * p[2] + 0.1 * p[0] * p[0] * 0.05};
}

// Same neighbor convention as the library: k+1 nearest by (squared
// distance, id), drop self if present, otherwise drop the farthest extra.
std::vector<PointId> brute_knn_ids(const std::vector<Vec3>& pts,
                                   std::size_t i, int k) {
  std::vector<std::pair<double, PointId>> cand;
  cand.reserve(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    cand.emplace_back(squared_distance(pts[i], pts[j]),
                      static_cast<PointId>(j));
  }
  std::sort(cand.begin(), cand.end());
  std::vector<PointId> ids;
  for (const auto& [d2, id] : cand) {
    if (id == static_cast<PointId>(i)) continue;
    if (ids.size() == static_cast<std::size_t>(k)) break;
    ids.push_back(id);
  }
  return ids;
}

MetricReport brute_distortion(const PairedPointSets& pairs) {
  MetricReport r;
  r.per_point.resize(pairs.X.size());
  for (std::size_t i = 0; i < pairs.X.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (PointId j : brute_knn_ids(pairs.X, i, pairs.k)) {
      num += distance(pairs.Z[i], pairs.Z[static_cast<std::size_t>(j)]);
      den += distance(pairs.X[i], pairs.X[static_cast<std::size_t>(j)]);
    }
    r.per_point[i] = num / den;
  }
  double s = 0.0;
  for (double v : r.per_point) s += v;
  r.mean = s / static_cast<double>(r.per_point.size());
  return r;
}

MetricReport brute_jaccard(const PairedPointSets& pairs) {
  MetricReport r;
  r.per_point.resize(pairs.X.size());
  for (std::size_t i = 0; i < pairs.X.size(); ++i) {
    std::vector<PointId> nx = brute_knn_ids(pairs.X, i, pairs.k);
    std::vector<PointId> nz = brute_knn_ids(pairs.Z, i, pairs.k);
    std::sort(nx.begin(), nx.end());
    std::sort(nz.begin(), nz.end());
    std::vector<PointId> both;
    std::set_intersection(nx.begin(), nx.end(), nz.begin(), nz.end(),
                          std::back_inserter(both));
    r.per_point[i] = static_cast<double>(both.size()) /
                     static_cast<double>(nx.size() + nz.size() - both.size());
  }
  double s = 0.0;
  for (double v : r.per_point) s += v;
  r.mean = s / static_cast<double>(r.per_point.size());
  return r;
}

}  // namespace

TEST_CASE("identity and uniform scaling give exact distortion values") {
  PairedPointSets pairs;
  pairs.X = random_points(200, 3);
  pairs.Z = pairs.X;
  pairs.k = 10;
  const MetricReport identity = neighborhood_distortion(pairs);
  for (double v : identity.per_point) CHECK(v == 1.0);
  CHECK(identity.mean == 1.0);

  for (Vec3& z : pairs.Z) z = 2.0 * z;
  const MetricReport doubled = neighborhood_distortion(pairs);
  for (double v : doubled.per_point) CHECK(v == 2.0);
  CHECK(doubled.mean == 2.0);
}

TEST_CASE("distortion matches the brute-force implementation exactly") {
  PairedPointSets pairs;
  pairs.X = random_points(500, 17);
  pairs.Z.reserve(pairs.X.size());
  for (const Vec3& p : pairs.X) pairs.Z.push_back(warp(p));
  pairs.k = 10;

  const MetricReport fast = neighborhood_distortion(pairs);
  const MetricReport brute = brute_distortion(pairs);
  REQUIRE(fast.per_point.size() == brute.per_point.size());
  for (std::size_t i = 0; i < fast.per_point.size(); ++i) {
    CHECK(fast.per_point[i] == brute.per_point[i]);
  }
  CHECK(fast.mean == brute.mean);
}

TEST_CASE("distortion homogeneity in the latent scale") {
  PairedPointSets pairs;
  pairs.X = random_points(150, 19);
  pairs.Z.reserve(pairs.X.size());
  for (const Vec3& p : pairs.X) pairs.Z.push_back(warp(p));
  pairs.k = 6;
  const MetricReport base = neighborhood_distortion(pairs);

  for (Vec3& z : pairs.Z) z = 4.0 * z;
  const MetricReport scaled = neighborhood_distortion(pairs);
  for (std::size_t i = 0; i < base.per_point.size(); ++i) {
    CHECK(scaled.per_point[i] == 4.0 * base.per_point[i]);
  }
}

TEST_CASE("distortion rejects a point whose neighborhood collapses") {
  PairedPointSets pairs;
  pairs.X = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0},
             {0.0, 0.0, 0.0}, {5.0, 0.0, 0.0}, {6.0, 0.0, 0.0},
             {7.0, 0.0, 0.0}, {8.0, 0.0, 0.0}};
  pairs.Z = random_points(8, 23);
  pairs.k = 3;
  CHECK_THROWS_WITH_AS(neighborhood_distortion(pairs),
                       doctest::Contains("point 0"), DegenerateInputError);
}

TEST_CASE("paired-set validation errors") {
  PairedPointSets pairs;
  pairs.X = random_points(20, 29);
  pairs.Z = random_points(19, 31);
  pairs.k = 3;
  CHECK_THROWS_AS(neighborhood_distortion(pairs), InputError);
  CHECK_THROWS_AS(neighborhood_jaccard(pairs), InputError);

  pairs.Z = random_points(20, 31);
  pairs.k = 0;
  CHECK_THROWS_AS(neighborhood_distortion(pairs), InputError);
  pairs.k = 20;  // needs k+1 = 21 points
  CHECK_THROWS_AS(neighborhood_jaccard(pairs), InputError);

  pairs.k = 3;
  pairs.X[4][1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(neighborhood_distortion(pairs), InputError);
}

TEST_CASE("jaccard is exactly 1 for identity and rigid reflection") {
  PairedPointSets pairs;
  pairs.X = random_points(300, 37);
  pairs.Z = pairs.X;
  pairs.k = 10;
  const MetricReport identity = neighborhood_jaccard(pairs);
  for (double v : identity.per_point) CHECK(v == 1.0);
  CHECK(identity.mean == 1.0);

  for (Vec3& z : pairs.Z) z = -1.0 * z;
  const MetricReport reflected = neighborhood_jaccard(pairs);
  for (double v : reflected.per_point) CHECK(v == 1.0);
}

TEST_CASE("jaccard matches brute force exactly and is small for shuffled Z") {
  PairedPointSets pairs;
  pairs.X = random_points(500, 41);
  pairs.Z = random_points(500, 43);  // independent of X
  pairs.k = 10;

  const MetricReport fast = neighborhood_jaccard(pairs);
  const MetricReport brute = brute_jaccard(pairs);
  for (std::size_t i = 0; i < fast.per_point.size(); ++i) {
    CHECK(fast.per_point[i] == brute.per_point[i]);
  }
  CHECK(fast.mean == brute.mean);
  // Independent spaces share almost no neighbors: expectation is
  // roughly k/(n-1) overlap out of ~2k union.
  CHECK(fast.mean < 0.05);
}

TEST_CASE("jaccard values always lie in [0, 1]") {
  PairedPointSets pairs;
  pairs.X = random_points(120, 47);
  pairs.Z.reserve(120);
  for (const Vec3& p : pairs.X) pairs.Z.push_back(warp(p));
  pairs.k = 5;
  const MetricReport r = neighborhood_jaccard(pairs);
  for (double v : r.per_point) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("trajectory curvature: frozen unit case and exact zeros") {
  Trajectory unit;
  unit.samples = {{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}};
  const MetricReport r = trajectory_curvature(unit);
  REQUIRE(r.per_point.size() == 1);
  CHECK(r.per_point[0] == 1.0);
  CHECK(r.mean == 1.0);

  // Constant velocity with dyadic coordinates: second differences are
  // exactly zero in floating point.
  Trajectory line;
  for (int p = 0; p < 5; ++p) {
    std::vector<Vec3> samples;
    const Vec3 start{0.25 * p, -2.0, 1.5};
    const Vec3 vel{0.5, 0.125, -0.25};
    for (int t = 0; t < 6; ++t) {
      samples.push_back(start + static_cast<double>(t) * vel);
    }
    line.samples.push_back(samples);
  }
  const MetricReport zero = trajectory_curvature(line);
  for (double v : zero.per_point) CHECK(v == 0.0);
  CHECK(zero.mean == 0.0);
}

TEST_CASE("curvature is invariant under adding a constant velocity") {
  // Dyadic samples and drift keep every operation exact.
  Trajectory base;
  std::mt19937_64 g(53);
  for (int p = 0; p < 8; ++p) {
    std::vector<Vec3> samples;
    for (int t = 0; t < 7; ++t) {
      samples.push_back({0.25 * static_cast<double>(rng::uniform_index(g, 64)),
                         0.5 * static_cast<double>(rng::uniform_index(g, 32)),
                         0.125 * static_cast<double>(rng::uniform_index(g, 128))});
    }
    base.samples.push_back(samples);
  }
  Trajectory drifted = base;
  const Vec3 vel{2.5, -1.25, 0.75};
  for (auto& samples : drifted.samples) {
    for (std::size_t t = 0; t < samples.size(); ++t) {
      samples[t] += static_cast<double>(t) * vel;
    }
  }
  const MetricReport a = trajectory_curvature(base);
  const MetricReport b = trajectory_curvature(drifted);
  for (std::size_t i = 0; i < a.per_point.size(); ++i) {
    CHECK(a.per_point[i] == b.per_point[i]);
  }
}

TEST_CASE("trajectory validation errors") {
  CHECK_THROWS_AS(trajectory_curvature({}), InputError);
  Trajectory short_traj;
  short_traj.samples = {{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}};
  CHECK_THROWS_AS(trajectory_curvature(short_traj), InputError);
  Trajectory ragged;
  ragged.samples = {{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}},
                    {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}};
  CHECK_THROWS_AS(trajectory_curvature(ragged), InputError);
}
