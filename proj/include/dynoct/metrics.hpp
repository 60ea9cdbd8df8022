#pragma once

#include <vector>

#include "dynoct/geometry.hpp"

namespace dynoct {

/// Index-aligned point sets: X is the input space, Z the latent space.
/// k is the neighborhood size used by both set-based metrics.
struct PairedPointSets {
  std::vector<Vec3> X;
  std::vector<Vec3> Z;
  int k = 10;
};

/// Per-point trajectories; every inner list must share the same length T >= 3.
struct Trajectory {
  std::vector<std::vector<Vec3>> samples;
};

struct MetricReport {
  std::vector<double> per_point;
  double mean = 0.0;
};

/// For each point, the ratio of the mean latent distance to the mean input
/// distance over its k nearest input-space neighbors (self excluded).
/// A zero input-space denominator is degenerate and names the point.
MetricReport neighborhood_distortion(const PairedPointSets& pairs);

/// Overlap-over-union of each point's k-neighbor sets computed independently
/// in X and in Z (self excluded, ties by id in both spaces).
MetricReport neighborhood_jaccard(const PairedPointSets& pairs);

/// Mean second-difference magnitude along each point's trajectory:
/// (1/(T-2)) * sum_t |z(t+1) - 2 z(t) + z(t-1)|.
MetricReport trajectory_curvature(const Trajectory& traj);

}  // namespace dynoct
