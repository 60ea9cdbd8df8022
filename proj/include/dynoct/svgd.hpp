#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dynoct/octree.hpp"

namespace dynoct {

/// Differentiable unnormalized target for the particle sampler.
struct TargetDistribution {
  std::string name;
  std::function<double(const Vec3&)> log_density;
  std::function<Vec3(const Vec3&)> grad_log_density;
};

/// Standard isotropic normal, mean zero, unit covariance.
TargetDistribution gaussian_target();

/// Equal-weight two-mode normal mixture, modes at (-2,0,0) and (2,0,0),
/// unit covariance.
TargetDistribution mixture2_target();

TargetDistribution make_target(const std::string& name);

/// exp(-|x-y|^2 / h). h must be finite and > 0.
double rbf_kernel(const Vec3& x, const Vec3& y, double h);

/// Gradient of rbf_kernel with respect to its first argument:
/// (2/h)(y - x) k(x, y). Antisymmetric under argument swap.
Vec3 rbf_kernel_grad(const Vec3& x, const Vec3& y, double h);

/// Median of all pairwise squared distances divided by log(n+1). Needs
/// n >= 2 distinct-enough positions; a zero median is degenerate.
double median_bandwidth(const std::vector<Vec3>& positions);

struct ParticleEnsemble {
  std::vector<Vec3> positions;
  double step_size = 0.05;
  double bandwidth = 1.0;
};

struct SvgdStepOptions {
  /// Divide by the full ensemble size and add the self term, exactly like
  /// the dense update rule, instead of averaging over the neighborhood.
  bool compat_normalization = false;
};

struct SvgdStepStats {
  std::size_t kernel_evaluations = 0;
};

/// One dense update: every particle interacts with every particle, the
/// direction is averaged over the full ensemble, and all particles move
/// simultaneously.
SvgdStepStats svgd_step_naive(ParticleEnsemble& ensemble,
                              const TargetDistribution& target);

/// One truncated update: interactions only within radius sqrt(4h), read from
/// tree neighbor lists. By default the direction is averaged over the
/// neighborhood (isolated particles keep phi = 0); compat_normalization
/// reproduces the dense rule's averaging instead. The tree must hold
/// exactly the particles, ids 0..n-1 at their current positions, and is
/// refreshed via update_position after the move.
SvgdStepStats svgd_step_octree(ParticleEnsemble& ensemble,
                               const TargetDistribution& target, Octree& tree,
                               const SvgdStepOptions& options = {});

enum class SvgdMode { naive, octree };

struct SvgdRunConfig {
  SvgdMode mode = SvgdMode::octree;
  std::size_t n = 100;
  int iterations = 100;
  std::uint64_t seed = 0;
  double step_size = 0.05;
  double bandwidth = 0.0;  // <= 0 selects the median heuristic at init
  bool compat_normalization = false;
  int rebuild_every = 0;  // octree mode: full rebuild cadence, 0 = never
  int record_positions_every = 0;
};

struct SvgdIterRecord {
  int iter;  // 1-based
  double wall_ms;
  double mean_logp;
  std::size_t kernel_evaluations;
};

struct SvgdRunResult {
  std::vector<SvgdIterRecord> iterations;
  std::vector<Vec3> positions;  // after the last iteration
  std::vector<std::pair<int, std::vector<Vec3>>> snapshots;
  double bandwidth = 0.0;
};

/// Seeds n particles from the standard normal, fixes the bandwidth once for
/// the whole run, and iterates the selected step. Deterministic for a fixed
/// seed up to the recorded wall times.
SvgdRunResult run_svgd(const TargetDistribution& target,
                       const SvgdRunConfig& config);

}  // namespace dynoct
