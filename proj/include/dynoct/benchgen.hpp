#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dynoct/octree.hpp"

namespace dynoct::bench {

struct CloudPoint {
  PointId id;
  Vec3 pos;
  bool operator==(const CloudPoint&) const = default;
};

/// Seeded sequence of point clouds. Consecutive steps are related by the
/// update model: ids present in both steps move, surplus ids are removed,
/// deficit ids are inserted. Ids within a step are 0..count-1.
struct TimeStepSeries {
  std::vector<std::vector<CloudPoint>> steps;
  std::string descriptor;
};

/// All generators place points inside this box.
Aabb domain();

/// Ten steps cycling four density regimes: 10,000 points uniform over the
/// domain; 100 points uniform; a 20,000-point spike concentrated in the
/// central sub-box [40,60]^3; and a count drawn uniformly from [100, 15,000]
/// placed in the x < 50 half. All counts scale by `scale` (minimum 1).
TimeStepSeries gen_varying_density(std::uint64_t seed, double scale);

/// Ten steps alternating between 50,000 and 10 uniform points.
TimeStepSeries gen_stepwise(std::uint64_t seed, double scale);

/// Geometric growth from 10 to 50,000 points over 20 steps, then the
/// mirrored decay over 20 more.
TimeStepSeries gen_exponential(std::uint64_t seed, double scale);

/// Ten steps alternating dense and sparse: dense steps hold 45,100 points
/// split across three Gaussian clusters (sigma 5, clamped to the domain);
/// sparse steps hold 100 uniform points.
TimeStepSeries gen_multimodal(std::uint64_t seed, double scale);

/// Fixed n points per step for ten steps. The x coordinate follows the
/// density 1 + sin(2*pi*f*x/100 + phase) with f = 2, sampled by inverse-CDF
/// bisection; the phase advances by 2*pi/10 each step, so every step is a
/// fresh resample rather than a jitter of the previous one. y and z are
/// uniform.
TimeStepSeries gen_wave(std::uint64_t seed, std::size_t n);

TimeStepSeries generate(const std::string& distribution, std::uint64_t seed,
                        double scale);

/// Normalized x-density CDF of the wave distribution at the given phase;
/// exposed so tests can bin samples against exact probabilities.
double wave_cdf(double x_normalized, double phase);

struct StructureSpec {
  std::string name;
  bool is_octree;
  OctreeConfig config;  // meaningful when is_octree
};

StructureSpec octree_structure(int K, double alpha);
StructureSpec flat_structure();

struct BenchRecord {
  std::string structure;
  std::string distribution;
  std::size_t step;
  double build_s;
  double update_s;
  double nb_s;
  std::optional<double> peak_mem_mb;
  std::optional<double> avg_mem_mb;
};

/// Resident set size in MB when the platform exposes it.
std::optional<double> resident_memory_mb();

/// For each structure and step: time a from-scratch build, the incremental
/// update from the previous step's state (the flat baseline rebuilds, which
/// is its update), and neighbor-list construction at the cutoff. One
/// structure at a time, single-threaded phases, so timings are comparable.
std::vector<BenchRecord> run_bench(const TimeStepSeries& series,
                                   const std::vector<StructureSpec>& structures,
                                   double cutoff);

}  // namespace dynoct::bench
