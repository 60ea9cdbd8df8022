#include "dynoct/svgd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <random>
#include <utility>

#include "dynoct/errors.hpp"
#include "dynoct/queries.hpp"
#include "dynoct/rng.hpp"

namespace dynoct {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

void check_bandwidth(double h) {
  if (!std::isfinite(h) || h <= 0.0) {
    throw InputError("bandwidth must be finite and positive");
  }
}

// Shared by the dense and truncated steps so that, term for term, both
// modes run identical arithmetic. acc += k * g_j + (2k/h)(x_i - x_j).
inline void add_phi_term(const Vec3& xi, const Vec3& xj, const Vec3& gj,
                         double h, Vec3& acc) {
  const double k = std::exp(-squared_distance(xj, xi) / h);
  const double c = (2.0 / h) * k;
  acc[0] += k * gj[0] + c * (xi[0] - xj[0]);
  acc[1] += k * gj[1] + c * (xi[1] - xj[1]);
  acc[2] += k * gj[2] + c * (xi[2] - xj[2]);
}

std::vector<Vec3> target_gradients(const ParticleEnsemble& ensemble,
                                   const TargetDistribution& target) {
  std::vector<Vec3> grads(ensemble.positions.size());
  for (std::size_t j = 0; j < ensemble.positions.size(); ++j) {
    grads[j] = target.grad_log_density(ensemble.positions[j]);
  }
  return grads;
}

}  // namespace

TargetDistribution gaussian_target() {
  TargetDistribution t;
  t.name = "gauss";
  t.log_density = [](const Vec3& x) {
    return -0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) - 1.5 * kLogTwoPi;
  };
  t.grad_log_density = [](const Vec3& x) {
    return Vec3{-x[0], -x[1], -x[2]};
  };
  return t;
}

TargetDistribution mixture2_target() {
  static const Vec3 mu_a{-2.0, 0.0, 0.0};
  static const Vec3 mu_b{2.0, 0.0, 0.0};
  TargetDistribution t;
  t.name = "mixture2";
  t.log_density = [](const Vec3& x) {
    const double ea = -0.5 * squared_distance(x, mu_a);
    const double eb = -0.5 * squared_distance(x, mu_b);
    const double m = std::max(ea, eb);
    const double lse = m + std::log(0.5 * (std::exp(ea - m) + std::exp(eb - m)));
    return lse - 1.5 * kLogTwoPi;
  };
  t.grad_log_density = [](const Vec3& x) {
    const double ea = -0.5 * squared_distance(x, mu_a);
    const double eb = -0.5 * squared_distance(x, mu_b);
    const double m = std::max(ea, eb);
    const double wa = std::exp(ea - m);
    const double wb = std::exp(eb - m);
    const double ra = wa / (wa + wb);
    const double rb = wb / (wa + wb);
    return Vec3{ra * (mu_a[0] - x[0]) + rb * (mu_b[0] - x[0]),
                ra * (mu_a[1] - x[1]) + rb * (mu_b[1] - x[1]),
                ra * (mu_a[2] - x[2]) + rb * (mu_b[2] - x[2])};
  };
  return t;
}

TargetDistribution make_target(const std::string& name) {
  if (name == "gauss") return gaussian_target();
  if (name == "mixture2") return mixture2_target();
  throw ConfigError("unknown target distribution: " + name);
}

double rbf_kernel(const Vec3& x, const Vec3& y, double h) {
  check_bandwidth(h);
  return std::exp(-squared_distance(x, y) / h);
}

Vec3 rbf_kernel_grad(const Vec3& x, const Vec3& y, double h) {
  check_bandwidth(h);
  const double k = std::exp(-squared_distance(x, y) / h);
  const double c = (2.0 / h) * k;
  return Vec3{c * (y[0] - x[0]), c * (y[1] - x[1]), c * (y[2] - x[2])};
}

double median_bandwidth(const std::vector<Vec3>& positions) {
  const std::size_t n = positions.size();
  if (n < 2) {
    throw InputError("median bandwidth needs at least two particles");
  }
  std::vector<double> d2;
  d2.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d2.push_back(squared_distance(positions[i], positions[j]));
    }
  }
  std::sort(d2.begin(), d2.end());
  const std::size_t m = d2.size();
  const double median =
      (m % 2 == 1) ? d2[m / 2] : 0.5 * (d2[m / 2 - 1] + d2[m / 2]);
  if (median <= 0.0) {
    throw DegenerateInputError("zero median pairwise distance");
  }
  return median / std::log(static_cast<double>(n) + 1.0);
}

SvgdStepStats svgd_step_naive(ParticleEnsemble& ensemble,
                              const TargetDistribution& target) {
  const std::size_t n = ensemble.positions.size();
  if (n == 0) return {};
  check_bandwidth(ensemble.bandwidth);
  const double h = ensemble.bandwidth;
  const double eps = ensemble.step_size;
  const std::vector<Vec3> grads = target_gradients(ensemble, target);
  const std::vector<Vec3>& x = ensemble.positions;

  std::vector<Vec3> next(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    Vec3 acc{0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      add_phi_term(x[i], x[j], grads[j], h, acc);
    }
    const double inv = 1.0 / static_cast<double>(n);
    next[i] = Vec3{x[i][0] + eps * inv * acc[0], x[i][1] + eps * inv * acc[1],
                   x[i][2] + eps * inv * acc[2]};
  }
  ensemble.positions = std::move(next);
  return {n * n};
}

SvgdStepStats svgd_step_octree(ParticleEnsemble& ensemble,
                               const TargetDistribution& target, Octree& tree,
                               const SvgdStepOptions& options) {
  const std::size_t n = ensemble.positions.size();
  if (n == 0) {
    if (tree.size() != 0) {
      throw ConsistencyError("tree holds points but the ensemble is empty");
    }
    return {};
  }
  check_bandwidth(ensemble.bandwidth);
  if (tree.size() != n) {
    throw ConsistencyError("tree size does not match the ensemble");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const PointId id = static_cast<PointId>(i);
    if (!tree.contains(id) ||
        tree.position_of(id) != ensemble.positions[i]) {
      throw ConsistencyError("tree is out of sync with the ensemble");
    }
  }

  const double h = ensemble.bandwidth;
  const double eps = ensemble.step_size;
  const double radius = std::sqrt(4.0 * h);
  const NeighborList nl = build_neighbor_lists(tree, radius);
  const std::vector<Vec3> grads = target_gradients(ensemble, target);
  const std::vector<Vec3>& x = ensemble.positions;

  std::size_t evals = 0;
  std::vector<Vec3> next(n);
#pragma omp parallel for schedule(static) reduction(+ : evals)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const auto& list = nl.lists.at(static_cast<PointId>(i));
    Vec3 acc{0.0, 0.0, 0.0};
    for (const NeighborEntry& e : list) {
      const std::size_t j = static_cast<std::size_t>(e.id);
      add_phi_term(x[i], x[j], grads[j], h, acc);
    }
    evals += list.size();
    double inv = 0.0;
    if (options.compat_normalization) {
      add_phi_term(x[i], x[i], grads[i], h, acc);  // exact self term: g_i
      evals += 1;
      inv = 1.0 / static_cast<double>(n);
    } else if (!list.empty()) {
      inv = 1.0 / static_cast<double>(list.size());
    }
    next[i] = Vec3{x[i][0] + eps * inv * acc[0], x[i][1] + eps * inv * acc[1],
                   x[i][2] + eps * inv * acc[2]};
  }
  ensemble.positions = std::move(next);
  for (std::size_t i = 0; i < n; ++i) {
    tree.update_position(static_cast<PointId>(i), ensemble.positions[i]);
  }
  return {evals};
}

namespace {

Aabb bounds_for(const std::vector<Vec3>& positions) {
  Aabb box{positions.front(), positions.front()};
  for (const Vec3& p : positions) {
    for (int a = 0; a < 3; ++a) {
      box.min[a] = std::min(box.min[a], p[a]);
      box.max[a] = std::max(box.max[a], p[a]);
    }
  }
  double extent = 0.0;
  for (int a = 0; a < 3; ++a) extent = std::max(extent, box.max[a] - box.min[a]);
  const double pad = std::max(0.5, 0.1 * extent);
  for (int a = 0; a < 3; ++a) {
    box.min[a] -= pad;
    box.max[a] += pad;
  }
  return box;
}

Octree build_tree(const std::vector<Vec3>& positions) {
  Octree tree(OctreeConfig{}, bounds_for(positions));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    tree.insert(static_cast<PointId>(i), positions[i]);
  }
  return tree;
}

}  // namespace

SvgdRunResult run_svgd(const TargetDistribution& target,
                       const SvgdRunConfig& config) {
  if (config.n < 2) throw ConfigError("ensemble size must be at least 2");
  if (config.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (!std::isfinite(config.step_size) || config.step_size <= 0.0) {
    throw ConfigError("step size must be finite and positive");
  }

  ParticleEnsemble ensemble;
  ensemble.step_size = config.step_size;
  ensemble.positions.resize(config.n);
  std::mt19937_64 gen(config.seed);
  for (Vec3& p : ensemble.positions) p = rng::normal_vec3(gen);

  ensemble.bandwidth = config.bandwidth > 0.0
                           ? config.bandwidth
                           : median_bandwidth(ensemble.positions);

  SvgdRunResult result;
  result.bandwidth = ensemble.bandwidth;
  const bool record = config.record_positions_every > 0;
  if (record) result.snapshots.emplace_back(0, ensemble.positions);

  Octree tree(OctreeConfig{}, Aabb{});
  if (config.mode == SvgdMode::octree) tree = build_tree(ensemble.positions);
  const SvgdStepOptions options{config.compat_normalization};

  for (int t = 1; t <= config.iterations; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    SvgdStepStats stats;
    if (config.mode == SvgdMode::naive) {
      stats = svgd_step_naive(ensemble, target);
    } else {
      stats = svgd_step_octree(ensemble, target, tree, options);
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();

    if (config.mode == SvgdMode::octree && config.rebuild_every > 0 &&
        t % config.rebuild_every == 0) {
      tree = build_tree(ensemble.positions);
    }

    double logp_sum = 0.0;
    for (const Vec3& p : ensemble.positions) logp_sum += target.log_density(p);
    result.iterations.push_back(
        {t, wall_ms, logp_sum / static_cast<double>(config.n),
         stats.kernel_evaluations});
    if (record && t % config.record_positions_every == 0) {
      result.snapshots.emplace_back(t, ensemble.positions);
    }
  }
  result.positions = std::move(ensemble.positions);
  return result;
}

}  // namespace dynoct
