#include "dynoct/benchgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_set>

#include "dynoct/errors.hpp"
#include "dynoct/oracle.hpp"
#include "dynoct/queries.hpp"
#include "dynoct/rng.hpp"

namespace dynoct::bench {

namespace {

constexpr double kLo = 0.0;
constexpr double kHi = 100.0;
constexpr double kJitterSigma = 1.0;  // 1% of the domain edge

using Placer = std::function<Vec3(std::mt19937_64&)>;

Vec3 clamp_domain(Vec3 p) {
  for (int a = 0; a < 3; ++a) p[a] = std::clamp(p[a], kLo, kHi);
  return p;
}

Vec3 uniform_point(std::mt19937_64& g) {
  return rng::uniform_vec3(g, domain());
}

std::size_t scaled(double base, double scale) {
  return static_cast<std::size_t>(
      std::max<long long>(1, std::llround(base * scale)));
}

void check_scale(double scale) {
  if (!(scale > 0.0) || scale > 1.0) {
    throw ConfigError("scale must be in (0, 1]");
  }
}

/// Appends one step: matched ids jitter, surplus ids vanish, new ids are
/// placed by the step's regime.
void evolve(std::mt19937_64& g, std::vector<std::vector<CloudPoint>>& steps,
            std::size_t count, const Placer& place) {
  std::vector<CloudPoint> cur;
  cur.reserve(count);
  if (!steps.empty()) {
    const std::vector<CloudPoint>& prev = steps.back();
    const std::size_t matched = std::min(prev.size(), count);
    for (std::size_t i = 0; i < matched; ++i) {
      const Vec3 moved = prev[i].pos + kJitterSigma * rng::normal_vec3(g);
      cur.push_back({prev[i].id, clamp_domain(moved)});
    }
  }
  for (std::size_t i = cur.size(); i < count; ++i) {
    cur.push_back({static_cast<PointId>(i), place(g)});
  }
  steps.push_back(std::move(cur));
}

std::string describe(const std::string& name, std::uint64_t seed,
                     const std::string& params) {
  std::ostringstream os;
  os << name << " seed=" << seed << " " << params;
  return os.str();
}

std::string first_token(const std::string& s) {
  return s.substr(0, s.find(' '));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct MemTracker {
  bool available = true;
  double peak = 0.0;
  double sum = 0.0;
  std::size_t samples = 0;

  void sample() {
    const std::optional<double> mb = resident_memory_mb();
    if (!mb) {
      available = false;
      return;
    }
    peak = std::max(peak, *mb);
    sum += *mb;
    samples += 1;
  }
  std::optional<double> peak_mb() const {
    return available && samples ? std::optional<double>(peak) : std::nullopt;
  }
  std::optional<double> avg_mb() const {
    return available && samples
               ? std::optional<double>(sum / static_cast<double>(samples))
               : std::nullopt;
  }
};

}  // namespace

Aabb domain() { return Aabb{{kLo, kLo, kLo}, {kHi, kHi, kHi}}; }

TimeStepSeries gen_varying_density(std::uint64_t seed, double scale) {
  check_scale(scale);
  std::mt19937_64 g(seed);
  TimeStepSeries series;
  const Aabb spike{{40.0, 40.0, 40.0}, {60.0, 60.0, 60.0}};
  const Aabb half{{0.0, 0.0, 0.0}, {50.0, 100.0, 100.0}};
  for (int s = 0; s < 10; ++s) {
    switch (s % 4) {
      case 0:
        evolve(g, series.steps, scaled(10000, scale), uniform_point);
        break;
      case 1:
        evolve(g, series.steps, scaled(100, scale), uniform_point);
        break;
      case 2:
        evolve(g, series.steps, scaled(20000, scale),
               [&](std::mt19937_64& gg) { return rng::uniform_vec3(gg, spike); });
        break;
      default: {
        const double base = 100.0 + static_cast<double>(rng::uniform_index(g, 14901));
        evolve(g, series.steps, scaled(base, scale),
               [&](std::mt19937_64& gg) { return rng::uniform_vec3(gg, half); });
        break;
      }
    }
  }
  std::ostringstream p;
  p << "scale=" << scale;
  series.descriptor = describe("varying", seed, p.str());
  return series;
}

TimeStepSeries gen_stepwise(std::uint64_t seed, double scale) {
  check_scale(scale);
  std::mt19937_64 g(seed);
  TimeStepSeries series;
  for (int s = 0; s < 10; ++s) {
    const std::size_t count =
        (s % 2 == 0) ? scaled(50000, scale) : scaled(10, scale);
    evolve(g, series.steps, count, uniform_point);
  }
  std::ostringstream p;
  p << "scale=" << scale;
  series.descriptor = describe("stepwise", seed, p.str());
  return series;
}

TimeStepSeries gen_exponential(std::uint64_t seed, double scale) {
  check_scale(scale);
  std::mt19937_64 g(seed);
  TimeStepSeries series;
  std::vector<double> bases;
  const double lo = 10.0, hi = 50000.0;
  for (int i = 0; i < 20; ++i) {
    bases.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / 19.0));
  }
  bases[0] = lo;
  bases[19] = hi;  // pin the cited endpoints exactly
  std::vector<double> down(bases.rbegin(), bases.rend());
  bases.insert(bases.end(), down.begin(), down.end());
  for (double b : bases) {
    evolve(g, series.steps, scaled(b, scale), uniform_point);
  }
  std::ostringstream p;
  p << "scale=" << scale;
  series.descriptor = describe("exponential", seed, p.str());
  return series;
}

TimeStepSeries gen_multimodal(std::uint64_t seed, double scale) {
  check_scale(scale);
  std::mt19937_64 g(seed);
  TimeStepSeries series;
  const Vec3 centers[3] = {
      {20.0, 20.0, 20.0}, {50.0, 70.0, 30.0}, {80.0, 30.0, 70.0}};
  int next_cluster = 0;
  const Placer peaks = [&](std::mt19937_64& gg) {
    const Vec3& c = centers[next_cluster];
    next_cluster = (next_cluster + 1) % 3;
    return clamp_domain(c + 5.0 * rng::normal_vec3(gg));
  };
  for (int s = 0; s < 10; ++s) {
    if (s % 2 == 0) {
      evolve(g, series.steps, scaled(45100, scale), peaks);
    } else {
      evolve(g, series.steps, scaled(100, scale), uniform_point);
    }
  }
  std::ostringstream p;
  p << "scale=" << scale;
  series.descriptor = describe("multimodal", seed, p.str());
  return series;
}

double wave_cdf(double x_normalized, double phase) {
  constexpr double four_pi = 12.566370614359172;  // 2*pi*f with f = 2
  auto raw = [&](double x) {
    return x + (std::cos(phase) - std::cos(four_pi * x + phase)) / four_pi;
  };
  return raw(x_normalized) / raw(1.0);
}

TimeStepSeries gen_wave(std::uint64_t seed, std::size_t n) {
  if (n < 1) throw ConfigError("wave needs at least one point");
  std::mt19937_64 g(seed);
  TimeStepSeries series;
  for (int s = 0; s < 10; ++s) {
    const double phase = 2.0 * M_PI * static_cast<double>(s) / 10.0;
    std::vector<CloudPoint> cur;
    cur.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng::uniform01(g);
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 54; ++it) {
        const double mid = 0.5 * (lo + hi);
        (wave_cdf(mid, phase) < u ? lo : hi) = mid;
      }
      const double x = kHi * (0.5 * (lo + hi));
      const double y = rng::uniform(g, kLo, kHi);
      const double z = rng::uniform(g, kLo, kHi);
      cur.push_back({static_cast<PointId>(i), clamp_domain({x, y, z})});
    }
    series.steps.push_back(std::move(cur));
  }
  std::ostringstream p;
  p << "n=" << n;
  series.descriptor = describe("wave", seed, p.str());
  return series;
}

TimeStepSeries generate(const std::string& distribution, std::uint64_t seed,
                        double scale) {
  if (distribution == "varying") return gen_varying_density(seed, scale);
  if (distribution == "stepwise") return gen_stepwise(seed, scale);
  if (distribution == "exponential") return gen_exponential(seed, scale);
  if (distribution == "multimodal") return gen_multimodal(seed, scale);
  if (distribution == "wave") {
    check_scale(scale);
    return gen_wave(seed, scaled(20000, scale));
  }
  throw ConfigError("unknown distribution: " + distribution);
}

StructureSpec octree_structure(int K, double alpha) {
  OctreeConfig cfg;
  cfg.K = K;
  cfg.alpha = alpha;
  cfg.validate();
  std::ostringstream name;
  name << "DO_K" << K << "_a" << alpha;
  return {name.str(), true, cfg};
}

StructureSpec flat_structure() { return {"flat_oracle", false, OctreeConfig{}}; }

std::optional<double> resident_memory_mb() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmRSS:", 0) == 0) {
      std::istringstream is(line.substr(6));
      double kb = 0.0;
      if (is >> kb) return kb / 1024.0;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

namespace {

struct OctreeRunner {
  StructureSpec spec;
  Octree live;
  std::vector<CloudPoint> prev;

  explicit OctreeRunner(const StructureSpec& s)
      : spec(s), live(s.config, domain()) {}

  double build(const std::vector<CloudPoint>& cloud) {
    const auto t0 = std::chrono::steady_clock::now();
    Octree fresh(spec.config, domain());
    for (const CloudPoint& p : cloud) fresh.insert(p.id, p.pos);
    return seconds_since(t0);
  }

  double update(const std::vector<CloudPoint>& cloud) {
    std::unordered_set<PointId> keep;
    keep.reserve(cloud.size());
    for (const CloudPoint& p : cloud) keep.insert(p.id);
    const auto t0 = std::chrono::steady_clock::now();
    for (const CloudPoint& p : prev) {
      if (!keep.count(p.id)) live.remove(p.id);
    }
    for (const CloudPoint& p : cloud) {
      if (live.contains(p.id)) {
        live.update_position(p.id, p.pos);
      } else {
        live.insert(p.id, p.pos);
      }
    }
    const double secs = seconds_since(t0);
    prev = cloud;
    return secs;
  }

  double neighbor_lists(double cutoff) {
    const auto t0 = std::chrono::steady_clock::now();
    const NeighborList nl = build_neighbor_lists(live, cutoff);
    (void)nl;
    return seconds_since(t0);
  }
};

struct FlatRunner {
  oracle::FlatPointSet live;

  double build(const std::vector<CloudPoint>& cloud) {
    const auto t0 = std::chrono::steady_clock::now();
    oracle::FlatPointSet fresh;
    for (const CloudPoint& p : cloud) fresh.insert(p.id, p.pos);
    return seconds_since(t0);
  }

  // The flat baseline's update is a rebuild.
  double update(const std::vector<CloudPoint>& cloud) {
    const auto t0 = std::chrono::steady_clock::now();
    live.clear();
    for (const CloudPoint& p : cloud) live.insert(p.id, p.pos);
    return seconds_since(t0);
  }

  double neighbor_lists(double cutoff) {
    const auto t0 = std::chrono::steady_clock::now();
    const NeighborList nl = oracle::brute_pairs(live, cutoff);
    (void)nl;
    return seconds_since(t0);
  }
};

}  // namespace

std::vector<BenchRecord> run_bench(const TimeStepSeries& series,
                                   const std::vector<StructureSpec>& structures,
                                   double cutoff) {
  if (series.steps.empty()) throw InputError("empty time step series");
  if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) {
    throw ConfigError("cutoff must be a non-negative finite value");
  }
  const std::string dist = first_token(series.descriptor);
  std::vector<BenchRecord> records;

  for (const StructureSpec& spec : structures) {
    if (spec.is_octree) {
      OctreeRunner runner(spec);
      for (std::size_t s = 0; s < series.steps.size(); ++s) {
        const std::vector<CloudPoint>& cloud = series.steps[s];
        MemTracker mem;
        mem.sample();
        const double build_s = runner.build(cloud);
        mem.sample();
        const double update_s = runner.update(cloud);
        mem.sample();
        const double nb_s = runner.neighbor_lists(cutoff);
        mem.sample();
        records.push_back({spec.name, dist, s, build_s, update_s, nb_s,
                           mem.peak_mb(), mem.avg_mb()});
      }
    } else {
      FlatRunner runner;
      for (std::size_t s = 0; s < series.steps.size(); ++s) {
        const std::vector<CloudPoint>& cloud = series.steps[s];
        MemTracker mem;
        mem.sample();
        const double build_s = runner.build(cloud);
        mem.sample();
        const double update_s = runner.update(cloud);
        mem.sample();
        const double nb_s = runner.neighbor_lists(cutoff);
        mem.sample();
        records.push_back({spec.name, dist, s, build_s, update_s, nb_s,
                           mem.peak_mb(), mem.avg_mb()});
      }
    }
  }
  return records;
}

}  // namespace dynoct::bench
