// Command-line entry point. One binary, subcommand style, long-form flags
// only. Exit codes: 0 success, 1 input error, 2 internal invariant violation.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dynoct/benchgen.hpp"
#include "dynoct/embed.hpp"
#include "dynoct/errors.hpp"
#include "dynoct/io.hpp"
#include "dynoct/knn.hpp"
#include "dynoct/metrics.hpp"
#include "dynoct/octree.hpp"
#include "dynoct/oracle.hpp"
#include "dynoct/queries.hpp"
#include "dynoct/rng.hpp"
#include "dynoct/svgd.hpp"

namespace {

using namespace dynoct;

constexpr const char* kVersion = "dynoct 0.1.0";

// validate can fail checks without throwing; the code is carried to main.
int g_exit_code = 0;

std::string utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double elapsed_ms(const std::chrono::steady_clock::time_point& from) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - from)
      .count();
}

/// Written next to every produced output file as <out>.manifest.json.
void write_manifest(const std::string& out_path, const std::string& subcommand,
                    const std::map<std::string, std::string>& flags,
                    std::uint64_t seed, const std::string& started) {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["flags"] = flags;
  j["seed"] = seed;
  j["version"] = kVersion;
  j["started_utc"] = started;
  j["finished_utc"] = utc_now();
  const std::string path = out_path + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw InputError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

/// CSV rows go to --out when given, otherwise to stdout.
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("cannot open for writing: " + path);
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_ = &std::cout;
};

/// JSON config object {"K", "alpha", "max_depth", "expansion_factor"};
/// every key optional, unknown keys rejected.
OctreeConfig load_octree_config(const std::string& path) {
  OctreeConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw InputError("cannot open for reading: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  if (!j.is_object()) throw InputError(path + ": config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "K") {
        cfg.K = value.get<int>();
      } else if (key == "alpha") {
        cfg.alpha = value.get<double>();
      } else if (key == "max_depth") {
        cfg.max_depth = value.get<int>();
      } else if (key == "expansion_factor") {
        cfg.expansion_factor = value.get<double>();
      } else {
        throw InputError(path + ": unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

Aabb padded_box(const std::vector<Vec3>& pts) {
  if (pts.empty()) throw InputError("no points to bound");
  Vec3 lo = pts[0];
  Vec3 hi = pts[0];
  for (const Vec3& p : pts) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  double extent = 0.0;
  for (int a = 0; a < 3; ++a) extent = std::max(extent, hi[a] - lo[a]);
  const double pad = std::max(0.5, 0.1 * extent);
  return Aabb{{lo[0] - pad, lo[1] - pad, lo[2] - pad},
              {hi[0] + pad, hi[1] + pad, hi[2] + pad}};
}

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

// --- bench ------------------------------------------------------------

struct BenchArgs {
  std::string dist;
  double scale = 1.0;
  std::vector<int> Ks;
  double alpha = 2.0;
  double cutoff = 2.0;
  std::uint64_t seed = 0;
  std::string out;
  bool include_flat = false;
};

void run_bench_cmd(const BenchArgs& a) {
  const std::string started = utc_now();
  const bench::TimeStepSeries series = bench::generate(a.dist, a.seed, a.scale);
  const std::vector<int> Ks = a.Ks.empty() ? std::vector<int>{10} : a.Ks;
  std::vector<bench::StructureSpec> structures;
  for (const int K : Ks) {
    structures.push_back(bench::octree_structure(K, a.alpha));
  }
  if (a.include_flat) structures.push_back(bench::flat_structure());
  const std::vector<bench::BenchRecord> records =
      bench::run_bench(series, structures, a.cutoff);
  io::write_bench_csv(a.out, records);
  write_manifest(a.out, "bench",
                 {{"dist", a.dist},
                  {"scale", io::format_double(a.scale)},
                  {"K", join_ints(Ks)},
                  {"alpha", io::format_double(a.alpha)},
                  {"cutoff", io::format_double(a.cutoff)},
                  {"flat", a.include_flat ? "true" : "false"},
                  {"out", a.out}},
                 a.seed, started);
  std::cout << "wrote " << records.size() << " records to " << a.out << '\n';
}

// --- svgd -------------------------------------------------------------

struct SvgdArgs {
  std::size_t n = 100;
  int iters = 100;
  std::string mode = "octree";
  std::string target = "gauss";
  std::uint64_t seed = 0;
  double eps = 0.05;
  std::string bandwidth = "median";
  bool compat_norm = false;
  std::string out;
};

void run_svgd_cmd(const SvgdArgs& a) {
  const std::string started = utc_now();
  SvgdRunConfig cfg;
  cfg.mode = a.mode == "naive" ? SvgdMode::naive : SvgdMode::octree;
  cfg.n = a.n;
  cfg.iterations = a.iters;
  cfg.seed = a.seed;
  cfg.step_size = a.eps;
  cfg.compat_normalization = a.compat_norm;
  if (a.eps <= 0.0 || !std::isfinite(a.eps)) {
    throw InputError("--eps must be finite and positive");
  }
  if (a.iters < 0) throw InputError("--iters must be >= 0");
  if (a.bandwidth == "median") {
    cfg.bandwidth = 0.0;  // resolved by the median heuristic at init
  } else {
    cfg.bandwidth = io::parse_double(a.bandwidth);
    if (cfg.bandwidth <= 0.0 || !std::isfinite(cfg.bandwidth)) {
      throw InputError("--bandwidth must be 'median' or a positive number");
    }
  }
  const TargetDistribution target = make_target(a.target);
  const SvgdRunResult result = run_svgd(target, cfg);

  OutputSink sink(a.out);
  sink.stream() << "iter,wall_ms,mean_logp\n";
  for (const SvgdIterRecord& rec : result.iterations) {
    sink.stream() << rec.iter << ',' << io::format_double(rec.wall_ms) << ','
                  << io::format_double(rec.mean_logp) << '\n';
  }
  if (!a.out.empty()) {
    write_manifest(a.out, "svgd",
                   {{"n", std::to_string(a.n)},
                    {"iters", std::to_string(a.iters)},
                    {"mode", a.mode},
                    {"target", a.target},
                    {"eps", io::format_double(a.eps)},
                    {"bandwidth", a.bandwidth},
                    {"compat-norm", a.compat_norm ? "true" : "false"},
                    {"out", a.out}},
                   a.seed, started);
  }
}

// --- knn --------------------------------------------------------------

struct KnnArgs {
  std::string train;
  std::string test;
  int k = 5;
  std::size_t batch_size = 0;  // 0 = one batch
  std::string config;
  std::string out;
};

void run_knn_cmd(const KnnArgs& a) {
  const std::string started = utc_now();
  const OctreeConfig cfg = load_octree_config(a.config);
  const std::vector<LabeledPoint> train = io::read_labeled_csv(a.train);
  const std::vector<LabeledPoint> test = io::read_labeled_csv(a.test);
  if (train.empty()) throw InputError(a.train + ": training set is empty");
  if (test.empty()) throw InputError(a.test + ": test set is empty");

  std::vector<Vec3> all;
  all.reserve(train.size() + test.size());
  for (const LabeledPoint& p : train) all.push_back(p.pos);
  for (const LabeledPoint& p : test) all.push_back(p.pos);
  KnnClassifier clf(cfg, padded_box(all), a.k);

  const std::size_t batch =
      a.batch_size == 0 ? train.size() : a.batch_size;
  OutputSink sink(a.out);
  sink.stream() << "batch_index,update_ms,query_ms,accuracy\n";
  std::size_t at = 0;
  for (std::size_t index = 0; at < train.size(); ++index) {
    const std::size_t end = std::min(train.size(), at + batch);
    const std::vector<LabeledPoint> chunk(train.begin() + at,
                                          train.begin() + end);
    const auto t0 = std::chrono::steady_clock::now();
    clf.add_batch(chunk);
    const double update_ms = elapsed_ms(t0);
    const auto t1 = std::chrono::steady_clock::now();
    const double accuracy = clf.evaluate(test);
    const double query_ms = elapsed_ms(t1);
    sink.stream() << index << ',' << io::format_double(update_ms) << ','
                  << io::format_double(query_ms) << ','
                  << io::format_double(accuracy) << '\n';
    at = end;
  }
  if (!a.out.empty()) {
    write_manifest(a.out, "knn",
                   {{"train", a.train},
                    {"test", a.test},
                    {"k", std::to_string(a.k)},
                    {"batch-size", std::to_string(a.batch_size)},
                    {"config", a.config},
                    {"out", a.out}},
                   0, started);
  }
}

// --- index ------------------------------------------------------------

struct IndexArgs {
  std::string vectors;
  std::string queries;
  std::size_t dim = 0;  // 0 = take from the vector file
  std::size_t clusters = 8;
  std::size_t probe = 3;
  std::size_t multiplier = 10;
  std::size_t topk = 10;
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
};

void run_index_cmd(const IndexArgs& a) {
  const std::string started = utc_now();
  const EmbeddingStore store = io::read_vectors_csv(a.vectors);
  if (store.size() == 0) throw InputError(a.vectors + ": no vectors");
  if (a.dim != 0 && a.dim != store.dim()) {
    throw InputError("--dim " + std::to_string(a.dim) + " does not match " +
                     a.vectors + " (dimension " + std::to_string(store.dim()) +
                     ")");
  }
  HybridIndex::BuildParams params;
  params.num_clusters = a.clusters;
  params.seed = a.seed;
  params.octree = load_octree_config(a.config);
  const HybridIndex index(store, params);

  const EmbeddingStore qstore = io::read_vectors_csv(a.queries);
  if (qstore.size() == 0) throw InputError(a.queries + ": no queries");
  if (qstore.dim() != store.dim()) {
    throw InputError(a.queries + ": query dimension " +
                     std::to_string(qstore.dim()) + " does not match index");
  }

  OutputSink sink(a.out);
  sink.stream() << "query_id,rank,result_id,distance\n";
  std::vector<std::vector<double>> qvecs;
  qvecs.reserve(qstore.size());
  for (std::size_t qi = 0; qi < qstore.size(); ++qi) {
    const double* row = qstore.row_at(qi);
    qvecs.emplace_back(row, row + qstore.dim());
    const std::vector<IndexResult> results =
        index.query(qvecs.back(), a.topk, a.probe, a.multiplier);
    for (std::size_t r = 0; r < results.size(); ++r) {
      sink.stream() << qstore.ids()[qi] << ',' << (r + 1) << ','
                    << results[r].id << ','
                    << io::format_double(results[r].distance) << '\n';
    }
  }
  const double recall = index.recall_at_k(qvecs, a.topk, a.probe, a.multiplier);
  sink.stream() << "# recall@" << a.topk << ',' << io::format_double(recall)
                << '\n';
  if (!a.out.empty()) {
    write_manifest(a.out, "index",
                   {{"vectors", a.vectors},
                    {"queries", a.queries},
                    {"dim", std::to_string(store.dim())},
                    {"clusters", std::to_string(a.clusters)},
                    {"probe", std::to_string(a.probe)},
                    {"multiplier", std::to_string(a.multiplier)},
                    {"topk", std::to_string(a.topk)},
                    {"config", a.config},
                    {"out", a.out}},
                   a.seed, started);
  }
}

// --- metrics ----------------------------------------------------------

struct MetricsArgs {
  std::string x;
  std::string z;
  int k = 10;
  std::string traj;
  std::string out;
};

void run_metrics_cmd(const MetricsArgs& a) {
  const std::string started = utc_now();
  const bool paired = !a.x.empty() || !a.z.empty();
  if (paired && (a.x.empty() || a.z.empty())) {
    throw InputError("--x and --z must be given together");
  }
  if (!paired && a.traj.empty()) {
    throw InputError("nothing to compute: give --x with --z, or --traj");
  }

  OutputSink sink(a.out);
  sink.stream() << "metric,point,value\n";

  if (paired) {
    // Rows are paired by id; both files must cover exactly the same ids.
    std::map<PointId, Vec3> xm;
    for (const bench::CloudPoint& p : io::read_points_csv(a.x)) {
      if (!xm.insert({p.id, p.pos}).second) {
        throw InputError(a.x + ": duplicate id " + std::to_string(p.id));
      }
    }
    std::map<PointId, Vec3> zm;
    for (const bench::CloudPoint& p : io::read_points_csv(a.z)) {
      if (!zm.insert({p.id, p.pos}).second) {
        throw InputError(a.z + ": duplicate id " + std::to_string(p.id));
      }
    }
    PairedPointSets pairs;
    pairs.k = a.k;
    std::vector<PointId> ids;
    for (const auto& [id, pos] : xm) {
      const auto z = zm.find(id);
      if (z == zm.end()) {
        throw InputError(a.z + ": missing id " + std::to_string(id));
      }
      ids.push_back(id);
      pairs.X.push_back(pos);
      pairs.Z.push_back(z->second);
    }
    if (zm.size() != xm.size()) {
      throw InputError(a.x + " and " + a.z + " cover different ids");
    }

    const auto emit = [&](const std::string& name, const MetricReport& rep) {
      for (std::size_t i = 0; i < rep.per_point.size(); ++i) {
        sink.stream() << name << ',' << ids[i] << ','
                      << io::format_double(rep.per_point[i]) << '\n';
      }
      sink.stream() << name << ",mean," << io::format_double(rep.mean) << '\n';
    };
    emit("neighborhood_distortion", neighborhood_distortion(pairs));
    emit("neighborhood_jaccard", neighborhood_jaccard(pairs));
  }

  if (!a.traj.empty()) {
    const Trajectory traj = io::read_trajectory_csv(a.traj);
    const MetricReport rep = trajectory_curvature(traj);
    for (std::size_t i = 0; i < rep.per_point.size(); ++i) {
      sink.stream() << "trajectory_curvature," << i << ','
                    << io::format_double(rep.per_point[i]) << '\n';
    }
    sink.stream() << "trajectory_curvature,mean," << io::format_double(rep.mean)
                  << '\n';
  }

  if (!a.out.empty()) {
    write_manifest(a.out, "metrics",
                   {{"x", a.x},
                    {"z", a.z},
                    {"k", std::to_string(a.k)},
                    {"traj", a.traj},
                    {"out", a.out}},
                   0, started);
  }
}

// --- validate ---------------------------------------------------------

struct ValidateArgs {
  std::string points;
  double cutoff = 2.0;
  std::uint64_t seed = 0;
  std::string config;
  std::string neighbors_out;
};

bool hits_equal(const std::vector<QueryHit>& a, const std::vector<QueryHit>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || a[i].distance != b[i].distance) return false;
  }
  return true;
}

bool lists_equal(const NeighborList& a, const NeighborList& b) {
  if (a.lists.size() != b.lists.size()) return false;
  for (const auto& [id, list] : a.lists) {
    const auto it = b.lists.find(id);
    if (it == b.lists.end() || it->second.size() != list.size()) return false;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].id != it->second[i].id ||
          list[i].distance != it->second[i].distance) {
        return false;
      }
    }
  }
  return true;
}

struct CheckReporter {
  int failures = 0;
  void operator()(bool ok, const std::string& line) {
    std::cout << (ok ? "PASS " : "FAIL ") << line << '\n';
    if (!ok) ++failures;
  }
};

/// Exact agreement between the tree queries and the flat reference on the
/// given cloud: range, k-nearest, and full neighbor lists.
void equivalence_checks(const Octree& tree, const oracle::FlatPointSet& flat,
                        std::uint64_t seed, double cutoff, CheckReporter& report) {
  std::mt19937_64 g(seed + 1);
  const Aabb box = tree.bounds();
  std::size_t range_bad = 0;
  std::size_t knn_bad = 0;
  const int queries = 50;
  const double cutoffs[3] = {cutoff * 0.25, cutoff, cutoff * 4.0};
  for (int q = 0; q < queries; ++q) {
    const Vec3 center = rng::uniform_vec3(g, box);
    for (const double c : cutoffs) {
      if (!hits_equal(range_query(tree, center, c),
                      oracle::brute_range(flat, center, c))) {
        ++range_bad;
      }
    }
    for (const std::size_t k : {std::size_t{1}, std::size_t{10}}) {
      if (!hits_equal(k_nearest(tree, center, k),
                      oracle::brute_knn(flat, center, k))) {
        ++knn_bad;
      }
    }
  }
  report(range_bad == 0, "oracle range_query queries=" +
                             std::to_string(queries) +
                             " cutoffs=3 mismatches=" +
                             std::to_string(range_bad));
  report(knn_bad == 0, "oracle k_nearest queries=" + std::to_string(queries) +
                           " ks=2 mismatches=" + std::to_string(knn_bad));
  const bool nb_ok = lists_equal(build_neighbor_lists(tree, cutoff),
                                 oracle::brute_pairs(flat, cutoff));
  report(nb_ok, "oracle neighbor_lists cutoff=" + io::format_double(cutoff) +
                    (nb_ok ? " mismatches=0" : " mismatches>0"));
}

void export_neighbors(const Octree& tree, double cutoff,
                      const std::string& path) {
  const NeighborList nl = build_neighbor_lists(tree, cutoff);
  std::vector<PointId> ids;
  ids.reserve(nl.lists.size());
  for (const auto& [id, list] : nl.lists) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  std::ofstream out(path);
  if (!out) throw InputError("cannot open for writing: " + path);
  out << "id,neighbor_id,distance\n";
  for (const PointId id : ids) {
    for (const NeighborEntry& e : nl.lists.at(id)) {
      out << id << ',' << e.id << ',' << io::format_double(e.distance) << '\n';
    }
  }
}

void run_validate_cmd(const ValidateArgs& a) {
  const std::string started = utc_now();
  if (!(a.cutoff > 0.0) || !std::isfinite(a.cutoff)) {
    throw InputError("--cutoff must be finite and positive");
  }
  CheckReporter report;

  if (!a.points.empty()) {
    const std::vector<bench::CloudPoint> pts = io::read_points_csv(a.points);
    if (pts.empty()) throw InputError(a.points + ": no points");
    std::vector<Vec3> positions;
    positions.reserve(pts.size());
    for (const bench::CloudPoint& p : pts) positions.push_back(p.pos);
    const OctreeConfig cfg = load_octree_config(a.config);
    Octree tree(cfg, padded_box(positions));
    oracle::FlatPointSet flat;
    for (const bench::CloudPoint& p : pts) {
      tree.insert(p.id, p.pos);
      flat.insert(p.id, p.pos);
    }
    const ValidationReport vr = tree.validate_admissibility();
    report(vr.ok(), "admissibility points=" + std::to_string(pts.size()) +
                        " violations=" + std::to_string(vr.violations.size()) +
                        " depth_capped=" +
                        std::to_string(vr.depth_capped_leaves));
    equivalence_checks(tree, flat, a.seed, a.cutoff, report);
    if (!a.neighbors_out.empty()) {
      export_neighbors(tree, a.cutoff, a.neighbors_out);
      write_manifest(a.neighbors_out, "validate",
                     {{"points", a.points},
                      {"cutoff", io::format_double(a.cutoff)},
                      {"config", a.config},
                      {"neighbors-out", a.neighbors_out}},
                     a.seed, started);
    }
  } else {
    // Synthetic property run: seeded mixed operations over a drifting
    // domain, then an oracle-equivalence pass on a fresh cloud.
    const OctreeConfig base = load_octree_config(a.config);
    const std::pair<int, double> settings[3] = {{10, 1.0}, {10, 2.0},
                                                {100, 2.0}};
    for (const auto& [K, alpha] : settings) {
      OctreeConfig cfg = base;
      cfg.K = K;
      cfg.alpha = alpha;
      std::mt19937_64 g(a.seed * 1000003ULL + static_cast<std::uint64_t>(K) +
                        static_cast<std::uint64_t>(alpha * 16.0));
      Octree tree(cfg, Aabb{{0.0, 0.0, 0.0}, {50.0, 50.0, 50.0}});
      std::vector<PointId> live;
      PointId next_id = 0;
      const int ops = 20000;
      std::size_t violations = 0;
      std::size_t depth_capped = 0;
      for (int i = 0; i < ops; ++i) {
        const double drift = 0.002 * static_cast<double>(i);
        const Vec3 pos{drift + rng::uniform(g, 0.0, 50.0),
                       drift + rng::uniform(g, 0.0, 50.0),
                       drift + rng::uniform(g, 0.0, 50.0)};
        const double r = rng::uniform01(g);
        if (r < 0.45 || live.empty()) {
          tree.insert(next_id, pos);
          live.push_back(next_id++);
        } else if (r < 0.80) {
          tree.update_position(
              live[rng::uniform_index(g, live.size())], pos);
        } else {
          const std::size_t at = rng::uniform_index(g, live.size());
          tree.remove(live[at]);
          live[at] = live.back();
          live.pop_back();
        }
        if (i == ops / 2 || i == ops - 1) {
          const ValidationReport vr = tree.validate_admissibility();
          violations += vr.violations.size();
          depth_capped += vr.depth_capped_leaves;
        }
      }
      std::ostringstream os;
      os << "admissibility K=" << K << " alpha=" << alpha << " ops=" << ops
         << " violations=" << violations << " depth_capped=" << depth_capped;
      report(violations == 0, os.str());
    }

    std::mt19937_64 g(a.seed + 99);
    Octree tree(base, Aabb{{0.0, 0.0, 0.0}, {100.0, 100.0, 100.0}});
    oracle::FlatPointSet flat;
    const Aabb cluster{{40.0, 40.0, 40.0}, {45.0, 45.0, 45.0}};
    for (PointId id = 0; id < 2000; ++id) {
      const Vec3 pos = id % 4 == 0 ? rng::uniform_vec3(g, cluster)
                                   : rng::uniform_vec3(g, bench::domain());
      tree.insert(id, pos);
      flat.insert(id, pos);
    }
    equivalence_checks(tree, flat, a.seed, a.cutoff, report);
    if (!a.neighbors_out.empty()) {
      export_neighbors(tree, a.cutoff, a.neighbors_out);
      write_manifest(a.neighbors_out, "validate",
                     {{"points", ""},
                      {"cutoff", io::format_double(a.cutoff)},
                      {"config", a.config},
                      {"neighbors-out", a.neighbors_out}},
                     a.seed, started);
    }
  }

  if (report.failures == 0) {
    std::cout << "all checks passed\n";
  } else {
    std::cout << report.failures << " check(s) failed\n";
    g_exit_code = 2;  // a failed check is a broken internal invariant
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"(K,alpha)-admissible dynamic octree toolkit"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "Generate a synthetic workload and time the structures on it");
  bench_cmd
      ->add_option("--dist", bench_args.dist,
                   "Workload generator: varying, stepwise, exponential, "
                   "multimodal, wave")
      ->required()
      ->check(CLI::IsMember({"varying", "stepwise", "exponential",
                             "multimodal", "wave"}));
  bench_cmd->add_option("--scale", bench_args.scale,
                        "Point-count scale factor in (0, 1]");
  bench_cmd->add_option("--K", bench_args.Ks,
                        "Octree capacity scale; repeat for several structures");
  bench_cmd->add_option("--alpha", bench_args.alpha, "Octree slack factor");
  bench_cmd->add_option("--cutoff", bench_args.cutoff,
                        "Neighbor-list cutoff distance");
  bench_cmd->add_option("--seed", bench_args.seed, "Workload seed")
      ->envname("DYNOCT_SEED");
  bench_cmd->add_flag("--flat", bench_args.include_flat,
                      "Also run the flat rebuild-per-update baseline");
  bench_cmd->add_option("--out", bench_args.out, "Output CSV path")
      ->required();
  bench_cmd->callback([&bench_args] { run_bench_cmd(bench_args); });

  SvgdArgs svgd_args;
  CLI::App* svgd_cmd = app.add_subcommand(
      "svgd", "Run Stein variational gradient descent on a preset target");
  svgd_cmd->add_option("--n", svgd_args.n, "Number of particles");
  svgd_cmd->add_option("--iters", svgd_args.iters, "Number of iterations");
  svgd_cmd->add_option("--mode", svgd_args.mode, "naive or octree")
      ->check(CLI::IsMember({"naive", "octree"}));
  svgd_cmd->add_option("--target", svgd_args.target, "gauss or mixture2")
      ->check(CLI::IsMember({"gauss", "mixture2"}));
  svgd_cmd->add_option("--seed", svgd_args.seed, "Initialization seed")
      ->envname("DYNOCT_SEED");
  svgd_cmd->add_option("--eps", svgd_args.eps, "Step size");
  svgd_cmd->add_option("--bandwidth", svgd_args.bandwidth,
                       "'median' or a positive kernel bandwidth");
  svgd_cmd->add_flag("--compat-norm", svgd_args.compat_norm,
                     "Divide by the full ensemble size and keep self terms");
  svgd_cmd->add_option("--out", svgd_args.out,
                       "Output CSV path (default: stdout)");
  svgd_cmd->callback([&svgd_args] { run_svgd_cmd(svgd_args); });

  KnnArgs knn_args;
  CLI::App* knn_cmd = app.add_subcommand(
      "knn", "Train an incremental KNN classifier and score a test set");
  knn_cmd->add_option("--train", knn_args.train, "Training CSV (id,x,y,z,label)")
      ->required();
  knn_cmd->add_option("--test", knn_args.test, "Test CSV (id,x,y,z,label)")
      ->required();
  knn_cmd->add_option("--k", knn_args.k, "Number of neighbors");
  knn_cmd->add_option("--batch-size", knn_args.batch_size,
                      "Insert the training set in batches of this size "
                      "(0 = one batch)");
  knn_cmd->add_option("--config", knn_args.config,
                      "Octree config JSON (K, alpha, max_depth, "
                      "expansion_factor)");
  knn_cmd->add_option("--out", knn_args.out,
                      "Output CSV path (default: stdout)");
  knn_cmd->callback([&knn_args] { run_knn_cmd(knn_args); });

  IndexArgs index_args;
  CLI::App* index_cmd = app.add_subcommand(
      "index", "Build a hybrid vector index and answer nearest-neighbor "
               "queries");
  index_cmd
      ->add_option("--vectors", index_args.vectors,
                   "Base vector CSV (id,v0,...,v{D-1})")
      ->required();
  index_cmd
      ->add_option("--queries", index_args.queries,
                   "Query vector CSV, same dimension")
      ->required();
  index_cmd->add_option("--dim", index_args.dim,
                        "Expected vector dimension (0 = take from file)");
  index_cmd->add_option("--clusters", index_args.clusters,
                        "Number of k-means clusters");
  index_cmd->add_option("--probe", index_args.probe,
                        "Clusters probed per query");
  index_cmd->add_option("--multiplier", index_args.multiplier,
                        "Candidates fetched per cluster as a multiple of "
                        "top-k");
  index_cmd->add_option("--topk", index_args.topk, "Results per query");
  index_cmd->add_option("--seed", index_args.seed, "Clustering seed")
      ->envname("DYNOCT_SEED");
  index_cmd->add_option("--config", index_args.config,
                        "Octree config JSON for the per-cluster trees");
  index_cmd->add_option("--out", index_args.out,
                        "Output CSV path (default: stdout)");
  index_cmd->callback([&index_args] { run_index_cmd(index_args); });

  MetricsArgs metrics_args;
  CLI::App* metrics_cmd = app.add_subcommand(
      "metrics", "Structure-preservation metrics between paired point sets "
                 "and/or trajectories");
  metrics_cmd->add_option("--x", metrics_args.x,
                          "Input-space points CSV (id,x,y,z)");
  metrics_cmd->add_option("--z", metrics_args.z,
                          "Output-space points CSV, same ids");
  metrics_cmd->add_option("--k", metrics_args.k, "Neighborhood size");
  metrics_cmd->add_option("--traj", metrics_args.traj,
                          "Trajectory CSV (point_id,t,x,y,z)");
  metrics_cmd->add_option("--out", metrics_args.out,
                          "Output CSV path (default: stdout)");
  metrics_cmd->callback([&metrics_args] { run_metrics_cmd(metrics_args); });

  ValidateArgs validate_args;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Run the admissibility and oracle-equivalence property "
                  "suite and print a pass/fail summary");
  validate_cmd->add_option("--points", validate_args.points,
                           "Validate on this point CSV instead of synthetic "
                           "data");
  validate_cmd->add_option("--cutoff", validate_args.cutoff,
                           "Neighbor-list cutoff distance");
  validate_cmd->add_option("--seed", validate_args.seed, "Synthetic-data seed")
      ->envname("DYNOCT_SEED");
  validate_cmd->add_option("--config", validate_args.config,
                           "Octree config JSON");
  validate_cmd->add_option("--neighbors-out", validate_args.neighbors_out,
                           "Export the verified neighbor list "
                           "(id,neighbor_id,distance) to this CSV");
  validate_cmd->callback([&validate_args] { run_validate_cmd(validate_args); });

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->set_help_flag("--help", "Print this help message and exit");
  }

  if (argc < 2) {
    std::cerr << app.help();
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const ConsistencyError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return g_exit_code;
}
