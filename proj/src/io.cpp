#include "dynoct/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "dynoct/errors.hpp"

namespace dynoct::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (true) {
    const std::size_t comma = line.find(',', at);
    if (comma == std::string::npos) {
      out.push_back(line.substr(at));
      return out;
    }
    out.push_back(line.substr(at, comma - at));
    at = comma + 1;
  }
}

[[noreturn]] void fail_line(const std::string& path, std::size_t lineno,
                            const std::string& what) {
  std::ostringstream os;
  os << path << ":" << lineno << ": " << what;
  throw InputError(os.str());
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open for writing: " + path);
  return out;
}

void expect_header(std::ifstream& in, const std::string& path,
                   const std::string& header) {
  std::string line;
  if (!std::getline(in, line)) {
    throw InputError(path + ": empty file, expected header '" + header + "'");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw InputError(path + ": expected header '" + header + "', got '" +
                     line + "'");
  }
}

/// Reads data rows, stripping trailing carriage returns and skipping a
/// trailing blank line.
template <typename Fn>
void for_each_row(std::ifstream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 1;  // header was line 1
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(split_csv(line), lineno);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  if (text.empty()) throw InputError("empty numeric field");
  if (std::isspace(static_cast<unsigned char>(text.front()))) {
    throw InputError("not a number: '" + text + "'");  // strtod would skip it
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw InputError("not a number: '" + text + "'");
  }
  // ERANGE with a subnormal result is a representable value, not a failure;
  // only genuine overflow or total underflow is rejected.
  if (errno == ERANGE && (v == 0.0 || std::abs(v) == HUGE_VAL)) {
    throw InputError("out of range: '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& text) {
  if (text.empty()) throw InputError("empty integer field");
  if (std::isspace(static_cast<unsigned char>(text.front()))) {
    throw InputError("not an integer: '" + text + "'");
  }
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw InputError("not an integer: '" + text + "'");
  }
  return v;
}

void write_points_csv(const std::string& path,
                      const std::vector<bench::CloudPoint>& points) {
  std::ofstream out = open_out(path);
  out << "id,x,y,z\n";
  for (const bench::CloudPoint& p : points) {
    out << p.id << ',' << format_double(p.pos[0]) << ','
        << format_double(p.pos[1]) << ',' << format_double(p.pos[2]) << '\n';
  }
}

std::vector<bench::CloudPoint> read_points_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_header(in, path, "id,x,y,z");
  std::vector<bench::CloudPoint> out;
  for_each_row(in, [&](const std::vector<std::string>& f,
                             std::size_t lineno) {
    if (f.size() != 4) fail_line(path, lineno, "expected 4 fields");
    const long long id = parse_int(f[0]);
    if (id < 0) fail_line(path, lineno, "negative id");
    out.push_back({static_cast<PointId>(id),
                   {parse_double(f[1]), parse_double(f[2]), parse_double(f[3])}});
  });
  return out;
}

void write_labeled_csv(const std::string& path,
                       const std::vector<LabeledPoint>& points) {
  std::ofstream out = open_out(path);
  out << "id,x,y,z,label\n";
  for (const LabeledPoint& p : points) {
    out << p.id << ',' << format_double(p.pos[0]) << ','
        << format_double(p.pos[1]) << ',' << format_double(p.pos[2]) << ','
        << p.label << '\n';
  }
}

std::vector<LabeledPoint> read_labeled_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_header(in, path, "id,x,y,z,label");
  std::vector<LabeledPoint> out;
  for_each_row(in, [&](const std::vector<std::string>& f,
                             std::size_t lineno) {
    if (f.size() != 5) fail_line(path, lineno, "expected 5 fields");
    const long long id = parse_int(f[0]);
    if (id < 0) fail_line(path, lineno, "negative id");
    const long long label = parse_int(f[4]);
    if (label < 0) fail_line(path, lineno, "negative label");
    out.push_back({static_cast<PointId>(id),
                   {parse_double(f[1]), parse_double(f[2]), parse_double(f[3])},
                   static_cast<int>(label)});
  });
  return out;
}

void write_vectors_csv(const std::string& path, const EmbeddingStore& store) {
  std::ofstream out = open_out(path);
  out << "id";
  for (std::size_t d = 0; d < store.dim(); ++d) out << ",v" << d;
  out << '\n';
  for (std::size_t p = 0; p < store.size(); ++p) {
    out << store.ids()[p];
    const double* row = store.row_at(p);
    for (std::size_t d = 0; d < store.dim(); ++d) {
      out << ',' << format_double(row[d]);
    }
    out << '\n';
  }
}

EmbeddingStore read_vectors_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) {
    throw InputError(path + ": empty file, expected a vector header");
  }
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const std::vector<std::string> cols = split_csv(header);
  if (cols.size() < 2 || cols[0] != "id") {
    throw InputError(path + ": expected header 'id,v0,...'");
  }
  for (std::size_t d = 0; d + 1 < cols.size(); ++d) {
    if (cols[d + 1] != "v" + std::to_string(d)) {
      throw InputError(path + ": expected column 'v" + std::to_string(d) +
                       "', got '" + cols[d + 1] + "'");
    }
  }
  const std::size_t dim = cols.size() - 1;
  EmbeddingStore store(dim);
  for_each_row(in, [&](const std::vector<std::string>& f,
                             std::size_t lineno) {
    if (f.size() != dim + 1) {
      fail_line(path, lineno, "expected " + std::to_string(dim + 1) + " fields");
    }
    const long long id = parse_int(f[0]);
    if (id < 0) fail_line(path, lineno, "negative id");
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) v[d] = parse_double(f[d + 1]);
    store.insert(static_cast<PointId>(id), v);
  });
  return store;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  out << "point_id,t,x,y,z\n";
  for (std::size_t p = 0; p < traj.samples.size(); ++p) {
    for (std::size_t t = 0; t < traj.samples[p].size(); ++t) {
      const Vec3& z = traj.samples[p][t];
      out << p << ',' << t << ',' << format_double(z[0]) << ','
          << format_double(z[1]) << ',' << format_double(z[2]) << '\n';
    }
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_header(in, path, "point_id,t,x,y,z");
  std::map<long long, std::vector<std::pair<long long, Vec3>>> rows;
  for_each_row(in, [&](const std::vector<std::string>& f,
                             std::size_t lineno) {
    if (f.size() != 5) fail_line(path, lineno, "expected 5 fields");
    const long long id = parse_int(f[0]);
    const long long t = parse_int(f[1]);
    rows[id].push_back(
        {t, {parse_double(f[2]), parse_double(f[3]), parse_double(f[4])}});
  });
  Trajectory traj;
  traj.samples.reserve(rows.size());
  for (auto& [id, samples] : rows) {
    std::sort(samples.begin(), samples.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (samples[i].first == samples[i - 1].first) {
        throw InputError(path + ": duplicate time " +
                         std::to_string(samples[i].first) + " for point " +
                         std::to_string(id));
      }
    }
    std::vector<Vec3> zs;
    zs.reserve(samples.size());
    for (const auto& [t, z] : samples) zs.push_back(z);
    traj.samples.push_back(std::move(zs));
  }
  return traj;
}

void write_bench_csv(const std::string& path,
                     const std::vector<bench::BenchRecord>& records) {
  std::ofstream out = open_out(path);
  out << "structure,distribution,step,build_s,update_s,nb_s,peak_mem_mb,"
         "avg_mem_mb\n";
  for (const bench::BenchRecord& r : records) {
    out << r.structure << ',' << r.distribution << ',' << r.step << ','
        << format_double(r.build_s) << ',' << format_double(r.update_s) << ','
        << format_double(r.nb_s) << ',';
    if (r.peak_mem_mb) out << format_double(*r.peak_mem_mb);
    out << ',';
    if (r.avg_mem_mb) out << format_double(*r.avg_mem_mb);
    out << '\n';
  }
}

}  // namespace dynoct::io
