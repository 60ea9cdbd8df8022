#pragma once

#include <string>
#include <vector>

#include "dynoct/benchgen.hpp"
#include "dynoct/embed.hpp"
#include "dynoct/knn.hpp"
#include "dynoct/metrics.hpp"

namespace dynoct::io {

/// Shortest text that round-trips a double exactly (17 significant digits).
std::string format_double(double v);

/// Strict numeric parsing; anything but a complete number is an input error.
double parse_double(const std::string& text);
long long parse_int(const std::string& text);

// Each reader validates the exact header of its format and reports parse
// failures with the 1-based line number.

/// Format: id,x,y,z
void write_points_csv(const std::string& path,
                      const std::vector<bench::CloudPoint>& points);
std::vector<bench::CloudPoint> read_points_csv(const std::string& path);

/// Format: id,x,y,z,label
void write_labeled_csv(const std::string& path,
                       const std::vector<LabeledPoint>& points);
std::vector<LabeledPoint> read_labeled_csv(const std::string& path);

/// Format: id,v0,...,v{D-1}; the dimension comes from the header.
void write_vectors_csv(const std::string& path, const EmbeddingStore& store);
EmbeddingStore read_vectors_csv(const std::string& path);

/// Format: point_id,t,x,y,z with integer t; rows may arrive in any order,
/// trajectories are returned sorted by point id, samples by t.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

/// Header: structure,distribution,step,build_s,update_s,nb_s,peak_mem_mb,
/// avg_mem_mb. Unavailable memory figures become empty fields.
void write_bench_csv(const std::string& path,
                     const std::vector<bench::BenchRecord>& records);

}  // namespace dynoct::io
