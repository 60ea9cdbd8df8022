#include "dynoct/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "dynoct/errors.hpp"

namespace dynoct::oracle {

void FlatPointSet::insert(PointId id, const Vec3& pos) {
  if (!is_finite(pos)) throw InputError("flat insert: non-finite coordinate");
  if (index_.count(id)) throw DuplicateIdError("flat insert: id already live");
  index_[id] = entries_.size();
  entries_.push_back({id, pos});
}

void FlatPointSet::remove(PointId id) {
  const auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("flat remove: id not live");
  const std::size_t i = it->second;
  index_.erase(it);
  if (i + 1 != entries_.size()) {
    entries_[i] = entries_.back();
    index_[entries_[i].id] = i;
  }
  entries_.pop_back();
}

void FlatPointSet::update_position(PointId id, const Vec3& pos) {
  if (!is_finite(pos)) throw InputError("flat update: non-finite coordinate");
  const auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("flat update: id not live");
  entries_[it->second].pos = pos;
}

void FlatPointSet::clear() {
  entries_.clear();
  index_.clear();
}

std::vector<FlatPointSet::Entry> FlatPointSet::sorted_entries() const {
  std::vector<Entry> out = entries_;
  std::sort(out.begin(), out.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  return out;
}

namespace {

struct Candidate {
  double d2;
  PointId id;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.d2 != b.d2) return a.d2 < b.d2;
  return a.id < b.id;
}

std::vector<QueryHit> finalize(std::vector<Candidate> cands) {
  std::sort(cands.begin(), cands.end(), candidate_less);
  std::vector<QueryHit> out;
  out.reserve(cands.size());
  for (const Candidate& c : cands) out.push_back({c.id, std::sqrt(c.d2)});
  return out;
}

}  // namespace

std::vector<QueryHit> brute_range(const FlatPointSet& set, const Vec3& center,
                                  double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw InputError("brute_range: radius must be finite and >= 0");
  }
  const double r2 = radius * radius;
  std::vector<Candidate> cands;
  for (const auto& e : set.entries()) {
    const double d2 = squared_distance(e.pos, center);
    if (d2 <= r2) cands.push_back({d2, e.id});
  }
  return finalize(std::move(cands));
}

std::vector<QueryHit> brute_knn(const FlatPointSet& set, const Vec3& query,
                                std::size_t k) {
  if (k == 0) throw InputError("brute_knn: k must be >= 1");
  std::vector<Candidate> cands;
  cands.reserve(set.size());
  for (const auto& e : set.entries()) {
    cands.push_back({squared_distance(e.pos, query), e.id});
  }
  std::sort(cands.begin(), cands.end(), candidate_less);
  if (cands.size() > k) cands.resize(k);
  std::vector<QueryHit> out;
  out.reserve(cands.size());
  for (const Candidate& c : cands) out.push_back({c.id, std::sqrt(c.d2)});
  return out;
}

NeighborList brute_pairs(const FlatPointSet& set, double cutoff) {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
    throw InputError("brute_pairs: cutoff must be finite and > 0");
  }
  const double cutoff2 = cutoff * cutoff;
  NeighborList result;
  result.cutoff = cutoff;
  const auto& es = set.entries();
  for (const auto& e : es) result.lists.emplace(e.id, 0);
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (std::size_t j = i + 1; j < es.size(); ++j) {
      const double d2 = squared_distance(es[i].pos, es[j].pos);
      if (d2 <= cutoff2) {
        const double d = std::sqrt(d2);
        result.lists[es[i].id].push_back({es[j].id, d});
        result.lists[es[j].id].push_back({es[i].id, d});
      }
    }
  }
  for (auto& [id, list] : result.lists) {
    std::sort(list.begin(), list.end(),
              [](const NeighborEntry& a, const NeighborEntry& b) {
                if (a.distance != b.distance) return a.distance < b.distance;
                return a.id < b.id;
              });
  }
  return result;
}

FlatPointSet snapshot(const Octree& tree) {
  std::vector<FlatPointSet::Entry> entries;
  entries.reserve(tree.size());
  tree.for_each_point(
      [&](PointId id, const Vec3& pos) { entries.push_back({id, pos}); });
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  FlatPointSet set;
  for (const auto& e : entries) set.insert(e.id, e.pos);
  return set;
}

}  // namespace dynoct::oracle
