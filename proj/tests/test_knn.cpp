#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "dynoct/errors.hpp"
#include "dynoct/knn.hpp"
#include "dynoct/oracle.hpp"
#include "dynoct/rng.hpp"

using namespace dynoct;

namespace {

const Aabb kDomain{{-20.0, -20.0, -20.0}, {20.0, 20.0, 20.0}};

// Three gaussian blobs; class c is centered at kCenters[c].
const Vec3 kCenters[3] = {{-6.0, 0.0, 0.0}, {6.0, 0.0, 0.0}, {0.0, 8.0, 4.0}};

std::vector<LabeledPoint> blobs(std::size_t n, std::uint64_t seed,
                                double spread = 2.0) {
  std::mt19937_64 g(seed);
  std::vector<LabeledPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 3);
    const Vec3 p = kCenters[label] + spread * rng::normal_vec3(g);
    out.push_back({static_cast<PointId>(i), p, label});
  }
  return out;
}

int brute_classify(const oracle::FlatPointSet& set,
                   const std::vector<int>& labels_by_id, const Vec3& query,
                   std::size_t k) {
  const std::vector<QueryHit> hits = oracle::brute_knn(set, query, k);
  std::vector<int> labels;
  labels.reserve(hits.size());
  for (const QueryHit& h : hits) {
    labels.push_back(labels_by_id[static_cast<std::size_t>(h.id)]);
  }
  return majority_vote(hits, labels);
}

}  // namespace

TEST_CASE("majority vote tie-break chain") {
  // Strict majority.
  CHECK(majority_vote({{0, 1.0}, {1, 2.0}, {2, 3.0}}, {0, 0, 1}) == 0);
  // Count tie: smaller summed distance wins.
  CHECK(majority_vote({{0, 1.0}, {1, 2.0}}, {5, 3}) == 5);
  CHECK(majority_vote({{0, 2.0}, {1, 1.0}}, {5, 3}) == 3);
  // Count and distance tie: smaller class id wins.
  CHECK(majority_vote({{0, 1.5}, {1, 1.5}}, {9, 4}) == 4);
  // Four-way with two classes tied at two votes each.
  CHECK(majority_vote({{0, 1.0}, {1, 2.0}, {2, 3.0}, {3, 4.0}}, {7, 2, 2, 7}) ==
        2);  // sums: class 7 -> 5.0, class 2 -> 5.0, smaller id wins
  CHECK_THROWS_AS(majority_vote({}, {}), InputError);
  CHECK_THROWS_AS(majority_vote({{0, 1.0}}, {1, 2}), ConsistencyError);
}

TEST_CASE("classifier construction and batch validation") {
  CHECK_THROWS_AS(KnnClassifier(OctreeConfig{}, kDomain, 0), ConfigError);

  KnnClassifier c(OctreeConfig{}, kDomain, 3);
  c.add_batch({});  // no-op
  CHECK(c.size() == 0);
  CHECK_THROWS_AS(c.classify(Vec3{0.0, 0.0, 0.0}), StateError);
  CHECK_THROWS_AS(c.evaluate({}), InputError);

  // Duplicate inside the batch: nothing is inserted.
  CHECK_THROWS_AS(c.add_batch({{1, {0.0, 0.0, 0.0}, 0},
                               {2, {1.0, 0.0, 0.0}, 1},
                               {1, {2.0, 0.0, 0.0}, 0}}),
                  DuplicateIdError);
  CHECK(c.size() == 0);

  c.add_batch({{1, {0.0, 0.0, 0.0}, 0}, {2, {1.0, 0.0, 0.0}, 1}});
  CHECK(c.size() == 2);
  CHECK(c.label_of(1) == 0);
  CHECK_THROWS_AS(c.label_of(99), NotFoundError);

  // Duplicate against stored ids.
  CHECK_THROWS_AS(c.add_batch({{2, {3.0, 0.0, 0.0}, 1}}), DuplicateIdError);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(c.add_batch({{7, {inf, 0.0, 0.0}, 1}}), InputError);
  CHECK_THROWS_AS(c.add_batch({{7, {0.0, 0.0, 0.0}, -1}}), InputError);
  CHECK(c.size() == 2);
}

TEST_CASE("k=1 query on a stored point returns its label") {
  KnnClassifier c(OctreeConfig{}, kDomain, 1);
  const std::vector<LabeledPoint> train = blobs(200, 42);
  c.add_batch(train);
  for (std::size_t i = 0; i < train.size(); i += 17) {
    CHECK(c.classify(train[i].pos) == train[i].label);
  }
  CHECK(c.evaluate(train) == 1.0);
}

TEST_CASE("batching does not change the classifier") {
  const std::vector<LabeledPoint> train = blobs(500, 7);

  KnnClassifier whole(OctreeConfig{}, kDomain, 5);
  whole.add_batch(train);

  KnnClassifier pieces(OctreeConfig{}, kDomain, 5);
  for (std::size_t at = 0; at < train.size(); at += 50) {
    const std::size_t end = std::min(at + 50, train.size());
    pieces.add_batch({train.begin() + at, train.begin() + end});
  }

  CHECK(whole.size() == pieces.size());
  std::mt19937_64 g(8);
  for (int q = 0; q < 50; ++q) {
    const Vec3 query = rng::uniform_vec3(g, kDomain);
    CHECK(whole.classify(query) == pieces.classify(query));
  }

  // Every stored point is returned by a radius-0 query at its position.
  for (std::size_t i = 0; i < train.size(); i += 31) {
    const auto hits = range_query(pieces.tree(), train[i].pos, 0.0);
    bool found = false;
    for (const QueryHit& h : hits) found = found || h.id == train[i].id;
    CHECK(found);
  }
}

TEST_CASE("predictions are identical to the brute-force classifier") {
  const std::vector<LabeledPoint> train = blobs(2000, 123);
  std::vector<int> labels_by_id(train.size());
  oracle::FlatPointSet flat;
  for (const LabeledPoint& p : train) {
    flat.insert(p.id, p.pos);
    labels_by_id[static_cast<std::size_t>(p.id)] = p.label;
  }

  for (const int k : {1, 3, 5, 10}) {
    KnnClassifier c(OctreeConfig{}, kDomain, k);
    c.add_batch(train);
    std::mt19937_64 g(1000 + static_cast<std::uint64_t>(k));
    int checked = 0;
    for (int q = 0; q < 300; ++q) {
      const Vec3 query = rng::uniform_vec3(g, kDomain);
      CHECK(c.classify(query) ==
            brute_classify(flat, labels_by_id, query, static_cast<std::size_t>(k)));
      ++checked;
    }
    CHECK(checked == 300);
  }
}

TEST_CASE("far-away batches do not disturb local predictions") {
  KnnClassifier c(OctreeConfig{}, kDomain, 3);
  c.add_batch({{0, {0.0, 0.0, 0.0}, 0},
               {1, {0.5, 0.0, 0.0}, 0},
               {2, {0.0, 0.5, 0.0}, 1},
               {3, {0.3, 0.3, 0.0}, 0}});
  const Vec3 query{0.1, 0.1, 0.0};
  const int before = c.classify(query);

  std::vector<LabeledPoint> far;
  std::mt19937_64 g(9);
  for (PointId id = 100; id < 300; ++id) {
    far.push_back({id,
                   Vec3{15.0, 15.0, 15.0} + 0.5 * rng::normal_vec3(g),
                   2});
  }
  c.add_batch(far);
  CHECK(c.classify(query) == before);
}

TEST_CASE("label-shuffled test set scores near chance") {
  const std::vector<LabeledPoint> train = blobs(900, 5);
  KnnClassifier c(OctreeConfig{}, kDomain, 5);
  c.add_batch(train);

  std::vector<LabeledPoint> shuffled = blobs(900, 6);
  std::vector<int> labels;
  labels.reserve(shuffled.size());
  for (const LabeledPoint& p : shuffled) labels.push_back(p.label);
  std::mt19937_64 g(77);
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[rng::uniform_index(g, i)]);
  }
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    shuffled[i].label = labels[i];
  }
  // Balanced 3 classes: accuracy ~ 1/3, 3 sigma ~ 0.047 at n = 900.
  const double acc = c.evaluate(shuffled);
  CHECK(acc > 1.0 / 3.0 - 0.05);
  CHECK(acc < 1.0 / 3.0 + 0.05);
}
