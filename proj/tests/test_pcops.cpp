#include <doctest.h>

#include <algorithm>

#include "lhmp/pcops.hpp"
#include "lhmp/rng.hpp"
#include "oracles.hpp"

using namespace lhmp;
using pcops::bin_by_part;
using pcops::center_normalize;
using pcops::chamfer;
using pcops::farthest_point_sample;

namespace {

std::vector<Vec3> random_cloud(Rng& rng, int n, double scale = 1.0) {
  std::vector<Vec3> pts(n);
  for (auto& p : pts)
    p = Vec3{rng.uniform(-scale, scale), rng.uniform(-scale, scale),
             rng.uniform(-scale, scale)};
  return pts;
}

std::vector<Pose> random_poses(Rng& rng, int t) {
  std::vector<Pose> out(t);
  for (auto& pose : out)
    for (auto& j : pose)
      j = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return out;
}

}  // namespace

TEST_CASE("fps exhaustive case returns all indices") {
  Rng rng(42);
  auto pts = random_cloud(rng, 5);
  auto idx = farthest_point_sample(pts, 5);
  REQUIRE(idx.size() == 5);
  auto sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 5; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("fps collinear hand case") {
  // Points at x = 0, 1, 10: centroid 11/3, so the seed is x=10, and the
  // farthest remaining point from it is x=0.
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {10, 0, 0}};
  auto idx = farthest_point_sample(pts, 2);
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] == 2);
  CHECK(idx[1] == 0);
}

TEST_CASE("fps padding rule") {
  Rng rng(7);
  auto pts = random_cloud(rng, 256);
  auto idx = farthest_point_sample(pts, 300);
  REQUIRE(idx.size() == 300);
  std::vector<int> first(idx.begin(), idx.begin() + 256);
  std::sort(first.begin(), first.end());
  first.erase(std::unique(first.begin(), first.end()), first.end());
  CHECK(first.size() == 256);  // distinct
  for (int i = 256; i < 300; ++i) CHECK(idx[i] == 0);
}

TEST_CASE("fps empty input throws") {
  CHECK_THROWS_AS(farthest_point_sample({}, 4), ContractError);
}

TEST_CASE("fps matches the brute-force oracle") {
  Rng rng(1001);
  for (int rep = 0; rep < 100; ++rep) {
    int m = 3 + static_cast<int>(rng.uniform_index(30));
    int target = 1 + static_cast<int>(rng.uniform_index(m + 4));
    auto pts = random_cloud(rng, m);
    auto got = farthest_point_sample(pts, target);
    auto want = oracle::fps(pts, target);
    CHECK(got == want);
  }
}

TEST_CASE("fps selection is permutation-covariant as a point set") {
  Rng rng(55);
  for (int rep = 0; rep < 20; ++rep) {
    auto pts = random_cloud(rng, 40);
    auto idx = farthest_point_sample(pts, 12);

    std::vector<int> perm(pts.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    for (size_t i = perm.size() - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    std::vector<Vec3> shuffled(pts.size());
    for (size_t i = 0; i < perm.size(); ++i) shuffled[perm[i]] = pts[i];
    auto idx2 = farthest_point_sample(shuffled, 12);

    auto key = [](const Vec3& v) { return std::array<double, 3>{v.x, v.y, v.z}; };
    std::vector<std::array<double, 3>> set1, set2;
    for (int i : idx) set1.push_back(key(pts[i]));
    for (int i : idx2) set2.push_back(key(shuffled[i]));
    std::sort(set1.begin(), set1.end());
    std::sort(set2.begin(), set2.end());
    CHECK(set1 == set2);
  }
}

TEST_CASE("center_normalize basics") {
  pcops::ProcessedFrame f = center_normalize({{1, 2, 3}}, {0});
  CHECK(f.points[0].norm() == doctest::Approx(0.0));
  CHECK(f.centroid.x == doctest::Approx(1.0));
  CHECK(f.centroid.y == doctest::Approx(2.0));
  CHECK(f.centroid.z == doctest::Approx(3.0));

  Rng rng(3);
  auto pts = random_cloud(rng, 100, 2.0);
  std::vector<std::uint8_t> labels(100, 1);
  auto g = center_normalize(pts, labels);
  Vec3 mean;
  for (auto& p : g.points) mean += p;
  mean = mean / 100.0;
  CHECK(std::abs(mean.x) < 1e-6);
  CHECK(std::abs(mean.y) < 1e-6);
  CHECK(std::abs(mean.z) < 1e-6);
  // round trip
  for (int i = 0; i < 100; ++i) CHECK((g.points[i] + g.centroid - pts[i]).norm() < 1e-7);

  CHECK_THROWS_AS(center_normalize({}, {}), ContractError);
}

TEST_CASE("bin_by_part partitions and excludes noise") {
  auto bins = bin_by_part({0, 255, 0, 4});
  CHECK(bins.bins[0] == std::vector<int>{0, 2});
  CHECK(bins.bins[4] == std::vector<int>{3});
  CHECK(bins.noise == std::vector<int>{1});
  CHECK(bins.nonempty[0]);
  CHECK(bins.nonempty[4]);
  CHECK_FALSE(bins.nonempty[1]);

  std::vector<std::uint8_t> all3(10, 3);
  auto b3 = bin_by_part(all3);
  CHECK(b3.bins[3].size() == 10);
  for (int k = 0; k < kNumParts; ++k)
    if (k != 3) CHECK_FALSE(b3.nonempty[k]);

  CHECK_THROWS_AS(bin_by_part({0, 9}), ContractError);
}

TEST_CASE("bin_by_part partition property") {
  Rng rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    int n = 1 + static_cast<int>(rng.uniform_index(60));
    std::vector<std::uint8_t> labels(n);
    for (auto& l : labels)
      l = rng.uniform() < 0.1 ? kNoiseLabel
                              : static_cast<std::uint8_t>(rng.uniform_index(kNumParts));
    auto bins = bin_by_part(labels);
    std::vector<int> all = bins.noise;
    for (const auto& b : bins.bins) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    REQUIRE(static_cast<int>(all.size()) == n);
    for (int i = 0; i < n; ++i) CHECK(all[i] == i);  // disjoint + complete
    for (int k = 0; k < kNumParts; ++k)
      for (int i : bins.bins[k]) CHECK(labels[i] == k);
  }
}

TEST_CASE("bin permutation commutes with relabeling") {
  Rng rng(123);
  std::vector<std::uint8_t> labels(40);
  for (auto& l : labels) l = static_cast<std::uint8_t>(rng.uniform_index(kNumParts));
  // relabel k -> (k + 2) % 9
  std::vector<std::uint8_t> relabeled(labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    relabeled[i] = static_cast<std::uint8_t>((labels[i] + 2) % kNumParts);
  auto a = bin_by_part(labels);
  auto b = bin_by_part(relabeled);
  for (int k = 0; k < kNumParts; ++k) CHECK(a.bins[k] == b.bins[(k + 2) % kNumParts]);
}

TEST_CASE("chamfer basics") {
  std::vector<Vec3> a = {{0, 0, 0}};
  std::vector<Vec3> b = {{1, 0, 0}};
  CHECK(chamfer(a, b) == doctest::Approx(2.0));
  Rng rng(8);
  auto c = random_cloud(rng, 20);
  CHECK(chamfer(c, c) == 0.0);
  CHECK_THROWS_AS(chamfer({}, b), ContractError);
}

TEST_CASE("chamfer is exactly symmetric and matches the oracle") {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    auto a = random_cloud(rng, 40);
    auto b = random_cloud(rng, 60);
    double ab = chamfer(a, b);
    double ba = chamfer(b, a);
    CHECK(ab == ba);  // identical code path, exact
    CHECK(std::abs(ab - oracle::chamfer(a, b)) <= 1e-9);
  }
}

TEST_CASE("mpjpe basics and oracle") {
  Rng rng(77);
  auto gt = random_poses(rng, 6);
  CHECK(pcops::mpjpe(gt, gt)[3] == 0.0);

  // One joint off by (3, 4, 0) mm -> 5 mm error averaged over 24 joints.
  auto pred = gt;
  pred[2][10] += Vec3{0.003, 0.004, 0.0};
  auto per_t = pcops::mpjpe(pred, gt);
  CHECK(per_t[2] == doctest::Approx(5.0 / 24.0).epsilon(1e-9));

  for (int rep = 0; rep < 100; ++rep) {
    auto p = random_poses(rng, 4);
    auto g = random_poses(rng, 4);
    auto ours = pcops::mpjpe(p, g);
    auto ref = oracle::mpjpe(p, g);
    for (int t = 0; t < 4; ++t) CHECK(std::abs(ours[t] - ref[t]) <= 1e-9);
  }

  auto short_gt = random_poses(rng, 3);
  CHECK_THROWS_AS(pcops::mpjpe(gt, short_gt), ContractError);
}

TEST_CASE("mpjpe is invariant to common translation") {
  Rng rng(15);
  auto pred = random_poses(rng, 5);
  auto gt = random_poses(rng, 5);
  auto base = pcops::mpjpe(pred, gt);
  Vec3 shift{3.0, -2.0, 0.5};
  for (auto& pose : pred)
    for (auto& j : pose) j += shift;
  for (auto& pose : gt)
    for (auto& j : pose) j += shift;
  auto shifted = pcops::mpjpe(pred, gt);
  for (size_t t = 0; t < base.size(); ++t)
    CHECK(shifted[t] == doctest::Approx(base[t]).epsilon(1e-9));
}

TEST_CASE("min_mpjpe degenerate, exact-hit and oracle cases") {
  Rng rng(200);
  auto gt = random_poses(rng, 4);
  std::vector<int> horizon = {0, 1, 2, 3};

  auto single = pcops::min_mpjpe({gt}, gt, horizon);
  CHECK(single.value_mm == 0.0);
  CHECK(single.argmin == 0);

  std::vector<std::vector<Pose>> hyps;
  for (int m = 0; m < 3; ++m) hyps.push_back(random_poses(rng, 4));
  hyps.push_back(gt);
  auto res = pcops::min_mpjpe(hyps, gt, horizon);
  CHECK(res.value_mm == 0.0);
  CHECK(res.argmin == 3);

  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::vector<Pose>> hs;
    for (int m = 0; m < 4; ++m) hs.push_back(random_poses(rng, 4));
    auto got = pcops::min_mpjpe(hs, gt, horizon);
    double want = std::numeric_limits<double>::infinity();
    for (const auto& h : hs) {
      auto per_t = oracle::mpjpe(h, gt);
      double mean = (per_t[0] + per_t[1] + per_t[2] + per_t[3]) / 4.0;
      want = std::min(want, mean);
    }
    CHECK(std::abs(got.value_mm - want) <= 1e-9);
    // never better than any single hypothesis
    for (const auto& h : hs)
      CHECK(got.value_mm <= pcops::mpjpe_mean(h, gt, horizon) + 1e-12);
  }

  CHECK_THROWS_AS(pcops::min_mpjpe({}, gt, horizon), ContractError);
}
