#include "xview/error.hpp"
#include "xview/pairing.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace xview;

namespace {

std::vector<Vec3> shifted(std::vector<Vec3> pts, const Vec3& d) {
  for (auto& p : pts) p += d;
  return pts;
}

// Points at the centers of the given unit cells.
std::vector<Vec3> cells(std::initializer_list<std::array<int, 3>> ids) {
  std::vector<Vec3> out;
  for (const auto& c : ids) out.push_back(Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5));
  return out;
}

}  // namespace

TEST(Voxelize, SameCellAndBoundary) {
  const std::vector<Vec3> two{Vec3(0.1, 0.1, 0.1), Vec3(0.2, 0.2, 0.2)};
  EXPECT_EQ(voxelize(two, 1.0).size(), 1u);
  const VoxelSet b = voxelize(std::vector<Vec3>{Vec3(1.0, -0.5, -1.0)}, 1.0);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.occupied[0], (VoxelKey{1, -1, -1}));
}

TEST(Voxelize, MatchesSetOracle) {
  gen::Rng rng(1);
  for (double cell : {1.0, 2.0, 0.7}) {
    const auto pts = gen::cloud(rng, 1000, 0, 10);
    const VoxelSet v = voxelize(pts, cell);
    const auto ref = oracle::voxel_set(pts, cell);
    ASSERT_EQ(v.size(), ref.size());
    std::size_t i = 0;
    for (const auto& k : ref) {
      EXPECT_EQ(v.occupied[i][0], k[0]);
      EXPECT_EQ(v.occupied[i][1], k[1]);
      EXPECT_EQ(v.occupied[i][2], k[2]);
      ++i;
    }
  }
}

TEST(Voxelize, DuplicatesChangeNothing) {
  gen::Rng rng(2);
  auto pts = gen::cloud(rng, 300, -20, 20);
  const VoxelSet base = voxelize(pts);
  for (int k = 0; k < 100; ++k) pts.push_back(pts[rng.integer(0, 299)]);
  EXPECT_EQ(voxelize(pts).occupied, base.occupied);
}

TEST(Voxelize, NonPositiveCellRejected) {
  const std::vector<Vec3> p{Vec3::Zero()};
  EXPECT_THROW(voxelize(p, 0.0), Error);
  EXPECT_THROW(voxelize(p, -1.0), Error);
}

TEST(Overlap, Cases) {
  gen::Rng rng(3);
  const auto a = gen::cloud(rng, 500, 0, 10);
  const VoxelSet va = voxelize(a, 1.0);
  EXPECT_EQ(overlap_score(va, va), va.size());
  EXPECT_EQ(overlap_score(va, voxelize(shifted(a, Vec3(100, 0, 0)), 1.0)), 0u);

  const auto x = cells({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}, {5, 0, 0}, {6, 0, 0},
                        {9, 9, 9}, {-3, 2, 1}});
  const auto y = cells({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}, {5, 0, 0}, {6, 0, 0},
                        {7, 7, 7}});
  EXPECT_EQ(overlap_score(voxelize(x, 1.0), voxelize(y, 1.0)), 7u);
  EXPECT_NEAR(overlap_iou(voxelize(x, 1.0), voxelize(y, 1.0)), 7.0 / 10.0, 1e-15);

  try {
    overlap_score(voxelize(x, 1.0), voxelize(y, 2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::configuration);
  }
}

TEST(Overlap, SymmetricAndBounded) {
  gen::Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const VoxelSet a = voxelize(gen::cloud(rng, rng.integer(1, 400), 0, 12), 1.0);
    const VoxelSet b = voxelize(gen::cloud(rng, rng.integer(1, 400), rng.uniform(0, 8), 15), 1.0);
    const std::size_t ab = overlap_score(a, b);
    EXPECT_EQ(ab, overlap_score(b, a));
    EXPECT_LE(ab, std::min(a.size(), b.size()));
  }
}

TEST(Overlap, SharedFineCellsHaveSharedParents) {
  gen::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = gen::cloud(rng, 300, -10, 10);
    const auto b = gen::cloud(rng, 300, -5, 15);
    for (double cell : {4.0, 2.0, 1.0, 0.5}) {
      const auto fine = oracle::voxel_set(a, cell), fine_b = oracle::voxel_set(b, cell);
      const auto coarse_a = oracle::voxel_set(a, 2 * cell), coarse_b = oracle::voxel_set(b, 2 * cell);
      const std::size_t o_fine = overlap_score(voxelize(a, cell), voxelize(b, cell));
      const std::size_t o_coarse = overlap_score(voxelize(a, 2 * cell), voxelize(b, 2 * cell));
      EXPECT_LE(o_fine, 8 * o_coarse);
      for (const auto& k : fine) {
        if (!fine_b.count(k)) continue;
        const std::array<long long, 3> parent{k[0] >> 1, k[1] >> 1, k[2] >> 1};
        EXPECT_TRUE(coarse_a.count(parent) && coarse_b.count(parent));
      }
    }
  }
}

TEST(SelectTuples, IdenticalClouds) {
  gen::Rng rng(6);
  const auto c = gen::cloud(rng, 200, 0, 10);
  const PairingViews v{{c, c}, {c, c}, {c, c}};
  const auto t = select_tuples(v, 5, 2.0);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].score, 15.0 * voxelize(c, 2.0).size());
  EXPECT_EQ(t[0].key(), (std::array<int, 6>{0, 1, 0, 1, 0, 1}));
}

TEST(SelectTuples, DistantViewRejected) {
  gen::Rng rng(7);
  auto c = [&] { return gen::cloud(rng, 300, 0, 10); };
  PairingViews v{{c(), c(), c()}, {c(), c(), c()}, {c(), c(), c()}};
  v.ground[1] = shifted(v.ground[1], Vec3(10000, 0, 0));
  const auto t = select_tuples(v, 100, 2.0);
  EXPECT_EQ(t.size(), 9u);  // only ground pair (0, 2) survives, 3 x 3 x 1
  for (const auto& x : t) {
    EXPECT_NE(x.ground[0], 1);
    EXPECT_NE(x.ground[1], 1);
  }
}

TEST(SelectTuples, MatchesExhaustiveOracle) {
  gen::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    // Partially overlapping boxes slid along x.
    PairingViews v;
    for (auto* list : {&v.satellite, &v.uav, &v.ground}) {
      for (int i = 0; i < 3; ++i) {
        list->push_back(shifted(gen::cloud(rng, 150, 0, 10), Vec3(rng.uniform(0, 25), 0, 0)));
      }
    }
    const auto ref = oracle::exhaustive_tuples(v, 2.0);
    const auto got = select_tuples(v, 5, 2.0);
    ASSERT_EQ(got.size(), std::min<std::size_t>(5, ref.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].key(), ref[i].key);
      EXPECT_EQ(got[i].score, static_cast<double>(ref[i].score));
      EXPECT_GT(got[i].min_overlap, 0.0);
    }
  }
}

TEST(SelectTuples, OutputsNeverContainEmptyPairs) {
  gen::Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    PairingViews v;
    for (auto* list : {&v.satellite, &v.uav, &v.ground}) {
      for (int i = 0; i < 3; ++i) {
        list->push_back(shifted(gen::cloud(rng, 80, 0, 6), Vec3(rng.uniform(0, 20), 0, 0)));
      }
    }
    for (const auto& t : select_tuples(v, 100, 1.0)) {
      const std::vector<const std::vector<Vec3>*> six{
          &v.satellite[t.satellite[0]], &v.satellite[t.satellite[1]], &v.uav[t.uav[0]],
          &v.uav[t.uav[1]],             &v.ground[t.ground[0]],       &v.ground[t.ground[1]]};
      for (int a = 0; a < 6; ++a) {
        for (int b = a + 1; b < 6; ++b) {
          EXPECT_GT(overlap_score(voxelize(*six[a], 1.0), voxelize(*six[b], 1.0)), 0u);
        }
      }
    }
  }
}

TEST(SelectTuples, NoValidTupleIsEmpty) {
  const auto a = cells({{0, 0, 0}});
  const auto far = shifted(a, Vec3(1000, 0, 0));
  const PairingViews v{{a, far}, {a, a}, {a, a}};
  EXPECT_TRUE(select_tuples(v, 3, 1.0).empty());
}

TEST(SelectTuples, TooFewViewsIsStructural) {
  const auto a = cells({{0, 0, 0}});
  const PairingViews v{{a}, {a, a}, {a, a}};
  try {
    select_tuples(v, 3, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::structural);
  }
}

TEST(SelectTuples, IouScoring) {
  gen::Rng rng(10);
  const auto c = gen::cloud(rng, 100, 0, 10);
  const PairingViews v{{c, c}, {c, c}, {c, c}};
  const auto t = select_tuples(v, 1, 2.0, PairScore::iou);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].score, 15.0);
  EXPECT_EQ(t[0].min_overlap, 1.0);
}
