#include "xview/depthfusion.hpp"
#include "xview/error.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace xview;

namespace {

DepthGrid grid_from(int h, int w, const std::function<double(int, int)>& f) {
  DepthGrid g(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      g.values(r, c) = f(r, c);
      g.valid(r, c) = 1;
    }
  }
  return g;
}

DepthGrid affine(const DepthGrid& g, double s, double t) {
  DepthGrid out = g;
  for (double& v : out.values.data) v = s * v + t;
  return out;
}

DepthGrid random_grid(gen::Rng& rng, int h, int w) {
  return grid_from(h, w, [&](int, int) { return rng.uniform(1, 50); });
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::io;
}

}  // namespace

TEST(FitScaleShift, ExactAffine) {
  gen::Rng rng(1);
  const DepthGrid rel = random_grid(rng, 8, 9);
  const ScaleShift f = fit_scale_shift(rel, affine(rel, 2.0, 3.0));
  EXPECT_NEAR(f.scale, 2.0, 1e-9);
  EXPECT_NEAR(f.shift, 3.0, 1e-9);
  const ScaleShift id = fit_scale_shift(rel, rel);
  EXPECT_NEAR(id.scale, 1.0, 1e-12);
  EXPECT_NEAR(id.shift, 0.0, 1e-10);
}

TEST(FitScaleShift, MatchesNormalEquationOracle) {
  gen::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const DepthGrid rel = random_grid(rng, 10, 10);
    DepthGrid anchor = affine(rel, rng.uniform(0.2, 5), rng.uniform(-10, 10));
    for (double& v : anchor.values.data) v += rng.normal(2.0);
    // Drop a few anchor pixels; they must not enter the fit.
    std::vector<double> x, y;
    for (std::size_t i = 0; i < rel.size(); ++i) {
      if (rng.uniform(0, 1) < 0.2) {
        anchor.valid.data[i] = 0;
        anchor.values.data[i] = 1e6;
        continue;
      }
      x.push_back(rel.values.data[i]);
      y.push_back(anchor.values.data[i]);
    }
    const auto [s, t] = oracle::normal_equation_fit(x, y);
    const ScaleShift f = fit_scale_shift(rel, anchor);
    EXPECT_NEAR(f.scale, s, 1e-9);
    EXPECT_NEAR(f.shift, t, 1e-9);
  }
}

TEST(FitScaleShift, ResidualOrthogonality) {
  gen::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const DepthGrid rel = random_grid(rng, 7, 11);
    DepthGrid anchor = random_grid(rng, 7, 11);
    const ScaleShift f = fit_scale_shift(rel, anchor);
    double sum = 0, sum_rel = 0, scale_r = 0, scale_rr = 0;
    for (std::size_t i = 0; i < rel.size(); ++i) {
      const double r = f.scale * rel.values.data[i] + f.shift - anchor.values.data[i];
      sum += r;
      sum_rel += r * rel.values.data[i];
      scale_r += std::abs(anchor.values.data[i]);
      scale_rr += std::abs(anchor.values.data[i] * rel.values.data[i]);
    }
    EXPECT_LE(std::abs(sum), 1e-7 * scale_r);
    EXPECT_LE(std::abs(sum_rel), 1e-7 * scale_rr);
  }
}

TEST(FitScaleShift, Degenerate) {
  const DepthGrid flat = grid_from(4, 4, [](int, int) { return 7.0; });
  gen::Rng rng(4);
  EXPECT_EQ(kind_of([&] { fit_scale_shift(flat, random_grid(rng, 4, 4)); }), ErrorKind::degenerate);
  DepthGrid one = random_grid(rng, 4, 4);
  for (auto& v : one.valid.data) v = 0;
  one.valid.data[3] = 1;
  EXPECT_EQ(kind_of([&] { fit_scale_shift(one, random_grid(rng, 4, 4)); }), ErrorKind::degenerate);
  EXPECT_EQ(kind_of([&] { fit_scale_shift(random_grid(rng, 4, 4), random_grid(rng, 4, 5)); }),
            ErrorKind::structural);
}

TEST(Pearson, Cases) {
  gen::Rng rng(5);
  std::vector<double> a(40), b(40), c(40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.normal();
    b[i] = 5.0 * a[i] + 1.0;
    c[i] = -a[i];
  }
  EXPECT_NEAR(pearson(a, b), 1.0, 1e-12);
  EXPECT_NEAR(pearson(a, c), -1.0, 1e-12);
  const std::vector<double> x{1, 2, 3, 4}, y{1, 2, 3, 100};
  EXPECT_NEAR(pearson(x, y), oracle::pearson_textbook(x, y), 1e-12);
  // Means 2.5 and 26.5; covariance and variances by hand.
  const double cov = (-1.5 * -25.5) + (-0.5 * -24.5) + (0.5 * -23.5) + (1.5 * 73.5);
  const double va = 2 * (1.5 * 1.5 + 0.5 * 0.5);
  const double vb = 25.5 * 25.5 + 24.5 * 24.5 + 23.5 * 23.5 + 73.5 * 73.5;
  EXPECT_NEAR(pearson(x, y), cov / std::sqrt(va * vb), 1e-12);
}

TEST(Pearson, MaskAndErrors) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, -100};
  const std::vector<std::uint8_t> m{1, 1, 1, 1, 0};
  EXPECT_NEAR(pearson(a, b, m), 1.0, 1e-12);
  const std::vector<double> flat{3, 3, 3, 3, 3};
  EXPECT_EQ(kind_of([&] { pearson(a, flat); }), ErrorKind::degenerate);
  const std::vector<std::uint8_t> single{1, 0, 0, 0, 0};
  EXPECT_EQ(kind_of([&] { pearson(a, b, single); }), ErrorKind::degenerate);
  EXPECT_EQ(kind_of([&] { pearson(a, std::vector<double>{1, 2}); }), ErrorKind::structural);
}

TEST(Pearson, AffineInvariance) {
  gen::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(30), b(30);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform(0, 10);
      b[i] = a[i] + rng.normal(3.0);
    }
    const double r = pearson(a, b);
    EXPECT_NEAR(pearson(a, b), oracle::pearson_textbook(a, b), 1e-12);
    const double s = rng.uniform(0.1, 10), t = rng.uniform(-20, 20);
    std::vector<double> a2 = a, b2 = b, bn = b;
    for (double& v : a2) v = s * v + t;
    for (double& v : b2) v = s * v - t;
    for (double& v : bn) v = -s * v + t;
    EXPECT_LT(std::abs(pearson(a2, b) - r), 1e-12);
    EXPECT_LT(std::abs(pearson(a, b2) - r), 1e-12);
    EXPECT_LT(std::abs(pearson(a, bn) + r), 1e-12);
  }
}

TEST(Fuse, AffineAnchorAccepted) {
  gen::Rng rng(7);
  const DepthGrid rel = random_grid(rng, 12, 16);
  DepthGrid anchor = affine(rel, 3.5, -2.0);
  for (std::size_t i = 0; i < anchor.size(); i += 3) anchor.valid.data[i] = 0;
  const FusionResult r = fuse_and_filter(rel, anchor);
  EXPECT_TRUE(r.accepted);
  EXPECT_NEAR(r.pcc, 1.0, 1e-12);
  ASSERT_EQ(r.fused.height(), 12);
  EXPECT_EQ(r.fused.valid, rel.valid);
  for (std::size_t i = 0; i < rel.size(); ++i) {
    const double expect = 3.5 * rel.values.data[i] - 2.0;
    EXPECT_NEAR(r.fused.values.data[i], expect, 1e-9 * std::abs(expect));
  }
}

TEST(Fuse, MissingStructureRejected) {
  // Relative depth sees buildings; the anchor only has the far plane, plus
  // small jitter so the correlation is defined.
  gen::Rng rng(8);
  const DepthGrid rel = grid_from(20, 20, [&](int r, int c) {
    const bool building = (c / 5) % 2 == 0 && r > 5;
    return building ? 10.0 + 0.1 * r : 80.0 + rng.normal(0.5);
  });
  const DepthGrid anchor = grid_from(20, 20, [&](int, int) { return 100.0 + rng.normal(1.0); });
  const FusionResult r = fuse_and_filter(rel, anchor);
  EXPECT_FALSE(r.accepted);
  EXPECT_LT(r.pcc, 0.9);
  EXPECT_EQ(r.fused.size(), 0u);
  EXPECT_EQ(kDefaultPccMin, 0.9);
}

TEST(Fuse, AcceptanceInvariantUnderRelReparameterization) {
  gen::Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const DepthGrid rel = random_grid(rng, 10, 10);
    DepthGrid anchor = affine(rel, 2.0, 1.0);
    const double noise = rng.uniform(0, 40);
    for (double& v : anchor.values.data) v += rng.normal(noise);
    const double s = rng.uniform(0.1, 10), t = rng.uniform(0, 5);
    const FusionResult a = fuse_and_filter(rel, anchor);
    const FusionResult b = fuse_and_filter(affine(rel, s, t), anchor);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_NEAR(a.pcc, b.pcc, 1e-12);
    if (a.accepted) {
      for (std::size_t i = 0; i < rel.size(); ++i) {
        EXPECT_NEAR(a.fused.values.data[i], b.fused.values.data[i],
                    1e-9 * std::max(1.0, std::abs(a.fused.values.data[i])));
      }
    }
  }
}

TEST(Fuse, PostFusionCorrelationEqualsPreFusion) {
  gen::Rng rng(10);
  const DepthGrid rel = random_grid(rng, 9, 9);
  DepthGrid anchor = affine(rel, 0.7, 4.0);
  for (double& v : anchor.values.data) v += rng.normal(1.0);
  const FusionResult r = fuse_and_filter(rel, anchor);
  ASSERT_TRUE(r.accepted);
  EXPECT_NEAR(pearson(r.fused.values.data, anchor.values.data), r.pcc, 1e-12);
}
