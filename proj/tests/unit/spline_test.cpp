#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgn/errors.hpp"
#include "sgn/spline.hpp"

using namespace sgn;

TEST(Knots, UniformExtendedGrid) {
  const Vec k = uniform_knots(4, 3);
  ASSERT_EQ(k.size(), 4u + 2 * 3 + 1);
  EXPECT_DOUBLE_EQ(k[3], -1.0);
  EXPECT_DOUBLE_EQ(k[7], 1.0);
  EXPECT_DOUBLE_EQ(k[0], -2.5);
  EXPECT_THROW(uniform_knots(0, 3), ParameterError);
}

TEST(BSpline, MatchesRecursiveDefinition) {
  for (std::size_t order : {1u, 2u, 3u}) {
    const Vec knots = uniform_knots(5, order);
    for (double t = -0.99; t < 1.0; t += 0.07) {
      const Vec b = bspline_basis(t, knots, order);
      ASSERT_EQ(b.size(), 5 + order);
      for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_NEAR(b[i], oracle::bspline(static_cast<int>(i), static_cast<int>(order), t, knots), 1e-13);
      }
    }
  }
}

TEST(BSpline, PartitionOfUnityAndNonNegative) {
  const Vec knots = uniform_knots(7, 3);
  for (double t = -1.0; t <= 1.0; t += 0.013) {
    const Vec b = bspline_basis(t, knots, 3);
    double s = 0.0;
    for (double v : b) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12) << t;
  }
}

TEST(BSpline, DerivativeMatchesFiniteDifference) {
  const Vec knots = uniform_knots(6, 3);
  for (double t = -0.9; t < 0.9; t += 0.11) {
    const Vec d = bspline_basis_derivative(t, knots, 3);
    const Vec a = bspline_basis(t + 1e-6, knots, 3), b = bspline_basis(t - 1e-6, knots, 3);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d[i], (a[i] - b[i]) / 2e-6, 1e-6);
  }
}

TEST(SplineLayer, ForwardMatchesEdgeSum) {
  Rng rng(1);
  const SplineLayerParams p = spline_layer_init(2, 3, 5, 3, rng);
  const Vec x{0.3, -0.6};
  const Vec y = spline_layer_forward(x, p);
  for (std::size_t i = 0; i < 3; ++i) {
    double want = p.bias[i];
    for (std::size_t j = 0; j < 2; ++j) {
      double spline = 0.0;
      for (std::size_t c = 0; c < p.basis_count(); ++c) {
        spline += p.coeffs(i * 2 + j, c) * oracle::bspline(static_cast<int>(c), 3, x[j], p.knots);
      }
      const double silu = x[j] / (1.0 + std::exp(-x[j]));
      want += p.base_w(i, j) * silu + p.spline_scale(i, j) * spline + p.shift(i, j);
    }
    EXPECT_NEAR(y[i], want, 1e-13);
  }
}

TEST(SplineLayer, BackwardMatchesFiniteDifference) {
  Rng rng(2);
  SplineLayerParams p = spline_layer_init(2, 2, 4, 3, rng);
  const Vec x{0.35, -0.2};
  const Vec up{1.0, -0.7};
  SplineCache cache;
  spline_layer_forward(x, p, &cache);
  SplineLayerGrads g = spline_layer_backward(up, cache, p);
  auto loss = [&](const SplineLayerParams& q, const Vec& xi) {
    const Vec y = spline_layer_forward(xi, q);
    return up[0] * y[0] + up[1] * y[1];
  };
  auto pb = param_blocks(p);
  auto gb = param_blocks(g);
  const double h = 1e-6;
  for (std::size_t b = 0; b < pb.size(); ++b) {
    for (std::size_t i = 0; i < pb[b].values.size(); ++i) {
      const double keep = pb[b].values[i];
      pb[b].values[i] = keep + h;
      const double lp = loss(p, x);
      pb[b].values[i] = keep - h;
      const double lm = loss(p, x);
      pb[b].values[i] = keep;
      EXPECT_NEAR(gb[b].values[i], (lp - lm) / (2 * h), 1e-7) << pb[b].name << i;
    }
  }
  for (std::size_t j = 0; j < 2; ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    EXPECT_NEAR(g.x[j], (loss(p, a) - loss(p, b)) / (2 * h), 1e-7);
  }
}

TEST(SplineLayer, ParameterCountEnumerated) {
  Rng rng(3);
  for (std::size_t g : {2u, 5u, 11u}) {
    SplineLayerParams p = spline_layer_init(3, 4, g, 3, rng);
    std::size_t n = 0;
    for (const auto& b : param_blocks(p)) n += b.values.size();
    EXPECT_EQ(n, 3u * 4u * (g + 3 + 3) + 4u);
  }
}

TEST(SplineLayer, ShapeErrors) {
  Rng rng(4);
  const SplineLayerParams p = spline_layer_init(2, 2, 3, 3, rng);
  EXPECT_THROW(spline_layer_forward(Vec{1.0}, p), ShapeError);
  EXPECT_THROW(spline_layer_init(0, 2, 3, 3, rng), ParameterError);
}
