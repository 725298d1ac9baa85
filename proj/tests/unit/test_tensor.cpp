#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cscore/errors.hpp"
#include "cscore/tensor.hpp"
#include "test_support.hpp"

namespace cscore {
namespace {

using testing::oracle_bilinear_pixel;
using testing::random_map;

TEST(Tensor2D, RejectsWrongLength) {
  EXPECT_THROW(Tensor2D(2, 2, {1, 2, 3}), ValidationError);
}

TEST(Tensor2D, RejectsNonFinite) {
  EXPECT_THROW(Tensor2D(1, 2, {1.0f, std::numeric_limits<float>::quiet_NaN()}), ValidationError);
  EXPECT_THROW(Tensor2D(1, 2, {std::numeric_limits<float>::infinity(), 0.0f}), ValidationError);
}

TEST(Tensor3D, ChannelLastLayout) {
  Tensor3D t(1, 2, 3, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(t(0, 1, 2), 5.0f);
  const Tensor2D c1 = t.channel(1);
  EXPECT_EQ(c1, Tensor2D(1, 2, {1, 4}));
  EXPECT_THROW(Tensor3D(1, 2, 3, {0, 1}), ValidationError);
}

TEST(MinmaxNormalize, AffineMap) {
  const Heatmap h = minmax_normalize(Tensor2D(2, 2, {0, 2, 4, 2}));
  EXPECT_FALSE(h.degenerate);
  EXPECT_EQ(h.map, Tensor2D(2, 2, {0, 0.5f, 1, 0.5f}));
}

TEST(MinmaxNormalize, ConstantIsDegenerateZero) {
  const Heatmap h = minmax_normalize(Tensor2D::filled(2, 2, 3.0f));
  EXPECT_TRUE(h.degenerate);
  EXPECT_EQ(h.map, Tensor2D(2, 2));
}

TEST(MinmaxNormalize, UnitRangeUnchanged) {
  const Tensor2D t(2, 3, {0, 0.25f, 1, 0.5f, 0.75f, 0.125f});
  EXPECT_EQ(minmax_normalize(t).map, t);
}

TEST(MinmaxNormalize, IdempotentOnRandomMaps) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto once = minmax_normalize(random_map(rng, 1 + rng() % 12, 1 + rng() % 12, -5, 9));
    if (once.degenerate) continue;
    EXPECT_EQ(minmax_normalize(once.map).map, once.map);
  }
}

TEST(PowerEmphasis, Examples) {
  const Heatmap h{Tensor2D(2, 2, {0.5f, 0.5f, 0, 0}), false};
  EXPECT_EQ(power_emphasis(h, 1.0).map, h.map);
  EXPECT_EQ(power_emphasis(h, 2.0).map, Tensor2D(2, 2, {0.25f, 0.25f, 0, 0}));
}

TEST(PowerEmphasis, RejectsBadAlpha) {
  const Heatmap h{Tensor2D::filled(1, 1, 0.5f), false};
  EXPECT_THROW(power_emphasis(h, 0.0), ParameterError);
  EXPECT_THROW(power_emphasis(h, -1.0), ParameterError);
  EXPECT_THROW(power_emphasis(h, std::nan("")), ParameterError);
}

TEST(PowerEmphasis, PreservesRanking) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> alpha_dist(0.1, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Heatmap h = minmax_normalize(random_map(rng, 6, 7));
    const double alpha = alpha_dist(rng);
    const Heatmap e = power_emphasis(h, alpha);
    const auto v = h.map.values();
    const auto ev = e.map.values();
    EXPECT_EQ(std::max_element(v.begin(), v.end()) - v.begin(),
              std::max_element(ev.begin(), ev.end()) - ev.begin());
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[i] < v[j]) EXPECT_LE(ev[i], ev[j]);
      }
    }
  }
}

TEST(BilinearResize, SameShapeIsIdentity) {
  std::mt19937_64 rng(13);
  const Tensor2D t = random_map(rng, 5, 9);
  EXPECT_EQ(bilinear_resize(t, 5, 9), t);
}

TEST(BilinearResize, ConstantStaysConstant) {
  const Tensor2D t = Tensor2D::filled(3, 4, 0.37f);
  EXPECT_EQ(bilinear_resize(t, 11, 2), Tensor2D::filled(11, 2, 0.37f));
  EXPECT_EQ(bilinear_resize(t, 1, 1), Tensor2D::filled(1, 1, 0.37f));
}

TEST(BilinearResize, HalfPixelCentres) {
  const Tensor2D r = bilinear_resize(Tensor2D(2, 2, {0, 1, 0, 1}), 2, 4);
  EXPECT_EQ(r, Tensor2D(2, 4, {0, 0.25f, 0.75f, 1, 0, 0.25f, 0.75f, 1}));
}

TEST(BilinearResize, RejectsZeroOutput) {
  EXPECT_THROW(bilinear_resize(Tensor2D::filled(2, 2, 1.0f), 0, 3), ParameterError);
}

TEST(BilinearResize, MatchesScalarOracle) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 1 + rng() % 16;
    const std::size_t w = 1 + rng() % 16;
    const std::size_t oh = 1 + rng() % 37;
    const std::size_t ow = 1 + rng() % 37;
    const Tensor2D t = random_map(rng, h, w, -3.0f, 3.0f);
    const Tensor2D r = bilinear_resize(t, oh, ow);
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        ASSERT_NEAR(r(y, x), oracle_bilinear_pixel(t, y, x, oh, ow), 1e-6)
            << h << "x" << w << " -> " << oh << "x" << ow << " at " << y << "," << x;
      }
    }
  }
}

TEST(BilinearResize, SixteenToThirtySevenByTwentyThree) {
  std::mt19937_64 rng(15);
  const Tensor2D t = random_map(rng, 16, 16);
  const Tensor2D r = bilinear_resize(t, 37, 23);
  for (std::size_t y = 0; y < 37; ++y) {
    for (std::size_t x = 0; x < 23; ++x) {
      EXPECT_NEAR(r(y, x), oracle_bilinear_pixel(t, y, x, 37, 23), 1e-6);
    }
  }
}

TEST(Relu, Examples) {
  Tensor2D a(1, 2, {-1, 2});
  relu_inplace(a);
  EXPECT_EQ(a, Tensor2D(1, 2, {0, 2}));

  Tensor2D neg(2, 2, {-1, -2, -0.5f, -3});
  relu_inplace(neg);
  EXPECT_EQ(neg, Tensor2D(2, 2));

  const Tensor2D pos(1, 3, {0, 1, 2});
  Tensor2D copy = pos;
  relu_inplace(copy);
  EXPECT_EQ(copy, pos);

  Tensor3D t(1, 1, 2, {-1, 1});
  relu_inplace(t);
  EXPECT_EQ(t, Tensor3D(1, 1, 2, {0, 1}));
}

TEST(Relu, Idempotent) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor2D t = random_map(rng, 5, 5, -1, 1);
    relu_inplace(t);
    Tensor2D twice = t;
    relu_inplace(twice);
    EXPECT_EQ(t, twice);
  }
}

TEST(TreeSum, MatchesLongDoubleSum) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0, 1);
  for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 100u, 4097u}) {
    std::vector<double> v(n);
    long double ref = 0;
    for (double& x : v) {
      x = d(rng);
      ref += x;
    }
    EXPECT_NEAR(tree_sum(v), static_cast<double>(ref), 1e-12 * (1 + n));
  }
}

}  // namespace
}  // namespace cscore
