#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "geofuse/error.hpp"
#include "geofuse/fusion.hpp"
#include "geofuse/rng.hpp"

using namespace geofuse;

namespace {

const Georef kGeo{100.0, 200.0, 2.0};

Raster random_raster(std::size_t w, std::size_t h, std::size_t c, Modality m,
                     Rng& rng, Georef g = kGeo) {
  std::vector<float> s(w * h * c);
  for (float& v : s) v = static_cast<float>(rng.uniform(-5.0, 5.0));
  return Raster(w, h, c, m, g, std::move(s));
}

Raster constant(std::size_t w, std::size_t h, std::size_t c, Modality m, float v) {
  return Raster(w, h, c, m, kGeo, std::vector<float>(w * h * c, v));
}

}  // namespace

TEST(Fuse, StacksInFixedOrderLosslessly) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = 1 + rng.uniform_index(12), h = 1 + rng.uniform_index(12);
    const Raster l = random_raster(w, h, 1, Modality::lidar, rng);
    const Raster s = random_raster(w, h, 1, Modality::sar, rng);
    const Raster o = random_raster(w, h, 3, Modality::optical, rng);
    const Raster f = fuse(l, s, o);
    ASSERT_EQ(f.channels(), 5u);
    EXPECT_EQ(f.modality(), Modality::fused);
    EXPECT_EQ(f.georef(), kGeo);
    EXPECT_TRUE(f.slice_channels(0, 1, Modality::lidar).bit_equal(l));
    EXPECT_TRUE(f.slice_channels(1, 1, Modality::sar).bit_equal(s));
    EXPECT_TRUE(f.slice_channels(2, 3, Modality::optical).bit_equal(o));
  }
}

TEST(Fuse, RejectsMisalignment) {
  Rng rng(2);
  const Raster l = random_raster(4, 4, 1, Modality::lidar, rng);
  const Raster s = random_raster(4, 4, 1, Modality::sar, rng);
  const Raster o = random_raster(4, 4, 3, Modality::optical, rng);
  const Raster shifted = random_raster(4, 4, 1, Modality::sar, rng,
                                       {kGeo.origin_x + kGeo.pixel_size, kGeo.origin_y,
                                        kGeo.pixel_size});
  try {
    fuse(l, shifted, o);
    FAIL() << "misaligned rasters fused";
  } catch (const AlignmentError& e) {
    EXPECT_FALSE(e.report().georef_match);
    EXPECT_NE(std::string(e.what()).find("georef"), std::string::npos) << e.what();
  }
  EXPECT_THROW(fuse(l, s, random_raster(4, 5, 3, Modality::optical, rng)),
               AlignmentError);
}

TEST(Alignment, IdenticalGeorefMatches) {
  Rng rng(3);
  const AlignmentReport r = check_alignment(
      random_raster(5, 5, 1, Modality::lidar, rng), random_raster(5, 5, 1, Modality::sar, rng),
      random_raster(5, 5, 3, Modality::optical, rng), 1e9);
  EXPECT_TRUE(r.georef_match);
  EXPECT_TRUE(r.passed());
}

TEST(Alignment, OriginShiftBreaksMatch) {
  Rng rng(4);
  const AlignmentReport r = check_alignment(
      random_raster(5, 5, 1, Modality::lidar, rng,
                    {kGeo.origin_x + kGeo.pixel_size, kGeo.origin_y, kGeo.pixel_size}),
      random_raster(5, 5, 1, Modality::sar, rng),
      random_raster(5, 5, 3, Modality::optical, rng), 1e9);
  EXPECT_FALSE(r.georef_match);
  EXPECT_FALSE(r.passed());
}

TEST(Alignment, ConstantDifferenceHasZeroResidual) {
  Rng rng(5);
  const Raster s = random_raster(6, 5, 1, Modality::sar, rng);
  Raster l(6, 5, 1, Modality::lidar, kGeo);
  Raster o(6, 5, 3, Modality::optical, kGeo);
  for (std::size_t q = 0; q < s.plane_size(); ++q) {
    l.plane(0)[q] = s.plane(0)[q] + 3.0f;
    for (std::size_t c = 0; c < 3; ++c) o.plane(c)[q] = s.plane(0)[q] - 1.0f;
  }
  const AlignmentReport r = check_alignment(l, s, o, 0.0);
  EXPECT_NEAR(r.max_x_residual, 0.0, 1e-5);
  EXPECT_NEAR(r.max_y_residual, 0.0, 1e-5);
}

TEST(Alignment, ResidualIsForwardDifferenceMaximum) {
  // lidar - sar = column index along x; optical - sar = 2 * row along y.
  Raster l(4, 3, 1, Modality::lidar, kGeo), s(4, 3, 1, Modality::sar, kGeo),
      o(4, 3, 3, Modality::optical, kGeo);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      l.at(0, i, j) = static_cast<float>(j);
      for (std::size_t c = 0; c < 3; ++c) o.at(c, i, j) = static_cast<float>(2 * i);
    }
  const AlignmentReport r = check_alignment(l, s, o, 1.5);
  EXPECT_DOUBLE_EQ(r.max_x_residual, 1.0);
  EXPECT_DOUBLE_EQ(r.max_y_residual, 2.0);
  EXPECT_TRUE(r.georef_match);
  EXPECT_FALSE(r.residuals_within_tolerance());
  EXPECT_FALSE(r.passed());
}

TEST(Denoise, ConstantsUnchanged) {
  for (Modality m : {Modality::lidar, Modality::sar, Modality::optical}) {
    const std::size_t c = m == Modality::optical ? 3 : 1;
    const Raster r = constant(7, 6, c, m, 4.25f);
    const Raster d = denoise(r);
    EXPECT_EQ(d.width(), 7u);
    EXPECT_EQ(d.height(), 6u);
    EXPECT_EQ(d.georef(), kGeo);
    for (float v : d.samples()) EXPECT_NEAR(v, 4.25f, 1e-5);
  }
}

TEST(Denoise, MedianRemovesImpulse) {
  Raster r = constant(5, 5, 1, Modality::sar, 0.0f);
  r.at(0, 2, 2) = 9.0f;
  const Raster dr = denoise(r);
  for (float v : dr.samples()) EXPECT_EQ(v, 0.0f);
  Raster corner = constant(5, 5, 1, Modality::sar, 0.0f);
  corner.at(0, 0, 0) = 9.0f;  // replicated edges give it 4 copies of 9
  const Raster dc = denoise(corner);
  for (float v : dc.samples()) EXPECT_EQ(v, 0.0f);
}

TEST(Denoise, MedianMatchesSortOracle) {
  Rng rng(6);
  const Raster r = random_raster(6, 5, 1, Modality::sar, rng);
  const Raster d = denoise(r);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      std::vector<float> win;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const auto ii = static_cast<std::size_t>(std::clamp<int>(int(i) + di, 0, 4));
          const auto jj = static_cast<std::size_t>(std::clamp<int>(int(j) + dj, 0, 5));
          win.push_back(r.at(0, ii, jj));
        }
      std::sort(win.begin(), win.end());
      EXPECT_EQ(d.at(0, i, j), win[4]);
    }
}

TEST(Denoise, GaussianMatchesRenormalizedOracle) {
  Rng rng(7);
  const Raster r = random_raster(7, 6, 2, Modality::optical, rng);
  const Raster d = denoise(r);
  for (std::size_t c = 0; c < 2; ++c)
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 7; ++j) {
        double num = 0.0, den = 0.0;
        for (int a = -2; a <= 2; ++a)
          for (int b = -2; b <= 2; ++b) {
            if (i + a < 0 || i + a >= 6 || j + b < 0 || j + b >= 7) continue;
            const double w = std::exp(-(a * a + b * b) / 2.0);
            num += w * r.at(c, std::size_t(i + a), std::size_t(j + b));
            den += w;
          }
        EXPECT_NEAR(d.at(c, std::size_t(i), std::size_t(j)), num / den, 1e-5);
      }
}

TEST(Denoise, KernelSumsToOne) {
  const auto k = gaussian_kernel_5x5();
  double s = 0.0;
  for (double v : k) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_NEAR(k[12] / k[13], std::exp(0.5), 1e-12);
}

TEST(Denoise, RejectsFused) {
  EXPECT_THROW(denoise(constant(3, 3, 5, Modality::fused, 1.0f)), ValidationError);
}

TEST(NoiseNorm, Examples) {
  const Raster raw(2, 1, 1, Modality::lidar, kGeo, {1.0f, 2.0f});
  const Raster zero(2, 1, 1, Modality::lidar, kGeo, {0.0f, 0.0f});
  EXPECT_DOUBLE_EQ(noise_norm(raw, zero), 2.5);
  EXPECT_DOUBLE_EQ(noise_norm(raw, raw), 0.0);
  EXPECT_DOUBLE_EQ(noise_norm(constant(3, 4, 2, Modality::sar, 1.5f),
                              constant(3, 4, 2, Modality::sar, 1.0f)),
                   0.25);
  EXPECT_THROW(noise_norm(raw, constant(1, 2, 1, Modality::lidar, 0.0f)),
               ValidationError);
}

TEST(NoiseNorm, ZeroIffEqualAndSymmetric) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const Raster a = random_raster(4, 3, 2, Modality::lidar, rng);
    Raster b = a;
    EXPECT_EQ(noise_norm(a, b), 0.0);
    b.samples()[rng.uniform_index(b.samples().size())] += 0.5f;
    EXPECT_GT(noise_norm(a, b), 0.0);
    EXPECT_EQ(noise_norm(a, b), noise_norm(b, a));
  }
}

TEST(Completeness, Examples) {
  ConstraintThresholds t;
  t.completeness = 50.0;
  const Raster ones(10, 10, 1, Modality::fused, {0, 0, 1.0}, std::vector<float>(100, 1.0f));
  AuditResult r = feature_completeness(ones, t);
  EXPECT_DOUBLE_EQ(r.value, 100.0);
  EXPECT_TRUE(r.pass);
  r = feature_completeness(Raster(10, 10, 1, Modality::fused), t);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_FALSE(r.pass);
  std::vector<float> half(16, 0.0f);
  for (std::size_t q = 0; q < 8; ++q) half[q] = 1.0f;
  r = feature_completeness(Raster(4, 4, 1, Modality::fused, {0, 0, 2.0}, half), t);
  EXPECT_DOUBLE_EQ(r.value, 32.0);
  EXPECT_THROW(feature_completeness(constant(2, 2, 2, Modality::fused, 1.0f), t),
               ValidationError);
}

TEST(Variance, Examples) {
  ConstraintThresholds t;
  const Raster a = constant(3, 3, 1, Modality::fused, 1.0f);
  std::vector<Raster> same(4, a);
  t.consistency = 0.0;
  AuditResult r = feature_variance(same, t);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.pass);

  Raster b = a;
  b.at(0, 1, 1) = 3.0f;
  const std::vector<Raster> pair{a, b};
  r = feature_variance(pair, t);
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_FALSE(r.pass);
  t.consistency = 1.0;
  EXPECT_TRUE(feature_variance(pair, t).pass);

  EXPECT_THROW(feature_variance(std::vector<Raster>{a}, t), ValidationError);
  EXPECT_THROW(feature_variance(std::vector<Raster>{a, constant(2, 3, 1, Modality::fused, 0)}, t),
               ValidationError);
}

TEST(Thresholds, RejectNegative) {
  ConstraintThresholds t;
  EXPECT_NO_THROW(t.validate());
  t.noise = -1.0;
  EXPECT_THROW(t.validate(), ValidationError);
}
