#include "geofuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

namespace geofuse {

void ConstraintThresholds::validate() const {
  const double values[] = {completeness,   consistency, noise,
                           pso_eta,        grad_rho,    accuracy_min,
                           test_error_max, regularization};
  for (double v : values)
    if (!(v >= 0.0)) throw ValidationError("thresholds must be non-negative");
}

std::string AlignmentReport::describe() const {
  return fmt::format(
      "georef_match={} max_x_residual={} max_y_residual={} tolerance={}",
      georef_match, max_x_residual, max_y_residual, tolerance);
}

std::array<double, 25> gaussian_kernel_5x5() {
  std::array<double, 25> k{};
  double sum = 0.0;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) {
      const double v = std::exp(-0.5 * (dx * dx + dy * dy));
      k[static_cast<std::size_t>((dy + 2) * 5 + dx + 2)] = v;
      sum += v;
    }
  for (double& v : k) v /= sum;
  return k;
}

namespace {

void gaussian_plane(std::span<const float> in, std::span<float> out,
                    std::size_t width, std::size_t height) {
  static const std::array<double, 25> kernel = gaussian_kernel_5x5();
  const auto W = static_cast<std::ptrdiff_t>(width);
  const auto H = static_cast<std::ptrdiff_t>(height);
  for (std::ptrdiff_t r = 0; r < H; ++r)
    for (std::ptrdiff_t c = 0; c < W; ++c) {
      double acc = 0.0, wsum = 0.0;
      for (std::ptrdiff_t dy = -2; dy <= 2; ++dy) {
        const std::ptrdiff_t rr = r + dy;
        if (rr < 0 || rr >= H) continue;
        for (std::ptrdiff_t dx = -2; dx <= 2; ++dx) {
          const std::ptrdiff_t cc = c + dx;
          if (cc < 0 || cc >= W) continue;
          const double wv = kernel[static_cast<std::size_t>((dy + 2) * 5 + dx + 2)];
          acc += wv * in[static_cast<std::size_t>(rr * W + cc)];
          wsum += wv;
        }
      }
      out[static_cast<std::size_t>(r * W + c)] = static_cast<float>(acc / wsum);
    }
}

void median_plane(std::span<const float> in, std::span<float> out,
                  std::size_t width, std::size_t height) {
  const auto W = static_cast<std::ptrdiff_t>(width);
  const auto H = static_cast<std::ptrdiff_t>(height);
  std::array<float, 9> window{};
  for (std::ptrdiff_t r = 0; r < H; ++r)
    for (std::ptrdiff_t c = 0; c < W; ++c) {
      std::size_t n = 0;
      for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
          const std::ptrdiff_t rr = std::clamp<std::ptrdiff_t>(r + dy, 0, H - 1);
          const std::ptrdiff_t cc = std::clamp<std::ptrdiff_t>(c + dx, 0, W - 1);
          window[n++] = in[static_cast<std::size_t>(rr * W + cc)];
        }
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      out[static_cast<std::size_t>(r * W + c)] = window[4];
    }
}

bool same_georef(const Raster& a, const Raster& b) {
  return a.width() == b.width() && a.height() == b.height() &&
         a.georef() == b.georef();
}

std::vector<double> channel_mean(const Raster& r) {
  std::vector<double> mean(r.plane_size(), 0.0);
  for (std::size_t c = 0; c < r.channels(); ++c) {
    const auto plane = r.plane(c);
    for (std::size_t q = 0; q < mean.size(); ++q) mean[q] += plane[q];
  }
  for (double& v : mean) v /= static_cast<double>(r.channels());
  return mean;
}

void require_same_shape(const Raster& a, const Raster& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height() ||
      a.channels() != b.channels())
    throw ValidationError(fmt::format("{}: shape {}x{}x{} vs {}x{}x{}", what,
                                      a.channels(), a.height(), a.width(),
                                      b.channels(), b.height(), b.width()));
}

}  // namespace

Raster denoise(const Raster& raster) {
  Raster out = raster;
  for (std::size_t c = 0; c < raster.channels(); ++c) {
    switch (raster.modality()) {
      case Modality::lidar:
      case Modality::optical:
        gaussian_plane(raster.plane(c), out.plane(c), raster.width(),
                       raster.height());
        break;
      case Modality::sar:
        median_plane(raster.plane(c), out.plane(c), raster.width(),
                     raster.height());
        break;
      case Modality::fused:
        throw ValidationError("denoise must run on single-sensor rasters "
                              "before fusion");
    }
  }
  return out;
}

AlignmentReport check_alignment(const Raster& lidar, const Raster& sar,
                                const Raster& optical, double tolerance) {
  AlignmentReport report;
  report.tolerance = tolerance;
  report.georef_match = same_georef(lidar, sar) && same_georef(sar, optical);
  if (!report.georef_match) {
    report.max_x_residual = std::numeric_limits<double>::infinity();
    report.max_y_residual = std::numeric_limits<double>::infinity();
    return report;
  }
  const std::size_t W = sar.width(), H = sar.height();
  const auto ml = channel_mean(lidar);
  const auto ms = channel_mean(sar);
  const auto mo = channel_mean(optical);
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c + 1 < W; ++c) {
      const std::size_t q = r * W + c;
      const double d = (ml[q + 1] - ms[q + 1]) - (ml[q] - ms[q]);
      report.max_x_residual = std::max(report.max_x_residual, std::abs(d));
    }
  for (std::size_t r = 0; r + 1 < H; ++r)
    for (std::size_t c = 0; c < W; ++c) {
      const std::size_t q = r * W + c;
      const double d = (mo[q + W] - ms[q + W]) - (mo[q] - ms[q]);
      report.max_y_residual = std::max(report.max_y_residual, std::abs(d));
    }
  return report;
}

Raster fuse_rasters(std::span<const Raster> sources) {
  if (sources.empty()) throw ValidationError("nothing to fuse");
  std::size_t channels = 0;
  for (const Raster& r : sources) {
    if (!same_georef(r, sources.front())) {
      AlignmentReport report;
      report.max_x_residual = std::numeric_limits<double>::infinity();
      report.max_y_residual = std::numeric_limits<double>::infinity();
      throw AlignmentError(report);
    }
    channels += r.channels();
  }
  std::vector<float> samples;
  samples.reserve(channels * sources.front().plane_size());
  for (const Raster& r : sources)
    samples.insert(samples.end(), r.samples().begin(), r.samples().end());
  const Raster& first = sources.front();
  return Raster(first.width(), first.height(), channels, Modality::fused,
                first.georef(), std::move(samples));
}

Raster fuse(const Raster& lidar, const Raster& sar, const Raster& optical) {
  const AlignmentReport report = check_alignment(lidar, sar, optical, 0.0);
  if (!report.georef_match) throw AlignmentError(report);
  const Raster sources[] = {lidar, sar, optical};
  return fuse_rasters(sources);
}

double noise_norm(const Raster& raw, const Raster& cleaned) {
  require_same_shape(raw, cleaned, "noise_norm");
  const auto a = raw.samples();
  const auto b = cleaned.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

AuditResult feature_completeness(const Raster& feature_map,
                                  const ConstraintThresholds& thresholds) {
  if (feature_map.channels() != 1)
    throw ValidationError("feature_completeness expects a single channel");
  double sum = 0.0;
  for (float v : feature_map.samples()) sum += v;
  const double cell = feature_map.georef().pixel_size *
                      feature_map.georef().pixel_size;
  AuditResult result;
  result.value = sum * cell;
  result.pass = result.value >= thresholds.completeness;
  return result;
}

AuditResult feature_variance(std::span<const Raster> feature_maps,
                             const ConstraintThresholds& thresholds) {
  if (feature_maps.size() < 2)
    throw ValidationError("feature_variance needs at least two maps");
  for (const Raster& m : feature_maps)
    require_same_shape(m, feature_maps.front(), "feature_variance");
  const std::size_t count = feature_maps.front().samples().size();
  const double n = static_cast<double>(feature_maps.size());
  AuditResult result;
  for (std::size_t q = 0; q < count; ++q) {
    double mean = 0.0;
    for (const Raster& m : feature_maps) mean += m.samples()[q];
    mean /= n;
    double var = 0.0;
    for (const Raster& m : feature_maps) {
      const double d = m.samples()[q] - mean;
      var += d * d;
    }
    result.value = std::max(result.value, var / n);
  }
  result.pass = result.value <= thresholds.consistency;
  return result;
}

}  // namespace geofuse
