#pragma once

// Multi-sensor raster preprocessing: denoising, georeference checks,
// channel-stack fusion and the dataset-quality audits (completeness,
// consistency, residual noise).

#include <array>
#include <span>
#include <string>

#include "geofuse/error.hpp"
#include "geofuse/raster.hpp"

namespace geofuse {

/// Bounds for the constraint audits. All values must be non-negative.
struct ConstraintThresholds {
  double completeness = 0.0;        // T: minimum feature integral
  double consistency = 0.01;        // epsilon: max per-pixel variance
  double noise = 0.1;               // delta: noise norm is compared to delta^2
  double pso_eta = 1.0;             // eta: swarm velocity/position diagnostic
  double grad_rho = 1.0;            // rho: gradient norm is compared to rho^2
  double accuracy_min = 0.85;       // A_min
  double test_error_max = 0.5;      // E_max for mean test cross-entropy
  double regularization = 1.0e6;    // lambda: ||theta||_2^2 + ||theta||_1

  void validate() const;
};

struct AlignmentReport {
  bool georef_match = false;
  double max_x_residual = 0.0;
  double max_y_residual = 0.0;
  double tolerance = 0.0;

  bool residuals_within_tolerance() const {
    return max_x_residual <= tolerance && max_y_residual <= tolerance;
  }
  bool passed() const { return georef_match && residuals_within_tolerance(); }
  std::string describe() const;
};

class AlignmentError : public ValidationError {
 public:
  explicit AlignmentError(const AlignmentReport& report)
      : ValidationError("rasters are not co-registered: " + report.describe()),
        report_(report) {}
  const AlignmentReport& report() const noexcept { return report_; }

 private:
  AlignmentReport report_;
};

/// 5x5 Gaussian weights for sigma = 1, normalized to sum 1, row-major.
std::array<double, 25> gaussian_kernel_5x5();

/// Lidar/optical: per-channel 5x5 Gaussian blur (sigma 1) with the kernel
/// renormalized over in-bounds taps. SAR: per-channel 3x3 median with edge
/// replication. Fused rasters are rejected.
Raster denoise(const Raster& raster);

/// Georeference equality across the three rasters plus advisory
/// forward-difference residuals of the channel-mean differences
/// lidar - sar (along x) and optical - sar (along y).
AlignmentReport check_alignment(const Raster& lidar, const Raster& sar,
                                const Raster& optical, double tolerance);

/// Channel stack [lidar | sar | optical]. Throws AlignmentError when the
/// georeferences differ.
Raster fuse(const Raster& lidar, const Raster& sar, const Raster& optical);

/// Channel stack of any number of co-registered rasters, in order.
Raster fuse_rasters(std::span<const Raster> sources);

/// ||raw - cleaned||_F^2 / sample count.
double noise_norm(const Raster& raw, const Raster& cleaned);

struct AuditResult {
  double value = 0.0;
  bool pass = false;
};

/// Riemann sum of a single-channel map with cell area pixel_size^2;
/// passes when the sum is >= thresholds.completeness.
AuditResult feature_completeness(const Raster& feature_map,
                                  const ConstraintThresholds& thresholds);

/// Maximum over pixels of the population variance across maps; passes when
/// it is <= thresholds.consistency. Needs at least two maps of one shape.
AuditResult feature_variance(std::span<const Raster> feature_maps,
                             const ConstraintThresholds& thresholds);

}  // namespace geofuse
