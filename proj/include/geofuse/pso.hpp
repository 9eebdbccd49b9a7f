#pragma once

// Particle swarm optimizer with linearly decaying inertia, box bounds, an
// optional global norm bound, and a global-best stall criterion.
//
// Particles move in internal coordinates: log10(value) for log-scale
// dimensions, the value itself otherwise. Integer dimensions are evaluated
// at the rounded value while the stored coordinate stays continuous.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geofuse/fcn.hpp"
#include "geofuse/rng.hpp"

namespace geofuse {

enum class Scale { linear, log };
enum class DimKind { continuous, integer };

struct Dimension {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  Scale scale = Scale::linear;
  DimKind kind = DimKind::continuous;

  /// Bounds in internal coordinates.
  double lower() const;
  double upper() const;
  double range() const { return upper() - lower(); }
  /// Internal coordinate -> value handed to the fitness function.
  double decode(double x) const;
};

struct SearchSpace {
  std::vector<Dimension> dims;
  /// H in sum_j x_j^2 <= H^2 (internal coordinates); unset disables it.
  /// When set, every dimension's internal interval must contain 0 so the
  /// rescaled point stays inside the box.
  std::optional<double> norm_bound;

  std::size_t size() const { return dims.size(); }
  void validate() const;
  std::vector<double> decode(std::span<const double> position) const;
};

struct SwarmConfig {
  std::size_t n_particles = 30;
  std::size_t max_iters = 200;
  double c1 = 1.5;
  double c2 = 1.5;
  double w_max = 0.9;
  double w_min = 0.4;
  double epsilon = 1e-6;
  std::size_t patience = 10;
  double v_clamp_frac = 0.2;
  std::uint64_t seed = 42;
  /// Weight of the compute-cost term added by evaluate_fcn_fitness.
  double lambda_p = 0.0;

  void validate() const;
};

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_fitness = std::numeric_limits<double>::infinity();
};

struct TraceRow {
  std::size_t iter = 0;
  double best_fitness = 0.0;
  /// max_i ||v_i - p_i||, logged only.
  double velocity_best_gap = 0.0;
  double inertia = 0.0;
};

struct SwarmState {
  std::vector<Particle> particles;
  std::vector<double> global_best;
  double global_best_fitness = std::numeric_limits<double>::infinity();
  std::size_t iteration = 0;
  std::vector<TraceRow> trace;
};

using FitnessFn = std::function<double(std::span<const double>)>;

/// Uniform positions inside the bounds and velocities inside
/// +-v_clamp_frac * range; no fitness is evaluated.
SwarmState init_swarm(const SearchSpace& space, const SwarmConfig& config);

/// w(t) = w_max - (w_max - w_min) * t / T, clamped to w_min for t > T.
double inertia(std::size_t t, const SwarmConfig& config);

/// v <- w v + c1 r1 (p - x) + c2 r2 (g - x), clamped per component to
/// +-v_clamp_frac * range.
void update_velocity(Particle& particle, std::span<const double> global_best,
                     double w, const SwarmConfig& config,
                     const SearchSpace& space, std::span<const double> r1,
                     std::span<const double> r2);
/// Same, drawing r1 and r2 per dimension from `rng`.
void update_velocity(Particle& particle, std::span<const double> global_best,
                     double w, const SwarmConfig& config,
                     const SearchSpace& space, Rng& rng);

/// x <- x + v; out-of-bounds components are clamped with their velocity
/// zeroed, then the norm bound (if any) rescales the position toward 0.
void update_position(Particle& particle, const SearchSpace& space);

struct PsoResult {
  std::vector<double> best_position;  // internal coordinates
  std::vector<double> best_values;    // decoded
  double best_fitness = std::numeric_limits<double>::infinity();
  std::vector<TraceRow> trace;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Runs the swarm. Stops when ||g(t+1) - g(t)|| < epsilon for `patience`
/// consecutive iterations or after max_iters. NaN fitness counts as +inf;
/// throws ValidationError if every evaluation was NaN.
PsoResult run_pso(const SearchSpace& space, const SwarmConfig& config,
                  const FitnessFn& fitness);

/// CSV with header `iter,best_fitness,eq10_diag,w`.
std::string format_trace_csv(std::span<const TraceRow> trace);

struct FcnTuningBudget {
  FcnConfig base;      // values not named by the search space
  std::size_t epochs = 3;
  std::uint64_t seed = 7;
  double lambda_p = 0.0;
};

/// Copies `values` (decoded, one per dimension) into a config. Known names:
/// learning_rate, batch_size, base_filters, depth, l2, l1. Anything else
/// throws ValidationError.
FcnConfig apply_hyperparameters(const FcnConfig& base, const SearchSpace& space,
                                std::span<const double> values);

/// Trains a fresh model for budget.epochs with a fixed seed and returns its
/// best mean validation cross-entropy, plus lambda_p * MACs / 1e9. A run
/// that diverges scores +inf.
double evaluate_fcn_fitness(std::span<const double> values,
                            const SearchSpace& space, const Dataset& train_set,
                            const Dataset& val_set,
                            const FcnTuningBudget& budget);

}  // namespace geofuse
