#include "geofuse/pso.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "geofuse/error.hpp"

namespace geofuse {
namespace {

// Substream tag b for swarm initialization; iterations use b = t >= 1.
constexpr std::uint64_t kInitIteration = 0;

double distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(sq);
}

double score(const FitnessFn& fitness, const SearchSpace& space,
             std::span<const double> position, std::size_t& nan_count) {
  const std::vector<double> values = space.decode(position);
  const double f = fitness(values);
  if (std::isnan(f)) {
    ++nan_count;
    return std::numeric_limits<double>::infinity();
  }
  return f;
}

double velocity_best_gap(const std::vector<Particle>& particles) {
  double gap = 0.0;
  for (const Particle& p : particles)
    gap = std::max(gap, distance(p.velocity, p.best_position));
  return gap;
}

}  // namespace

double Dimension::lower() const {
  return scale == Scale::log ? std::log10(min) : min;
}

double Dimension::upper() const {
  return scale == Scale::log ? std::log10(max) : max;
}

double Dimension::decode(double x) const {
  double v = scale == Scale::log ? std::pow(10.0, x) : x;
  if (kind == DimKind::integer) v = std::round(v);
  return v;
}

void SearchSpace::validate() const {
  if (dims.empty()) throw ValidationError("search space has no dimensions");
  for (const Dimension& d : dims) {
    if (!std::isfinite(d.min) || !std::isfinite(d.max) || !(d.min < d.max))
      throw ValidationError(fmt::format(
          "dimension '{}': need finite min < max, got [{}, {}]", d.name, d.min,
          d.max));
    if (d.scale == Scale::log && d.min <= 0.0)
      throw ValidationError(
          fmt::format("dimension '{}': log scale needs min > 0", d.name));
  }
  if (norm_bound) {
    if (!(*norm_bound > 0.0))
      throw ValidationError("norm bound H must be > 0");
    for (const Dimension& d : dims)
      if (d.lower() > 0.0 || d.upper() < 0.0)
        throw ValidationError(fmt::format(
            "dimension '{}': a norm bound needs 0 inside the (internal) range",
            d.name));
  }
}

std::vector<double> SearchSpace::decode(std::span<const double> position) const {
  if (position.size() != dims.size())
    throw ValidationError("position and search space differ in dimension");
  std::vector<double> out(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) out[j] = dims[j].decode(position[j]);
  return out;
}

void SwarmConfig::validate() const {
  if (n_particles < 2) throw ValidationError("swarm needs at least 2 particles");
  if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (!(w_min >= 0.0) || !(w_max >= w_min))
    throw ValidationError("inertia needs w_max >= w_min >= 0");
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be >= 0");
  if (!(c1 >= 0.0) || !(c2 >= 0.0))
    throw ValidationError("c1 and c2 must be >= 0");
  if (!(v_clamp_frac > 0.0))
    throw ValidationError("v_clamp_frac must be > 0");
  if (!(lambda_p >= 0.0)) throw ValidationError("lambda_p must be >= 0");
}

namespace {

void enforce_norm_bound(std::vector<double>& x, const SearchSpace& space) {
  if (!space.norm_bound) return;
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double h = *space.norm_bound;
  if (sq > h * h) {
    const double k = h / std::sqrt(sq);
    for (double& v : x) v *= k;
  }
}

}  // namespace

SwarmState init_swarm(const SearchSpace& space, const SwarmConfig& config) {
  space.validate();
  config.validate();
  SwarmState state;
  state.particles.resize(config.n_particles);
  for (std::size_t i = 0; i < config.n_particles; ++i) {
    Rng rng = Rng::substream(config.seed, i, kInitIteration);
    Particle& p = state.particles[i];
    p.position.resize(space.size());
    p.velocity.resize(space.size());
    for (std::size_t j = 0; j < space.size(); ++j) {
      const Dimension& d = space.dims[j];
      p.position[j] = rng.uniform(d.lower(), d.upper());
      const double vmax = config.v_clamp_frac * d.range();
      p.velocity[j] = rng.uniform(-vmax, vmax);
    }
    enforce_norm_bound(p.position, space);
    p.best_position = p.position;
  }
  return state;
}

double inertia(std::size_t t, const SwarmConfig& config) {
  if (t >= config.max_iters) return config.w_min;
  return config.w_max - (config.w_max - config.w_min) *
                            static_cast<double>(t) /
                            static_cast<double>(config.max_iters);
}

void update_velocity(Particle& particle, std::span<const double> global_best,
                     double w, const SwarmConfig& config,
                     const SearchSpace& space, std::span<const double> r1,
                     std::span<const double> r2) {
  const std::size_t n = space.size();
  if (particle.position.size() != n || global_best.size() != n ||
      r1.size() != n || r2.size() != n)
    throw ValidationError("velocity update inputs differ in dimension");
  for (std::size_t j = 0; j < n; ++j) {
    const double x = particle.position[j];
    double v = w * particle.velocity[j] +
               config.c1 * r1[j] * (particle.best_position[j] - x) +
               config.c2 * r2[j] * (global_best[j] - x);
    const double vmax = config.v_clamp_frac * space.dims[j].range();
    particle.velocity[j] = std::clamp(v, -vmax, vmax);
  }
}

void update_velocity(Particle& particle, std::span<const double> global_best,
                     double w, const SwarmConfig& config,
                     const SearchSpace& space, Rng& rng) {
  std::vector<double> r1(space.size()), r2(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    r1[j] = rng.uniform();
    r2[j] = rng.uniform();
  }
  update_velocity(particle, global_best, w, config, space, r1, r2);
}

void update_position(Particle& particle, const SearchSpace& space) {
  for (std::size_t j = 0; j < space.size(); ++j) {
    const Dimension& d = space.dims[j];
    double x = particle.position[j] + particle.velocity[j];
    if (x < d.lower() || x > d.upper()) {
      x = std::clamp(x, d.lower(), d.upper());
      particle.velocity[j] = 0.0;
    }
    particle.position[j] = x;
  }
  enforce_norm_bound(particle.position, space);
}

PsoResult run_pso(const SearchSpace& space, const SwarmConfig& config,
                  const FitnessFn& fitness) {
  SwarmState state = init_swarm(space, config);
  std::size_t evaluations = 0, nan_count = 0;

  for (Particle& p : state.particles) {
    p.best_fitness = score(fitness, space, p.position, nan_count);
    ++evaluations;
  }
  // Reduction in fixed particle order; strict comparison keeps the earliest.
  state.global_best = state.particles[0].best_position;
  state.global_best_fitness = state.particles[0].best_fitness;
  for (const Particle& p : state.particles)
    if (p.best_fitness < state.global_best_fitness) {
      state.global_best = p.best_position;
      state.global_best_fitness = p.best_fitness;
    }
  state.trace.push_back({0, state.global_best_fitness,
                         velocity_best_gap(state.particles), inertia(0, config)});

  bool converged = false;
  std::size_t stall = 0;
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    const double w = inertia(t, config);
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
      Particle& p = state.particles[i];
      Rng rng = Rng::substream(config.seed, i, t + 1);
      update_velocity(p, state.global_best, w, config, space, rng);
      update_position(p, space);
      const double f = score(fitness, space, p.position, nan_count);
      ++evaluations;
      if (f < p.best_fitness) {
        p.best_fitness = f;
        p.best_position = p.position;
      }
    }
    const std::vector<double> previous = state.global_best;
    for (const Particle& p : state.particles)
      if (p.best_fitness < state.global_best_fitness) {
        state.global_best = p.best_position;
        state.global_best_fitness = p.best_fitness;
      }
    state.iteration = t + 1;
    state.trace.push_back({t + 1, state.global_best_fitness,
                           velocity_best_gap(state.particles), w});
    if (distance(state.global_best, previous) < config.epsilon) {
      if (++stall >= config.patience) {
        converged = true;
        break;
      }
    } else {
      stall = 0;
    }
  }

  if (nan_count == evaluations)
    throw ValidationError("fitness returned NaN for every evaluation");

  PsoResult result;
  result.best_position = state.global_best;
  result.best_values = space.decode(state.global_best);
  result.best_fitness = state.global_best_fitness;
  result.trace = std::move(state.trace);
  result.evaluations = evaluations;
  result.converged = converged;
  return result;
}

std::string format_trace_csv(std::span<const TraceRow> trace) {
  std::string out = "iter,best_fitness,eq10_diag,w\n";
  for (const TraceRow& r : trace)
    out += fmt::format("{},{},{},{}\n", r.iter, r.best_fitness,
                       r.velocity_best_gap, r.inertia);
  return out;
}

FcnConfig apply_hyperparameters(const FcnConfig& base, const SearchSpace& space,
                                std::span<const double> values) {
  if (values.size() != space.size())
    throw ValidationError("hyperparameter values and search space differ in size");
  FcnConfig cfg = base;
  auto as_count = [](const Dimension& d, double v) {
    if (!(v >= 1.0))
      throw ValidationError(
          fmt::format("'{}' decoded to {}, need an integer >= 1", d.name, v));
    return static_cast<std::size_t>(std::llround(v));
  };
  for (std::size_t j = 0; j < space.size(); ++j) {
    const Dimension& d = space.dims[j];
    const double v = values[j];
    if (d.name == "learning_rate") cfg.learning_rate = v;
    else if (d.name == "l2") cfg.l2 = v;
    else if (d.name == "l1") cfg.l1 = v;
    else if (d.name == "batch_size") cfg.batch_size = as_count(d, v);
    else if (d.name == "base_filters") cfg.base_filters = as_count(d, v);
    else if (d.name == "depth") cfg.depth = as_count(d, v);
    else
      throw ValidationError(
          fmt::format("unknown hyperparameter dimension '{}'", d.name));
  }
  cfg.validate();
  return cfg;
}

double evaluate_fcn_fitness(std::span<const double> values,
                            const SearchSpace& space, const Dataset& train_set,
                            const Dataset& val_set,
                            const FcnTuningBudget& budget) {
  FcnConfig cfg = apply_hyperparameters(budget.base, space, values);
  cfg.epochs = budget.epochs;
  cfg.seed = budget.seed;
  try {
    FcnModel model = build_fcn(cfg);
    fit_input_normalization(model, train_set);
    BudgetTracker tracker;
    const TrainResult result = train(model, train_set, val_set, tracker);
    double f = result.best_val_loss;
    if (budget.lambda_p > 0.0)
      f += budget.lambda_p * static_cast<double>(tracker.mac_count) / 1e9;
    return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
  } catch (const NumericError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace geofuse
