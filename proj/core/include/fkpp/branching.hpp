#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fkpp/control.hpp"
#include "fkpp/grid.hpp"
#include "fkpp/levy.hpp"
#include "fkpp/reaction.hpp"
#include "fkpp/rng.hpp"

namespace fkpp {

/// Branching Lévy process: each particle moves as an independent copy of L
/// and, at rate one, is replaced by N particles at its current position.
struct BranchingConfig {
  LevyModel model;
  OffspringLaw law;
  std::size_t cap = 1'000'000;  // max particles alive at the horizon
  double start = 0.0;           // L_0 of the ancestor

  void validate() const;
};

enum class RunStatus { alive, extinct, cap_exceeded };
const char* to_string(RunStatus status);

struct RunOutcome {
  RunStatus status = RunStatus::alive;
  std::vector<double> positions;  // L_t^i, filled only when requested
  double rightmost = 0.0;         // max_i L_t^i, -inf when extinct
  std::size_t n_particles = 0;
};

/// One exact realisation up to time t, grown depth-first from an explicit
/// stack. All randomness comes from `rng` in a fixed order.
RunOutcome simulate(const BranchingConfig& config, double t, Rng& rng, bool keep_positions = true);

struct BatchOptions {
  std::size_t n_runs = 100'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// n_runs independent realisations (positions dropped); run i uses
/// make_stream(seed, i).
std::vector<RunOutcome> simulate_many(const BranchingConfig& config, double t,
                                      const BatchOptions& opts);

struct McKeanEstimate {
  ValueEstimate value;
  std::size_t capped = 0;
  bool flagged = false;  // more than 1% of runs hit the cap
};

/// Monte Carlo mean of prod_i u0(x - L_t^i) (empty product 1). Runs that hit
/// the cap are excluded and counted. A run stops early once its product is 0.
McKeanEstimate mckean_check(const BranchingConfig& config, const GridFn& u0, double t, double x,
                            const BatchOptions& opts);

struct ExtinctionEstimate {
  double probability = 0.0;
  double std_error = 0.0;
  std::size_t n_runs = 0;
  std::size_t absorbed = 0;  // runs stopped as survivors at the size threshold
};

/// Fraction of runs extinct by t_long. Positions do not affect |I_t|, so only
/// the particle count is simulated; a run whose count reaches
/// `survivor_threshold` is classified as surviving (its chance of dying out
/// later is at most alpha^threshold).
ExtinctionEstimate extinction_estimate(const BranchingConfig& config, double t_long,
                                       const BatchOptions& opts,
                                       std::size_t survivor_threshold = 1000);

struct SpeedRow {
  double t = 0.0;
  double median_speed = 0.0;  // conditional on survival, M_t / t
  double q10 = 0.0;
  double q90 = 0.0;
  double extinct_frac = 0.0;
  double median_rightmost = 0.0;
  std::size_t n_alive = 0;
  std::size_t n_capped = 0;
  bool flagged = false;
};

/// Empirical law of M_t / t over surviving runs for each t in `times`
/// (ascending). Throws std::domain_error when exp((E[N]-1) t) exceeds the cap.
std::vector<SpeedRow> speed_experiment(const BranchingConfig& config,
                                       const std::vector<double>& times, const BatchOptions& opts);

/// Generalized inverse of the empirical distribution of a sorted sample.
double empirical_quantile(const std::vector<double>& sorted, double p);

}  // namespace fkpp
