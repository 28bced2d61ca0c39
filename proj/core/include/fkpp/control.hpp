#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fkpp/grid.hpp"
#include "fkpp/levy.hpp"
#include "fkpp/reaction.hpp"
#include "fkpp/rng.hpp"
#include "fkpp/semigroup.hpp"

namespace fkpp {

/// Skeleton of X_s = x - L_s on the uniform times s_j = j*t/J, j = 0..J.
struct PathSample {
  double horizon = 0.0;
  std::vector<double> states;  // states[0] = x

  std::size_t steps() const { return states.size() - 1; }
  double time_step() const { return horizon / static_cast<double>(steps()); }
  double time(std::size_t j) const { return time_step() * static_cast<double>(j); }
};

PathSample sample_path(const LevyModel& model, double x, double t, std::size_t steps, Rng& rng);

/// Markov feedback control z = rule(s, x), clamped to [lo, hi].
class ControlPolicy {
 public:
  using Rule = std::function<double(double s, double x)>;

  ControlPolicy(std::string name, Rule rule, double lo, double hi);

  static ControlPolicy constant(const ReactionFn& rf, double z, std::string name = {});
  /// Linear in time from -1 at s = 0 to gamma at s = t.
  static ControlPolicy ramp(const ReactionFn& rf, double t);

  const std::string& name() const { return name_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  /// Clamped control; sets *clamped when the raw rule left [lo, hi].
  double operator()(double s, double x, bool* clamped = nullptr) const;

 private:
  std::string name_;
  Rule rule_;
  double lo_;
  double hi_;
};

/// The optimal feedback z = f'(u(t - s, x)), with u taken from `path`.
ControlPolicy optimal_policy(const ReactionFn& rf, std::shared_ptr<const SolutionPath> path);
/// Solves the PDE on a J-step ladder and wraps the result.
ControlPolicy optimal_policy(const LevyModel& model, const ReactionFn& rf, const GridFn& u0,
                             double t, std::size_t steps);

/// Pathwise objective
///   exp(int_0^t Z) u0(X_t) - int_0^t exp(int_0^s Z) fhat(Z_s) ds
/// with left-endpoint sums on the path's time grid. Each clamped control
/// evaluation increments *clamp_count when provided.
double xi(const PathSample& path, const ControlPolicy& policy, const ReactionFn& rf,
          const GridFn& u0, std::size_t* clamp_count = nullptr);

struct ValueEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n_paths)
  std::size_t n_paths = 0;
  std::size_t steps = 0;
  std::size_t clamped = 0;

  friend bool operator==(const ValueEstimate&, const ValueEstimate&) = default;
};

/// Mean and standard error of a per-index sample, reduced in index order.
ValueEstimate summarize(const std::vector<double>& samples, std::size_t steps = 0);

struct MonteCarloOptions {
  std::size_t n_paths = 100'000;
  std::size_t steps = 200;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: all hardware threads
};

/// Monte Carlo mean of xi over independent paths started at x. Path i uses
/// make_stream(seed, i), so results do not depend on `threads`.
ValueEstimate estimate_value(const LevyModel& model, double x, double t,
                             const ControlPolicy& policy, const ReactionFn& rf, const GridFn& u0,
                             const MonteCarloOptions& opts);

struct MartingaleReport {
  double reference = 0.0;  // u(t, x)
  std::vector<double> checkpoints;
  std::vector<ValueEstimate> means;  // E[M_s] per checkpoint
  double max_deviation = 0.0;
  double max_std_error = 0.0;
};

/// Estimates E[M_s] for
///   M_s = u(t - s, X_s) + int_0^s f(u(t - r, X_r)) dr
/// at each checkpoint and reports the largest departure from u(t, x).
MartingaleReport martingale_check(const LevyModel& model, const ReactionFn& rf,
                                  const SolutionPath& u, double x, double t,
                                  const std::vector<double>& checkpoints,
                                  const MonteCarloOptions& opts);

struct FenchelGapReport {
  double max_gap = 0.0;       // max over all steps of u z - f(u) - fhat(z)
  double mean_abs_gap = 0.0;  // average |.| over all steps
};

/// Tracks the Fenchel-Young integrand along simulated paths under `policy`,
/// with u_s = u(t - s, X_s) read from `u`.
FenchelGapReport fenchel_gap_check(const LevyModel& model, const ReactionFn& rf,
                                   const SolutionPath& u, const ControlPolicy& policy, double x,
                                   double t, const MonteCarloOptions& opts);

}  // namespace fkpp
