#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fkpp/grid.hpp"
#include "fkpp/levy.hpp"
#include "fkpp/reaction.hpp"

namespace fkpp {

/// Transition kernel of X = x - L over a time step, tabulated on grid offsets.
///
/// Weight k is E[hat(Y/h - k)] for the displacement Y = -L_dt and the unit hat
/// function, i.e. the kernel integrates the piecewise-linear interpolant of a
/// GridFn exactly. Finite-activity jumps enter through the Gaussian-mixture
/// form of the increment law, so the kernel is deterministic. Tails below
/// kTailMass are trimmed and the weights renormalised to sum to one.
class TransitionKernel {
 public:
  static constexpr double kTailMass = 1e-8;
  static constexpr double kMaxOffGridMass = 0.2;

  /// Throws GridTooSmallError if more than kMaxOffGridMass of the law of Y
  /// lies beyond the width of the grid.
  static TransitionKernel build(const LevyModel& model, double dt, const GridSpec& grid);

  GridFn apply(const GridFn& gf) const;

  long first_offset() const { return first_offset_; }
  const std::vector<double>& weights() const { return weights_; }
  double off_grid_mass() const { return off_grid_mass_; }
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  long first_offset_ = 0;
  std::vector<double> weights_;
  double off_grid_mass_ = 0.0;
};

/// P_dt applied to a grid function.
GridFn apply_P(const LevyModel& model, double dt, const GridFn& gf);
/// R_dt applied pointwise to every node and both extension constants.
GridFn apply_R(const ReactionFn& rf, double dt, const GridFn& gf);

struct Bracket {
  GridFn lower;  // (R_{t/n} o P_{t/n})^n u0
  GridFn upper;  // (P_{t/n} o R_{t/n})^n u0
  int n = 0;
  double gap = 0.0;  // max over interior nodes of upper - lower

  GridFn midpoint() const;
};

/// Interior gap max_{0 < i < m-1} (upper_i - lower_i).
double bracket_gap(const GridFn& lower, const GridFn& upper);

Bracket trotter_bounds(const LevyModel& model, const ReactionFn& rf, const GridFn& u0, double t,
                       int n);

struct SolveResult {
  GridFn solution;  // bracket midpoint
  Bracket bracket;
  bool converged = false;
  std::vector<std::pair<int, double>> history;  // (n, gap) per doubling stage
};

/// Doubles n from 1 until the Trotter gap drops below tol or n would exceed
/// n_max. Non-convergence is reported, not thrown.
SolveResult solve(const LevyModel& model, const ReactionFn& rf, const GridFn& u0, double t,
                  double tol, int n_max = 1024);

struct PicardResult {
  GridFn solution;
  std::vector<GridFn> ladder;  // u at tau_j = j*t/J, j = 0..J
  int iterations = 0;
  double last_change = 0.0;
  bool converged = false;
};

/// Picard iteration on the mild (Duhamel) form
///   u(tau) = P_tau u0 + int_0^tau P_s f(u(tau - s)) ds
/// over J = max(32, ceil(t / time_step)) ladder levels with left-endpoint
/// quadrature in s. Independent of the splitting solver.
PicardResult picard_solve(const LevyModel& model, const ReactionFn& rf, const GridFn& u0, double t,
                          double time_step = 0.05, int max_iter = 200, double tol = 1e-10);

/// Snapshots u(j*t/J, .) for j = 0..J, taken from a fine Trotter sandwich
/// (n = J*substeps steps) as bracket midpoints.
struct SolutionPath {
  double horizon = 0.0;
  std::vector<GridFn> frames;
  double max_gap = 0.0;

  std::size_t steps() const { return frames.size() - 1; }
  /// Nearest frame in time, linear in space.
  double value(double tau, double x) const;
  const GridFn& nearest(double tau) const;
};

SolutionPath solve_path(const LevyModel& model, const ReactionFn& rf, const GridFn& u0, double t,
                        std::size_t frames, std::size_t substeps = 0);

/// Position where a nondecreasing grid function first reaches `level`.
/// Throws std::domain_error when the values never cross it.
double median(const GridFn& gf, double level = 0.5);

struct MedianBounds {
  double lo;
  double hi;
};

/// Two-sided bounds on the median of the rightmost particle of dyadic
/// branching Brownian motion at time t, for tuning parameters n >= 1 and
/// b in (1/2, 1).
MedianBounds median_bounds_dyadic(double t, int n, double b);

}  // namespace fkpp
