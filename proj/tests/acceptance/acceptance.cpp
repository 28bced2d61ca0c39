// Acceptance suite: one PASS/FAIL line per criterion.
//
//   fkpplab_acceptance            run every criterion
//   fkpplab_acceptance 4 5        run selected criteria only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fkpp/branching.hpp"
#include "fkpp/control.hpp"
#include "fkpp/levy.hpp"
#include "fkpp/reaction.hpp"
#include "fkpp/rng.hpp"
#include "fkpp/semigroup.hpp"

namespace {

using namespace fkpp;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

const LevyModel kBrownian = LevyModel::brownian();
const double kSqrt2 = std::sqrt(2.0);

ReactionFn dyadic() { return ReactionFn(OffspringLaw::dyadic()); }

Verdict speed_formula() {
  Verdict v;
  const auto report = front_speed_all(kBrownian, 1.0);
  v.require(std::abs(report.inf_form.q - kSqrt2) <= 1e-9,
            fmt::format("inf_form |q - sqrt2| = {:.2e}", std::abs(report.inf_form.q - kSqrt2)));
  v.require(report.max_disagreement() <= 1e-5,
            fmt::format("method spread = {:.2e}", report.max_disagreement()));
  v.require(!report.any_saturated(), "no saturation");
  return v;
}

Verdict degenerate_drift() {
  Verdict v;
  for (double b : {0.3, 0.7, 1.5}) {
    const auto report = front_speed_all(LevyModel::drift_only(b), 1.0);
    double worst = 0.0;
    for (const auto* r : {&report.inf_form, &report.sup_form, &report.perspective_form})
      worst = std::max(worst, std::abs(r->q - b));
    v.require(worst <= 1e-12, fmt::format("b={} max |q-b| = {:.1e}", b, worst));
  }
  return v;
}

Verdict reaction_oracle() {
  Verdict v;
  const auto rf = dyadic();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double q0 = (i + 0.5) / 20.0;
    for (int j = 0; j < 20; ++j) {
      const double t = 5.0 * (j + 1) / 20.0;
      const double logistic = q0 / (q0 + std::exp(-t) * (1.0 - q0));
      worst = std::max(worst, std::abs(dual_semigroup(rf, q0, t) - logistic));
      worst = std::max(worst, std::abs(reaction_semigroup(rf, 1.0 - q0, t) - (1.0 - logistic)));
    }
  }
  v.require(worst <= 1e-8, fmt::format("max error over 20x20 grid = {:.2e}", worst));
  return v;
}

Verdict trotter_sandwich() {
  Verdict v;
  const auto rf = dyadic();
  const GridSpec grid;
  const auto u0 = GridFn::heaviside(grid);
  double worst_order = -1.0;
  double gap1 = 0.0;
  double gap64 = 0.0;
  for (int n = 1; n <= 64; ++n) {
    const auto b = trotter_bounds(kBrownian, rf, u0, 1.0, n);
    for (std::size_t i = 0; i < grid.points; ++i)
      worst_order = std::max(worst_order, b.lower.values[i] - b.upper.values[i]);
    if (n == 1) {
      gap1 = b.gap;
      v.require(std::abs(b.lower(0.0) - 0.2689) <= 0.01 && std::abs(b.upper(0.0) - 0.5) <= 0.01,
                fmt::format("n=1 bracket at 0 = [{:.4f}, {:.4f}]", b.lower(0.0), b.upper(0.0)));
    }
    if (n == 64) gap64 = b.gap;
  }
  v.require(worst_order <= 1e-12, fmt::format("max(lower - upper) = {:.1e}", worst_order));
  v.require(gap64 < gap1, fmt::format("gap(1) = {:.4f}, gap(64) = {:.4f}", gap1, gap64));
  const auto s = solve(kBrownian, rf, u0, 1.0, 0.02);
  v.require(s.converged && s.bracket.gap < 0.02,
            fmt::format("solve n = {}, gap = {:.4f}", s.bracket.n, s.bracket.gap));
  return v;
}

Verdict picard_oracle() {
  Verdict v;
  const auto rf = dyadic();
  const GridSpec grid;
  const auto u0 = GridFn::heaviside(grid);
  const auto s = solve(kBrownian, rf, u0, 1.0, 0.02);
  const auto p = picard_solve(kBrownian, rf, u0, 1.0);
  double excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = p.solution.values[i];
    excess = std::max({excess, s.bracket.lower.values[i] - x, x - s.bracket.upper.values[i]});
  }
  v.require(p.converged, fmt::format("picard converged in {} iterations", p.iterations));
  v.require(excess <= 1e-3, fmt::format("worst excursion outside bracket = {:.2e}", excess));
  return v;
}

struct SolvedPoint {
  double t;
  double x;
  double mid;
  double gap;
};

Verdict control_representation() {
  Verdict v;
  const auto rf = dyadic();
  const GridSpec grid;
  const auto u0 = GridFn::heaviside(grid);
  MonteCarloOptions mc;
  mc.n_paths = 100'000;
  mc.steps = 200;
  mc.seed = 20;

  Rng pick = make_stream(mc.seed, 999);
  const double random_z = std::uniform_real_distribution<double>(rf.control_min(), rf.control_max())(pick);

  for (const auto [t, x] : {std::pair{0.5, 0.0}, std::pair{1.0, 0.0}, std::pair{1.0, 1.0}}) {
    const auto s = solve(kBrownian, rf, u0, t, 0.02);
    const double mid = s.solution(x);
    const double gap = s.bracket.gap;
    const std::vector<ControlPolicy> policies = {
        ControlPolicy::constant(rf, 0.0, "zero"),
        ControlPolicy::constant(rf, -1.0, "minus-one"),
        ControlPolicy::constant(rf, rf.gamma(), "gamma"),
        ControlPolicy::constant(rf, random_z, "random-constant"),
        ControlPolicy::ramp(rf, t),
    };
    for (const auto& policy : policies) {
      const auto est = estimate_value(kBrownian, x, t, policy, rf, u0, mc);
      v.require(est.mean <= mid + gap + 3.0 * est.std_error,
                fmt::format("({},{}) {} {:.4f} <= {:.4f}", t, x, policy.name(), est.mean,
                            mid + gap + 3.0 * est.std_error));
      if (policy.name() == "zero" && t == 1.0 && x == 0.0)
        v.require(std::abs(est.mean - 0.25) <= 3.0 * est.std_error,
                  fmt::format("zero policy at (1,0) = {:.4f} +- {:.4f}", est.mean, est.std_error));
    }
    const auto optimal = optimal_policy(kBrownian, rf, u0, t, mc.steps);
    const auto est = estimate_value(kBrownian, x, t, optimal, rf, u0, mc);
    v.require(est.mean >= mid - gap - 3.0 * est.std_error - 0.01,
              fmt::format("({},{}) optimal {:.4f} vs midpoint {:.4f} (gap {:.4f})", t, x, est.mean,
                          mid, gap));
  }
  return v;
}

Verdict martingale_flatness() {
  Verdict v;
  const auto rf = dyadic();
  const auto u0 = GridFn::heaviside(GridSpec{});
  MonteCarloOptions mc;
  mc.n_paths = 100'000;
  mc.steps = 200;
  mc.seed = 7;
  const SolutionPath u = solve_path(kBrownian, rf, u0, 1.0, mc.steps);
  const auto report = martingale_check(kBrownian, rf, u, 0.0, 1.0, {0.25, 0.5, 0.75, 1.0}, mc);
  const double allowance = 3.0 * report.max_std_error + u.max_gap;
  v.require(report.max_deviation < allowance,
            fmt::format("max deviation {:.4f} < 3*stderr + gap = {:.4f}", report.max_deviation,
                        allowance));
  return v;
}

Verdict extinction() {
  Verdict v;
  BranchingConfig config{kBrownian, OffspringLaw::from_pairs({{0, 0.25}, {2, 0.75}})};
  BatchOptions opts;
  opts.n_runs = 100'000;
  opts.seed = 3;
  const auto est = extinction_estimate(config, 30.0, opts);
  const double target = 1.0 / 3.0;
  const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(opts.n_runs));
  v.require(std::abs(est.probability - target) <= 3.0 * se,
            fmt::format("extinct fraction {:.5f} vs 1/3 (3*stderr = {:.5f})", est.probability,
                        3.0 * se));
  return v;
}

Verdict mckean_identity() {
  Verdict v;
  const auto rf = dyadic();
  const auto u0 = GridFn::heaviside(GridSpec{});
  const auto s = solve(kBrownian, rf, u0, 1.0, 0.02);
  BranchingConfig config{kBrownian, OffspringLaw::dyadic()};
  BatchOptions opts;
  opts.n_runs = 100'000;
  opts.seed = 11;
  for (double x : {-1.0, 0.0, 1.0}) {
    const auto est = mckean_check(config, u0, 1.0, x, opts);
    const double diff = std::abs(est.value.mean - s.solution(x));
    v.require(!est.flagged && diff <= 3.0 * est.value.std_error + s.bracket.gap,
              fmt::format("x={} branching {:.4f} vs pde {:.4f}", x, est.value.mean, s.solution(x)));
  }
  return v;
}

MedianBounds best_bounds(double t) {
  MedianBounds best{-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
  for (double b : {0.6, 0.75, 0.9})
    for (int n : {1, 2, 4}) {
      const auto mb = median_bounds_dyadic(t, n, b);
      best.lo = std::max(best.lo, mb.lo);
      best.hi = std::min(best.hi, mb.hi);
    }
  return best;
}

Verdict median_bounds() {
  Verdict v;
  const auto rf = dyadic();
  const auto u0 = GridFn::heaviside(GridSpec{});
  for (double t : {1.0, 2.0, 4.0}) {
    const auto s = solve(kBrownian, rf, u0, t, 0.02);
    const double m = median(s.solution);
    const auto mb = best_bounds(t);
    v.require(mb.lo <= m && m <= mb.hi,
              fmt::format("pde t={} m={:.4f} in [{:.4f}, {:.4f}]", t, m, mb.lo, mb.hi));
  }

  BranchingConfig config{kBrownian, OffspringLaw::dyadic()};
  config.cap = 1'000'000;
  BatchOptions opts;
  opts.n_runs = 10'000;
  opts.seed = 5;
  const auto rows = speed_experiment(config, {4.0, 8.0, 10.0, 12.0}, opts);
  for (const auto& row : rows) {
    if (row.t > 10.0) continue;
    const auto mb = best_bounds(row.t);
    v.require(mb.lo <= row.median_rightmost && row.median_rightmost <= mb.hi,
              fmt::format("bbm t={} median {:.4f} in [{:.4f}, {:.4f}] ({} capped)", row.t,
                          row.median_rightmost, mb.lo, mb.hi, row.n_capped));
  }
  const double speed4 = rows.front().median_speed;
  const double speed12 = rows.back().median_speed;
  v.require(speed4 < speed12 && speed12 < kSqrt2,
            fmt::format("median speed t=4 {:.4f} < t=12 {:.4f} < sqrt2 ({} capped)", speed4,
                        speed12, rows.back().n_capped));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "speed formula", 1.0, speed_formula},
      {2, "degenerate drift", 1.0, degenerate_drift},
      {3, "reaction oracle", 1.0, reaction_oracle},
      {4, "trotter sandwich", 60.0, trotter_sandwich},
      {5, "picard oracle", 120.0, picard_oracle},
      {6, "control representation", 300.0, control_representation},
      {7, "martingale flatness", 120.0, martingale_flatness},
      {8, "extinction", 120.0, extinction},
      {9, "mckean identity", 180.0, mckean_identity},
      {10, "median bounds", 600.0, median_bounds},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, fmt::format("exception: {}", e.what()));
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(seconds < c.budget_seconds,
              fmt::format("runtime {:.1f}s < {:.0f}s", seconds, c.budget_seconds));
    if (!v.pass) ++failures;
    std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
