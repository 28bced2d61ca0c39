#include "fkpp/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "fkpp/parallel.hpp"

namespace fkpp {

namespace {

// int_0^dt exp(z r) dr
double exp_weight(double z, double dt) {
  const double a = z * dt;
  if (std::abs(a) < 1e-12) return dt;
  return std::expm1(a) / z;
}

void check_common(double t, const MonteCarloOptions& opts) {
  if (!(t > 0.0)) throw std::domain_error("control: horizon t must be > 0");
  if (opts.steps < 1) throw std::domain_error("control: need at least one time step");
  if (opts.n_paths < 2) throw std::domain_error("control: need at least two paths");
}

}  // namespace

PathSample sample_path(const LevyModel& model, double x, double t, std::size_t steps, Rng& rng) {
  if (steps < 1) throw std::domain_error("sample_path: J must be >= 1");
  if (!(t > 0.0)) throw std::domain_error("sample_path: t must be > 0");
  PathSample path;
  path.horizon = t;
  path.states.resize(steps + 1);
  path.states[0] = x;
  const double dt = t / static_cast<double>(steps);
  IncrementSampler draw(model);
  for (std::size_t j = 0; j < steps; ++j) path.states[j + 1] = path.states[j] - draw(dt, rng);
  return path;
}

// ---------------------------------------------------------------------------
// Policies

ControlPolicy::ControlPolicy(std::string name, Rule rule, double lo, double hi)
    : name_(std::move(name)), rule_(std::move(rule)), lo_(lo), hi_(hi) {
  if (!(lo_ <= hi_)) throw std::invalid_argument("ControlPolicy: empty control range");
}

ControlPolicy ControlPolicy::constant(const ReactionFn& rf, double z, std::string name) {
  if (name.empty()) name = fmt::format("constant({:.6g})", z);
  return {std::move(name), [z](double, double) { return z; }, rf.control_min(), rf.control_max()};
}

ControlPolicy ControlPolicy::ramp(const ReactionFn& rf, double t) {
  const double lo = rf.control_min();
  const double hi = rf.control_max();
  return {"ramp", [=](double s, double) { return lo + (hi - lo) * s / t; }, lo, hi};
}

double ControlPolicy::operator()(double s, double x, bool* clamped) const {
  const double raw = rule_(s, x);
  const double z = std::clamp(raw, lo_, hi_);
  if (clamped) *clamped = z != raw;
  return z;
}

ControlPolicy optimal_policy(const ReactionFn& rf, std::shared_ptr<const SolutionPath> path) {
  const double horizon = path->horizon;
  auto rule = [rf, path, horizon](double s, double x) {
    const double u = std::clamp(path->value(horizon - s, x), 0.0, 1.0);
    return rf.f_prime_raw(u);
  };
  return {"optimal", std::move(rule), rf.control_min(), rf.control_max()};
}

ControlPolicy optimal_policy(const LevyModel& model, const ReactionFn& rf, const GridFn& u0,
                             double t, std::size_t steps) {
  auto path = std::make_shared<const SolutionPath>(solve_path(model, rf, u0, t, steps));
  return optimal_policy(rf, std::move(path));
}

// ---------------------------------------------------------------------------
// The objective

double xi(const PathSample& path, const ControlPolicy& policy, const ReactionFn& rf,
          const GridFn& u0, std::size_t* clamp_count) {
  const std::size_t steps = path.steps();
  const double dt = path.time_step();
  // Z is held at its left-endpoint value on each step (adapted); the
  // exponential weight is then integrated exactly within the step.
  double exponent = 0.0;
  double running_cost = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    bool clamped = false;
    const double z = policy(path.time(j), path.states[j], &clamped);
    if (clamped && clamp_count) ++*clamp_count;
    running_cost += std::exp(exponent) * fhat(rf, z) * exp_weight(z, dt);
    exponent += z * dt;
  }
  return std::exp(exponent) * u0(path.states[steps]) - running_cost;
}

ValueEstimate summarize(const std::vector<double>& samples, std::size_t steps) {
  ValueEstimate est;
  est.n_paths = samples.size();
  est.steps = steps;
  if (samples.empty()) return est;
  const double n = static_cast<double>(samples.size());
  // Shifted by the first sample, which keeps constant samples exact.
  const double shift = samples.front();
  double sum = 0.0;
  for (double v : samples) sum += v - shift;
  est.mean = shift + sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - est.mean) * (v - est.mean);
  const double var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
  est.std_error = std::sqrt(var / n);
  return est;
}

ValueEstimate estimate_value(const LevyModel& model, double x, double t,
                             const ControlPolicy& policy, const ReactionFn& rf, const GridFn& u0,
                             const MonteCarloOptions& opts) {
  check_common(t, opts);
  if (opts.n_paths < 100) throw std::domain_error("estimate_value: n_paths must be >= 100");
  std::vector<double> values(opts.n_paths);
  std::vector<std::size_t> clamps(opts.n_paths, 0);
  parallel_for(opts.n_paths, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_stream(opts.seed, i);
      const auto path = sample_path(model, x, t, opts.steps, rng);
      values[i] = xi(path, policy, rf, u0, &clamps[i]);
    }
  });
  auto est = summarize(values, opts.steps);
  est.clamped = std::accumulate(clamps.begin(), clamps.end(), std::size_t{0});
  return est;
}

// ---------------------------------------------------------------------------
// Diagnostics

MartingaleReport martingale_check(const LevyModel& model, const ReactionFn& rf,
                                  const SolutionPath& u, double x, double t,
                                  const std::vector<double>& checkpoints,
                                  const MonteCarloOptions& opts) {
  check_common(t, opts);
  const double dt = t / static_cast<double>(opts.steps);
  std::vector<std::size_t> index;
  for (double s : checkpoints) {
    if (!(s >= 0.0 && s <= t)) throw std::domain_error("martingale_check: checkpoint outside [0, t]");
    index.push_back(static_cast<std::size_t>(std::lround(s / dt)));
  }
  const std::size_t k = checkpoints.size();
  std::vector<double> samples(opts.n_paths * k);
  parallel_for(opts.n_paths, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_stream(opts.seed, i);
      const auto path = sample_path(model, x, t, opts.steps, rng);
      // integral[j] = sum_{i < j} f(u(t - s_i, X_i)) dt
      std::vector<double> integral(opts.steps + 1, 0.0);
      for (std::size_t j = 0; j < opts.steps; ++j) {
        const double uj = std::clamp(u.value(t - path.time(j), path.states[j]), 0.0, 1.0);
        integral[j + 1] = integral[j] + rf.f_raw(uj) * dt;
      }
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t j = index[c];
        samples[i * k + c] = u.value(t - path.time(j), path.states[j]) + integral[j];
      }
    }
  });

  MartingaleReport report;
  report.reference = u.value(t, x);
  report.checkpoints = checkpoints;
  std::vector<double> column(opts.n_paths);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < opts.n_paths; ++i) column[i] = samples[i * k + c];
    const auto est = summarize(column, opts.steps);
    report.means.push_back(est);
    report.max_deviation = std::max(report.max_deviation, std::abs(est.mean - report.reference));
    report.max_std_error = std::max(report.max_std_error, est.std_error);
  }
  return report;
}

FenchelGapReport fenchel_gap_check(const LevyModel& model, const ReactionFn& rf,
                                   const SolutionPath& u, const ControlPolicy& policy, double x,
                                   double t, const MonteCarloOptions& opts) {
  check_common(t, opts);
  std::vector<double> max_gap(opts.n_paths, -1e300);
  std::vector<double> abs_sum(opts.n_paths, 0.0);
  parallel_for(opts.n_paths, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_stream(opts.seed, i);
      const auto path = sample_path(model, x, t, opts.steps, rng);
      for (std::size_t j = 0; j < opts.steps; ++j) {
        const double s = path.time(j);
        const double us = std::clamp(u.value(t - s, path.states[j]), 0.0, 1.0);
        const double z = policy(s, path.states[j]);
        const double gap = us * z - rf.f_raw(us) - fhat(rf, z);
        max_gap[i] = std::max(max_gap[i], gap);
        abs_sum[i] += std::abs(gap);
      }
    }
  });
  FenchelGapReport report;
  report.max_gap = *std::max_element(max_gap.begin(), max_gap.end());
  double total = 0.0;
  for (double v : abs_sum) total += v;
  report.mean_abs_gap = total / static_cast<double>(opts.n_paths * opts.steps);
  return report;
}

}  // namespace fkpp
