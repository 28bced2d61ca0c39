#include "fkpp/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "fkpp/errors.hpp"
#include "fkpp/normal.hpp"

namespace fkpp {

namespace {

// P(l < Y < r) for Y ~ N(0,1), evaluated in whichever tail keeps precision.
double normal_interval(double l, double r) {
  if (l > 0.0) return normal_cdf(-l) - normal_cdf(-r);
  return normal_cdf(r) - normal_cdf(l);
}

// E[hat((Y - c)/h)] for Y ~ N(mean, sd^2), sd > 0.
double hat_weight(double mean, double sd, double c, double h) {
  const double a = (c - h - mean) / sd;
  const double b = (c - mean) / sd;
  const double d = (c + h - mean) / sd;
  const double rising = (mean - c + h) * normal_interval(a, b) - sd * (normal_pdf(b) - normal_pdf(a));
  const double falling = (c + h - mean) * normal_interval(b, d) + sd * (normal_pdf(d) - normal_pdf(b));
  return std::max(0.0, (rising + falling) / h);
}

double tail_beyond(const GaussianComponent& c, double width) {
  // Component of Y = -L: mean is -c.mean.
  const double m = -c.mean;
  if (c.stddev == 0.0) return std::abs(m) > width ? 1.0 : 0.0;
  return normal_cdf((-width - m) / c.stddev) + normal_cdf((m - width) / c.stddev);
}

void check_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw std::invalid_argument("grid functions live on different grids");
}

}  // namespace

// ---------------------------------------------------------------------------
// TransitionKernel

TransitionKernel TransitionKernel::build(const LevyModel& model, double dt, const GridSpec& grid) {
  if (!(dt > 0.0)) throw std::domain_error("TransitionKernel: dt must be > 0");
  grid.validate();
  model.validate();
  const double h = grid.step();
  const double width = h * static_cast<double>(grid.points - 1);
  const auto mixture = increment_mixture(model, dt);

  TransitionKernel k;
  k.grid_ = grid;
  for (const auto& c : mixture) k.off_grid_mass_ += c.weight * tail_beyond(c, width);
  if (k.off_grid_mass_ > kMaxOffGridMass)
    throw GridTooSmallError(fmt::format(
        "transition kernel over dt = {} puts {:.3g} of its mass beyond the grid width {}", dt,
        k.off_grid_mass_, width));

  // Offset range covering every component (9 sd leaves < 1e-18 outside).
  const double limit = width + h;
  long lo = 0;
  long hi = 0;
  bool first = true;
  for (const auto& c : mixture) {
    const double m = -c.mean;
    const double reach = 9.0 * c.stddev;
    const double a = std::clamp(m - reach, -limit, limit);
    const double b = std::clamp(m + reach, -limit, limit);
    const long klo = static_cast<long>(std::floor(a / h)) - 1;
    const long khi = static_cast<long>(std::ceil(b / h)) + 1;
    lo = first ? klo : std::min(lo, klo);
    hi = first ? khi : std::max(hi, khi);
    first = false;
  }
  std::vector<double> w(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (const auto& c : mixture) {
    const double m = -c.mean;
    if (c.stddev == 0.0) {
      if (std::abs(m) > limit) continue;
      const double pos = m / h;
      double base = std::floor(pos);
      double frac = pos - base;
      if (frac > 1.0 - 1e-9) {
        base += 1.0;
        frac = 0.0;
      }
      const long k0 = static_cast<long>(base);
      if (frac < 1e-9) {
        w[static_cast<std::size_t>(k0 - lo)] += c.weight;
      } else {
        w[static_cast<std::size_t>(k0 - lo)] += c.weight * (1.0 - frac);
        w[static_cast<std::size_t>(k0 + 1 - lo)] += c.weight * frac;
      }
      continue;
    }
    const double reach = 9.0 * c.stddev;
    const long klo = std::max(lo, static_cast<long>(std::floor((m - reach) / h)) - 1);
    const long khi = std::min(hi, static_cast<long>(std::ceil((m + reach) / h)) + 1);
    for (long kk = klo; kk <= khi; ++kk)
      w[static_cast<std::size_t>(kk - lo)] +=
          c.weight * hat_weight(m, c.stddev, static_cast<double>(kk) * h, h);
  }

  // Trim both tails up to half the truncation budget each.
  std::size_t left = 0;
  std::size_t right = w.size();
  double trimmed = 0.0;
  while (left + 1 < right && trimmed + w[left] <= 0.5 * kTailMass) trimmed += w[left++];
  trimmed = 0.0;
  while (right - 1 > left && trimmed + w[right - 1] <= 0.5 * kTailMass) trimmed += w[--right];

  k.first_offset_ = lo + static_cast<long>(left);
  k.weights_.assign(w.begin() + static_cast<long>(left), w.begin() + static_cast<long>(right));
  double total = 0.0;
  for (double x : k.weights_) total += x;
  if (!(total > 0.0)) throw GridTooSmallError("transition kernel has no mass on the grid");
  for (double& x : k.weights_) x /= total;
  return k;
}

GridFn TransitionKernel::apply(const GridFn& gf) const {
  check_same_grid(grid_, gf.grid);
  const long m = static_cast<long>(gf.values.size());
  const long width = static_cast<long>(weights_.size());
  // padded[q] holds the extended function at node index q + first_offset_.
  std::vector<double> padded(static_cast<std::size_t>(m + width - 1));
  for (long q = 0; q < static_cast<long>(padded.size()); ++q) {
    const long idx = q + first_offset_;
    padded[static_cast<std::size_t>(q)] =
        idx < 0 ? gf.left_ext : (idx >= m ? gf.right_ext : gf.values[static_cast<std::size_t>(idx)]);
  }
  GridFn out{gf.grid, std::vector<double>(static_cast<std::size_t>(m), 0.0), gf.left_ext,
             gf.right_ext};
  // Accumulate w_j (u_{i+j} - u_i) and add u_i back, so that constants pass
  // through unchanged even though the weights sum to one only up to rounding.
  double* dst = out.values.data();
  const double* centre = gf.values.data();
  for (long j = 0; j < width; ++j) {
    const double wj = weights_[static_cast<std::size_t>(j)];
    const double* src = padded.data() + j;
    for (long i = 0; i < m; ++i) dst[i] += wj * (src[i] - centre[i]);
  }
  for (long i = 0; i < m; ++i) dst[i] += centre[i];
  return out;
}

GridFn apply_P(const LevyModel& model, double dt, const GridFn& gf) {
  return TransitionKernel::build(model, dt, gf.grid).apply(gf);
}

GridFn apply_R(const ReactionFn& rf, double dt, const GridFn& gf) {
  if (!(dt > 0.0)) throw std::domain_error("apply_R: dt must be > 0");
  GridFn out = gf;
  for (double& v : out.values) v = reaction_semigroup(rf, std::clamp(v, 0.0, 1.0), dt);
  out.left_ext = reaction_semigroup(rf, std::clamp(gf.left_ext, 0.0, 1.0), dt);
  out.right_ext = reaction_semigroup(rf, std::clamp(gf.right_ext, 0.0, 1.0), dt);
  return out;
}

// ---------------------------------------------------------------------------
// Trotter sandwich

GridFn Bracket::midpoint() const {
  GridFn mid = lower;
  for (std::size_t i = 0; i < mid.values.size(); ++i)
    mid.values[i] = 0.5 * (lower.values[i] + upper.values[i]);
  mid.left_ext = 0.5 * (lower.left_ext + upper.left_ext);
  mid.right_ext = 0.5 * (lower.right_ext + upper.right_ext);
  return mid;
}

double bracket_gap(const GridFn& lower, const GridFn& upper) {
  check_same_grid(lower.grid, upper.grid);
  double gap = 0.0;
  for (std::size_t i = 1; i + 1 < lower.values.size(); ++i)
    gap = std::max(gap, upper.values[i] - lower.values[i]);
  return gap;
}

Bracket trotter_bounds(const LevyModel& model, const ReactionFn& rf, const GridFn& u0, double t,
                       int n) {
  if (n < 1) throw std::domain_error("trotter_bounds: n must be >= 1");
  if (!(t >= 0.0)) throw std::domain_error("trotter_bounds: t must be >= 0");
  if (t == 0.0) return {u0, u0, n, 0.0};
  const double dt = t / n;
  const auto kernel = TransitionKernel::build(model, dt, u0.grid);
  GridFn lower = u0;
  GridFn upper = u0;
  for (int step = 0; step < n; ++step) {
    lower = apply_R(rf, dt, kernel.apply(lower));
    upper = kernel.apply(apply_R(rf, dt, upper));
  }
  const double gap = bracket_gap(lower, upper);
  return {std::move(lower), std::move(upper), n, gap};
}

SolveResult solve(const LevyModel& model, const ReactionFn& rf, const GridFn& u0, double t,
                  double tol, int n_max) {
  if (!(tol > 0.0)) throw std::domain_error("solve: tol must be > 0");
  if (n_max < 1) throw std::domain_error("solve: n_max must be >= 1");
  SolveResult out;
  for (int n = 1;; n *= 2) {
    out.bracket = trotter_bounds(model, rf, u0, t, n);
    out.history.emplace_back(n, out.bracket.gap);
    if (out.bracket.gap < tol) {
      out.converged = true;
      break;
    }
    if (n > n_max / 2) break;
  }
  out.solution = out.bracket.midpoint();
  return out;
}

// ---------------------------------------------------------------------------
// Picard oracle

PicardResult picard_solve(const LevyModel& model, const ReactionFn& rf, const GridFn& u0, double t,
                          double time_step, int max_iter, double tol) {
  if (!(t >= 0.0)) throw std::domain_error("picard_solve: t must be >= 0");
  if (!(time_step > 0.0)) throw std::domain_error("picard_solve: time_step must be > 0");
  PicardResult out;
  if (t == 0.0) {
    out.solution = u0;
    out.ladder = {u0};
    out.converged = true;
    return out;
  }
  const auto levels = static_cast<std::size_t>(
      std::max<double>(32.0, std::ceil(t / time_step - 1e-12)));
  const double delta = t / static_cast<double>(levels);

  // kernels[l] advances by l*delta; kernels[0] is unused (identity).
  std::vector<TransitionKernel> kernels;
  kernels.reserve(levels + 1);
  kernels.push_back(TransitionKernel::build(model, delta, u0.grid));
  for (std::size_t l = 1; l <= levels; ++l)
    kernels.push_back(TransitionKernel::build(model, delta * static_cast<double>(l), u0.grid));

  std::vector<GridFn> linear(levels + 1);
  linear[0] = u0;
  for (std::size_t j = 1; j <= levels; ++j) linear[j] = kernels[j].apply(u0);

  auto reaction_of = [&](const GridFn& u) {
    GridFn r = u;
    for (double& v : r.values) v = rf.f_raw(std::clamp(v, 0.0, 1.0));
    r.left_ext = rf.f_raw(std::clamp(u.left_ext, 0.0, 1.0));
    r.right_ext = rf.f_raw(std::clamp(u.right_ext, 0.0, 1.0));
    return r;
  };

  std::vector<GridFn> current = linear;
  for (int iter = 1; iter <= max_iter; ++iter) {
    std::vector<GridFn> forcing(levels + 1);
    for (std::size_t j = 0; j <= levels; ++j) forcing[j] = reaction_of(current[j]);

    std::vector<GridFn> next(levels + 1);
    next[0] = u0;
    double change = 0.0;
    for (std::size_t j = 1; j <= levels; ++j) {
      GridFn acc = linear[j];
      for (std::size_t l = 0; l < j; ++l) {
        const GridFn term = l == 0 ? forcing[j] : kernels[l].apply(forcing[j - l]);
        for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += delta * term.values[i];
        acc.left_ext += delta * term.left_ext;
        acc.right_ext += delta * term.right_ext;
      }
      change = std::max({change, sup_distance(acc, current[j]),
                         std::abs(acc.left_ext - current[j].left_ext),
                         std::abs(acc.right_ext - current[j].right_ext)});
      next[j] = std::move(acc);
    }
    current = std::move(next);
    out.iterations = iter;
    out.last_change = change;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  out.solution = current.back();
  out.ladder = std::move(current);
  return out;
}

// ---------------------------------------------------------------------------
// Snapshots for feedback controls

const GridFn& SolutionPath::nearest(double tau) const {
  const double dt = horizon / static_cast<double>(steps());
  const double pos = std::clamp(tau / dt, 0.0, static_cast<double>(steps()));
  return frames[static_cast<std::size_t>(std::lround(pos))];
}

double SolutionPath::value(double tau, double x) const { return nearest(tau)(x); }

SolutionPath solve_path(const LevyModel& model, const ReactionFn& rf, const GridFn& u0, double t,
                        std::size_t frames, std::size_t substeps) {
  if (frames < 1) throw std::domain_error("solve_path: need at least one step");
  if (!(t > 0.0)) throw std::domain_error("solve_path: t must be > 0");
  if (substeps == 0) substeps = std::max<std::size_t>(1, (256 + frames - 1) / frames);
  const double dt = t / static_cast<double>(frames * substeps);
  const auto kernel = TransitionKernel::build(model, dt, u0.grid);

  SolutionPath path;
  path.horizon = t;
  path.frames.reserve(frames + 1);
  path.frames.push_back(u0);
  GridFn lower = u0;
  GridFn upper = u0;
  for (std::size_t j = 1; j <= frames; ++j) {
    for (std::size_t s = 0; s < substeps; ++s) {
      lower = apply_R(rf, dt, kernel.apply(lower));
      upper = kernel.apply(apply_R(rf, dt, upper));
    }
    Bracket b{lower, upper, static_cast<int>(j * substeps), bracket_gap(lower, upper)};
    path.max_gap = std::max(path.max_gap, b.gap);
    path.frames.push_back(b.midpoint());
  }
  return path;
}

// ---------------------------------------------------------------------------
// Median diagnostics

double median(const GridFn& gf, double level) {
  const auto& v = gf.values;
  const auto it = std::find_if(v.begin(), v.end(), [&](double x) { return x >= level; });
  if (it == v.end())
    throw std::domain_error(fmt::format("median: values never reach level {}", level));
  const auto i = static_cast<std::size_t>(it - v.begin());
  if (i == 0) {
    if (v[0] == level) return gf.grid.x_min;
    throw std::domain_error(fmt::format("median: values start above level {}", level));
  }
  const double h = gf.grid.step();
  return gf.grid.x(i - 1) + h * (level - v[i - 1]) / (v[i] - v[i - 1]);
}

MedianBounds median_bounds_dyadic(double t, int n, double b) {
  if (!(t > 0.0)) throw std::domain_error("median_bounds_dyadic: t must be > 0");
  if (n < 1) throw std::domain_error("median_bounds_dyadic: n must be >= 1");
  if (!(b > 0.5 && b < 1.0)) throw std::domain_error("median_bounds_dyadic: b must lie in (1/2, 1)");
  const double hi = -std::sqrt(t) * normal_quantile(std::exp(-t) / (1.0 + std::exp(-t)));
  const double nd = static_cast<double>(n);
  const double scale = std::sqrt(t / nd);
  const double step_level = 1.0 / (std::exp(t / nd) * (1.0 - b) + b);
  const double lo =
      -scale * normal_quantile(1.0 / (2.0 * b)) - (nd - 1.0) * scale * normal_quantile(step_level);
  return {lo, hi};
}

}  // namespace fkpp
