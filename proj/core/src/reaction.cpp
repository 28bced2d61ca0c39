#include "fkpp/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "fkpp/optimize.hpp"

namespace fkpp {

namespace {

constexpr double kOdeTol = 1e-10;
constexpr double kRootTol = 1e-12;

double horner(const std::vector<double>& pmf, double s) {
  double acc = 0.0;
  for (auto it = pmf.rbegin(); it != pmf.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double horner_derivative(const std::vector<double>& pmf, double s) {
  double acc = 0.0;
  for (std::size_t k = pmf.size(); k-- > 1;) acc = acc * s + static_cast<double>(k) * pmf[k];
  return acc;
}

double horner_second_derivative(const std::vector<double>& pmf, double s) {
  double acc = 0.0;
  for (std::size_t k = pmf.size(); k-- > 2;)
    acc = acc * s + static_cast<double>(k * (k - 1)) * pmf[k];
  return acc;
}

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error(fmt::format("{}: {} outside [0, 1]", what, x));
}

// Classical RK4 with step doubling; the local error estimate |y2 - y1| / 15
// is held below kOdeTol and the Richardson-extrapolated value is kept.
template <class F>
double integrate_flow(F&& rhs, double y0, double horizon) {
  if (horizon == 0.0) return y0;
  auto rk4 = [&](double y, double h) {
    const double k1 = rhs(y);
    const double k2 = rhs(y + 0.5 * h * k1);
    const double k3 = rhs(y + 0.5 * h * k2);
    const double k4 = rhs(y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  double y = y0;
  double elapsed = 0.0;
  double h = std::min(horizon, 0.25);
  while (elapsed < horizon) {
    const bool last = elapsed + h >= horizon;
    const double step = last ? horizon - elapsed : h;
    const double coarse = rk4(y, step);
    const double fine = rk4(rk4(y, 0.5 * step), 0.5 * step);
    const double err = std::abs(fine - coarse) / 15.0;
    if (err <= kOdeTol || step < 1e-12) {
      y = fine + (fine - coarse) / 15.0;
      elapsed = last ? horizon : elapsed + step;
    }
    const double factor = err == 0.0 ? 4.0 : 0.9 * std::pow(kOdeTol / err, 0.2);
    h = step * std::clamp(factor, 0.2, 4.0);
  }
  return y;
}

}  // namespace

// ---------------------------------------------------------------------------
// OffspringLaw

OffspringLaw OffspringLaw::from_pairs(const std::vector<std::pair<std::size_t, double>>& pairs) {
  OffspringLaw law;
  for (const auto& [k, p] : pairs) {
    if (k > kMaxOffspring)
      throw std::invalid_argument(fmt::format("OffspringLaw: k = {} exceeds {}", k, kMaxOffspring));
    if (law.pmf.size() <= k) law.pmf.resize(k + 1, 0.0);
    law.pmf[k] += p;
  }
  law.validate();
  return law;
}

void OffspringLaw::validate() const {
  if (pmf.empty()) throw std::invalid_argument("OffspringLaw: empty pmf");
  if (pmf.size() > kMaxOffspring + 1) throw std::invalid_argument("OffspringLaw: support too large");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("OffspringLaw: p_k must lie in [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument(fmt::format("OffspringLaw: probabilities sum to {}", total));
}

double OffspringLaw::mean() const {
  double m = 0.0;
  for (std::size_t k = 1; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
  return m;
}

double pgf(const OffspringLaw& law, double s) {
  check_unit(s, "pgf");
  return horner(law.pmf, s);
}

double pgf_derivative(const OffspringLaw& law, double s) {
  check_unit(s, "pgf_derivative");
  return horner_derivative(law.pmf, s);
}

ExtinctionProbability extinction_prob(const OffspringLaw& law) {
  law.validate();
  auto excess = [&](double s) { return horner(law.pmf, s) - s; };
  const double p0 = law.pmf[0];
  const double p1 = law.pmf.size() > 1 ? law.pmf[1] : 0.0;
  if (std::abs(p1 - 1.0) <= 1e-15) return {0.0, true};
  if (p0 == 0.0) return {0.0, false};
  if (law.mean() <= 1.0) return {1.0, false};
  // G(s) - s is convex with value p0 > 0 at 0, value 0 at 1 and positive
  // slope at 1, so it dips below zero at its minimiser.
  auto slope = [&](double s) { return horner_derivative(law.pmf, s) - 1.0; };
  const double valley = bisect(slope, 0.0, 1.0, kRootTol);
  return {bisect(excess, 0.0, valley, kRootTol), false};
}

// ---------------------------------------------------------------------------
// ReactionFn

ReactionFn::ReactionFn(OffspringLaw law) : law_(std::move(law)) {
  const auto ext = extinction_prob(law_);
  alpha_ = ext.value;
  degenerate_ = ext.degenerate;
  gamma_ = law_.mean() - 1.0;
}

double ReactionFn::f_raw(double u) const {
  if (u == 1.0) return 0.0;  // G(1) = 1 even when the pmf sum rounds
  return horner(law_.pmf, u) - u;
}
double ReactionFn::f_prime_raw(double u) const { return horner_derivative(law_.pmf, u) - 1.0; }

double f_eval(const ReactionFn& rf, double u) {
  check_unit(u, "f_eval");
  return rf.f_raw(u);
}

double f_prime(const ReactionFn& rf, double u) {
  check_unit(u, "f_prime");
  return rf.f_prime_raw(u);
}

double g_eval(const ReactionFn& rf, double v) {
  check_unit(v, "g_eval");
  return -rf.f_raw(1.0 - v);
}

double fhat_argmax(const ReactionFn& rf, double z) {
  if (!(z >= rf.control_min() && z <= rf.control_max()))
    throw std::domain_error(
        fmt::format("fhat: z = {} outside [{}, {}]", z, rf.control_min(), rf.control_max()));
  const auto& pmf = rf.law().pmf;
  const double target = z + 1.0;  // solve G'(v) = z + 1
  if (target <= horner_derivative(pmf, 0.0)) return 0.0;
  if (target >= horner_derivative(pmf, 1.0)) return 1.0;
  // G' is increasing and convex on [0, 1]; Newton from the right end
  // decreases monotonically onto the root.
  double v = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double step = (horner_derivative(pmf, v) - target) / horner_second_derivative(pmf, v);
    const double next = std::clamp(v - step, 0.0, 1.0);
    if (std::abs(next - v) <= 1e-16) {
      v = next;
      break;
    }
    v = next;
  }
  return v;
}

double fhat(const ReactionFn& rf, double z) {
  const double v = fhat_argmax(rf, z);
  return v * z - rf.f_raw(v);
}

// ---------------------------------------------------------------------------
// Reaction semigroups

double reaction_semigroup(const ReactionFn& rf, double r0, double t) {
  check_unit(r0, "reaction_semigroup");
  if (!(t >= 0.0)) throw std::domain_error("reaction_semigroup: t must be >= 0");
  if (r0 == 1.0 || rf.degenerate()) return r0;
  const double r = integrate_flow([&](double r) { return rf.f_raw(r); }, r0, t);
  return std::clamp(r, 0.0, 1.0);
}

double dual_semigroup(const ReactionFn& rf, double q0, double t) {
  check_unit(q0, "dual_semigroup");
  return 1.0 - reaction_semigroup(rf, 1.0 - q0, t);
}

double dual_semigroup_inverse(const ReactionFn& rf, double b, double delta) {
  if (!(b > 0.0 && b < rf.beta()))
    throw std::domain_error(fmt::format("dual_semigroup_inverse: b = {} outside (0, {})", b, rf.beta()));
  if (!(delta >= 0.0)) throw std::domain_error("dual_semigroup_inverse: delta must be >= 0");
  // Backward flow of q' = g(q) = -f(1 - q): q' = f(1 - q).
  const double q = integrate_flow([&](double q) { return rf.f_raw(1.0 - q); }, b, delta);
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace fkpp
