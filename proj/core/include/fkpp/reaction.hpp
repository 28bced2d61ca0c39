#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace fkpp {

/// Offspring distribution of N with finite support {0, ..., kMaxOffspring}.
struct OffspringLaw {
  static constexpr std::size_t kMaxOffspring = 64;

  std::vector<double> pmf;  // pmf[k] = P(N = k)

  static OffspringLaw from_pairs(const std::vector<std::pair<std::size_t, double>>& pairs);
  static OffspringLaw dyadic() { return from_pairs({{2, 1.0}}); }

  /// Throws std::invalid_argument unless the pmf is a probability vector.
  void validate() const;
  double mean() const;
  std::size_t max_offspring() const { return pmf.empty() ? 0 : pmf.size() - 1; }

  friend bool operator==(const OffspringLaw&, const OffspringLaw&) = default;
};

/// Generating function G(s) = E[s^N] on [0, 1] (0^0 = 1).
double pgf(const OffspringLaw& law, double s);
double pgf_derivative(const OffspringLaw& law, double s);

struct ExtinctionProbability {
  double value;
  bool degenerate;  // G(s) = s identically (law {1:1})
};

/// Smallest root of G(s) = s in [0, 1].
ExtinctionProbability extinction_prob(const OffspringLaw& law);

/// The convex nonlinearity f(u) = G(u) - u on [0, 1] together with its roots
/// alpha <= 1 and the slope gamma = f'(1) = E[N] - 1. Branching happens at
/// rate one.
class ReactionFn {
 public:
  explicit ReactionFn(OffspringLaw law);

  const OffspringLaw& law() const { return law_; }
  double alpha() const { return alpha_; }
  double beta() const { return 1.0 - alpha_; }
  double gamma() const { return gamma_; }
  bool degenerate() const { return degenerate_; }

  /// Admissible control range [-1, gamma].
  double control_min() const { return -1.0; }
  double control_max() const { return gamma_; }
  /// sup_{v} |f'(v)| on [0, 1] is bounded by E[N] + 1.
  double lipschitz_bound() const { return law_.mean() + 1.0; }

  // Unchecked polynomial evaluation; callers guarantee u is near [0, 1].
  double f_raw(double u) const;
  double f_prime_raw(double u) const;

 private:
  OffspringLaw law_;
  double alpha_;
  double gamma_;
  bool degenerate_;
};

/// f(u) = G(u) - u; throws std::domain_error for u outside [0, 1].
double f_eval(const ReactionFn& rf, double u);
double f_prime(const ReactionFn& rf, double u);
/// g(v) = -f(1 - v), the nonlinearity seen by v = 1 - u.
double g_eval(const ReactionFn& rf, double v);

/// Conjugate sup_{v in [0,1]} (v*z - f(v)) for z in [-1, gamma].
double fhat(const ReactionFn& rf, double z);
/// The maximising v in fhat (the point where f'(v) = z, clipped to [0, 1]).
double fhat_argmax(const ReactionFn& rf, double z);

/// Flow R_t of r' = f(r); r0 in [0, 1], t >= 0. Result clamped to [0, 1].
double reaction_semigroup(const ReactionFn& rf, double r0, double t);
/// Q_t(q0) = 1 - R_t(1 - q0), the flow of q' = g(q).
double dual_semigroup(const ReactionFn& rf, double q0, double t);
/// Q_delta^{-1}(b) for b in (0, beta), by running q' = -g(q) for time delta.
double dual_semigroup_inverse(const ReactionFn& rf, double b, double delta);

}  // namespace fkpp
