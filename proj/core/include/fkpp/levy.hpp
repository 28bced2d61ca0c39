#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fkpp/rng.hpp"

namespace fkpp {

struct JumpAtom {
  double size;
  double prob;
  friend bool operator==(const JumpAtom&, const JumpAtom&) = default;
};

/// Finite-activity Lévy process L with cumulant generating function
///
///   cgf(theta) = drift*theta + diffusion^2*theta^2/2
///              + jump_intensity * sum_k prob_k (exp(theta*size_k) - 1).
///
/// The compensator is not truncated, so `drift` is the total linear drift.
/// The process used by the PDE and control code is X = x - L.
struct LevyModel {
  double drift = 0.0;
  double diffusion = 0.0;
  double jump_intensity = 0.0;
  std::vector<JumpAtom> jumps;
  double theta_max = 50.0;

  static LevyModel brownian(double sigma = 1.0, double drift = 0.0);
  static LevyModel drift_only(double drift);

  /// Throws std::invalid_argument on a malformed model.
  void validate() const;
  bool has_jumps() const;
  /// L_t = drift * t almost surely.
  bool is_degenerate() const;
  std::string describe() const;

  friend bool operator==(const LevyModel&, const LevyModel&) = default;
};

/// Throws std::domain_error when |theta| > theta_max.
double cgf(const LevyModel& model, double theta);
double cgf_derivative(const LevyModel& model, double theta);

/// E[L_1], equal to cgf'(0).
double mean_increment(const LevyModel& model);

/// Exact sampler of L_{s+dt} - L_s. Holds the jump-size table so repeated
/// draws with varying dt do not rebuild it.
class IncrementSampler {
 public:
  explicit IncrementSampler(const LevyModel& model);
  double operator()(double dt, Rng& rng);

 private:
  double drift_;
  double diffusion_;
  double jump_intensity_;
  std::vector<double> sizes_;
  std::normal_distribution<double> gauss_;
  std::discrete_distribution<std::size_t> pick_;
};

double sample_increment(const LevyModel& model, double dt, Rng& rng);

/// Law of L_dt written as a finite Gaussian mixture: one component per
/// attainable total jump size (Poisson count truncated once the remaining
/// count tail is below `tail`). Components with diffusion 0 are point masses.
struct GaussianComponent {
  double weight;
  double mean;
  double stddev;
};
std::vector<GaussianComponent> increment_mixture(const LevyModel& model, double dt,
                                                 double tail = 1e-13);

struct EmpiricalOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
};

/// Distribution function of X_t = -L_t started at 0. Exact for models without
/// jumps; otherwise the empirical CDF of a cached seeded sample.
double cdf_x(const LevyModel& model, double t, double y, const EmpiricalOptions& opts = {});

/// Generalized inverse inf{x : cdf_x(x) >= p} for p in (0, 1).
double quantile_x(const LevyModel& model, double t, double p, const EmpiricalOptions& opts = {});

/// Number of cached empirical samples currently held (diagnostics/tests).
std::size_t empirical_cache_size();
void clear_empirical_cache();

struct LegendreResult {
  double value;
  double argmax;
  bool saturated;  // maximizer sits on +-theta_max
};

/// sup over |theta| <= theta_max of (r*theta - cgf(theta)).
LegendreResult legendre(const LevyModel& model, double r);

enum class SpeedMethod { inf_form, sup_form, perspective_form };
const char* to_string(SpeedMethod method);

struct SpeedResult {
  double q;
  double theta_star;
  SpeedMethod method;
  bool saturated = false;
};

/// Front speed q = inf_{theta > 0} (cgf(theta) + gamma) / theta, computed by
/// the requested route. Degenerate (pure drift) models return q = drift.
SpeedResult front_speed(const LevyModel& model, double gamma,
                        SpeedMethod method = SpeedMethod::inf_form);

struct SpeedReport {
  SpeedResult inf_form;
  SpeedResult sup_form;
  SpeedResult perspective_form;

  double max_disagreement() const;
  bool any_saturated() const;
};

SpeedReport front_speed_all(const LevyModel& model, double gamma);

}  // namespace fkpp
