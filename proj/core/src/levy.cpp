#include "fkpp/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "fkpp/normal.hpp"
#include "fkpp/optimize.hpp"

namespace fkpp {

namespace {

constexpr double kGoldenTol = 1e-10;
constexpr double kBisectTol = 1e-8;
constexpr std::size_t kLegendreScanPoints = 400;

std::vector<double> jump_probabilities(const std::vector<JumpAtom>& jumps) {
  std::vector<double> p;
  p.reserve(jumps.size());
  for (const auto& j : jumps) p.push_back(j.prob);
  return p;
}

}  // namespace

LevyModel LevyModel::brownian(double sigma, double drift) {
  LevyModel m;
  m.drift = drift;
  m.diffusion = sigma;
  return m;
}

LevyModel LevyModel::drift_only(double drift) {
  LevyModel m;
  m.drift = drift;
  return m;
}

void LevyModel::validate() const {
  if (!std::isfinite(drift)) throw std::invalid_argument("LevyModel: drift must be finite");
  if (!(diffusion >= 0.0) || !std::isfinite(diffusion))
    throw std::invalid_argument("LevyModel: diffusion must be finite and >= 0");
  if (!(jump_intensity >= 0.0) || !std::isfinite(jump_intensity))
    throw std::invalid_argument("LevyModel: jump_intensity must be finite and >= 0");
  if (!(theta_max > 0.0)) throw std::invalid_argument("LevyModel: theta_max must be > 0");
  if (jump_intensity > 0.0) {
    if (jumps.empty()) throw std::invalid_argument("LevyModel: jump_intensity > 0 needs jump sizes");
    double total = 0.0;
    for (const auto& j : jumps) {
      if (!(j.prob >= 0.0) || !std::isfinite(j.size))
        throw std::invalid_argument("LevyModel: jump probabilities must be >= 0, sizes finite");
      total += j.prob;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("LevyModel: jump probabilities must sum to 1");
  }
}

bool LevyModel::has_jumps() const {
  if (jump_intensity <= 0.0) return false;
  return std::any_of(jumps.begin(), jumps.end(),
                     [](const JumpAtom& j) { return j.prob > 0.0 && j.size != 0.0; });
}

bool LevyModel::is_degenerate() const { return diffusion == 0.0 && !has_jumps(); }

std::string LevyModel::describe() const {
  std::string out = fmt::format("drift={:.17g};sigma={:.17g};jump_intensity={:.17g};jumps=", drift,
                                diffusion, jump_intensity);
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    if (i) out += ',';
    out += fmt::format("{:.17g}:{:.17g}", jumps[i].size, jumps[i].prob);
  }
  return out;
}

double cgf(const LevyModel& model, double theta) {
  if (std::abs(theta) > model.theta_max)
    throw std::domain_error(fmt::format("cgf: |theta| = {} exceeds theta_max = {}",
                                        std::abs(theta), model.theta_max));
  if (theta == 0.0) return 0.0;
  double value = model.drift * theta + 0.5 * model.diffusion * model.diffusion * theta * theta;
  if (model.jump_intensity > 0.0) {
    double s = 0.0;
    for (const auto& j : model.jumps) s += j.prob * std::expm1(theta * j.size);
    value += model.jump_intensity * s;
  }
  return value;
}

double cgf_derivative(const LevyModel& model, double theta) {
  if (std::abs(theta) > model.theta_max)
    throw std::domain_error("cgf_derivative: |theta| exceeds theta_max");
  double value = model.drift + model.diffusion * model.diffusion * theta;
  if (model.jump_intensity > 0.0) {
    double s = 0.0;
    for (const auto& j : model.jumps) s += j.prob * j.size * std::exp(theta * j.size);
    value += model.jump_intensity * s;
  }
  return value;
}

double mean_increment(const LevyModel& model) {
  double m = model.drift;
  if (model.jump_intensity > 0.0) {
    double s = 0.0;
    for (const auto& j : model.jumps) s += j.prob * j.size;
    m += model.jump_intensity * s;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Sampling

IncrementSampler::IncrementSampler(const LevyModel& model)
    : drift_(model.drift),
      diffusion_(model.diffusion),
      jump_intensity_(model.has_jumps() ? model.jump_intensity : 0.0) {
  if (jump_intensity_ > 0.0) {
    for (const auto& j : model.jumps) sizes_.push_back(j.size);
    const auto p = jump_probabilities(model.jumps);
    pick_ = std::discrete_distribution<std::size_t>(p.begin(), p.end());
  }
}

double IncrementSampler::operator()(double dt, Rng& rng) {
  double x = drift_ * dt;
  if (diffusion_ > 0.0) x += diffusion_ * std::sqrt(dt) * gauss_(rng);
  if (jump_intensity_ > 0.0) {
    std::poisson_distribution<long> count(jump_intensity_ * dt);
    for (long k = count(rng); k > 0; --k) x += sizes_[pick_(rng)];
  }
  return x;
}

double sample_increment(const LevyModel& model, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::domain_error("sample_increment: dt must be > 0");
  IncrementSampler sampler(model);
  return sampler(dt, rng);
}

// ---------------------------------------------------------------------------
// Mixture representation of the increment law

namespace {

struct Atom {
  double value;
  double weight;
};

void merge_atoms(std::vector<Atom>& atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (!merged.empty() &&
        std::abs(a.value - merged.back().value) <= 1e-12 * (1.0 + std::abs(a.value))) {
      merged.back().weight += a.weight;
    } else {
      merged.push_back(a);
    }
  }
  atoms.swap(merged);
}

}  // namespace

std::vector<GaussianComponent> increment_mixture(const LevyModel& model, double dt, double tail) {
  if (!(dt > 0.0)) throw std::domain_error("increment_mixture: dt must be > 0");
  const double sd = model.diffusion * std::sqrt(dt);
  const double shift = model.drift * dt;
  if (!model.has_jumps()) return {{1.0, shift, sd}};

  const double mu = model.jump_intensity * dt;
  std::vector<Atom> all;
  std::vector<Atom> sum_law{{0.0, 1.0}};  // law of the sum of k jumps
  double pk = std::exp(-mu);
  double covered = 0.0;
  constexpr long kMaxJumps = 100000;
  for (long k = 0; k <= kMaxJumps; ++k) {
    if (k > 0) {
      pk *= mu / static_cast<double>(k);
      std::vector<Atom> next;
      next.reserve(sum_law.size() * model.jumps.size());
      for (const auto& a : sum_law)
        for (const auto& j : model.jumps)
          if (j.prob > 0.0) next.push_back({a.value + j.size, a.weight * j.prob});
      merge_atoms(next);
      // Drop atoms that cannot matter at double precision.
      std::erase_if(next, [](const Atom& a) { return a.weight < 1e-300; });
      sum_law.swap(next);
    }
    for (const auto& a : sum_law) all.push_back({shift + a.value, pk * a.weight});
    covered += pk;
    if (1.0 - covered < tail && static_cast<double>(k) >= mu) break;
  }
  merge_atoms(all);
  double total = 0.0;
  for (const auto& a : all) total += a.weight;
  std::vector<GaussianComponent> out;
  out.reserve(all.size());
  for (const auto& a : all) out.push_back({a.weight / total, a.value, sd});
  return out;
}

// ---------------------------------------------------------------------------
// Marginal law of X_t = -L_t

namespace {

using CacheKey = std::tuple<std::string, double, std::size_t, std::uint64_t>;

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<CacheKey, std::shared_ptr<const std::vector<double>>>& cache() {
  static std::map<CacheKey, std::shared_ptr<const std::vector<double>>> c;
  return c;
}

std::shared_ptr<const std::vector<double>> empirical_sample(const LevyModel& model, double t,
                                                            const EmpiricalOptions& opts) {
  CacheKey key{model.describe(), t, opts.samples, opts.seed};
  {
    std::lock_guard lock(cache_mutex());
    if (auto it = cache().find(key); it != cache().end()) return it->second;
  }
  if (opts.samples == 0) throw std::invalid_argument("cdf_x: empirical sample size must be > 0");
  // Filled outside the lock; concurrent fills of one key are identical.
  auto sample = std::make_shared<std::vector<double>>(opts.samples);
  Rng rng = make_stream(opts.seed, 0);
  IncrementSampler draw(model);
  for (auto& x : *sample) x = -draw(t, rng);
  std::sort(sample->begin(), sample->end());
  std::lock_guard lock(cache_mutex());
  auto [it, inserted] = cache().emplace(key, std::move(sample));
  return it->second;
}

void check_time(double t) {
  if (!(t > 0.0)) throw std::domain_error("marginal law of X_t requires t > 0");
}

}  // namespace

std::size_t empirical_cache_size() {
  std::lock_guard lock(cache_mutex());
  return cache().size();
}

void clear_empirical_cache() {
  std::lock_guard lock(cache_mutex());
  cache().clear();
}

double cdf_x(const LevyModel& model, double t, double y, const EmpiricalOptions& opts) {
  check_time(t);
  const double centre = -model.drift * t;
  if (!model.has_jumps()) {
    if (model.diffusion == 0.0) return y >= centre ? 1.0 : 0.0;
    return normal_cdf((y - centre) / (model.diffusion * std::sqrt(t)));
  }
  const auto sample = empirical_sample(model, t, opts);
  const auto count = std::upper_bound(sample->begin(), sample->end(), y) - sample->begin();
  return static_cast<double>(count) / static_cast<double>(sample->size());
}

double quantile_x(const LevyModel& model, double t, double p, const EmpiricalOptions& opts) {
  check_time(t);
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile_x: p must lie in (0, 1)");
  const double centre = -model.drift * t;
  if (!model.has_jumps()) {
    if (model.diffusion == 0.0) return centre;
    return centre + model.diffusion * std::sqrt(t) * normal_quantile(p);
  }
  const auto sample = empirical_sample(model, t, opts);
  const double n = static_cast<double>(sample->size());
  // Smallest k with k/n >= p, evaluated exactly as cdf_x does.
  auto k = static_cast<std::size_t>(std::ceil(p * n));
  while (k > 1 && static_cast<double>(k - 1) / n >= p) --k;
  while (static_cast<double>(k) / n < p) ++k;
  k = std::clamp<std::size_t>(k, 1, sample->size());
  return (*sample)[k - 1];
}

// ---------------------------------------------------------------------------
// Convex duality and the front speed

LegendreResult legendre(const LevyModel& model, double r) {
  const double cap = model.theta_max;
  auto objective = [&](double theta) { return r * theta - cgf(model, theta); };
  const double step = 2.0 * cap / static_cast<double>(kLegendreScanPoints);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= kLegendreScanPoints; ++i) {
    const double theta = std::min(cap, -cap + step * static_cast<double>(i));
    const double v = objective(theta);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = std::max(-cap, -cap + step * (static_cast<double>(best) - 1.0));
  const double hi = std::min(cap, -cap + step * (static_cast<double>(best) + 1.0));
  const auto opt = golden_section_max(objective, lo, hi, kGoldenTol);
  const bool saturated = std::abs(std::abs(opt.argument) - cap) <= 1e-9;
  return {opt.value, opt.argument, saturated};
}

const char* to_string(SpeedMethod method) {
  switch (method) {
    case SpeedMethod::inf_form: return "inf_form";
    case SpeedMethod::sup_form: return "sup_form";
    case SpeedMethod::perspective_form: return "perspective_form";
  }
  return "unknown";
}

namespace {

SpeedResult speed_inf_form(const LevyModel& model, double gamma) {
  const double cap = model.theta_max;
  auto ratio = [&](double theta) { return (cgf(model, theta) + gamma) / theta; };
  // The ratio is quasi-convex on (0, cap]: its derivative has the sign of
  // theta*cgf'(theta) - cgf(theta) - gamma, which is nondecreasing.
  const double lo = cap * 1e-12;
  const auto opt = golden_section_min(ratio, lo, cap, kGoldenTol);
  return {opt.value, opt.argument, SpeedMethod::inf_form, opt.argument >= cap - 1e-9};
}

SpeedResult speed_sup_form(const LevyModel& model, double gamma) {
  const double mean = mean_increment(model);
  auto excess = [&](double r) { return legendre(model, r).value - gamma; };
  double width = 1.0;
  double hi = mean + width;
  int guard = 0;
  while (excess(hi) < 0.0) {
    width *= 2.0;
    hi = mean + width;
    if (++guard > 80) throw std::runtime_error("front_speed: sup_form failed to bracket");
  }
  const double q = bisect(excess, mean, hi, kBisectTol);
  const auto at_q = legendre(model, q);
  return {q, at_q.argmax, SpeedMethod::sup_form, at_q.saturated};
}

SpeedResult speed_perspective_form(const LevyModel& model, double gamma) {
  const double cap = model.theta_max;
  // Perspective Lambda°(theta) = -theta * cgf(-1/theta) for theta < 0; its
  // conjugate at gamma is maximised over theta in [-1/phi_min, -1/cap].
  auto objective = [&](double theta) { return gamma * theta + theta * cgf(model, -1.0 / theta); };
  const double hi = -1.0 / cap;
  const double lo = -1e4;
  const auto opt = golden_section_max(objective, lo, hi, kGoldenTol);
  const double phi = -1.0 / opt.argument;
  return {-opt.value, phi, SpeedMethod::perspective_form, opt.argument >= hi - 1e-12};
}

}  // namespace

SpeedResult front_speed(const LevyModel& model, double gamma, SpeedMethod method) {
  if (!(gamma > 0.0)) throw std::domain_error("front_speed: gamma must be > 0");
  model.validate();
  if (model.is_degenerate()) {
    // (b*theta + gamma)/theta decreases to b; the infimum is not attained.
    return {model.drift, std::numeric_limits<double>::infinity(), method, false};
  }
  switch (method) {
    case SpeedMethod::inf_form: return speed_inf_form(model, gamma);
    case SpeedMethod::sup_form: return speed_sup_form(model, gamma);
    case SpeedMethod::perspective_form: return speed_perspective_form(model, gamma);
  }
  throw std::invalid_argument("front_speed: unknown method");
}

double SpeedReport::max_disagreement() const {
  const double a = inf_form.q, b = sup_form.q, c = perspective_form.q;
  return std::max({std::abs(a - b), std::abs(a - c), std::abs(b - c)});
}

bool SpeedReport::any_saturated() const {
  return inf_form.saturated || sup_form.saturated || perspective_form.saturated;
}

SpeedReport front_speed_all(const LevyModel& model, double gamma) {
  return {front_speed(model, gamma, SpeedMethod::inf_form),
          front_speed(model, gamma, SpeedMethod::sup_form),
          front_speed(model, gamma, SpeedMethod::perspective_form)};
}

}  // namespace fkpp
