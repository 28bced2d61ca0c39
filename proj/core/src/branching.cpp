#include "fkpp/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "fkpp/parallel.hpp"

namespace fkpp {

namespace {

struct Pending {
  double position;
  double remaining;
};

// Draws for one realisation. Holds the per-generator normal cache, so it must
// stay paired with a single Rng.
class TreeGrower {
 public:
  explicit TreeGrower(const BranchingConfig& config)
      : config_(config),
        draw_(config.model),
        offspring_(config.law.pmf.begin(), config.law.pmf.end()) {}

  // Calls visit(position) for every particle alive at t; visit returns false
  // to stop the run early.
  template <class Visit>
  RunStatus grow(double t, Rng& rng, std::size_t& count, Visit&& visit) {
    count = 0;
    stack_.clear();
    stack_.push_back({config_.start, t});
    while (!stack_.empty()) {
      const Pending p = stack_.back();
      stack_.pop_back();
      const double life = lifetime_(rng);
      if (life >= p.remaining) {
        const double pos = p.remaining > 0.0 ? p.position + draw_(p.remaining, rng) : p.position;
        if (++count > config_.cap) return RunStatus::cap_exceeded;
        if (!visit(pos)) return RunStatus::alive;
        continue;
      }
      const double pos = p.position + draw_(life, rng);
      const std::size_t children = offspring_(rng);
      for (std::size_t c = 0; c < children; ++c) stack_.push_back({pos, p.remaining - life});
      if (stack_.size() > config_.cap) return RunStatus::cap_exceeded;
    }
    return count == 0 ? RunStatus::extinct : RunStatus::alive;
  }

 private:
  const BranchingConfig& config_;
  IncrementSampler draw_;
  std::exponential_distribution<double> lifetime_{1.0};
  std::discrete_distribution<std::size_t> offspring_;
  std::vector<Pending> stack_;
};

RunOutcome grow_outcome(TreeGrower& grower, double t, Rng& rng, bool keep_positions) {
  RunOutcome out;
  out.rightmost = -std::numeric_limits<double>::infinity();
  out.status = grower.grow(t, rng, out.n_particles, [&](double pos) {
    out.rightmost = std::max(out.rightmost, pos);
    if (keep_positions) out.positions.push_back(pos);
    return true;
  });
  if (out.status != RunStatus::alive) {
    out.rightmost = -std::numeric_limits<double>::infinity();
    out.positions.clear();
    if (out.status == RunStatus::extinct) out.n_particles = 0;
  }
  return out;
}

void check_horizon(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("branching: t must be finite and >= 0");
}

}  // namespace

void BranchingConfig::validate() const {
  model.validate();
  law.validate();
  if (cap < 1) throw std::invalid_argument("BranchingConfig: cap must be >= 1");
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::alive: return "ALIVE";
    case RunStatus::extinct: return "EXTINCT";
    case RunStatus::cap_exceeded: return "CAP_EXCEEDED";
  }
  return "UNKNOWN";
}

RunOutcome simulate(const BranchingConfig& config, double t, Rng& rng, bool keep_positions) {
  config.validate();
  check_horizon(t);
  TreeGrower grower(config);
  return grow_outcome(grower, t, rng, keep_positions);
}

std::vector<RunOutcome> simulate_many(const BranchingConfig& config, double t,
                                      const BatchOptions& opts) {
  config.validate();
  check_horizon(t);
  std::vector<RunOutcome> out(opts.n_runs);
  parallel_for(opts.n_runs, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_stream(opts.seed, i);
      TreeGrower grower(config);
      out[i] = grow_outcome(grower, t, rng, false);
    }
  });
  return out;
}

McKeanEstimate mckean_check(const BranchingConfig& config, const GridFn& u0, double t, double x,
                            const BatchOptions& opts) {
  config.validate();
  check_horizon(t);
  if (opts.n_runs < 2) throw std::domain_error("mckean_check: need at least two runs");
  std::vector<double> product(opts.n_runs, 1.0);
  std::vector<char> capped(opts.n_runs, 0);
  parallel_for(opts.n_runs, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_stream(opts.seed, i);
      TreeGrower grower(config);
      double prod = 1.0;
      std::size_t count = 0;
      const auto status = grower.grow(t, rng, count, [&](double pos) {
        prod *= u0(x - pos);
        return prod != 0.0;
      });
      product[i] = prod;
      capped[i] = status == RunStatus::cap_exceeded;
    }
  });
  std::vector<double> kept;
  kept.reserve(opts.n_runs);
  McKeanEstimate est;
  for (std::size_t i = 0; i < opts.n_runs; ++i) {
    if (capped[i])
      ++est.capped;
    else
      kept.push_back(product[i]);
  }
  est.value = summarize(kept);
  est.flagged = static_cast<double>(est.capped) > 0.01 * static_cast<double>(opts.n_runs);
  return est;
}

ExtinctionEstimate extinction_estimate(const BranchingConfig& config, double t_long,
                                       const BatchOptions& opts, std::size_t survivor_threshold) {
  config.validate();
  check_horizon(t_long);
  if (opts.n_runs < 1) throw std::domain_error("extinction_estimate: need at least one run");
  if (survivor_threshold < 1) throw std::domain_error("extinction_estimate: threshold must be >= 1");
  std::vector<char> extinct(opts.n_runs, 0);
  std::vector<char> absorbed(opts.n_runs, 0);
  parallel_for(opts.n_runs, opts.threads, [&](std::size_t begin, std::size_t end) {
    std::discrete_distribution<std::size_t> offspring(config.law.pmf.begin(), config.law.pmf.end());
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_stream(opts.seed, i);
      offspring.reset();
      std::size_t alive = 1;
      double clock = 0.0;
      while (alive > 0 && alive < survivor_threshold) {
        // Next branching among `alive` rate-one clocks.
        clock += std::exponential_distribution<double>(static_cast<double>(alive))(rng);
        if (clock >= t_long) break;
        alive = alive - 1 + offspring(rng);
      }
      extinct[i] = alive == 0;
      absorbed[i] = alive >= survivor_threshold;
    }
  });
  ExtinctionEstimate est;
  est.n_runs = opts.n_runs;
  std::size_t dead = 0;
  for (std::size_t i = 0; i < opts.n_runs; ++i) {
    dead += extinct[i] ? 1 : 0;
    est.absorbed += absorbed[i] ? 1 : 0;
  }
  const double n = static_cast<double>(opts.n_runs);
  est.probability = static_cast<double>(dead) / n;
  est.std_error = std::sqrt(est.probability * (1.0 - est.probability) / n);
  return est;
}

double empirical_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::domain_error("empirical_quantile: empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("empirical_quantile: p must lie in (0, 1]");
  const double n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(p * n));
  while (k > 1 && static_cast<double>(k - 1) / n >= p) --k;
  while (static_cast<double>(k) / n < p) ++k;
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

std::vector<SpeedRow> speed_experiment(const BranchingConfig& config,
                                       const std::vector<double>& times, const BatchOptions& opts) {
  config.validate();
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::domain_error("speed_experiment: times must be ascending");
  const double growth = config.law.mean() - 1.0;
  if (growth > 0.0) {
    const double t_limit = std::log(static_cast<double>(config.cap)) / growth;
    for (double t : times)
      if (t > t_limit)
        throw std::domain_error(fmt::format(
            "speed_experiment: t = {} exceeds the cap-derived limit log(cap)/(E[N]-1) = {:.4g}", t,
            t_limit));
  }
  std::vector<SpeedRow> rows;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    if (!(t > 0.0)) throw std::domain_error("speed_experiment: times must be > 0");
    BatchOptions batch = opts;
    batch.seed = opts.seed + 0x9e3779b97f4a7c15ULL * (ti + 1);
    const auto runs = simulate_many(config, t, batch);
    SpeedRow row;
    row.t = t;
    std::vector<double> rightmost;
    std::size_t extinct = 0;
    for (const auto& r : runs) {
      switch (r.status) {
        case RunStatus::alive: rightmost.push_back(r.rightmost); break;
        case RunStatus::extinct: ++extinct; break;
        case RunStatus::cap_exceeded: ++row.n_capped; break;
      }
    }
    row.n_alive = rightmost.size();
    row.flagged = row.n_capped > 0;
    const std::size_t counted = runs.size() - row.n_capped;
    row.extinct_frac = counted ? static_cast<double>(extinct) / static_cast<double>(counted) : 0.0;
    if (!rightmost.empty()) {
      std::sort(rightmost.begin(), rightmost.end());
      row.median_rightmost = empirical_quantile(rightmost, 0.5);
      row.median_speed = row.median_rightmost / t;
      row.q10 = empirical_quantile(rightmost, 0.1) / t;
      row.q90 = empirical_quantile(rightmost, 0.9) / t;
    } else {
      row.median_rightmost = row.median_speed = row.q10 = row.q90 =
          -std::numeric_limits<double>::infinity();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fkpp
