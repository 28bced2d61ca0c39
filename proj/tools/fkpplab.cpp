// fkpplab: command-line front end. Every command writes CSV with a header row
// to stdout (or --out FILE); diagnostics go to stderr.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fkpp/branching.hpp"
#include "fkpp/config.hpp"
#include "fkpp/control.hpp"
#include "fkpp/errors.hpp"
#include "fkpp/io.hpp"
#include "fkpp/levy.hpp"
#include "fkpp/reaction.hpp"
#include "fkpp/semigroup.hpp"

namespace {

using namespace fkpp;

constexpr int kExitOk = 0;
constexpr int kExitFlagged = 1;
constexpr int kExitGrid = 2;
constexpr int kExitMonteCarlo = 3;
constexpr int kExitUsage = 64;

// Raised inside Monte Carlo commands so that their failures map to exit 3.
struct MonteCarloFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::map<std::string, std::string> overrides;  // flag values, keyed like the config file
};

// Registers `--flag` on `cmd`; a given value overrides `key` from --config.
void bind(CLI::App* cmd, Globals& g, const std::string& flag, const std::string& key,
          const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&g, key](const std::string& value) { g.overrides[key] = value; }, help);
}

void bind_model(CLI::App* cmd, Globals& g) {
  bind(cmd, g, "--drift", "drift", "Linear drift b of L (default 0)");
  bind(cmd, g, "--sigma", "sigma", "Diffusion scale of L (default 1)");
  bind(cmd, g, "--jump-intensity", "jump_intensity", "Expected jumps per unit time");
  bind(cmd, g, "--jumps", "jumps", "Jump law as size:prob,...");
  bind(cmd, g, "--theta-max", "theta_max", "Cap on |theta| for the cgf (default 50)");
  bind(cmd, g, "--offspring", "offspring", "Offspring law as k:p,... (default 2:1)");
}

void bind_grid(CLI::App* cmd, Globals& g) {
  bind(cmd, g, "--x-min", "x_min", "Left grid end (default -15)");
  bind(cmd, g, "--x-max", "x_max", "Right grid end (default 15)");
  bind(cmd, g, "--points", "points", "Grid points (default 2001)");
  bind(cmd, g, "--initial", "initial", "Initial data: heaviside or a constant in [0,1]");
}

struct Run {
  KeyValueConfig config;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  LevyModel model() const { return levy_model_from(config); }
  OffspringLaw law() const { return offspring_from(config); }

  double real(const std::string& key, double fallback) const { return config.get_real(key, fallback); }

  std::size_t count(const std::string& key, std::int64_t fallback, std::int64_t min = 1) const {
    const auto v = config.get_int(key, fallback);
    if (v < min) throw ConfigError(fmt::format("{} must be >= {}", key, min));
    return static_cast<std::size_t>(v);
  }

  std::vector<double> reals(const std::string& key, const std::string& fallback) const {
    return parse_real_list(config.get_string(key, fallback));
  }

  GridSpec grid() const {
    GridSpec grid;
    grid.x_min = real("x_min", grid.x_min);
    grid.x_max = real("x_max", grid.x_max);
    grid.points = count("points", static_cast<std::int64_t>(grid.points), 2);
    try {
      grid.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return grid;
  }

  GridFn initial() const {
    const auto text = config.get_string("initial", "heaviside");
    if (text == "heaviside") return GridFn::heaviside(grid());
    const double c = parse_real(text);
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("initial constant must lie in [0, 1]");
    return GridFn::constant(grid(), c);
  }

  double horizon(const std::string& key = "t", double fallback = 1.0) const {
    const double t = real(key, fallback);
    if (!(t >= 0.0)) throw ConfigError(fmt::format("{} must be >= 0", key));
    return t;
  }
};

Run make_run(const Globals& g, std::uint64_t seed, bool seed_given, unsigned threads,
             bool threads_given) {
  Run run;
  if (!g.config_path.empty()) run.config = KeyValueConfig::load(g.config_path);
  for (const auto& [k, v] : g.overrides) run.config.set(k, v);
  run.seed = seed_given ? seed : static_cast<std::uint64_t>(run.config.get_int("seed", 1));
  run.threads = threads_given ? threads : static_cast<unsigned>(run.config.get_int("threads", 0));
  return run;
}

// ---------------------------------------------------------------------------

int cmd_speed(const Run& run, std::ostream& out, bool strict) {
  const auto model = run.model();
  const auto law = run.law();
  const double gamma = run.real("gamma", law.mean() - 1.0);
  if (!(gamma > 0.0)) throw ConfigError("speed needs gamma = E[N] - 1 > 0 (supercritical law)");
  const auto report = front_speed_all(model, gamma);
  write_speed_report_csv(out, report);
  if (report.any_saturated()) {
    std::cerr << "warning: a speed minimiser reached theta_max\n";
    if (strict) return kExitFlagged;
  }
  return kExitOk;
}

int cmd_solve(const Run& run, std::ostream& out) {
  const ReactionFn rf(run.law());
  const auto result = solve(run.model(), rf, run.initial(), run.horizon(), run.real("tol", 0.02),
                            static_cast<int>(run.count("n_max", 1024)));
  if (!result.converged)
    std::cerr << fmt::format("warning: gap {:.3g} above tolerance at n = {}\n", result.bracket.gap,
                             result.bracket.n);
  write_bracket_csv(out, result.bracket);
  return kExitOk;
}

int cmd_bounds(const Run& run, std::ostream& out) {
  const ReactionFn rf(run.law());
  const auto bracket = trotter_bounds(run.model(), rf, run.initial(), run.horizon(),
                                      static_cast<int>(run.count("n", 1)));
  write_bracket_csv(out, bracket);
  return kExitOk;
}

int cmd_median(const Run& run, std::ostream& out) {
  const auto model = run.model();
  const ReactionFn rf(run.law());
  const auto u0 = GridFn::heaviside(run.grid());
  const double tol = run.real("tol", 0.02);
  const auto b_values = run.reals("bound_b", "0.6,0.75,0.9");
  const auto n_values = run.reals("bound_n", "1,2,4");
  std::vector<MedianTraceRow> rows;
  for (double t : run.reals("times", "1,2,4")) {
    if (!(t > 0.0)) throw ConfigError("median times must be > 0");
    const auto s = solve(model, rf, u0, t, tol);
    MedianTraceRow row{t, median(s.solution), -std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()};
    for (double b : b_values)
      for (double n : n_values) {
        if (!(b > 0.5 && b < 1.0) || n < 1 || n != std::floor(n))
          throw ConfigError("bound_b must lie in (1/2, 1) and bound_n be positive integers");
        const auto mb = median_bounds_dyadic(t, static_cast<int>(n), b);
        row.lo_bound = std::max(row.lo_bound, mb.lo);
        row.hi_bound = std::min(row.hi_bound, mb.hi);
      }
    rows.push_back(row);
  }
  write_median_csv(out, rows);
  return kExitOk;
}

ControlPolicy named_policy(const std::string& name, const ReactionFn& rf, const LevyModel& model,
                           const GridFn& u0, double t, std::size_t steps) {
  if (name == "zero") return ControlPolicy::constant(rf, 0.0, name);
  if (name == "minus-one") return ControlPolicy::constant(rf, -1.0, name);
  if (name == "gamma") return ControlPolicy::constant(rf, rf.gamma(), name);
  if (name == "ramp") return ControlPolicy::ramp(rf, t);
  if (name == "optimal") return optimal_policy(model, rf, u0, t, steps);
  throw ConfigError("unknown policy '" + name + "'");
}

int cmd_control(const Run& run, std::ostream& out, const std::vector<std::string>& policies) {
  const auto model = run.model();
  const ReactionFn rf(run.law());
  const auto u0 = run.initial();
  const double t = run.horizon();
  if (!(t > 0.0)) throw ConfigError("control needs t > 0");
  const double x = run.real("x", 0.0);
  MonteCarloOptions mc;
  mc.n_paths = run.count("paths", 100'000);
  mc.steps = run.count("steps", 200);
  mc.seed = run.seed;
  mc.threads = run.threads;

  std::vector<ControlPolicy> chosen;
  for (const auto& name : policies) chosen.push_back(named_policy(name, rf, model, u0, t, mc.steps));

  std::vector<PolicyValueRow> rows;
  try {
    for (const auto& policy : chosen) {
      const auto est = estimate_value(model, x, t, policy, rf, u0, mc);
      if (est.clamped > 0)
        std::cerr << fmt::format("warning: policy {} clamped {} times\n", policy.name(), est.clamped);
      rows.push_back({policy.name(), t, x, est});
    }
  } catch (const GridTooSmallError&) {
    throw;
  } catch (const std::exception& e) {
    throw MonteCarloFailure(e.what());
  }
  write_policy_csv(out, rows);

  const auto reference = solve(model, rf, u0, t, run.real("tol", 0.02));
  const SolutionPath u = solve_path(model, rf, u0, t, mc.steps);
  const auto mart = martingale_check(model, rf, u, x, t, {0.25 * t, 0.5 * t, 0.75 * t, t}, mc);
  std::cerr << fmt::format("pde midpoint {} (gap {}); martingale max deviation {} (3*stderr {})\n",
                           format_real(reference.solution(x)), format_real(reference.bracket.gap),
                           format_real(mart.max_deviation),
                           format_real(3.0 * mart.max_std_error));
  return kExitOk;
}

int cmd_branch(const Run& run, std::ostream& out, const std::string& mode) {
  BranchingConfig config{run.model(), run.law()};
  config.cap = run.count("cap", 1'000'000);
  BatchOptions opts;
  opts.n_runs = run.count("runs", 10'000);
  opts.seed = run.seed;
  opts.threads = run.threads;
  const auto times = run.reals("times", "1,2,4");
  if (times.empty()) throw ConfigError("times must not be empty");
  try {
    if (mode == "runs") {
      bool header = true;
      for (double t : times) {
        write_runs_csv(out, t, simulate_many(config, t, opts), header);
        header = false;
      }
    } else if (mode == "speed") {
      const auto rows = speed_experiment(config, times, opts);
      for (const auto& row : rows)
        if (row.flagged)
          std::cerr << fmt::format("warning: t = {}: {} runs hit the cap and were excluded\n",
                                   format_real(row.t), row.n_capped);
      write_speed_summary_csv(out, rows);
    } else if (mode == "mckean") {
      const auto u0 = run.initial();
      out << "t,x,mean,stderr,n_runs,capped\n";
      for (double t : times)
        for (double x : run.reals("xs", "-1,0,1")) {
          const auto est = mckean_check(config, u0, t, x, opts);
          if (est.flagged)
            std::cerr << fmt::format("warning: t = {}: {} capped runs\n", format_real(t), est.capped);
          out << format_real(t) << ',' << format_real(x) << ',' << format_real(est.value.mean) << ','
              << format_real(est.value.std_error) << ',' << est.value.n_paths << ',' << est.capped
              << '\n';
        }
    } else {
      throw ConfigError("unknown branch mode '" + mode + "'");
    }
  } catch (const std::logic_error&) {
    throw;  // bad input, reported as usage
  } catch (const std::exception& e) {
    throw MonteCarloFailure(e.what());
  }
  return kExitOk;
}

int cmd_extinction(const Run& run, std::ostream& out) {
  BranchingConfig config{run.model(), run.law()};
  BatchOptions opts;
  opts.n_runs = run.count("runs", 100'000);
  opts.seed = run.seed;
  opts.threads = run.threads;
  const double t_long = run.horizon("t_long", 30.0);
  ExtinctionEstimate est;
  try {
    est = extinction_estimate(config, t_long, opts);
  } catch (const std::logic_error&) {
    throw;
  } catch (const std::exception& e) {
    throw MonteCarloFailure(e.what());
  }
  const auto exact = extinction_prob(config.law);
  out << "t_long,probability,stderr,n_runs,absorbed,exact\n";
  out << format_real(t_long) << ',' << format_real(est.probability) << ','
      << format_real(est.std_error) << ',' << est.n_runs << ',' << est.absorbed << ','
      << format_real(exact.value) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for convex reaction-diffusion fronts and branching Levy processes",
               "fkpplab"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_path;
  bool strict = false;
  app.add_option("--config", g.config_path, "Plain-text key=value file; flags override it");
  auto* seed_opt = app.add_option("--seed", seed, "Base seed (default 1)");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: all)");
  app.add_option("--out", out_path, "Write CSV to FILE instead of stdout");
  app.add_flag("--strict", strict, "Turn speed saturation warnings into exit code 1");

  auto* speed = app.add_subcommand("speed", "Front speed by three routes");
  bind_model(speed, g);
  bind(speed, g, "--gamma", "gamma", "Growth rate (default E[N] - 1)");

  auto* solve_cmd = app.add_subcommand("solve", "Refined Trotter bracket of u(t, .)");
  auto* bounds = app.add_subcommand("bounds", "Trotter bracket at a fixed number of steps");
  auto* median_cmd = app.add_subcommand("median", "PDE median trace with dyadic bounds");
  for (auto* cmd : {solve_cmd, bounds, median_cmd}) {
    bind_model(cmd, g);
    bind_grid(cmd, g);
    bind(cmd, g, "--tol", "tol", "Target bracket gap (default 0.02)");
  }
  for (auto* cmd : {solve_cmd, bounds}) bind(cmd, g, "-t,--time", "t", "Horizon (default 1)");
  bind(solve_cmd, g, "--n-max", "n_max", "Largest splitting count (default 1024)");
  bind(bounds, g, "-n,--steps", "n", "Splitting steps (default 1)");
  bind(median_cmd, g, "--times", "times", "Horizons, comma separated (default 1,2,4)");
  bind(median_cmd, g, "--bound-b", "bound_b", "Bound parameters b (default 0.6,0.75,0.9)");
  bind(median_cmd, g, "--bound-n", "bound_n", "Bound parameters n (default 1,2,4)");

  auto* control = app.add_subcommand("control", "Monte Carlo values of control policies");
  std::vector<std::string> policies{"zero", "minus-one", "gamma", "ramp", "optimal"};
  bind_model(control, g);
  bind_grid(control, g);
  bind(control, g, "-t,--time", "t", "Horizon (default 1)");
  bind(control, g, "-x,--position", "x", "Starting point (default 0)");
  bind(control, g, "--paths", "paths", "Monte Carlo paths (default 100000)");
  bind(control, g, "--steps", "steps", "Time steps J per path (default 200)");
  bind(control, g, "--tol", "tol", "Gap for the reference PDE solve (default 0.02)");
  control->add_option("--policy", policies, "Policies to evaluate (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember({"zero", "minus-one", "gamma", "optimal", "ramp"}));

  auto* branch = app.add_subcommand("branch", "Branching Levy process simulation");
  std::string mode = "speed";
  bind_model(branch, g);
  bind_grid(branch, g);
  bind(branch, g, "--times", "times", "Horizons, ascending (default 1,2,4)");
  bind(branch, g, "--runs", "runs", "Independent runs per horizon (default 10000)");
  bind(branch, g, "--cap", "cap", "Particle cap per run (default 1000000)");
  bind(branch, g, "--xs", "xs", "Evaluation points for mckean mode (default -1,0,1)");
  branch->add_option("--mode", mode, "runs, speed or mckean (default speed)")
      ->check(CLI::IsMember({"runs", "speed", "mckean"}));

  auto* extinction = app.add_subcommand("extinction", "Extinction frequency of the branching process");
  bind_model(extinction, g);
  bind(extinction, g, "--t-long", "t_long", "Horizon (default 30)");
  bind(extinction, g, "--runs", "runs", "Independent runs (default 100000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::ostringstream buffer;
  int code = kExitOk;
  try {
    const Run run = make_run(g, seed, seed_opt->count() > 0, threads, threads_opt->count() > 0);
    if (speed->parsed()) code = cmd_speed(run, buffer, strict);
    else if (solve_cmd->parsed()) code = cmd_solve(run, buffer);
    else if (bounds->parsed()) code = cmd_bounds(run, buffer);
    else if (median_cmd->parsed()) code = cmd_median(run, buffer);
    else if (control->parsed()) code = cmd_control(run, buffer, policies);
    else if (branch->parsed()) code = cmd_branch(run, buffer, mode);
    else if (extinction->parsed()) code = cmd_extinction(run, buffer);
  } catch (const GridTooSmallError& e) {
    std::cerr << "grid error: " << e.what() << '\n';
    return kExitGrid;
  } catch (const MonteCarloFailure& e) {
    std::cerr << "monte carlo failure: " << e.what() << '\n';
    return kExitMonteCarlo;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMonteCarlo;
  }

  if (out_path.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!(file << buffer.str())) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return kExitUsage;
    }
  }
  return code;
}
