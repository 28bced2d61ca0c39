#include "fkpp/io.hpp"

#include <cmath>

#include <fmt/format.h>

namespace fkpp {

std::string format_real(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{:.9g}", value);
}

void write_bracket_csv(std::ostream& out, const Bracket& bracket) {
  out << "x,lower,upper,mid\n";
  const auto& grid = bracket.lower.grid;
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double lo = bracket.lower.values[i];
    const double hi = bracket.upper.values[i];
    out << format_real(grid.x(i)) << ',' << format_real(lo) << ',' << format_real(hi) << ','
        << format_real(0.5 * (lo + hi)) << '\n';
  }
}

void write_median_csv(std::ostream& out, const std::vector<MedianTraceRow>& rows) {
  out << "t,median,lo_bound,hi_bound\n";
  for (const auto& r : rows)
    out << format_real(r.t) << ',' << format_real(r.median) << ',' << format_real(r.lo_bound) << ','
        << format_real(r.hi_bound) << '\n';
}

void write_policy_csv(std::ostream& out, const std::vector<PolicyValueRow>& rows) {
  out << "policy,t,x,mean,stderr,n_paths,J\n";
  for (const auto& r : rows)
    out << r.policy << ',' << format_real(r.t) << ',' << format_real(r.x) << ','
        << format_real(r.estimate.mean) << ',' << format_real(r.estimate.std_error) << ','
        << r.estimate.n_paths << ',' << r.estimate.steps << '\n';
}

void write_runs_csv(std::ostream& out, double t, const std::vector<RunOutcome>& runs,
                    bool header) {
  if (header) out << "t,run,status,n_particles,rightmost\n";
  for (std::size_t i = 0; i < runs.size(); ++i)
    out << format_real(t) << ',' << i << ',' << to_string(runs[i].status) << ','
        << runs[i].n_particles << ',' << format_real(runs[i].rightmost) << '\n';
}

void write_speed_summary_csv(std::ostream& out, const std::vector<SpeedRow>& rows) {
  out << "t,median_speed,q10,q90,extinct_frac\n";
  for (const auto& r : rows)
    out << format_real(r.t) << ',' << format_real(r.median_speed) << ',' << format_real(r.q10) << ','
        << format_real(r.q90) << ',' << format_real(r.extinct_frac) << '\n';
}

void write_speed_report_csv(std::ostream& out, const SpeedReport& report) {
  out << "method,q,theta_star,saturated\n";
  for (const auto* r : {&report.inf_form, &report.sup_form, &report.perspective_form})
    out << to_string(r->method) << ',' << format_real(r->q) << ',' << format_real(r->theta_star)
        << ',' << (r->saturated ? 1 : 0) << '\n';
}

}  // namespace fkpp
