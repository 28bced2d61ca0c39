#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "fkpp/branching.hpp"
#include "fkpp/control.hpp"
#include "fkpp/levy.hpp"
#include "fkpp/semigroup.hpp"

namespace fkpp {

/// Decimal with 9 significant digits; infinities as "inf"/"-inf".
std::string format_real(double value);

/// Columns x,lower,upper,mid.
void write_bracket_csv(std::ostream& out, const Bracket& bracket);

struct MedianTraceRow {
  double t;
  double median;
  double lo_bound;
  double hi_bound;
};
/// Columns t,median,lo_bound,hi_bound.
void write_median_csv(std::ostream& out, const std::vector<MedianTraceRow>& rows);

struct PolicyValueRow {
  std::string policy;
  double t;
  double x;
  ValueEstimate estimate;
};
/// Columns policy,t,x,mean,stderr,n_paths,J.
void write_policy_csv(std::ostream& out, const std::vector<PolicyValueRow>& rows);

/// Columns t,run,status,n_particles,rightmost. Pass header = false to append
/// a further horizon to an existing table.
void write_runs_csv(std::ostream& out, double t, const std::vector<RunOutcome>& runs,
                    bool header = true);
/// Columns t,median_speed,q10,q90,extinct_frac.
void write_speed_summary_csv(std::ostream& out, const std::vector<SpeedRow>& rows);

/// Columns method,q,theta_star,saturated.
void write_speed_report_csv(std::ostream& out, const SpeedReport& report);

}  // namespace fkpp
