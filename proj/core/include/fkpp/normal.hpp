#pragma once

namespace fkpp {

// Standard normal distribution function, density and quantile.
double normal_cdf(double z);
double normal_pdf(double z);
/// Inverse of normal_cdf for p in (0, 1); throws std::domain_error otherwise.
double normal_quantile(double p);

}  // namespace fkpp
