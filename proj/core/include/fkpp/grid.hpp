#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fkpp {

/// Uniform grid x_i = x_min + i*h, i = 0..points-1.
struct GridSpec {
  double x_min = -15.0;
  double x_max = 15.0;
  std::size_t points = 2001;

  double step() const { return (x_max - x_min) / static_cast<double>(points - 1); }
  double x(std::size_t i) const { return x_min + step() * static_cast<double>(i); }
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// A function sampled on a GridSpec, linear between nodes and constant
/// (left_ext / right_ext) beyond the ends.
struct GridFn {
  GridSpec grid;
  std::vector<double> values;
  double left_ext = 0.0;
  double right_ext = 0.0;

  static GridFn constant(const GridSpec& grid, double c);
  /// 1{x >= 0}. The node sitting exactly on the jump carries 1/2 so that the
  /// piecewise-linear interpolant is centred on the discontinuity.
  static GridFn heaviside(const GridSpec& grid);
  static GridFn sample(const GridSpec& grid, const std::function<double(double)>& fn,
                       double left_ext, double right_ext);

  std::size_t size() const { return values.size(); }
  double operator()(double x) const;

  double min_value() const;
  double max_value() const;
  bool is_nondecreasing(double slack = 0.0) const;
};

/// max_i |a_i - b_i| over all nodes (grids must match).
double sup_distance(const GridFn& a, const GridFn& b);

}  // namespace fkpp
