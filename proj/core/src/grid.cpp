#include "fkpp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fkpp {

void GridSpec::validate() const {
  if (points < 2) throw std::invalid_argument("GridSpec: need at least 2 points");
  if (!(x_max > x_min)) throw std::invalid_argument("GridSpec: x_max must exceed x_min");
}

GridFn GridFn::constant(const GridSpec& grid, double c) {
  grid.validate();
  return {grid, std::vector<double>(grid.points, c), c, c};
}

GridFn GridFn::heaviside(const GridSpec& grid) {
  grid.validate();
  GridFn out{grid, std::vector<double>(grid.points, 0.0), 0.0, 1.0};
  const double h = grid.step();
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = grid.x(i);
    if (std::abs(x) <= 1e-9 * h)
      out.values[i] = 0.5;
    else if (x > 0.0)
      out.values[i] = 1.0;
  }
  return out;
}

GridFn GridFn::sample(const GridSpec& grid, const std::function<double(double)>& fn,
                      double left_ext, double right_ext) {
  grid.validate();
  GridFn out{grid, std::vector<double>(grid.points), left_ext, right_ext};
  for (std::size_t i = 0; i < grid.points; ++i) out.values[i] = fn(grid.x(i));
  return out;
}

double GridFn::operator()(double x) const {
  if (x < grid.x_min) return left_ext;
  if (x > grid.x_max) return right_ext;
  const double pos = (x - grid.x_min) / grid.step();
  const auto last = values.size() - 1;
  const auto i = std::min(static_cast<std::size_t>(pos), last - 1);
  const double w = pos - static_cast<double>(i);
  return values[i] + w * (values[i + 1] - values[i]);
}

double GridFn::min_value() const {
  return std::min({*std::min_element(values.begin(), values.end()), left_ext, right_ext});
}

double GridFn::max_value() const {
  return std::max({*std::max_element(values.begin(), values.end()), left_ext, right_ext});
}

bool GridFn::is_nondecreasing(double slack) const {
  if (values.front() < left_ext - slack || values.back() > right_ext + slack) return false;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[i - 1] - slack) return false;
  return true;
}

double sup_distance(const GridFn& a, const GridFn& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("sup_distance: grids differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

}  // namespace fkpp
