#pragma once

// Shared fixtures and independent numeric oracles for the unit tests.
// Everything here is deliberately written from first principles (plain
// loops, independent formulas) so tests cross-check the library instead of
// mirroring its implementation.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "stcopula/types.hpp"

namespace testsup {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline stcopula::TimeAxis monthly_axis(int count, int year = 2018, unsigned month = 1) {
  return stcopula::make_monthly_axis(year, month, stcopula::Granularity::OneMonth, count);
}

inline stcopula::Station station(const std::string& id, double lat, double lon) {
  return stcopula::Station{id, lat, lon};
}

// Builds a matrix from a row-major value table; NaN entries become missing.
inline stcopula::ObservationMatrix make_matrix(const std::vector<stcopula::Station>& stations,
                                               int k, const std::vector<double>& rows) {
  if (static_cast<int>(rows.size()) != static_cast<int>(stations.size()) * k)
    throw std::runtime_error("make_matrix: bad table size");
  std::vector<double> values(rows.size(), 0.0);
  std::vector<std::uint8_t> mask(rows.size(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isnan(rows[i])) {
      values[i] = rows[i];
      mask[i] = 1;
    }
  }
  return stcopula::ObservationMatrix::from_parts(stations, monthly_axis(k), std::move(values),
                                                 std::move(mask));
}

// Convenience variant: one inner vector per station.
inline stcopula::ObservationMatrix make_matrix_rows(
    const std::vector<stcopula::Station>& stations, int k,
    const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  flat.reserve(stations.size() * static_cast<std::size_t>(k));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != k)
      throw std::runtime_error("make_matrix: bad row length");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return make_matrix(stations, k, flat);
}

// Spherical law of cosines: an independent great-circle formula (the
// library uses haversine).
inline double law_of_cosines_m(double lat1, double lon1, double lat2, double lon2,
                               double radius_m) {
  const double rad = M_PI / 180.0;
  double p1 = lat1 * rad, p2 = lat2 * rad, dl = (lon2 - lon1) * rad;
  double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return radius_m * std::acos(c);
}

// Central finite difference of f at x.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double eps = 1e-6) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, m, fa, flm, fm);
  double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-9, int depth = 24) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adapt(f, a, b, fa, fm, fb, whole, tol, depth);
}

// 2D integral over [ax,bx] x [ay,by] via nested adaptive Simpson.
inline double integrate2d(const std::function<double(double, double)>& f, double ax, double bx,
                          double ay, double by, double tol = 1e-7) {
  auto inner = [&](double x) {
    return integrate([&](double y) { return f(x, y); }, ay, by, tol / 10.0, 20);
  };
  return integrate(inner, ax, bx, tol, 20);
}

}  // namespace testsup
