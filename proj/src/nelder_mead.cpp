#include "stcopula/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stcopula::optim {

namespace {
constexpr double kPenalty = 1e30;

double guarded(const std::function<double(const std::vector<double>&)>& f,
               const std::vector<double>& x) {
  double v = f(x);
  return std::isfinite(v) ? v : kPenalty;
}
}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, double step, double ftol,
                             int max_iter) {
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  const std::size_t n = x0.size();

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::vector<double> fvals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fvals[i] = guarded(f, simplex[i]);

  std::vector<std::size_t> order(n + 1);
  NelderMeadResult result;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

    if (fvals[worst] - fvals[best] < ftol) {
      result.converged = true;
      break;
    }

    // centroid of all but the worst vertex
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto combine = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d) {
        x[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
      }
      return x;
    };

    std::vector<double> reflected = combine(-alpha);
    double f_ref = guarded(f, reflected);
    if (f_ref < fvals[best]) {
      std::vector<double> expanded = combine(-gamma);
      double f_exp = guarded(f, expanded);
      if (f_exp < f_ref) {
        simplex[worst] = std::move(expanded);
        fvals[worst] = f_exp;
      } else {
        simplex[worst] = std::move(reflected);
        fvals[worst] = f_ref;
      }
      continue;
    }
    if (f_ref < fvals[second_worst]) {
      simplex[worst] = std::move(reflected);
      fvals[worst] = f_ref;
      continue;
    }

    // contraction: outside when the reflection beat the worst, else inside
    bool outside = f_ref < fvals[worst];
    std::vector<double> contracted = combine(outside ? -rho : rho);
    double f_con = guarded(f, contracted);
    if (f_con < std::min(f_ref, fvals[worst])) {
      simplex[worst] = std::move(contracted);
      fvals[worst] = f_con;
      continue;
    }

    // shrink toward the best vertex
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d) {
        simplex[i][d] = simplex[best][d] + sigma * (simplex[i][d] - simplex[best][d]);
      }
      fvals[i] = guarded(f, simplex[i]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (fvals[i] < fvals[best]) best = i;
  }
  result.x = simplex[best];
  result.fval = fvals[best];
  result.iterations = iter;
  return result;
}

}  // namespace stcopula::optim
