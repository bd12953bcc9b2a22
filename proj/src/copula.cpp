#include "stcopula/copula.hpp"

#include <algorithm>
#include <cmath>

#include "stcopula/errors.hpp"
#include "stcopula/rng.hpp"

namespace stcopula::copula {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kClamp = 1e-12;

void check_theta(const GhParam& p) {
  if (!(p.theta >= 1.0) || !std::isfinite(p.theta)) {
    throw numeric_error("InvalidTheta", "Gumbel-Hougaard theta must be >= 1");
  }
}

double clamp_unit(double u) { return std::clamp(u, kClamp, 1.0 - kClamp); }

}  // namespace

double gh_cdf(const GhParam& p, double u, double v) {
  check_theta(p);
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0 && v >= 1.0) return 1.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  double x = -std::log(clamp_unit(u));
  double y = -std::log(clamp_unit(v));
  double a = std::pow(std::pow(x, p.theta) + std::pow(y, p.theta), 1.0 / p.theta);
  return std::exp(-a);
}

double gh_density(const GhParam& p, double u, double v) {
  check_theta(p);
  u = clamp_unit(u);
  v = clamp_unit(v);
  double x = -std::log(u);
  double y = -std::log(v);
  double sum = std::pow(x, p.theta) + std::pow(y, p.theta);
  double a = std::pow(sum, 1.0 / p.theta);
  // c = C(u,v) (xy)^(theta-1) / (uv) * A^(1-2 theta) * (A + theta - 1)
  double log_c = -a + (p.theta - 1.0) * (std::log(x) + std::log(y)) - std::log(u) -
                 std::log(v) + (1.0 - 2.0 * p.theta) * std::log(a) +
                 std::log(a + p.theta - 1.0);
  return std::exp(log_c);
}

double kendall_tau(const std::vector<std::pair<double, double>>& pairs) {
  long long concordant = 0, discordant = 0;
  std::size_t n = pairs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dh = pairs[i].first - pairs[j].first;
      double dt = pairs[i].second - pairs[j].second;
      double s = dh * dt;
      if (s > 0.0) ++concordant;
      else if (s < 0.0) ++discordant;
    }
  }
  double total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(concordant - discordant) / total;
}

ThetaFit fit_theta(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 8) {
    throw data_error("InsufficientPairs", "need at least 8 pairs, got " +
                                              std::to_string(pairs.size()));
  }
  bool any_h = false, any_t = false;
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    any_h = any_h || pairs[i].first != pairs[0].first;
    any_t = any_t || pairs[i].second != pairs[0].second;
  }
  if (!any_h || !any_t) {
    throw data_error("DegenerateSample", "all pairs tied in one coordinate");
  }

  ThetaFit fit;
  fit.kendall_tau = kendall_tau(pairs);
  if (fit.kendall_tau < 0.0) {
    fit.param.theta = 1.0;
    fit.warnings.push_back(
        "negative Kendall tau; Gumbel-Hougaard cannot represent negative dependence, "
        "clamped to independence");
    return fit;
  }
  double theta = 1.0 / (1.0 - fit.kendall_tau);
  if (!(theta <= 50.0)) {
    fit.param.theta = 50.0;
    fit.warnings.push_back("Kendall tau near 1; theta clamped to 50");
    return fit;
  }
  fit.param.theta = std::max(theta, 1.0);
  return fit;
}

std::vector<std::pair<double, double>> gh_sample(const GhParam& p, int n, std::uint64_t seed) {
  check_theta(p);
  Rng rng(seed);
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  if (p.theta == 1.0) {
    for (int i = 0; i < n; ++i) {
      double u = rng.uniform();
      double v = rng.uniform();
      out.emplace_back(u, v);
    }
    return out;
  }
  double alpha = 1.0 / p.theta;  // stable index in (0, 1)
  for (int i = 0; i < n; ++i) {
    // Chambers-Mallows-Stuck positive alpha-stable with Laplace transform
    // exp(-t^alpha)
    double angle = kPi * rng.uniform();
    while (angle <= 0.0) angle = kPi * rng.uniform();
    double w = rng.exponential();
    double s = std::pow(std::sin(alpha * angle) / std::pow(std::sin(angle), 1.0 / alpha),
                        1.0) *
               std::pow(std::sin((1.0 - alpha) * angle) / w, (1.0 - alpha) / alpha);
    double u = std::exp(-std::pow(rng.exponential() / s, alpha));
    double v = std::exp(-std::pow(rng.exponential() / s, alpha));
    out.emplace_back(u, v);
  }
  return out;
}

double JointModel::joint_cdf(double h, double tau) const {
  return gh_cdf(copula, margin_h.cdf(h), margin_tau.cdf(tau));
}

double JointModel::joint_pdf(double h, double tau) const {
  double u = margin_h.cdf(h);
  double v = margin_tau.cdf(tau);
  return gh_density(copula, u, v) * margin_h.pdf(h) * margin_tau.pdf(tau);
}

}  // namespace stcopula::copula
