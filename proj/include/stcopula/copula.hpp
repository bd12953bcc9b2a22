#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stcopula/evd.hpp"

namespace stcopula::copula {

// Gumbel-Hougaard dependence parameter; theta = 1 is independence,
// theta < 1 is invalid for this family.
struct GhParam {
  double theta = 1.0;
};

// C(u,v) = exp(-[(-ln u)^theta + (-ln v)^theta]^(1/theta)).
// Boundary arguments (0 or 1) are handled exactly; interior arguments are
// clamped away from the endpoints before the log transforms.
double gh_cdf(const GhParam& p, double u, double v);

// Copula density d2C/du dv on the open unit square.
double gh_density(const GhParam& p, double u, double v);

// Sample Kendall's tau by O(n^2) concordance counting (tau-a; tied pairs
// count zero).
double kendall_tau(const std::vector<std::pair<double, double>>& pairs);

struct ThetaFit {
  GhParam param;
  double kendall_tau = 0.0;
  std::vector<std::string> warnings;
};

// Kendall's-tau inversion theta = 1/(1 - tau), clamped to [1, 50].
// Negative tau clamps to independence with a warning. Throws
// InsufficientPairs (< 8 pairs) and DegenerateSample (all ties).
ThetaFit fit_theta(const std::vector<std::pair<double, double>>& pairs);

// Marshall-Olkin sampler via positive-stable variates (Chambers-Mallows-
// Stuck); deterministic for a given seed.
std::vector<std::pair<double, double>> gh_sample(const GhParam& p, int n, std::uint64_t seed);

// GH copula over two fitted margins: the bivariate model of
// (spatial lag, temporal lag).
struct JointModel {
  GhParam copula;
  evd::FittedMargin margin_h;
  evd::FittedMargin margin_tau;

  double joint_cdf(double h, double tau) const;
  double joint_pdf(double h, double tau) const;
};

}  // namespace stcopula::copula
