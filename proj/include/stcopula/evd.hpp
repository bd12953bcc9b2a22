#pragma once

#include <string>
#include <variant>
#include <vector>

namespace stcopula::evd {

enum class FamilyTag { Weibull, Gumbel, Frechet, Gev };

// Parametric extreme-value margin. Parameter layout:
//   Weibull: {shape, scale}          support x >= 0
//   Gumbel:  {location, scale}       support R
//   Frechet: {shape, scale}          support x > 0
//   Gev:     {location, scale, shape}
struct EvdFamily {
  FamilyTag tag = FamilyTag::Weibull;
  std::vector<double> params;
};

std::string family_name(FamilyTag tag);
int family_param_count(FamilyTag tag);

// Rescaled Kumaraswamy CDF used as the blend weight: 0 below `lower`,
// 1 above `upper`, 1 - (1 - z^alpha)^beta on the rescaled interval.
struct KumaraswamyDistortion {
  double lower = 0.0;
  double upper = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
};

// Geometric blend F1^T * F2^(1-T) of two margins via the distortion T.
struct BlendedEvd {
  EvdFamily f1;
  EvdFamily f2;
  KumaraswamyDistortion distortion;
};

double evd_cdf(const EvdFamily& family, double x);
double evd_pdf(const EvdFamily& family, double x);
double evd_logpdf(const EvdFamily& family, double x);
// Inverse CDF; bisection on families without a closed form is not needed
// here because all four have analytic inverses.
double evd_quantile(const EvdFamily& family, double p);

double kumaraswamy_t(const KumaraswamyDistortion& d, double x);
// d/dx of the distortion; 0 outside the transition interval.
double kumaraswamy_t_deriv(const KumaraswamyDistortion& d, double x);

double blended_cdf(const BlendedEvd& b, double x);
double blended_pdf(const BlendedEvd& b, double x);

// Fit selectors. Blended fits a Weibull-Weibull blend with the transition
// interval fixed at the sample 10th/90th percentiles and the Kumaraswamy
// shapes fitted jointly with the component parameters.
enum class FitFamily { Weibull, Gumbel, Frechet, Gev, BlendedWeibull };

std::string fit_family_name(FitFamily f);

struct FittedMargin {
  std::variant<EvdFamily, BlendedEvd> model;
  double log_likelihood = 0.0;
  int n_samples = 0;
  double aic = 0.0;
  std::vector<std::string> warnings;

  bool is_blended() const { return std::holds_alternative<BlendedEvd>(model); }
  int n_params() const;
  double cdf(double x) const;
  double pdf(double x) const;
  // Inverse CDF by bisection (covers the blended case).
  double quantile(double p) const;
  std::string describe() const;
};

// Maximum-likelihood fit by Nelder-Mead on the negative log-likelihood,
// positive parameters optimized in log-space, started from method-of-
// moments estimates. Throws DegenerateSample, NonFinite, InvalidParams.
FittedMargin mle_fit(const std::vector<double>& samples, FitFamily family);

// Fits every candidate and keeps the highest log-likelihood; ties break
// toward fewer parameters. Succeeds when at least one candidate fits.
FittedMargin select_model(const std::vector<double>& samples,
                          const std::vector<FitFamily>& candidates);

}  // namespace stcopula::evd
