#include "stcopula/evd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stcopula/csv.hpp"
#include "stcopula/errors.hpp"
#include "stcopula/nelder_mead.hpp"

namespace stcopula::evd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_params(const EvdFamily& f) {
  if (static_cast<int>(f.params.size()) != family_param_count(f.tag)) {
    throw numeric_error("InvalidParams", family_name(f.tag) + " expects " +
                                             std::to_string(family_param_count(f.tag)) +
                                             " parameters");
  }
  switch (f.tag) {
    case FamilyTag::Weibull:
    case FamilyTag::Frechet:
      if (!(f.params[0] > 0.0) || !(f.params[1] > 0.0)) {
        throw numeric_error("InvalidParams", family_name(f.tag) + " needs shape > 0, scale > 0");
      }
      break;
    case FamilyTag::Gumbel:
      if (!(f.params[1] > 0.0)) throw numeric_error("InvalidParams", "gumbel needs scale > 0");
      break;
    case FamilyTag::Gev:
      if (!(f.params[1] > 0.0)) throw numeric_error("InvalidParams", "gev needs scale > 0");
      break;
  }
}

}  // namespace

std::string family_name(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::Weibull: return "weibull";
    case FamilyTag::Gumbel: return "gumbel";
    case FamilyTag::Frechet: return "frechet";
    case FamilyTag::Gev: return "gev";
  }
  return "?";
}

int family_param_count(FamilyTag tag) {
  return tag == FamilyTag::Gev ? 3 : 2;
}

std::string fit_family_name(FitFamily f) {
  switch (f) {
    case FitFamily::Weibull: return "weibull";
    case FitFamily::Gumbel: return "gumbel";
    case FitFamily::Frechet: return "frechet";
    case FitFamily::Gev: return "gev";
    case FitFamily::BlendedWeibull: return "blended-weibull";
  }
  return "?";
}

double evd_cdf(const EvdFamily& family, double x) {
  check_params(family);
  const auto& p = family.params;
  switch (family.tag) {
    case FamilyTag::Weibull: {
      if (x <= 0.0) return 0.0;
      return -std::expm1(-std::pow(x / p[1], p[0]));
    }
    case FamilyTag::Gumbel: {
      double z = (x - p[0]) / p[1];
      return std::exp(-std::exp(-z));
    }
    case FamilyTag::Frechet: {
      if (x <= 0.0) return 0.0;
      return std::exp(-std::pow(x / p[1], -p[0]));
    }
    case FamilyTag::Gev: {
      double mu = p[0], sigma = p[1], xi = p[2];
      double z = (x - mu) / sigma;
      if (std::abs(xi) < 1e-12) return std::exp(-std::exp(-z));
      double t = 1.0 + xi * z;
      if (t <= 0.0) return xi > 0.0 ? 0.0 : 1.0;
      return std::exp(-std::pow(t, -1.0 / xi));
    }
  }
  return 0.0;
}

double evd_logpdf(const EvdFamily& family, double x) {
  check_params(family);
  const auto& p = family.params;
  switch (family.tag) {
    case FamilyTag::Weibull: {
      if (x <= 0.0) return -kInf;
      double k = p[0], lam = p[1];
      double lx = std::log(x / lam);
      return std::log(k / lam) + (k - 1.0) * lx - std::pow(x / lam, k);
    }
    case FamilyTag::Gumbel: {
      double z = (x - p[0]) / p[1];
      return -std::log(p[1]) - z - std::exp(-z);
    }
    case FamilyTag::Frechet: {
      if (x <= 0.0) return -kInf;
      double a = p[0], s = p[1];
      double lx = std::log(x / s);
      return std::log(a / s) + (-1.0 - a) * lx - std::pow(x / s, -a);
    }
    case FamilyTag::Gev: {
      double mu = p[0], sigma = p[1], xi = p[2];
      double z = (x - mu) / sigma;
      if (std::abs(xi) < 1e-12) return -std::log(sigma) - z - std::exp(-z);
      double t = 1.0 + xi * z;
      if (t <= 0.0) return -kInf;
      return -std::log(sigma) + (-1.0 / xi - 1.0) * std::log(t) - std::pow(t, -1.0 / xi);
    }
  }
  return -kInf;
}

double evd_pdf(const EvdFamily& family, double x) {
  double lp = evd_logpdf(family, x);
  return lp == -kInf ? 0.0 : std::exp(lp);
}

double evd_quantile(const EvdFamily& family, double p) {
  check_params(family);
  p = std::clamp(p, 1e-15, 1.0 - 1e-15);
  const auto& pr = family.params;
  switch (family.tag) {
    case FamilyTag::Weibull: return pr[1] * std::pow(-std::log1p(-p), 1.0 / pr[0]);
    case FamilyTag::Gumbel: return pr[0] - pr[1] * std::log(-std::log(p));
    case FamilyTag::Frechet: return pr[1] * std::pow(-std::log(p), -1.0 / pr[0]);
    case FamilyTag::Gev: {
      double mu = pr[0], sigma = pr[1], xi = pr[2];
      if (std::abs(xi) < 1e-12) return mu - sigma * std::log(-std::log(p));
      return mu + sigma * (std::pow(-std::log(p), -xi) - 1.0) / xi;
    }
  }
  return 0.0;
}

double kumaraswamy_t(const KumaraswamyDistortion& d, double x) {
  double z = (x - d.lower) / (d.upper - d.lower);
  z = std::clamp(z, 0.0, 1.0);
  if (z == 0.0) return 0.0;
  if (z == 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - std::pow(z, d.alpha), d.beta);
}

double kumaraswamy_t_deriv(const KumaraswamyDistortion& d, double x) {
  double z = (x - d.lower) / (d.upper - d.lower);
  if (z <= 0.0 || z >= 1.0) return 0.0;
  double za = std::pow(z, d.alpha);
  return d.alpha * d.beta * std::pow(z, d.alpha - 1.0) * std::pow(1.0 - za, d.beta - 1.0) /
         (d.upper - d.lower);
}

double blended_cdf(const BlendedEvd& b, double x) {
  double t = kumaraswamy_t(b.distortion, x);
  if (t == 1.0) return evd_cdf(b.f1, x);
  if (t == 0.0) return evd_cdf(b.f2, x);
  double f1 = evd_cdf(b.f1, x);
  double f2 = evd_cdf(b.f2, x);
  if (f1 <= 0.0 || f2 <= 0.0) return 0.0;
  return std::pow(f1, t) * std::pow(f2, 1.0 - t);
}

double blended_pdf(const BlendedEvd& b, double x) {
  double t = kumaraswamy_t(b.distortion, x);
  if (t == 1.0) return evd_pdf(b.f1, x);
  if (t == 0.0) return evd_pdf(b.f2, x);
  double f1 = evd_cdf(b.f1, x);
  double f2 = evd_cdf(b.f2, x);
  if (f1 <= 0.0 || f2 <= 0.0) return 0.0;
  double cdf = std::pow(f1, t) * std::pow(f2, 1.0 - t);
  double tp = kumaraswamy_t_deriv(b.distortion, x);
  double d1 = evd_pdf(b.f1, x);
  double d2 = evd_pdf(b.f2, x);
  return cdf * (tp * std::log(f1 / f2) + t * d1 / f1 + (1.0 - t) * d2 / f2);
}

int FittedMargin::n_params() const {
  if (is_blended()) {
    const auto& b = std::get<BlendedEvd>(model);
    // two component parameter sets plus the two Kumaraswamy shapes
    return family_param_count(b.f1.tag) + family_param_count(b.f2.tag) + 2;
  }
  return family_param_count(std::get<EvdFamily>(model).tag);
}

double FittedMargin::cdf(double x) const {
  if (is_blended()) return blended_cdf(std::get<BlendedEvd>(model), x);
  return evd_cdf(std::get<EvdFamily>(model), x);
}

double FittedMargin::pdf(double x) const {
  if (is_blended()) return blended_pdf(std::get<BlendedEvd>(model), x);
  return evd_pdf(std::get<EvdFamily>(model), x);
}

double FittedMargin::quantile(double p) const {
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  if (!is_blended()) return evd_quantile(std::get<EvdFamily>(model), p);
  const auto& b = std::get<BlendedEvd>(model);
  double lo = std::min(evd_quantile(b.f1, 1e-9), evd_quantile(b.f2, 1e-9));
  lo = std::min(lo, 0.0);
  double hi = std::max(evd_quantile(b.f1, p), evd_quantile(b.f2, p));
  hi = std::max(hi, lo + 1.0);
  for (int guard = 0; guard < 200 && cdf(hi) < p; ++guard) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::string FittedMargin::describe() const {
  std::ostringstream os;
  if (is_blended()) {
    const auto& b = std::get<BlendedEvd>(model);
    os << "blended[" << family_name(b.f1.tag) << "(";
    for (std::size_t i = 0; i < b.f1.params.size(); ++i) {
      os << (i ? "," : "") << csv::fmt(b.f1.params[i]);
    }
    os << ") ^T " << family_name(b.f2.tag) << "(";
    for (std::size_t i = 0; i < b.f2.params.size(); ++i) {
      os << (i ? "," : "") << csv::fmt(b.f2.params[i]);
    }
    os << "), kumaraswamy(alpha=" << csv::fmt(b.distortion.alpha)
       << ", beta=" << csv::fmt(b.distortion.beta) << ", interval=["
       << csv::fmt(b.distortion.lower) << "," << csv::fmt(b.distortion.upper) << "])";
  } else {
    const auto& f = std::get<EvdFamily>(model);
    os << family_name(f.tag) << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      os << (i ? "," : "") << csv::fmt(f.params[i]);
    }
    os << ")";
  }
  return os.str();
}

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double log_mean = 0.0;
  double log_sd = 0.0;
};

Moments sample_moments(const std::vector<double>& xs) {
  Moments m;
  double n = static_cast<double>(xs.size());
  for (double x : xs) {
    m.mean += x;
    m.log_mean += std::log(x);
  }
  m.mean /= n;
  m.log_mean /= n;
  for (double x : xs) {
    m.sd += (x - m.mean) * (x - m.mean);
    double lx = std::log(x);
    m.log_sd += (lx - m.log_mean) * (lx - m.log_mean);
  }
  m.sd = std::sqrt(m.sd / n);
  m.log_sd = std::sqrt(m.log_sd / n);
  return m;
}

double percentile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  double pos = q * static_cast<double>(xs.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, xs.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

// Moment-based Weibull start (Justus shape approximation).
std::pair<double, double> weibull_start(const Moments& m) {
  double cv = m.sd / m.mean;
  double shape = std::clamp(std::pow(cv, -1.086), 0.1, 50.0);
  double scale = m.mean / std::tgamma(1.0 + 1.0 / shape);
  return {shape, scale};
}

std::pair<double, double> gumbel_start(const Moments& m) {
  double scale = m.sd * std::sqrt(6.0) / kPi;
  return {m.mean - kEulerGamma * scale, scale};
}

// Parameter transform per family: positive parameters live in log-space.
struct FitSpec {
  std::vector<double> start;       // transformed coordinates
  std::vector<bool> log_space;     // per coordinate
  int n_params = 0;
};

FitSpec make_fit_spec(FitFamily family, const std::vector<double>& xs, const Moments& m) {
  FitSpec spec;
  switch (family) {
    case FitFamily::Weibull: {
      auto [k, lam] = weibull_start(m);
      spec.start = {std::log(k), std::log(lam)};
      spec.log_space = {true, true};
      spec.n_params = 2;
      break;
    }
    case FitFamily::Gumbel: {
      auto [mu, beta] = gumbel_start(m);
      spec.start = {mu, std::log(beta)};
      spec.log_space = {false, true};
      spec.n_params = 2;
      break;
    }
    case FitFamily::Frechet: {
      // log X is Gumbel(log scale, 1/shape) under a Frechet
      double beta = std::max(m.log_sd, 1e-6) * std::sqrt(6.0) / kPi;
      double shape = 1.0 / beta;
      double scale = std::exp(m.log_mean - kEulerGamma * beta);
      spec.start = {std::log(shape), std::log(scale)};
      spec.log_space = {true, true};
      spec.n_params = 2;
      break;
    }
    case FitFamily::Gev: {
      auto [mu, beta] = gumbel_start(m);
      spec.start = {mu, std::log(beta), 0.1};
      spec.log_space = {false, true, false};
      spec.n_params = 3;
      break;
    }
    case FitFamily::BlendedWeibull: {
      auto [k, lam] = weibull_start(m);
      spec.start = {std::log(k), std::log(lam), std::log(k), std::log(lam), 0.0, 0.0};
      spec.log_space = {true, true, true, true, true, true};
      spec.n_params = 6;
      break;
    }
  }
  (void)xs;
  return spec;
}

// Builds a concrete model from transformed coordinates.
std::variant<EvdFamily, BlendedEvd> decode(FitFamily family, const std::vector<double>& t,
                                           double lower, double upper) {
  auto val = [&](std::size_t i, bool log_space) {
    return log_space ? std::exp(t[i]) : t[i];
  };
  switch (family) {
    case FitFamily::Weibull:
      return EvdFamily{FamilyTag::Weibull, {val(0, true), val(1, true)}};
    case FitFamily::Gumbel:
      return EvdFamily{FamilyTag::Gumbel, {val(0, false), val(1, true)}};
    case FitFamily::Frechet:
      return EvdFamily{FamilyTag::Frechet, {val(0, true), val(1, true)}};
    case FitFamily::Gev:
      return EvdFamily{FamilyTag::Gev, {val(0, false), val(1, true), val(2, false)}};
    case FitFamily::BlendedWeibull: {
      BlendedEvd b;
      b.f1 = EvdFamily{FamilyTag::Weibull, {val(0, true), val(1, true)}};
      b.f2 = EvdFamily{FamilyTag::Weibull, {val(2, true), val(3, true)}};
      b.distortion = KumaraswamyDistortion{lower, upper, val(4, true), val(5, true)};
      return b;
    }
  }
  return EvdFamily{};
}

double log_likelihood(const std::variant<EvdFamily, BlendedEvd>& model,
                      const std::vector<double>& xs) {
  double ll = 0.0;
  if (std::holds_alternative<EvdFamily>(model)) {
    const auto& f = std::get<EvdFamily>(model);
    for (double x : xs) {
      double lp = evd_logpdf(f, x);
      if (!std::isfinite(lp)) return -kInf;
      ll += lp;
    }
  } else {
    const auto& b = std::get<BlendedEvd>(model);
    for (double x : xs) {
      double d = blended_pdf(b, x);
      if (!(d > 0.0) || !std::isfinite(d)) return -kInf;
      ll += std::log(d);
    }
  }
  return ll;
}

}  // namespace

FittedMargin mle_fit(const std::vector<double>& samples, FitFamily family) {
  if (samples.size() < 2) {
    throw data_error("InsufficientData", "need at least 2 samples to fit a margin");
  }
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw numeric_error("InvalidParams", "margin samples must be positive and finite");
    }
  }
  Moments m = sample_moments(samples);
  if (m.sd == 0.0) {
    throw data_error("DegenerateSample", "all samples identical; margin not identifiable");
  }

  double lower = 0.0, upper = 0.0;
  if (family == FitFamily::BlendedWeibull) {
    lower = percentile(samples, 0.10);
    upper = percentile(samples, 0.90);
    if (!(upper > lower)) {
      lower = *std::min_element(samples.begin(), samples.end());
      upper = *std::max_element(samples.begin(), samples.end());
    }
    if (!(upper > lower)) {
      throw data_error("DegenerateSample", "sample has no spread for a blend interval");
    }
  }

  FitSpec spec = make_fit_spec(family, samples, m);
  auto objective = [&](const std::vector<double>& t) {
    return -log_likelihood(decode(family, t, lower, upper), samples);
  };

  double f_start = objective(spec.start);
  optim::NelderMeadResult res = optim::nelder_mead(objective, spec.start, 0.1, 1e-9, 2000);

  if (!std::isfinite(res.fval) || res.fval > 1e29) {
    throw numeric_error("NonFinite", "likelihood not finite at any tested point for " +
                                         fit_family_name(family));
  }

  FittedMargin out;
  // the simplex always contains the start, so the fit can only improve on it
  if (std::isfinite(f_start) && f_start < res.fval) {
    out.model = decode(family, spec.start, lower, upper);
    out.log_likelihood = -f_start;
  } else {
    out.model = decode(family, res.x, lower, upper);
    out.log_likelihood = -res.fval;
  }
  out.n_samples = static_cast<int>(samples.size());
  out.aic = 2.0 * spec.n_params - 2.0 * out.log_likelihood;

  // monotonicity spot check; the geometric blend is not guaranteed monotone
  if (out.is_blended()) {
    double prev = -1.0;
    bool monotone = true;
    for (int i = 0; i <= 200; ++i) {
      double q = 1e-4 + (1.0 - 2e-4) * i / 200.0;
      double x = evd_quantile(std::get<BlendedEvd>(out.model).f1, q);
      double c = out.cdf(x);
      if (c < prev - 1e-9) {
        monotone = false;
        break;
      }
      prev = c;
    }
    if (!monotone) out.warnings.push_back("NonMonotoneWarning: blended CDF not monotone on probe grid");
  }
  return out;
}

FittedMargin select_model(const std::vector<double>& samples,
                          const std::vector<FitFamily>& candidates) {
  if (candidates.empty()) {
    throw config_error("ConfigError", "empty margin candidate list");
  }
  bool have_best = false;
  FittedMargin best;
  std::string failures;
  for (FitFamily family : candidates) {
    try {
      FittedMargin fit = mle_fit(samples, family);
      if (!have_best || fit.log_likelihood > best.log_likelihood ||
          (fit.log_likelihood == best.log_likelihood && fit.n_params() < best.n_params())) {
        best = std::move(fit);
        have_best = true;
      }
    } catch (const Error& e) {
      if (!failures.empty()) failures += "; ";
      failures += fit_family_name(family) + ": " + e.what();
    }
  }
  if (!have_best) {
    throw numeric_error("NoCandidateFit", "every margin candidate failed (" + failures + ")");
  }
  return best;
}

}  // namespace stcopula::evd
