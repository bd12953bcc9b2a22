#include "stcopula/lagdep.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stcopula/cluster.hpp"
#include "stcopula/errors.hpp"

namespace stcopula::lagdep {

std::vector<double> LagDependence::max_lags() const {
  std::vector<double> out;
  out.reserve(bins.size());
  for (const auto& b : bins) out.push_back(b.max_lag);
  return out;
}

double LagDependence::lookup(double ratio, bool* exact_bin) const {
  double best = bins.front().max_lag;
  double best_dist = std::abs(bins.front().ratio_center - ratio);
  for (const auto& b : bins) {
    double d = std::abs(b.ratio_center - ratio);
    if (d < best_dist) {
      best_dist = d;
      best = b.max_lag;
    }
  }
  if (exact_bin) *exact_bin = best_dist <= bin_width / 2.0 + 1e-12;
  return best;
}

double EmpiricalCdf::operator()(double x) const {
  // count of support values <= x, over total
  auto it = std::upper_bound(support.begin(), support.end(), x);
  if (it == support.begin()) return 0.0;
  return cum_prob[static_cast<std::size_t>(it - support.begin()) - 1];
}

std::vector<LagRatioSample> sir_samples(const ObservationMatrix& matrix,
                                        const ClusterAssignment& assignment, int cluster) {
  std::vector<int> members = assignment.members(cluster);
  if (members.empty()) throw data_error("DegenerateCluster", "cluster has no stations");
  if (members.size() < 2) {
    throw data_error("DegenerateCluster",
                     "cluster with a single station yields no spatial pairs");
  }
  std::vector<LagRatioSample> samples;
  samples.reserve(members.size() * (members.size() - 1) / 2 * matrix.k());
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      int i1 = members[a], i2 = members[b];  // members sorted, so i1 < i2
      double lag = cluster::haversine_m(matrix.stations()[i1], matrix.stations()[i2]);
      for (int j = 0; j < matrix.k(); ++j) {
        samples.push_back({matrix.value(i1, j) / matrix.value(i2, j), lag});
      }
    }
  }
  return samples;
}

std::vector<LagRatioSample> tir_samples(const ObservationMatrix& matrix, int station,
                                        int max_lag) {
  std::vector<LagRatioSample> samples;
  for (int j1 = 0; j1 < matrix.k(); ++j1) {
    for (int j2 = j1 + 1; j2 < matrix.k() && j2 - j1 <= max_lag; ++j2) {
      samples.push_back({matrix.value(station, j1) / matrix.value(station, j2),
                         static_cast<double>(j2 - j1)});
    }
  }
  return samples;
}

double auto_bin_width(const std::vector<LagRatioSample>& samples) {
  const double floor_width = 0.05;
  if (samples.size() < 4) return floor_width;
  std::vector<double> ratios;
  ratios.reserve(samples.size());
  for (const auto& s : samples) ratios.push_back(s.ratio);
  std::sort(ratios.begin(), ratios.end());
  std::size_t n = ratios.size();
  double q1 = ratios[n / 4];
  double q3 = ratios[(3 * n) / 4];
  double iqr = q3 - q1;
  double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
  return std::max(width, floor_width);
}

LagDependence lag_dependence(const std::vector<LagRatioSample>& samples, double bin_width) {
  if (samples.empty()) throw data_error("EmptyInput", "no lag-ratio samples to bin");
  std::map<long long, double> bins;  // bin index -> max lag
  for (const auto& s : samples) {
    long long idx = std::llround(s.ratio / bin_width);
    auto [it, inserted] = bins.emplace(idx, s.lag);
    if (!inserted) it->second = std::max(it->second, s.lag);
  }
  LagDependence dep;
  dep.bin_width = bin_width;
  dep.bins.reserve(bins.size());
  for (const auto& [idx, max_lag] : bins) {
    dep.bins.push_back({static_cast<double>(idx) * bin_width, max_lag});
  }
  return dep;
}

EmpiricalCdf ecdf(const LagDependence& dep) {
  if (dep.bins.empty()) throw data_error("EmptyInput", "empty lag dependence");
  std::vector<double> values = dep.max_lags();
  std::sort(values.begin(), values.end());
  EmpiricalCdf cdf;
  std::size_t n = values.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[j] == values[i]) ++j;
    cdf.support.push_back(values[i]);
    cdf.cum_prob.push_back(static_cast<double>(j) / static_cast<double>(n));
    i = j;
  }
  return cdf;
}

}  // namespace stcopula::lagdep
