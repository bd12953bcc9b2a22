#pragma once

#include <vector>

#include "stcopula/types.hpp"

namespace stcopula::lagdep {

// One (influence ratio, lag magnitude) pair. Lag is meters for spatial
// samples and time-bucket counts for temporal ones.
struct LagRatioSample {
  double ratio = 0.0;
  double lag = 0.0;
};

struct LagDependenceBin {
  double ratio_center = 0.0;
  double max_lag = 0.0;
};

// Lag-dependence function: per ratio bin, the maximum lag at which that
// ratio occurs. Bin centers are multiples of bin_width, strictly
// increasing; empty bins are omitted.
struct LagDependence {
  std::vector<LagDependenceBin> bins;
  double bin_width = 0.0;

  std::vector<double> max_lags() const;
  // Bin value for a ratio. Falls back to the nearest populated bin when
  // the ratio's own bin is empty; sets *exact_bin accordingly.
  double lookup(double ratio, bool* exact_bin = nullptr) const;
};

// Right-continuous empirical CDF over a finite sample.
struct EmpiricalCdf {
  std::vector<double> support;   // sorted unique values
  std::vector<double> cum_prob;  // nondecreasing, ends at 1

  double operator()(double x) const;
};

// Spatial influence ratios within one cluster: for every unordered station
// pair (lower index in the numerator) and every time column, ratio of
// values with lag = pair distance in meters. Requires a fully observed
// matrix. Throws DegenerateCluster for clusters without a pair.
std::vector<LagRatioSample> sir_samples(const ObservationMatrix& matrix,
                                        const ClusterAssignment& assignment,
                                        int cluster);

// Temporal influence ratios for one station: earlier/later value ratio for
// every index-ordered time pair with lag <= max_lag bucket counts.
std::vector<LagRatioSample> tir_samples(const ObservationMatrix& matrix, int station,
                                        int max_lag);

// Freedman-Diaconis bin width over the ratio sample, floored at 0.05.
double auto_bin_width(const std::vector<LagRatioSample>& samples);

// Groups samples into ratio bins of the given width (centers at integer
// multiples of the width); bin value = max lag among members.
LagDependence lag_dependence(const std::vector<LagRatioSample>& samples, double bin_width);

// ECDF over the bin max-lag values, each bin weighted equally.
EmpiricalCdf ecdf(const LagDependence& dep);

}  // namespace stcopula::lagdep
