#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stcopula::metrics {

// Root mean squared error. Throws LengthMismatch and Empty.
double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

// Mean absolute error. Same preconditions as rmse.
double mae(const std::vector<double>& pred, const std::vector<double>& truth);

struct ClusterMetrics {
  int cluster = 0;
  double rmse = 0.0;
  double mae = 0.0;
  int n = 0;
};

struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  int n = 0;
  std::vector<ClusterMetrics> per_cluster;
};

// Aggregates predictions into overall and per-cluster metrics; entries of
// `cluster_of` pair up with pred/truth.
MetricReport make_report(const std::vector<double>& pred, const std::vector<double>& truth,
                         const std::vector<int>& cluster_of);

void write_report_csv(std::ostream& out, const MetricReport& report);
void write_report_text(std::ostream& out, const MetricReport& report);

}  // namespace stcopula::metrics
