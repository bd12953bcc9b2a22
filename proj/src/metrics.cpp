#include "stcopula/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "stcopula/csv.hpp"
#include "stcopula/errors.hpp"

namespace stcopula::metrics {

namespace {

void check_lengths(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size())
    throw data_error("LengthMismatch", "prediction and truth lengths differ");
  if (pred.empty()) throw data_error("Empty", "no values to score");
}

}  // namespace

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_lengths(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / pred.size());
}

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_lengths(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
  return acc / pred.size();
}

MetricReport make_report(const std::vector<double>& pred, const std::vector<double>& truth,
                         const std::vector<int>& cluster_of) {
  check_lengths(pred, truth);
  if (cluster_of.size() != pred.size())
    throw data_error("LengthMismatch", "cluster labels do not pair with predictions");
  MetricReport report;
  report.rmse = rmse(pred, truth);
  report.mae = mae(pred, truth);
  report.n = static_cast<int>(pred.size());

  std::map<int, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    groups[cluster_of[i]].first.push_back(pred[i]);
    groups[cluster_of[i]].second.push_back(truth[i]);
  }
  for (const auto& [cluster, vecs] : groups) {
    ClusterMetrics cm;
    cm.cluster = cluster;
    cm.rmse = rmse(vecs.first, vecs.second);
    cm.mae = mae(vecs.first, vecs.second);
    cm.n = static_cast<int>(vecs.first.size());
    report.per_cluster.push_back(cm);
  }
  return report;
}

void write_report_csv(std::ostream& out, const MetricReport& report) {
  out << "scope,rmse,mae,n\n";
  out << "overall," << csv::fmt(report.rmse) << ',' << csv::fmt(report.mae) << ','
      << report.n << '\n';
  for (const auto& cm : report.per_cluster)
    out << "cluster_" << cm.cluster << ',' << csv::fmt(cm.rmse) << ',' << csv::fmt(cm.mae)
        << ',' << cm.n << '\n';
}

void write_report_text(std::ostream& out, const MetricReport& report) {
  out << "RMSE " << csv::fmt(report.rmse) << "  MAE " << csv::fmt(report.mae) << "  n "
      << report.n << '\n';
  for (const auto& cm : report.per_cluster)
    out << "  cluster " << cm.cluster << ": RMSE " << csv::fmt(cm.rmse) << "  MAE "
        << csv::fmt(cm.mae) << "  n " << cm.n << '\n';
}

}  // namespace stcopula::metrics
