#include "stcopula/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stcopula/errors.hpp"

namespace stcopula::cluster {

namespace {
constexpr double kPi = 3.14159265358979323846;
double rad(double deg) { return deg * kPi / 180.0; }
}  // namespace

double haversine_m(const Station& a, const Station& b) {
  double phi1 = rad(a.lat), phi2 = rad(b.lat);
  double dphi = rad(b.lat - a.lat);
  double dlam = rad(b.lon - a.lon);
  double s = std::sin(dphi / 2.0);
  double t = std::sin(dlam / 2.0);
  double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

DistanceMatrix DistanceMatrix::build(const std::vector<Station>& stations) {
  DistanceMatrix m;
  m.n_ = static_cast<int>(stations.size());
  m.d_.assign(static_cast<std::size_t>(m.n_) * m.n_, 0.0);
  for (int i = 0; i < m.n_; ++i) {
    for (int j = i + 1; j < m.n_; ++j) {
      double d = haversine_m(stations[i], stations[j]);
      m.d_[static_cast<std::size_t>(i) * m.n_ + j] = d;
      m.d_[static_cast<std::size_t>(j) * m.n_ + i] = d;
    }
  }
  return m;
}

namespace {

// Medoid = member minimizing the max distance to the others; returns
// {medoid index, that max distance}. Ties break on the lowest index.
std::pair<int, double> medoid_of(const std::vector<int>& members, const DistanceMatrix& dist) {
  int best = members.front();
  double best_max = std::numeric_limits<double>::infinity();
  for (int cand : members) {
    double mx = 0.0;
    for (int other : members) mx = std::max(mx, dist(cand, other));
    if (mx < best_max) {
      best_max = mx;
      best = cand;
    }
  }
  return {best, best_max};
}

double cluster_diameter(const std::vector<int>& members, const DistanceMatrix& dist) {
  double mx = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      mx = std::max(mx, dist(members[a], members[b]));
    }
  }
  return mx;
}

double linkage_distance(const std::vector<int>& a, const std::vector<int>& b,
                        const DistanceMatrix& dist, Linkage linkage) {
  double acc = linkage == Linkage::Complete ? 0.0 : std::numeric_limits<double>::infinity();
  for (int i : a) {
    for (int j : b) {
      double d = dist(i, j);
      acc = linkage == Linkage::Complete ? std::max(acc, d) : std::min(acc, d);
    }
  }
  return acc;
}

}  // namespace

ClusterAssignment hsc(const std::vector<Station>& stations, double radius_m, Linkage linkage) {
  if (stations.empty()) throw data_error("EmptyInput", "no stations to cluster");
  if (!(radius_m > 0.0)) throw data_error("InvalidRadius", "radius_m must be > 0");

  DistanceMatrix dist = DistanceMatrix::build(stations);
  int n = dist.size();

  // active clusters, each a sorted member list; kept ordered by smallest member
  std::vector<std::vector<int>> clusters;
  clusters.reserve(n);
  for (int i = 0; i < n; ++i) clusters.push_back({i});

  while (clusters.size() > 1) {
    int best_a = -1, best_b = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double d = linkage_distance(clusters[a], clusters[b], dist, linkage);
        if (d >= best_d) continue;  // strict improvement; earlier (a,b) wins ties
        std::vector<int> merged;
        merged.reserve(clusters[a].size() + clusters[b].size());
        std::merge(clusters[a].begin(), clusters[a].end(), clusters[b].begin(),
                   clusters[b].end(), std::back_inserter(merged));
        if (cluster_diameter(merged, dist) > 2.0 * radius_m) continue;
        if (medoid_of(merged, dist).second > radius_m) continue;
        best_d = d;
        best_a = static_cast<int>(a);
        best_b = static_cast<int>(b);
      }
    }
    if (best_a < 0) break;  // no admissible merge left

    std::vector<int> merged;
    std::merge(clusters[best_a].begin(), clusters[best_a].end(), clusters[best_b].begin(),
               clusters[best_b].end(), std::back_inserter(merged));
    clusters.erase(clusters.begin() + best_b);
    clusters[best_a] = std::move(merged);
    // keep clusters ordered by smallest member so tie-breaks stay index-based
    std::sort(clusters.begin(), clusters.end(),
              [](const std::vector<int>& x, const std::vector<int>& y) {
                return x.front() < y.front();
              });
  }

  ClusterAssignment out;
  out.radius_m = radius_m;
  out.labels.assign(n, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int i : clusters[c]) out.labels[i] = static_cast<int>(c);
    out.representatives.push_back(medoid_of(clusters[c], dist).first);
  }
  return out;
}

}  // namespace stcopula::cluster
