#pragma once

#include <vector>

#include "stcopula/types.hpp"

namespace stcopula::cluster {

inline constexpr double kEarthRadiusM = 6'371'000.0;

// Great-circle distance in meters on a spherical earth.
double haversine_m(const Station& a, const Station& b);

// Symmetric n x n grid of pairwise great-circle distances.
class DistanceMatrix {
 public:
  static DistanceMatrix build(const std::vector<Station>& stations);

  int size() const { return n_; }
  double operator()(int i, int j) const {
    return d_[static_cast<std::size_t>(i) * n_ + j];
  }

 private:
  int n_ = 0;
  std::vector<double> d_;
};

enum class Linkage { Complete, Single };

// Radius-bounded hierarchical agglomerative clustering. Merges greedily in
// increasing linkage-distance order; a merge is admitted only while the
// merged cluster keeps diameter <= 2*radius_m and medoid-to-member
// distance <= radius_m. Ties break on the lowest station-index pair.
ClusterAssignment hsc(const std::vector<Station>& stations, double radius_m,
                      Linkage linkage = Linkage::Complete);

}  // namespace stcopula::cluster
