#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace stcopula {

// A monitoring site. Coordinates are spherical-earth degrees.
struct Station {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
};

enum class Granularity { OneMonth, TwoMonths, ThreeMonths, Custom };

// Calendar-bucketed time axis: `count` consecutive buckets starting at
// `start`, each spanning 1/2/3 months or a fixed number of days.
struct TimeAxis {
  std::chrono::year_month_day start{};
  Granularity granularity = Granularity::OneMonth;
  int custom_days = 0;  // only used when granularity == Custom
  int count = 0;

  int months_per_bucket() const;

  std::chrono::year_month_day bucket_start(int j) const;
  // ISO date of the bucket start, used as column label in matrix exports.
  std::string bucket_label(int j) const;
  // Bucket index for a calendar day, or -1 when outside the axis.
  int bucket_of(std::chrono::sys_days day) const;
};

TimeAxis make_monthly_axis(int year, unsigned month, Granularity g, int count);

// n stations x k time buckets of positive field values with an explicit
// missing-value mask. Missing cells never hold a value; arithmetic on the
// matrix must consult the mask.
class ObservationMatrix {
 public:
  ObservationMatrix() = default;
  ObservationMatrix(std::vector<Station> stations, TimeAxis axis);

  // Assembles a matrix from raw storage without size checks; `validate`
  // reports any values/mask dimension mismatch. Accessors assume a valid
  // matrix.
  static ObservationMatrix from_parts(std::vector<Station> stations, TimeAxis axis,
                                      std::vector<double> values,
                                      std::vector<std::uint8_t> mask);

  int n() const { return static_cast<int>(stations_.size()); }
  int k() const { return axis_.count; }

  const std::vector<Station>& stations() const { return stations_; }
  const TimeAxis& time_axis() const { return axis_; }

  bool observed(int i, int j) const { return mask_[idx(i, j)] != 0; }
  double value(int i, int j) const { return values_[idx(i, j)]; }

  void set(int i, int j, double v);
  void set_missing(int i, int j);

  int observed_count() const;
  int missing_count() const { return n() * k() - observed_count(); }

  // Mean over observed cells of one station's series; NaN when none.
  double station_mean(int i) const;
  // Mean over all observed cells; NaN when the matrix is empty.
  double global_mean() const;

  // Row-major copy of the mask, 1 = observed.
  std::vector<std::uint8_t> mask_copy() const { return mask_; }

  friend std::vector<std::string> validate(const ObservationMatrix& matrix);

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(axis_.count) + j;
  }

  std::vector<Station> stations_;
  TimeAxis axis_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

// Radius-bounded partition of the stations. `representatives[c]` is the
// station index of cluster c's medoid.
struct ClusterAssignment {
  std::vector<int> labels;
  double radius_m = 0.0;
  std::vector<int> representatives;

  int n_clusters() const { return static_cast<int>(representatives.size()); }
  std::vector<int> members(int cluster) const;
};

// Invariant check for the data model. Returns one description per
// violation; empty means the matrix is valid. Never throws.
std::vector<std::string> validate(const ObservationMatrix& matrix);

}  // namespace stcopula
