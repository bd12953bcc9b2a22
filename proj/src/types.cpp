#include "stcopula/types.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_set>

namespace stcopula {

namespace chr = std::chrono;

int TimeAxis::months_per_bucket() const {
  switch (granularity) {
    case Granularity::OneMonth: return 1;
    case Granularity::TwoMonths: return 2;
    case Granularity::ThreeMonths: return 3;
    case Granularity::Custom: return 0;
  }
  return 0;
}

chr::year_month_day TimeAxis::bucket_start(int j) const {
  if (granularity == Granularity::Custom) {
    return chr::year_month_day{chr::sys_days{start} + chr::days{j * custom_days}};
  }
  chr::year_month ym = chr::year_month{start.year(), start.month()} +
                       chr::months{j * months_per_bucket()};
  return ym / start.day();
}

std::string TimeAxis::bucket_label(int j) const {
  chr::year_month_day d = bucket_start(j);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(d.year()),
                unsigned(d.month()), unsigned(d.day()));
  return buf;
}

int TimeAxis::bucket_of(chr::sys_days day) const {
  if (granularity == Granularity::Custom) {
    auto diff = (day - chr::sys_days{start}).count();
    if (diff < 0) return -1;
    int j = static_cast<int>(diff / custom_days);
    return j < count ? j : -1;
  }
  chr::year_month_day d{day};
  int diff_months = (int(d.year()) - int(start.year())) * 12 +
                    (int(unsigned(d.month())) - int(unsigned(start.month())));
  if (diff_months < 0) return -1;
  // partial leading month: a day before the start day-of-month of month 0
  if (diff_months == 0 && d.day() < start.day()) return -1;
  int j = diff_months / months_per_bucket();
  return j < count ? j : -1;
}

TimeAxis make_monthly_axis(int year, unsigned month, Granularity g, int count) {
  TimeAxis axis;
  axis.start = chr::year{year} / chr::month{month} / chr::day{1};
  axis.granularity = g;
  axis.count = count;
  return axis;
}

ObservationMatrix::ObservationMatrix(std::vector<Station> stations, TimeAxis axis)
    : stations_(std::move(stations)), axis_(axis) {
  std::size_t cells =
      static_cast<std::size_t>(stations_.size()) * static_cast<std::size_t>(axis_.count);
  values_.assign(cells, 0.0);
  mask_.assign(cells, 0);
}

ObservationMatrix ObservationMatrix::from_parts(std::vector<Station> stations,
                                                TimeAxis axis,
                                                std::vector<double> values,
                                                std::vector<std::uint8_t> mask) {
  ObservationMatrix m;
  m.stations_ = std::move(stations);
  m.axis_ = axis;
  m.values_ = std::move(values);
  m.mask_ = std::move(mask);
  return m;
}

void ObservationMatrix::set(int i, int j, double v) {
  values_[idx(i, j)] = v;
  mask_[idx(i, j)] = 1;
}

void ObservationMatrix::set_missing(int i, int j) {
  values_[idx(i, j)] = 0.0;
  mask_[idx(i, j)] = 0;
}

int ObservationMatrix::observed_count() const {
  int c = 0;
  for (std::uint8_t m : mask_) c += m;
  return c;
}

double ObservationMatrix::station_mean(int i) const {
  double sum = 0.0;
  int c = 0;
  for (int j = 0; j < k(); ++j) {
    if (observed(i, j)) {
      sum += value(i, j);
      ++c;
    }
  }
  return c > 0 ? sum / c : std::numeric_limits<double>::quiet_NaN();
}

double ObservationMatrix::global_mean() const {
  double sum = 0.0;
  int c = 0;
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < k(); ++j) {
      if (observed(i, j)) {
        sum += value(i, j);
        ++c;
      }
    }
  }
  return c > 0 ? sum / c : std::numeric_limits<double>::quiet_NaN();
}

std::vector<int> ClusterAssignment::members(int cluster) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (labels[i] == cluster) out.push_back(i);
  }
  return out;
}

std::vector<std::string> validate(const ObservationMatrix& matrix) {
  std::vector<std::string> violations;
  const auto& stations = matrix.stations();

  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const Station& s = stations[i];
    if (s.lat < -90.0 || s.lat > 90.0 || !std::isfinite(s.lat)) {
      violations.push_back("station " + s.id + ": latitude out of range");
    }
    if (s.lon < -180.0 || s.lon > 180.0 || !std::isfinite(s.lon)) {
      violations.push_back("station " + s.id + ": longitude out of range");
    }
    if (!seen.insert(s.id).second) {
      violations.push_back("station " + s.id + ": duplicate id");
    }
  }

  const TimeAxis& axis = matrix.time_axis();
  if (axis.count < 2) {
    violations.push_back("time axis: count must be >= 2");
  }
  if (axis.granularity == Granularity::Custom && axis.custom_days <= 0) {
    violations.push_back("time axis: custom granularity must be positive");
  }

  std::size_t cells =
      static_cast<std::size_t>(matrix.n()) * static_cast<std::size_t>(matrix.k());
  if (matrix.values_.size() != cells) {
    violations.push_back("values storage is " + std::to_string(matrix.values_.size()) +
                         " cells, expected " + std::to_string(cells));
  }
  if (matrix.mask_.size() != cells) {
    violations.push_back("mask storage is " + std::to_string(matrix.mask_.size()) +
                         " cells, expected " + std::to_string(cells));
  }
  if (matrix.values_.size() != cells || matrix.mask_.size() != cells) {
    return violations;  // cell scan below would walk out of bounds
  }

  for (int i = 0; i < matrix.n(); ++i) {
    for (int j = 0; j < matrix.k(); ++j) {
      if (!matrix.observed(i, j)) continue;
      double v = matrix.value(i, j);
      if (!std::isfinite(v)) {
        violations.push_back("cell (" + std::to_string(i) + "," + std::to_string(j) +
                             "): observed value not finite");
      } else if (v <= 0.0) {
        violations.push_back("cell (" + std::to_string(i) + "," + std::to_string(j) +
                             "): observed value must be > 0");
      }
    }
  }
  return violations;
}

}  // namespace stcopula
