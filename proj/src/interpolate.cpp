#include "stcopula/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "stcopula/cluster.hpp"
#include "stcopula/csv.hpp"
#include "stcopula/errors.hpp"

namespace stcopula::interp {

namespace {

double span_of(const std::vector<double>& axis) {
  if (axis.size() < 2) return 0.0;
  return axis.back() - axis.front();
}

}  // namespace

double LagGrid::h_span() const { return span_of(h); }
double LagGrid::tau_span() const { return span_of(tau); }

LagGrid make_lag_grid(const copula::JointModel& m, int h_steps, int max_lag_buckets) {
  if (h_steps < 1) throw config_error("InvalidGrid", "h_steps must be >= 1");
  if (max_lag_buckets < 1)
    throw config_error("InvalidGrid", "max_lag_buckets must be >= 1");
  LagGrid grid;
  double lo = std::max(0.0, m.margin_h.quantile(0.001));
  double hi = m.margin_h.quantile(0.999);
  if (!(hi > lo)) hi = lo + 1.0;
  grid.h.reserve(h_steps);
  if (h_steps == 1) {
    grid.h.push_back(lo);
  } else {
    double step = (hi - lo) / (h_steps - 1);
    for (int i = 0; i < h_steps; ++i) grid.h.push_back(lo + step * i);
  }
  grid.tau.reserve(max_lag_buckets);
  for (int j = 1; j <= max_lag_buckets; ++j) grid.tau.push_back(j);
  return grid;
}

LagPair most_likely_lag(const copula::JointModel& m, const lagdep::LagDependence& dep_h,
                        const lagdep::LagDependence& dep_tau, double r_h, double r_tau,
                        const LagGrid& grid, bool* fallback_bin) {
  bool exact_h = true;
  bool exact_tau = true;
  double sld = dep_h.lookup(r_h, &exact_h);
  double tld = dep_tau.lookup(r_tau, &exact_tau);
  if (fallback_bin) *fallback_bin = !(exact_h && exact_tau);

  LagPair best;
  double best_density = -1.0;
  bool found = false;
  for (double h : grid.h) {
    if (h > sld) break;
    for (double tau : grid.tau) {
      if (tau > tld) break;
      double density = m.joint_pdf(h, tau);
      if (!std::isfinite(density)) density = 0.0;
      // Ascending iteration makes "first strict improvement wins" the
      // smaller-h-then-smaller-tau tie-break.
      if (!found || density > best_density) {
        best = {h, tau};
        best_density = density;
        found = true;
      }
    }
  }
  if (!found)
    throw numeric_error("EmptyFeasibleRegion",
                                "no grid point satisfies h <= SLD and tau <= TLD");
  return best;
}

StirTable build_stir_table(const copula::JointModel& m, const lagdep::LagDependence& dep_h,
                           const lagdep::LagDependence& dep_tau, const LagGrid& grid) {
  if (dep_h.bins.empty() || dep_tau.bins.empty())
    throw data_error("EmptyDependence", "lag-dependence function has no bins");
  StirTable table;
  table.h_span = grid.h_span();
  table.tau_span = grid.tau_span();
  for (const auto& bh : dep_h.bins) {
    for (const auto& bt : dep_tau.bins) {
      try {
        LagPair lag = most_likely_lag(m, dep_h, dep_tau, bh.ratio_center, bt.ratio_center, grid);
        StirRow row;
        row.r_h = bh.ratio_center;
        row.r_tau = bt.ratio_center;
        row.h_star = lag.h;
        row.tau_star = lag.tau;
        double density = m.joint_pdf(lag.h, lag.tau);
        row.density_at_max = std::isfinite(density) ? density : 0.0;
        table.rows.push_back(row);
      } catch (const Error& e) {
        if (e.kind() != "EmptyFeasibleRegion") throw;
        ++table.n_infeasible;
      }
    }
  }
  if (table.rows.empty())
    throw numeric_error("EmptyTable", "every ratio combination was infeasible");
  return table;
}

std::pair<double, double> a_map(const StirTable& table, double h, double tau) {
  if (table.rows.empty()) throw data_error("EmptyTable", "lag table has no rows");
  double hs = table.h_span > 0.0 ? table.h_span : 1.0;
  double ts = table.tau_span > 0.0 ? table.tau_span : 1.0;
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    double dh = (table.rows[r].h_star - h) / hs;
    double dt = (table.rows[r].tau_star - tau) / ts;
    double d2 = dh * dh + dt * dt;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = r;
    }
  }
  return {table.rows[best].r_h, table.rows[best].r_tau};
}

std::string to_string(Mode mode) {
  return mode == Mode::Literal ? "literal" : "normalized";
}

Mode mode_from_string(const std::string& text) {
  if (text == "literal") return Mode::Literal;
  if (text == "normalized") return Mode::Normalized;
  throw config_error("InvalidMode", "unknown interpolation mode: " + text);
}

namespace {

struct DonorCandidate {
  double distance = 0.0;  // scale-normalized
  int station = -1;
  int time = -1;
  double spatial_m = 0.0;
  double lag_buckets = 0.0;
};

// Donor value scaled by the ratio norm of the query's lag to the donor.
double donor_contribution(const ObservationMatrix& matrix, const StirTable& table,
                          const DonorCandidate& donor, Mode mode, double* r_h_out,
                          double* r_tau_out) {
  double r_h;
  double r_tau;
  if (donor.spatial_m == 0.0 && donor.lag_buckets == 0.0) {
    // A zero-lag donor is the queried cell itself: full self-influence.
    r_h = 1.0;
    r_tau = 1.0;
  } else {
    std::tie(r_h, r_tau) = a_map(table, donor.spatial_m, donor.lag_buckets);
  }
  if (r_h_out) *r_h_out = r_h;
  if (r_tau_out) *r_tau_out = r_tau;
  double norm = std::sqrt(r_h * r_h + r_tau * r_tau);
  if (mode == Mode::Normalized) norm /= std::sqrt(2.0);
  return matrix.value(donor.station, donor.time) * norm;
}

}  // namespace

PointResult interpolate_point(const ObservationMatrix& matrix,
                              const ClusterAssignment& assignment, const StirTable& table,
                              double lat, double lon, int t0,
                              const InterpolateOptions& options) {
  if (matrix.n() == 0) throw data_error("NoDonor", "matrix has no stations");
  if (options.k_donors < 1)
    throw config_error("InvalidDonorCount", "k_donors must be >= 1");
  const auto& stations = matrix.stations();
  Station query{"query", lat, lon};

  // The query belongs to the cluster of its nearest station.
  int nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < matrix.n(); ++i) {
    double d = cluster::haversine_m(query, stations[i]);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  int cluster_id = assignment.labels[nearest];

  double hs = table.h_span > 0.0 ? table.h_span : 1.0;
  double ts = table.tau_span > 0.0 ? table.tau_span : 1.0;
  std::vector<DonorCandidate> candidates;
  for (int i = 0; i < matrix.n(); ++i) {
    if (assignment.labels[i] != cluster_id) continue;
    double spatial = cluster::haversine_m(query, stations[i]);
    for (int j = 0; j < matrix.k(); ++j) {
      if (!matrix.observed(i, j)) continue;
      if (options.eligible &&
          (*options.eligible)[static_cast<std::size_t>(i) * matrix.k() + j] == 0)
        continue;
      DonorCandidate c;
      c.station = i;
      c.time = j;
      c.spatial_m = spatial;
      c.lag_buckets = std::abs(j - t0);
      c.distance = std::hypot(spatial / hs, c.lag_buckets / ts);
      candidates.push_back(c);
    }
  }
  if (candidates.empty())
    throw data_error("NoDonor", "no eligible observed cell in the query's cluster");

  auto closer = [](const DonorCandidate& a, const DonorCandidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.station != b.station) return a.station < b.station;
    return a.time < b.time;
  };
  int k = std::min<int>(options.k_donors, static_cast<int>(candidates.size()));
  std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(), closer);

  PointResult result;
  result.donor_station = candidates[0].station;
  result.donor_time = candidates[0].time;
  if (k == 1 || candidates[0].distance == 0.0) {
    result.value = donor_contribution(matrix, table, candidates[0], options.mode,
                                      &result.r_h, &result.r_tau);
    return result;
  }
  double weight_sum = 0.0;
  double value_sum = 0.0;
  for (int d = 0; d < k; ++d) {
    double w = 1.0 / std::max(candidates[d].distance, 1e-12);
    double* rh = d == 0 ? &result.r_h : nullptr;
    double* rt = d == 0 ? &result.r_tau : nullptr;
    value_sum += w * donor_contribution(matrix, table, candidates[d], options.mode, rh, rt);
    weight_sum += w;
  }
  result.value = value_sum / weight_sum;
  return result;
}

std::size_t InterpolationGrid::cell_index(int layer, int row, int col) const {
  return (static_cast<std::size_t>(layer) * n_rows + row) * n_cols + col;
}

double InterpolationGrid::cell_lat(int row) const {
  return bbox.lat_min + cell_deg * (row + 0.5);
}

double InterpolationGrid::cell_lon(int col) const {
  return bbox.lon_min + cell_deg * (col + 0.5);
}

InterpolationGrid interpolate_grid(const ObservationMatrix& matrix,
                                   const ClusterAssignment& assignment, const StirTable& table,
                                   const BoundingBox& bbox, double cell_deg,
                                   const std::vector<int>& times,
                                   const InterpolateOptions& options, int threads) {
  if (!(cell_deg > 0.0))
    throw config_error("InvalidCellSize", "cell size must be positive");
  if (!(bbox.lat_max > bbox.lat_min) || !(bbox.lon_max > bbox.lon_min))
    throw config_error("InvalidBoundingBox", "bounding box must have positive extent");

  InterpolationGrid grid;
  grid.bbox = bbox;
  grid.cell_deg = cell_deg;
  grid.n_rows = std::max(1, static_cast<int>(std::ceil((bbox.lat_max - bbox.lat_min) / cell_deg - 1e-9)));
  grid.n_cols = std::max(1, static_cast<int>(std::ceil((bbox.lon_max - bbox.lon_min) / cell_deg - 1e-9)));
  grid.times = times;
  std::size_t total = static_cast<std::size_t>(times.size()) * grid.n_rows * grid.n_cols;
  grid.values.assign(total, std::numeric_limits<double>::quiet_NaN());
  grid.donor_station.assign(total, -1);
  grid.donor_time.assign(total, -1);

  auto fill_cell = [&](std::size_t flat) {
    int layer = static_cast<int>(flat / (static_cast<std::size_t>(grid.n_rows) * grid.n_cols));
    std::size_t rest = flat % (static_cast<std::size_t>(grid.n_rows) * grid.n_cols);
    int row = static_cast<int>(rest / grid.n_cols);
    int col = static_cast<int>(rest % grid.n_cols);
    try {
      PointResult r = interpolate_point(matrix, assignment, table, grid.cell_lat(row),
                                        grid.cell_lon(col), times[layer], options);
      grid.values[flat] = r.value;
      grid.donor_station[flat] = r.donor_station;
      grid.donor_time[flat] = r.donor_time;
    } catch (const Error& e) {
      if (e.kind() != "NoDonor") throw;
      // Leave the missing-cell markers in place.
    }
  };

  int workers = std::max(1, threads);
  if (workers == 1 || total < 2) {
    for (std::size_t flat = 0; flat < total; ++flat) fill_cell(flat);
  } else {
    // Static block partition: each cell writes a disjoint slot, so the
    // result is identical to the serial order.
    std::vector<std::thread> pool;
    std::size_t chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      std::size_t begin = static_cast<std::size_t>(w) * chunk;
      std::size_t end = std::min(total, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([begin, end, &fill_cell] {
        for (std::size_t flat = begin; flat < end; ++flat) fill_cell(flat);
      });
    }
    for (auto& t : pool) t.join();
  }
  return grid;
}

void write_grid_csv(std::ostream& out, const InterpolationGrid& grid,
                    const std::vector<Station>& stations) {
  out << "lon,lat,time_index,value,donor_id\n";
  for (std::size_t layer = 0; layer < grid.times.size(); ++layer) {
    for (int row = 0; row < grid.n_rows; ++row) {
      for (int col = 0; col < grid.n_cols; ++col) {
        std::size_t flat = grid.cell_index(static_cast<int>(layer), row, col);
        out << csv::fmt(grid.cell_lon(col)) << ',' << csv::fmt(grid.cell_lat(row)) << ','
            << grid.times[layer] << ',';
        if (grid.donor_station[flat] >= 0) {
          out << csv::fmt(grid.values[flat]) << ','
              << stations[grid.donor_station[flat]].id;
        } else {
          out << ',';
        }
        out << '\n';
      }
    }
  }
}

void write_grid_geojson(std::ostream& out, const InterpolationGrid& grid,
                        const std::vector<Station>& stations) {
  out << "{\"type\":\"FeatureCollection\",\"features\":[";
  bool first = true;
  for (std::size_t layer = 0; layer < grid.times.size(); ++layer) {
    for (int row = 0; row < grid.n_rows; ++row) {
      for (int col = 0; col < grid.n_cols; ++col) {
        std::size_t flat = grid.cell_index(static_cast<int>(layer), row, col);
        double lat0 = grid.bbox.lat_min + grid.cell_deg * row;
        double lon0 = grid.bbox.lon_min + grid.cell_deg * col;
        double lat1 = lat0 + grid.cell_deg;
        double lon1 = lon0 + grid.cell_deg;
        if (!first) out << ',';
        first = false;
        out << "{\"type\":\"Feature\",\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[["
            << '[' << csv::fmt(lon0) << ',' << csv::fmt(lat0) << "],"
            << '[' << csv::fmt(lon1) << ',' << csv::fmt(lat0) << "],"
            << '[' << csv::fmt(lon1) << ',' << csv::fmt(lat1) << "],"
            << '[' << csv::fmt(lon0) << ',' << csv::fmt(lat1) << "],"
            << '[' << csv::fmt(lon0) << ',' << csv::fmt(lat0) << "]]]},"
            << "\"properties\":{\"time_index\":" << grid.times[layer];
        if (grid.donor_station[flat] >= 0) {
          out << ",\"value\":" << csv::fmt(grid.values[flat]) << ",\"donor_id\":\""
              << stations[grid.donor_station[flat]].id << "\"";
        } else {
          out << ",\"value\":null,\"donor_id\":null";
        }
        out << "}}";
      }
    }
  }
  out << "]}\n";
}

}  // namespace stcopula::interp
