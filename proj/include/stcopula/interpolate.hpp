#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stcopula/copula.hpp"
#include "stcopula/lagdep.hpp"
#include "stcopula/types.hpp"

namespace stcopula::interp {

// Search domain of the (h, tau) argmax: ascending spatial lags in meters
// and ascending temporal lags in buckets.
struct LagGrid {
  std::vector<double> h;
  std::vector<double> tau;

  double h_span() const;
  double tau_span() const;
};

// Default grid: `h_steps` points spanning the spatial margin's
// [0.1%, 99.9%] quantile range (clamped to nonnegative lags) and integer
// temporal lags 1..max_lag_buckets.
LagGrid make_lag_grid(const copula::JointModel& m, int h_steps, int max_lag_buckets);

struct LagPair {
  double h = 0.0;
  double tau = 0.0;
};

// Constrained argmax of the joint density over the grid points with
// h <= SLD(r_h) and tau <= TLD(r_tau). Ties break toward smaller h, then
// smaller tau. `fallback_bin`, when given, reports whether either ratio
// fell outside a populated dependence bin. Throws EmptyFeasibleRegion.
LagPair most_likely_lag(const copula::JointModel& m, const lagdep::LagDependence& dep_h,
                        const lagdep::LagDependence& dep_tau, double r_h, double r_tau,
                        const LagGrid& grid, bool* fallback_bin = nullptr);

// One row of the ratio-pair -> most-likely-lag map.
struct StirRow {
  double r_h = 0.0;
  double r_tau = 0.0;
  double h_star = 0.0;
  double tau_star = 0.0;
  double density_at_max = 0.0;
};

struct StirTable {
  std::vector<StirRow> rows;
  // Grid spans retained for scale-normalized nearest-row queries.
  double h_span = 1.0;
  double tau_span = 1.0;
  int n_infeasible = 0;
};

// One row per spatial-bin x temporal-bin combination; infeasible
// combinations are dropped and counted. Throws EmptyTable when every
// combination is infeasible.
StirTable build_stir_table(const copula::JointModel& m, const lagdep::LagDependence& dep_h,
                           const lagdep::LagDependence& dep_tau, const LagGrid& grid);

// Ratios of the table row whose (h_star, tau_star) is nearest to the query
// under scale-normalized Euclidean distance; ties keep the earlier row.
std::pair<double, double> a_map(const StirTable& table, double h, double tau);

// `Literal` applies the donor formula exactly as written, so a ratio pair
// (1, 1) scales the donor by sqrt(2); `Normalized` divides by sqrt(2) so
// that pair reproduces the donor value.
enum class Mode { Literal, Normalized };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& text);

struct InterpolateOptions {
  Mode mode = Mode::Literal;
  // Number of nearest donors blended by inverse distance; 1 = single donor.
  int k_donors = 1;
  // Optional n*k row-major eligibility mask; 0 marks cells that may not
  // donate (used by evaluation to exclude held-out cells).
  const std::vector<std::uint8_t>* eligible = nullptr;
};

struct PointResult {
  double value = 0.0;
  int donor_station = -1;
  int donor_time = -1;
  // Ratios applied to the (nearest) donor; (1, 1) for a self-query.
  double r_h = 0.0;
  double r_tau = 0.0;
};

// Interpolates one location/time from the cluster of the nearest station.
// The donor is the observed eligible cell minimizing scale-normalized
// spatio-temporal distance; a zero-lag donor is returned with ratio pair
// (1, 1). Throws NoDonor when the cluster has no eligible observed cell.
PointResult interpolate_point(const ObservationMatrix& matrix,
                              const ClusterAssignment& assignment, const StirTable& table,
                              double lat, double lon, int t0,
                              const InterpolateOptions& options);

struct BoundingBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
};

// Raster of interpolated values: layers indexed by requested time, cells
// in row-major order from the south-west corner. Cells without a donor
// hold NaN and donor index -1.
struct InterpolationGrid {
  BoundingBox bbox;
  double cell_deg = 0.0;
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> times;
  std::vector<double> values;
  std::vector<int> donor_station;
  std::vector<int> donor_time;

  std::size_t cell_index(int layer, int row, int col) const;
  double cell_lat(int row) const;
  double cell_lon(int col) const;
};

// Cell-center interpolation over the bounding box for every requested
// time; deterministic regardless of `threads`.
InterpolationGrid interpolate_grid(const ObservationMatrix& matrix,
                                   const ClusterAssignment& assignment, const StirTable& table,
                                   const BoundingBox& bbox, double cell_deg,
                                   const std::vector<int>& times,
                                   const InterpolateOptions& options, int threads = 1);

// CSV export: lon, lat, time_index, value, donor_id (value/donor empty for
// missing cells).
void write_grid_csv(std::ostream& out, const InterpolationGrid& grid,
                    const std::vector<Station>& stations);

// GeoJSON FeatureCollection of cell polygons with value/donor properties.
void write_grid_geojson(std::ostream& out, const InterpolationGrid& grid,
                        const std::vector<Station>& stations);

}  // namespace stcopula::interp
