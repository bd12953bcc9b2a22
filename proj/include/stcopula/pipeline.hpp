#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stcopula/cluster.hpp"
#include "stcopula/copula.hpp"
#include "stcopula/evd.hpp"
#include "stcopula/gapfill.hpp"
#include "stcopula/interpolate.hpp"
#include "stcopula/lagdep.hpp"
#include "stcopula/metrics.hpp"
#include "stcopula/types.hpp"

namespace stcopula::pipeline {

struct FitSettings {
  double radius_m = 18026.0;
  cluster::Linkage linkage = cluster::Linkage::Complete;
  // Largest temporal influence-ratio lag, in buckets.
  int max_lag = 6;
  std::vector<evd::FitFamily> candidates = {
      evd::FitFamily::Weibull, evd::FitFamily::Gumbel, evd::FitFamily::Frechet,
      evd::FitFamily::Gev, evd::FitFamily::BlendedWeibull};
  int grid_h_steps = 200;
  // Minimum dependence-bin count before a margin fit is attempted;
  // anything sparser degrades to the identity model.
  int min_margin_bins = 5;
};

struct Settings {
  FitSettings fit;
  gapfill::TrainConfig train;
  interp::Mode mode = interp::Mode::Literal;
  int k_donors = 1;
};

// The fitted interpolation model shared by every cluster: lag-dependence
// functions, margins, copula, and the most-likely-lag table. Degenerate
// inputs collapse to an identity table (single row of unit ratios at zero
// lag), flagged by `identity`.
struct PipelineModel {
  lagdep::LagDependence dep_h;
  lagdep::LagDependence dep_tau;
  std::optional<copula::JointModel> joint;
  double kendall_tau = 0.0;
  interp::LagGrid grid;
  interp::StirTable table;
  bool identity = false;
  std::vector<std::string> notes;
};

struct FittedPipeline {
  ClusterAssignment assignment;
  PipelineModel model;
};

// Clusters the stations and fits the global model from within-cluster
// spatial ratios and per-station temporal ratios. Requires a fully
// observed (gap-filled) matrix.
FittedPipeline fit(const ObservationMatrix& matrix, const FitSettings& settings);

// Interpolates one location/time with the fitted model. `eligible`
// optionally restricts donor cells (row-major n*k mask).
interp::PointResult predict(const FittedPipeline& fp, const ObservationMatrix& matrix,
                            double lat, double lon, int t, interp::Mode mode,
                            int k_donors = 1,
                            const std::vector<std::uint8_t>* eligible = nullptr);

// Masks a seeded random fraction of observed cells, reruns gap-fill + fit
// on the remainder, and scores interpolation at the masked cells. Masked
// cells are never donor-eligible. Throws Empty when the fraction rounds
// to zero cells.
metrics::MetricReport holdout_eval(const ObservationMatrix& raw, const Settings& settings,
                                   double fraction, std::uint64_t seed);

// Leave-one-station-out: each station is removed, the pipeline refits on
// the rest, and the station's observed cells are predicted from its
// coordinates. Requires >= 3 stations.
metrics::MetricReport loso_eval(const ObservationMatrix& raw, const Settings& settings);

// JSON round-trip of the fitted pipeline (exact double reconstruction).
std::string to_json(const FittedPipeline& fp);
FittedPipeline from_json(const std::string& text);

}  // namespace stcopula::pipeline
