#include "stcopula/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

#include "stcopula/errors.hpp"
#include "stcopula/rng.hpp"

namespace stcopula::pipeline {

namespace {

using nlohmann::json;

void degrade_to_identity(PipelineModel& model, const std::string& why) {
  model.identity = true;
  model.joint.reset();
  model.grid = interp::LagGrid{};
  model.table = interp::StirTable{};
  model.table.rows.push_back({1.0, 1.0, 0.0, 0.0, 0.0});
  model.notes.push_back("identity fallback: " + why);
}

}  // namespace

FittedPipeline fit(const ObservationMatrix& matrix, const FitSettings& settings) {
  if (matrix.n() == 0) throw data_error("EmptyInput", "matrix has no stations");
  if (matrix.missing_count() != 0)
    throw data_error("IncompleteMatrix", "gap-fill the matrix before fitting");
  if (settings.max_lag < 1) throw config_error("InvalidConfig", "max_lag must be >= 1");

  FittedPipeline fp;
  fp.assignment = cluster::hsc(matrix.stations(), settings.radius_m, settings.linkage);
  PipelineModel& model = fp.model;

  // Spatial ratios: within-cluster station pairs, pooled over clusters.
  std::vector<lagdep::LagRatioSample> sir;
  for (int c = 0; c < fp.assignment.n_clusters(); ++c) {
    try {
      auto samples = lagdep::sir_samples(matrix, fp.assignment, c);
      sir.insert(sir.end(), samples.begin(), samples.end());
    } catch (const Error& e) {
      if (e.kind() != "DegenerateCluster") throw;
      model.notes.push_back("cluster " + std::to_string(c) + " has no station pair");
    }
  }
  // Temporal ratios: per station, pooled.
  std::vector<lagdep::LagRatioSample> tir;
  for (int i = 0; i < matrix.n(); ++i) {
    auto samples = lagdep::tir_samples(matrix, i, settings.max_lag);
    tir.insert(tir.end(), samples.begin(), samples.end());
  }

  if (sir.empty()) {
    degrade_to_identity(model, "no spatial ratio samples");
    return fp;
  }
  if (tir.empty()) {
    degrade_to_identity(model, "no temporal ratio samples");
    return fp;
  }

  model.dep_h = lagdep::lag_dependence(sir, lagdep::auto_bin_width(sir));
  model.dep_tau = lagdep::lag_dependence(tir, lagdep::auto_bin_width(tir));
  if (static_cast<int>(model.dep_h.bins.size()) < settings.min_margin_bins ||
      static_cast<int>(model.dep_tau.bins.size()) < settings.min_margin_bins) {
    degrade_to_identity(model, "too few dependence bins for a margin fit");
    return fp;
  }

  evd::FittedMargin margin_h;
  evd::FittedMargin margin_tau;
  try {
    margin_h = evd::select_model(model.dep_h.max_lags(), settings.candidates);
    margin_tau = evd::select_model(model.dep_tau.max_lags(), settings.candidates);
  } catch (const Error& e) {
    degrade_to_identity(model, std::string("margin fit failed (") + e.what() + ")");
    return fp;
  }

  // Copula sample: SLD and TLD evaluated on the union of ratio-bin
  // centers, pairing the two dependence functions through their shared
  // ratio axis.
  std::vector<double> centers;
  for (const auto& b : model.dep_h.bins) centers.push_back(b.ratio_center);
  for (const auto& b : model.dep_tau.bins) centers.push_back(b.ratio_center);
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(centers.size());
  for (double r : centers)
    pairs.emplace_back(model.dep_h.lookup(r), model.dep_tau.lookup(r));

  copula::GhParam theta{1.0};
  try {
    copula::ThetaFit tf = copula::fit_theta(pairs);
    theta = tf.param;
    model.kendall_tau = tf.kendall_tau;
    for (const auto& w : tf.warnings) model.notes.push_back("copula: " + w);
  } catch (const Error& e) {
    if (e.kind() != "InsufficientPairs" && e.kind() != "DegenerateSample") throw;
    model.notes.push_back(std::string("copula degraded to independence (") + e.what() + ")");
  }

  model.joint = copula::JointModel{theta, std::move(margin_h), std::move(margin_tau)};
  try {
    model.grid = interp::make_lag_grid(*model.joint, settings.grid_h_steps, settings.max_lag);
    model.table = interp::build_stir_table(*model.joint, model.dep_h, model.dep_tau, model.grid);
  } catch (const Error& e) {
    if (e.kind() != "EmptyTable" && e.kind() != "EmptyDependence" &&
        e.kind() != "EmptyFeasibleRegion")
      throw;
    degrade_to_identity(model, std::string("lag table construction failed (") + e.what() + ")");
  }
  return fp;
}

interp::PointResult predict(const FittedPipeline& fp, const ObservationMatrix& matrix,
                            double lat, double lon, int t, interp::Mode mode, int k_donors,
                            const std::vector<std::uint8_t>* eligible) {
  interp::InterpolateOptions options;
  options.mode = mode;
  options.k_donors = k_donors;
  options.eligible = eligible;
  return interp::interpolate_point(matrix, fp.assignment, fp.model.table, lat, lon, t,
                                   options);
}

metrics::MetricReport holdout_eval(const ObservationMatrix& raw, const Settings& settings,
                                   double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw config_error("InvalidFraction", "holdout fraction must lie in (0, 1)");

  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < raw.n(); ++i)
    for (int j = 0; j < raw.k(); ++j)
      if (raw.observed(i, j)) cells.emplace_back(i, j);
  int n_mask = static_cast<int>(fraction * cells.size());
  if (n_mask == 0) throw data_error("Empty", "holdout fraction selects zero cells");

  Rng rng(seed);
  for (int t = 0; t < n_mask; ++t) {
    std::size_t pick = t + rng.bounded(cells.size() - t);
    std::swap(cells[t], cells[pick]);
  }

  ObservationMatrix work = raw;
  std::vector<double> truth;
  for (int t = 0; t < n_mask; ++t) {
    auto [i, j] = cells[t];
    truth.push_back(raw.value(i, j));
    work.set_missing(i, j);
  }
  // Donor eligibility is frozen before imputation: neither held-out nor
  // imputed cells may donate.
  std::vector<std::uint8_t> eligible = work.mask_copy();

  gapfill::ImputeResult imputed = gapfill::impute(work, settings.train);
  FittedPipeline fp = fit(imputed.matrix, settings.fit);

  std::vector<double> pred;
  std::vector<int> cluster_of;
  const auto& stations = raw.stations();
  for (int t = 0; t < n_mask; ++t) {
    auto [i, j] = cells[t];
    interp::PointResult r = predict(fp, imputed.matrix, stations[i].lat, stations[i].lon, j,
                                    settings.mode, settings.k_donors, &eligible);
    pred.push_back(r.value);
    cluster_of.push_back(fp.assignment.labels[i]);
  }
  return metrics::make_report(pred, truth, cluster_of);
}

metrics::MetricReport loso_eval(const ObservationMatrix& raw, const Settings& settings) {
  const int n = raw.n();
  if (n < 3) throw data_error("InsufficientStations", "leave-one-station-out needs >= 3");

  // Labels for the breakdown come from the full-data clustering.
  ClusterAssignment full = cluster::hsc(raw.stations(), settings.fit.radius_m,
                                        settings.fit.linkage);

  std::vector<double> pred;
  std::vector<double> truth;
  std::vector<int> cluster_of;
  for (int out = 0; out < n; ++out) {
    std::vector<Station> stations;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    for (int i = 0; i < n; ++i) {
      if (i == out) continue;
      stations.push_back(raw.stations()[i]);
      for (int j = 0; j < raw.k(); ++j) {
        bool obs = raw.observed(i, j);
        values.push_back(obs ? raw.value(i, j) : 0.0);
        mask.push_back(obs ? 1 : 0);
      }
    }
    ObservationMatrix reduced = ObservationMatrix::from_parts(
        std::move(stations), raw.time_axis(), std::move(values), std::move(mask));
    std::vector<std::uint8_t> eligible = reduced.mask_copy();

    gapfill::ImputeResult imputed = gapfill::impute(reduced, settings.train);
    FittedPipeline fp = fit(imputed.matrix, settings.fit);

    const Station& target = raw.stations()[out];
    for (int j = 0; j < raw.k(); ++j) {
      if (!raw.observed(out, j)) continue;
      interp::PointResult r = predict(fp, imputed.matrix, target.lat, target.lon, j,
                                      settings.mode, settings.k_donors, &eligible);
      pred.push_back(r.value);
      truth.push_back(raw.value(out, j));
      cluster_of.push_back(full.labels[out]);
    }
  }
  return metrics::make_report(pred, truth, cluster_of);
}

namespace {

json margin_to_json(const evd::FittedMargin& margin) {
  json j;
  j["log_likelihood"] = margin.log_likelihood;
  j["n_samples"] = margin.n_samples;
  j["aic"] = margin.aic;
  j["warnings"] = margin.warnings;
  if (margin.is_blended()) {
    const auto& b = std::get<evd::BlendedEvd>(margin.model);
    j["kind"] = "blended";
    j["f1"] = {{"family", evd::family_name(b.f1.tag)}, {"params", b.f1.params}};
    j["f2"] = {{"family", evd::family_name(b.f2.tag)}, {"params", b.f2.params}};
    j["distortion"] = {b.distortion.lower, b.distortion.upper, b.distortion.alpha,
                       b.distortion.beta};
  } else {
    const auto& f = std::get<evd::EvdFamily>(margin.model);
    j["kind"] = "evd";
    j["family"] = evd::family_name(f.tag);
    j["params"] = f.params;
  }
  return j;
}

evd::FamilyTag tag_from_name(const std::string& name) {
  if (name == "weibull") return evd::FamilyTag::Weibull;
  if (name == "gumbel") return evd::FamilyTag::Gumbel;
  if (name == "frechet") return evd::FamilyTag::Frechet;
  if (name == "gev") return evd::FamilyTag::Gev;
  throw data_error("BadModelFile", "unknown margin family: " + name);
}

evd::FittedMargin margin_from_json(const json& j) {
  evd::FittedMargin margin;
  margin.log_likelihood = j.at("log_likelihood").get<double>();
  margin.n_samples = j.at("n_samples").get<int>();
  margin.aic = j.at("aic").get<double>();
  margin.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (j.at("kind") == "blended") {
    evd::BlendedEvd b;
    b.f1.tag = tag_from_name(j.at("f1").at("family").get<std::string>());
    b.f1.params = j.at("f1").at("params").get<std::vector<double>>();
    b.f2.tag = tag_from_name(j.at("f2").at("family").get<std::string>());
    b.f2.params = j.at("f2").at("params").get<std::vector<double>>();
    auto d = j.at("distortion").get<std::vector<double>>();
    b.distortion = {d[0], d[1], d[2], d[3]};
    margin.model = b;
  } else {
    evd::EvdFamily f;
    f.tag = tag_from_name(j.at("family").get<std::string>());
    f.params = j.at("params").get<std::vector<double>>();
    margin.model = f;
  }
  return margin;
}

json dep_to_json(const lagdep::LagDependence& dep) {
  json bins = json::array();
  for (const auto& b : dep.bins) bins.push_back({b.ratio_center, b.max_lag});
  return {{"bin_width", dep.bin_width}, {"bins", bins}};
}

lagdep::LagDependence dep_from_json(const json& j) {
  lagdep::LagDependence dep;
  dep.bin_width = j.at("bin_width").get<double>();
  for (const auto& b : j.at("bins")) dep.bins.push_back({b[0].get<double>(), b[1].get<double>()});
  return dep;
}

}  // namespace

std::string to_json(const FittedPipeline& fp) {
  json j;
  j["assignment"] = {{"labels", fp.assignment.labels},
                     {"radius_m", fp.assignment.radius_m},
                     {"representatives", fp.assignment.representatives}};
  json m;
  m["identity"] = fp.model.identity;
  m["kendall_tau"] = fp.model.kendall_tau;
  m["notes"] = fp.model.notes;
  m["dep_h"] = dep_to_json(fp.model.dep_h);
  m["dep_tau"] = dep_to_json(fp.model.dep_tau);
  if (fp.model.joint) {
    m["joint"] = {{"theta", fp.model.joint->copula.theta},
                  {"margin_h", margin_to_json(fp.model.joint->margin_h)},
                  {"margin_tau", margin_to_json(fp.model.joint->margin_tau)}};
  } else {
    m["joint"] = nullptr;
  }
  m["grid"] = {{"h", fp.model.grid.h}, {"tau", fp.model.grid.tau}};
  json rows = json::array();
  for (const auto& r : fp.model.table.rows)
    rows.push_back({r.r_h, r.r_tau, r.h_star, r.tau_star, r.density_at_max});
  m["table"] = {{"h_span", fp.model.table.h_span},
                {"tau_span", fp.model.table.tau_span},
                {"n_infeasible", fp.model.table.n_infeasible},
                {"rows", rows}};
  j["model"] = m;
  return j.dump(2);
}

namespace {
FittedPipeline from_json_checked(const std::string& text);
}

FittedPipeline from_json(const std::string& text) {
  try {
    return from_json_checked(text);
  } catch (const json::exception& e) {
    throw data_error("BadModelFile", std::string("model json: ") + e.what());
  }
}

namespace {

FittedPipeline from_json_checked(const std::string& text) {
  json j = json::parse(text);
  FittedPipeline fp;
  fp.assignment.labels = j.at("assignment").at("labels").get<std::vector<int>>();
  fp.assignment.radius_m = j.at("assignment").at("radius_m").get<double>();
  fp.assignment.representatives =
      j.at("assignment").at("representatives").get<std::vector<int>>();
  const json& m = j.at("model");
  fp.model.identity = m.at("identity").get<bool>();
  fp.model.kendall_tau = m.at("kendall_tau").get<double>();
  fp.model.notes = m.at("notes").get<std::vector<std::string>>();
  fp.model.dep_h = dep_from_json(m.at("dep_h"));
  fp.model.dep_tau = dep_from_json(m.at("dep_tau"));
  if (!m.at("joint").is_null()) {
    copula::JointModel joint;
    joint.copula.theta = m.at("joint").at("theta").get<double>();
    joint.margin_h = margin_from_json(m.at("joint").at("margin_h"));
    joint.margin_tau = margin_from_json(m.at("joint").at("margin_tau"));
    fp.model.joint = std::move(joint);
  }
  fp.model.grid.h = m.at("grid").at("h").get<std::vector<double>>();
  fp.model.grid.tau = m.at("grid").at("tau").get<std::vector<double>>();
  fp.model.table.h_span = m.at("table").at("h_span").get<double>();
  fp.model.table.tau_span = m.at("table").at("tau_span").get<double>();
  fp.model.table.n_infeasible = m.at("table").at("n_infeasible").get<int>();
  for (const auto& r : m.at("table").at("rows"))
    fp.model.table.rows.push_back({r[0].get<double>(), r[1].get<double>(),
                                   r[2].get<double>(), r[3].get<double>(),
                                   r[4].get<double>()});
  return fp;
}

}  // namespace

}  // namespace stcopula::pipeline
