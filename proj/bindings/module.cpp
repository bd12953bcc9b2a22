#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "stcopula/cluster.hpp"
#include "stcopula/copula.hpp"
#include "stcopula/errors.hpp"
#include "stcopula/evd.hpp"
#include "stcopula/gapfill.hpp"
#include "stcopula/ingest.hpp"
#include "stcopula/interpolate.hpp"
#include "stcopula/metrics.hpp"
#include "stcopula/pipeline.hpp"
#include "stcopula/types.hpp"

namespace py = pybind11;
using namespace stcopula;

namespace {

evd::FitFamily family_from_string(const std::string& name) {
  if (name == "weibull") return evd::FitFamily::Weibull;
  if (name == "gumbel") return evd::FitFamily::Gumbel;
  if (name == "frechet") return evd::FitFamily::Frechet;
  if (name == "gev") return evd::FitFamily::Gev;
  if (name == "blended_weibull") return evd::FitFamily::BlendedWeibull;
  throw config_error("BadConfig", "unknown margin family: " + name);
}

py::dict report_to_dict(const metrics::MetricReport& report) {
  py::dict d;
  d["rmse"] = report.rmse;
  d["mae"] = report.mae;
  d["n"] = report.n;
  py::list clusters;
  for (const auto& cm : report.per_cluster) {
    py::dict c;
    c["cluster"] = cm.cluster;
    c["rmse"] = cm.rmse;
    c["mae"] = cm.mae;
    c["n"] = cm.n;
    clusters.append(c);
  }
  d["per_cluster"] = clusters;
  return d;
}

// Python-facing pipeline: wraps matrix assembly, imputation, fitting, and
// prediction for station/value data supplied as plain lists.
class PyPipeline {
 public:
  PyPipeline(const std::vector<std::tuple<std::string, double, double>>& stations,
             const std::string& start, const std::string& granularity,
             const std::vector<std::vector<std::optional<double>>>& values,
             double radius_m, int hidden, int window, double learning_rate, int epochs,
             std::uint64_t seed, const std::string& mode, int max_lag) {
    std::vector<Station> sts;
    for (const auto& [id, lat, lon] : stations) sts.push_back({id, lat, lon});
    if (values.size() != sts.size())
      throw data_error("LengthMismatch", "one value row per station required");
    std::size_t k = values.empty() ? 0 : values[0].size();
    for (const auto& row : values)
      if (row.size() != k) throw data_error("LengthMismatch", "ragged value rows");

    auto day = ingest::parse_date(start);
    if (!day) throw config_error("BadConfig", "start date unparseable: " + start);
    TimeAxis axis;
    axis.start = std::chrono::year_month_day(*day);
    if (granularity == "1m")
      axis.granularity = Granularity::OneMonth;
    else if (granularity == "2m")
      axis.granularity = Granularity::TwoMonths;
    else if (granularity == "3m")
      axis.granularity = Granularity::ThreeMonths;
    else
      throw config_error("BadConfig", "granularity must be 1m, 2m, or 3m");
    axis.count = static_cast<int>(k);

    raw_ = ObservationMatrix(std::move(sts), axis);
    for (std::size_t i = 0; i < values.size(); ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (values[i][j]) raw_.set(static_cast<int>(i), static_cast<int>(j), *values[i][j]);

    settings_.fit.radius_m = radius_m;
    settings_.fit.max_lag = max_lag;
    settings_.train.hidden = hidden;
    settings_.train.window = window;
    settings_.train.learning_rate = learning_rate;
    settings_.train.epochs = epochs;
    settings_.train.seed = seed;
    settings_.mode = interp::mode_from_string(mode);
  }

  py::list impute() {
    eligible_ = raw_.mask_copy();
    auto result = gapfill::impute(raw_, settings_.train);
    filled_ = result.matrix;
    py::list report;
    for (const auto& row : result.report) {
      py::dict d;
      d["station_id"] = row.station_id;
      d["n_imputed"] = row.n_imputed;
      d["fallback"] = row.fallback;
      report.append(d);
    }
    return report;
  }

  py::dict fit() {
    ensure_filled();
    fitted_ = pipeline::fit(*filled_, settings_.fit);
    py::dict d;
    d["n_clusters"] = fitted_->assignment.n_clusters();
    d["labels"] = fitted_->assignment.labels;
    d["identity"] = fitted_->model.identity;
    d["table_rows"] = static_cast<int>(fitted_->model.table.rows.size());
    d["theta"] = fitted_->model.joint ? fitted_->model.joint->copula.theta : 1.0;
    d["notes"] = fitted_->model.notes;
    return d;
  }

  py::dict predict(double lat, double lon, int t) {
    if (!fitted_) throw config_error("MissingStage", "call fit() before predict()");
    auto r = pipeline::predict(*fitted_, *filled_, lat, lon, t, settings_.mode,
                               settings_.k_donors, &eligible_);
    py::dict d;
    d["value"] = r.value;
    d["donor_station"] = filled_->stations()[r.donor_station].id;
    d["donor_time"] = r.donor_time;
    d["r_h"] = r.r_h;
    d["r_tau"] = r.r_tau;
    return d;
  }

  py::dict holdout(double fraction, std::uint64_t seed) {
    return report_to_dict(pipeline::holdout_eval(raw_, settings_, fraction, seed));
  }

  py::dict loso() { return report_to_dict(pipeline::loso_eval(raw_, settings_)); }

  std::string model_json() {
    if (!fitted_) throw config_error("MissingStage", "call fit() before model_json()");
    return pipeline::to_json(*fitted_);
  }

 private:
  void ensure_filled() {
    if (!filled_) {
      eligible_ = raw_.mask_copy();
      filled_ = gapfill::impute(raw_, settings_.train).matrix;
    }
  }

  ObservationMatrix raw_;
  std::optional<ObservationMatrix> filled_;
  std::vector<std::uint8_t> eligible_;
  pipeline::Settings settings_;
  std::optional<pipeline::FittedPipeline> fitted_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "geostatistical copula interpolation toolkit (C++ core)";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "PipelineError");

  // distance + clustering
  m.def(
      "haversine_m",
      [](double lat1, double lon1, double lat2, double lon2) {
        return cluster::haversine_m({"a", lat1, lon1}, {"b", lat2, lon2});
      },
      py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"),
      "Great-circle distance in meters.");
  m.def(
      "cluster_stations",
      [](const std::vector<std::tuple<std::string, double, double>>& stations,
         double radius_m) {
        std::vector<Station> sts;
        for (const auto& [id, lat, lon] : stations) sts.push_back({id, lat, lon});
        auto a = cluster::hsc(sts, radius_m);
        py::dict d;
        d["labels"] = a.labels;
        d["medoids"] = a.representatives;
        d["n_clusters"] = a.n_clusters();
        return d;
      },
      py::arg("stations"), py::arg("radius_m"),
      "Radius-bounded hierarchical clustering of (id, lat, lon) tuples.");

  // copula
  m.def(
      "gh_cdf", [](double theta, double u, double v) { return copula::gh_cdf({theta}, u, v); },
      py::arg("theta"), py::arg("u"), py::arg("v"));
  m.def(
      "gh_density",
      [](double theta, double u, double v) { return copula::gh_density({theta}, u, v); },
      py::arg("theta"), py::arg("u"), py::arg("v"));
  m.def(
      "gh_sample",
      [](double theta, int n, std::uint64_t seed) {
        return copula::gh_sample({theta}, n, seed);
      },
      py::arg("theta"), py::arg("n"), py::arg("seed"));
  m.def("kendall_tau", &copula::kendall_tau, py::arg("pairs"));
  m.def(
      "fit_theta",
      [](const std::vector<std::pair<double, double>>& pairs) {
        auto tf = copula::fit_theta(pairs);
        py::dict d;
        d["theta"] = tf.param.theta;
        d["kendall_tau"] = tf.kendall_tau;
        d["warnings"] = tf.warnings;
        return d;
      },
      py::arg("pairs"));

  // extreme-value margins
  py::class_<evd::FittedMargin>(m, "Margin")
      .def("cdf", &evd::FittedMargin::cdf, py::arg("x"))
      .def("pdf", &evd::FittedMargin::pdf, py::arg("x"))
      .def("quantile", &evd::FittedMargin::quantile, py::arg("p"))
      .def("describe", &evd::FittedMargin::describe)
      .def_property_readonly("log_likelihood",
                             [](const evd::FittedMargin& f) { return f.log_likelihood; })
      .def_property_readonly("aic", [](const evd::FittedMargin& f) { return f.aic; })
      .def_property_readonly("n_samples",
                             [](const evd::FittedMargin& f) { return f.n_samples; })
      .def_property_readonly("warnings",
                             [](const evd::FittedMargin& f) { return f.warnings; });
  m.def(
      "fit_margin",
      [](const std::vector<double>& samples, const std::string& family) {
        return evd::mle_fit(samples, family_from_string(family));
      },
      py::arg("samples"), py::arg("family"),
      "Maximum-likelihood fit of one margin family "
      "(weibull, gumbel, frechet, gev, blended_weibull).");
  m.def(
      "select_margin",
      [](const std::vector<double>& samples, const std::vector<std::string>& candidates) {
        std::vector<evd::FitFamily> fams;
        for (const auto& c : candidates) fams.push_back(family_from_string(c));
        return evd::select_model(samples, fams);
      },
      py::arg("samples"), py::arg("candidates"));

  // metrics
  m.def("rmse", &metrics::rmse, py::arg("pred"), py::arg("truth"));
  m.def("mae", &metrics::mae, py::arg("pred"), py::arg("truth"));

  // pipeline
  py::class_<PyPipeline>(m, "Pipeline")
      .def(py::init<const std::vector<std::tuple<std::string, double, double>>&,
                    const std::string&, const std::string&,
                    const std::vector<std::vector<std::optional<double>>>&, double, int,
                    int, double, int, std::uint64_t, const std::string&, int>(),
           py::arg("stations"), py::arg("start"), py::arg("granularity"), py::arg("values"),
           py::arg("radius_m") = 18026.0, py::arg("hidden") = 16, py::arg("window") = 12,
           py::arg("learning_rate") = 1e-2, py::arg("epochs") = 200, py::arg("seed") = 42,
           py::arg("mode") = "literal", py::arg("max_lag") = 6)
      .def("impute", &PyPipeline::impute)
      .def("fit", &PyPipeline::fit)
      .def("predict", &PyPipeline::predict, py::arg("lat"), py::arg("lon"), py::arg("t"))
      .def("holdout", &PyPipeline::holdout, py::arg("fraction"), py::arg("seed"))
      .def("loso", &PyPipeline::loso)
      .def("model_json", &PyPipeline::model_json);
}
