#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "stcopula/errors.hpp"
#include "stcopula/gapfill.hpp"
#include "stcopula/rng.hpp"
#include "stcopula/types.hpp"
#include "test_support.hpp"

using namespace stcopula;
using gapfill::BlstmModel;
using gapfill::LstmCellParams;
using gapfill::TrainConfig;

namespace {

// Plain scalar-loop reimplementation of the bidirectional pass, used as an
// independent oracle for blstm_forward.
std::vector<std::vector<double>> naive_scan(const LstmCellParams& p,
                                            const std::vector<double>& xs) {
  int H = p.hidden();
  auto sigmoid = [](double a) { return 1.0 / (1.0 + std::exp(-a)); };
  std::vector<std::vector<double>> states;
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (double x : xs) {
    std::vector<double> hn(H), cn(H);
    for (int r = 0; r < H; ++r) {
      double af = p.wx_f[r] * x + p.b_f[r];
      double ai = p.wx_i[r] * x + p.b_i[r];
      double ao = p.wx_o[r] * x + p.b_o[r];
      double ag = p.wx_g[r] * x + p.b_g[r];
      for (int q = 0; q < H; ++q) {
        af += p.wh_f(r, q) * h[q];
        ai += p.wh_i(r, q) * h[q];
        ao += p.wh_o(r, q) * h[q];
        ag += p.wh_g(r, q) * h[q];
      }
      double f = sigmoid(af), i = sigmoid(ai), o = sigmoid(ao), g = std::tanh(ag);
      cn[r] = f * c[r] + i * g;
      hn[r] = o * std::tanh(cn[r]);
    }
    h = hn;
    c = cn;
    states.push_back(h);
  }
  return states;
}

std::vector<double> naive_blstm(const BlstmModel& m, const std::vector<double>& window) {
  int W = static_cast<int>(window.size());
  int H = m.hidden();
  std::vector<double> x(W);
  for (int t = 0; t < W; ++t) x[t] = (window[t] - m.norm_mean) / m.norm_std;
  std::vector<double> xr(x.rbegin(), x.rend());
  auto hf = naive_scan(m.fwd, x);
  auto hb = naive_scan(m.bwd, xr);
  std::vector<double> out(W);
  for (int t = 0; t < W; ++t) {
    double p = m.b_out;
    if (t >= 1)
      for (int r = 0; r < H; ++r) p += m.w_out_f[r] * hf[t - 1][r];
    if (t <= W - 2)
      for (int r = 0; r < H; ++r) p += m.w_out_b[r] * hb[W - 2 - t][r];
    out[t] = p * m.norm_std + m.norm_mean;
  }
  return out;
}

// Seeded model with weights large enough to exercise the nonlinearities.
BlstmModel strong_model(int hidden, std::uint64_t seed, double mean, double std) {
  BlstmModel m = gapfill::init_model(hidden, seed);
  for (double* slot : gapfill::parameter_slots(m)) *slot *= 4.0;
  m.norm_mean = mean;
  m.norm_std = std;
  return m;
}

}  // namespace

TEST_CASE("lstm_step: hand-computed scalar cell") {
  LstmCellParams p;
  auto vec1 = [](double v) { return Eigen::VectorXd::Constant(1, v); };
  auto mat1 = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
  p.wx_f = vec1(0.5);
  p.wx_i = vec1(-0.3);
  p.wx_o = vec1(0.7);
  p.wx_g = vec1(1.0);
  p.wh_f = mat1(0.25);
  p.wh_i = mat1(0.2);
  p.wh_o = mat1(-0.1);
  p.wh_g = mat1(0.3);
  p.b_f = vec1(0.1);
  p.b_i = vec1(0.0);
  p.b_o = vec1(0.2);
  p.b_g = vec1(-0.2);

  double x = 0.8, h_prev = 0.3, c_prev = -0.2;
  auto sigmoid = [](double a) { return 1.0 / (1.0 + std::exp(-a)); };
  double f = sigmoid(0.5 * x + 0.25 * h_prev + 0.1);
  double i = sigmoid(-0.3 * x + 0.2 * h_prev + 0.0);
  double o = sigmoid(0.7 * x - 0.1 * h_prev + 0.2);
  double g = std::tanh(1.0 * x + 0.3 * h_prev - 0.2);
  double c_expect = f * c_prev + i * g;
  double h_expect = o * std::tanh(c_expect);

  Eigen::VectorXd h(1), c(1);
  gapfill::lstm_step(p, x, vec1(h_prev), vec1(c_prev), h, c);
  CHECK(c[0] == doctest::Approx(c_expect).epsilon(1e-14));
  CHECK(h[0] == doctest::Approx(h_expect).epsilon(1e-14));
}

TEST_CASE("blstm_forward: all-zero weights collapse to the denormalized bias") {
  BlstmModel m = gapfill::init_model(3, 1);
  for (double* slot : gapfill::parameter_slots(m)) *slot = 0.0;
  m.b_out = 0.4;
  m.norm_mean = 100.0;
  m.norm_std = 20.0;
  auto out = m;
  std::vector<double> window = {80.0, 95.0, 130.0, 110.0, 70.0};
  for (double v : gapfill::blstm_forward(out, window))
    CHECK(v == doctest::Approx(100.0 + 0.4 * 20.0).epsilon(1e-14));
}

TEST_CASE("blstm_forward: matches the scalar-loop oracle") {
  for (std::uint64_t seed : {3ULL, 9ULL, 27ULL}) {
    BlstmModel m = strong_model(4, seed, 60.0, 12.0);
    Rng rng(seed + 100);
    std::vector<double> window(10);
    for (double& v : window) v = rng.uniform(30.0, 120.0);
    auto got = gapfill::blstm_forward(m, window);
    auto expect = naive_blstm(m, window);
    REQUIRE(got.size() == expect.size());
    for (std::size_t t = 0; t < got.size(); ++t)
      CHECK(got[t] == doctest::Approx(expect[t]).epsilon(1e-12));
  }
}

TEST_CASE("blstm_forward: prediction at t never conditions on x[t]") {
  BlstmModel m = strong_model(3, 5, 50.0, 10.0);
  std::vector<double> w1 = {40.0, 55.0, 62.0, 48.0, 70.0, 52.0};
  for (int t = 0; t < static_cast<int>(w1.size()); ++t) {
    std::vector<double> w2 = w1;
    w2[t] += 25.0;
    auto p1 = gapfill::blstm_forward(m, w1);
    auto p2 = gapfill::blstm_forward(m, w2);
    CHECK(p1[t] == p2[t]);  // bitwise: the target value must be invisible
    // ... while the perturbation is visible somewhere else.
    bool any_diff = false;
    for (std::size_t s = 0; s < p1.size(); ++s) any_diff |= (p1[s] != p2[s]);
    CHECK(any_diff);
  }
}

TEST_CASE("masked_loss: manual normalized mean squared error") {
  BlstmModel m = strong_model(2, 8, 40.0, 8.0);
  std::vector<double> window = {35.0, 44.0, 39.0, 52.0, 41.0};
  std::vector<double> targets = {36.0, 45.0, 38.0, 50.0, 43.0};
  std::vector<std::uint8_t> mask = {1, 0, 1, 1, 0};

  auto preds = naive_blstm(m, window);
  double acc = 0.0;
  int count = 0;
  for (std::size_t t = 0; t < window.size(); ++t) {
    if (!mask[t]) continue;
    double err = (preds[t] - targets[t]) / m.norm_std;
    acc += err * err;
    ++count;
  }
  CHECK(gapfill::masked_loss(m, window, targets, mask) ==
        doctest::Approx(acc / count).epsilon(1e-12));

  std::vector<std::uint8_t> none(window.size(), 0);
  CHECK(gapfill::masked_loss(m, window, targets, none) == 0.0);
}

TEST_CASE("loss_gradients: zero mask produces zero gradients") {
  BlstmModel m = strong_model(2, 4, 10.0, 2.0);
  std::vector<double> window = {9.0, 11.0, 10.5, 8.5};
  std::vector<std::uint8_t> mask(4, 0);
  for (double g : gapfill::loss_gradients(m, window, window, mask)) CHECK(g == 0.0);
}

TEST_CASE("gradient_check: analytic BPTT matches finite differences") {
  struct Config {
    int hidden;
    int window;
  };
  for (Config cfg : {Config{2, 5}, Config{3, 8}}) {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      BlstmModel m = strong_model(cfg.hidden, seed, 55.0, 15.0);
      Rng rng(seed * 31 + 7);
      std::vector<double> window(cfg.window), targets(cfg.window);
      std::vector<std::uint8_t> mask(cfg.window);
      for (int t = 0; t < cfg.window; ++t) {
        window[t] = rng.uniform(20.0, 90.0);
        targets[t] = rng.uniform(20.0, 90.0);
        mask[t] = rng.uniform() < 0.7 ? 1 : 0;
      }
      mask[cfg.window / 2] = 1;  // keep at least one scored position
      double err = gapfill::gradient_check(m, window, targets, mask);
      CHECK(err < 1e-4);
    }
  }
  // One larger configuration.
  BlstmModel m = strong_model(4, 12, 70.0, 20.0);
  std::vector<double> window = {60, 75, 80, 66, 72, 90, 85, 71, 64, 77};
  std::vector<double> targets = {62, 73, 82, 65, 70, 92, 83, 70, 66, 75};
  std::vector<std::uint8_t> mask = {1, 1, 0, 1, 1, 1, 0, 1, 1, 1};
  CHECK(gapfill::gradient_check(m, window, targets, mask) < 1e-4);
}

TEST_CASE("max_gradient_rel_err: flags a tampered gradient") {
  BlstmModel m = strong_model(2, 6, 55.0, 15.0);
  std::vector<double> window = {40.0, 60.0, 52.0, 47.0, 65.0};
  std::vector<double> targets = {42.0, 58.0, 50.0, 49.0, 60.0};
  std::vector<std::uint8_t> mask = {1, 1, 1, 1, 1};
  auto grads = gapfill::loss_gradients(m, window, targets, mask);
  grads[3] += 0.5;
  CHECK(gapfill::max_gradient_rel_err(m, window, targets, mask, grads) > 1e-2);

  grads.pop_back();
  CHECK_THROWS_AS(gapfill::max_gradient_rel_err(m, window, targets, mask, grads), Error);
}

TEST_CASE("train: deterministic, loss non-increasing, constant series learned exactly") {
  TrainConfig cfg;
  cfg.hidden = 3;
  cfg.window = 6;
  cfg.epochs = 40;
  cfg.learning_rate = 0.05;
  cfg.seed = 17;

  Rng rng(99);
  std::vector<double> series(18);
  for (std::size_t t = 0; t < series.size(); ++t)
    series[t] = 50.0 + 10.0 * std::sin(t / 2.0) + rng.uniform(-1.0, 1.0);
  std::vector<std::uint8_t> mask(series.size(), 1);
  mask[4] = 0;
  mask[11] = 0;

  BlstmModel a = gapfill::train(series, mask, cfg);
  BlstmModel b = gapfill::train(series, mask, cfg);
  std::ostringstream sa, sb;
  gapfill::save_model(sa, a);
  gapfill::save_model(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(a.final_loss <= a.initial_loss);

  // A constant series normalizes to all-zero inputs and targets, which the
  // zero-initialized output bias reproduces exactly.
  std::vector<double> flat(12, 72.5);
  std::vector<std::uint8_t> all(12, 1);
  BlstmModel c = gapfill::train(flat, all, cfg);
  CHECK(c.final_loss <= c.initial_loss);
  CHECK(c.final_loss < 1e-10);
  auto preds = gapfill::blstm_forward(c, std::vector<double>(6, 72.5));
  for (double v : preds) CHECK(v == doctest::Approx(72.5).epsilon(1e-9));
}

TEST_CASE("train: input validation") {
  TrainConfig cfg;
  cfg.window = 12;
  std::vector<double> shorty(5, 1.0);
  std::vector<std::uint8_t> mask5(5, 1);
  CHECK_THROWS_AS(gapfill::train(shorty, mask5, cfg), Error);
  try {
    gapfill::train(shorty, mask5, cfg);
  } catch (const Error& e) {
    CHECK(e.kind() == "InsufficientData");
  }

  std::vector<double> series(20, 1.0);
  std::vector<std::uint8_t> none(20, 0);
  CHECK_THROWS_AS(gapfill::train(series, none, cfg), Error);

  std::vector<std::uint8_t> wrong(19, 1);
  CHECK_THROWS_AS(gapfill::train(series, wrong, cfg), Error);

  TrainConfig bad = cfg;
  bad.hidden = 0;
  std::vector<std::uint8_t> ok(20, 1);
  CHECK_THROWS_AS(gapfill::train(series, ok, bad), Error);
}

TEST_CASE("impute: fully observed matrix passes through untouched") {
  std::vector<Station> st = {testsup::station("A", 28.70, 77.10),
                             testsup::station("B", 28.75, 77.12)};
  std::vector<std::vector<double>> rows = {{10, 12, 14, 13}, {20, 22, 19, 21}};
  auto m = testsup::make_matrix_rows(st, 4, rows);
  TrainConfig cfg;
  cfg.window = 3;
  cfg.epochs = 5;
  auto result = gapfill::impute(m, cfg);
  for (int i = 0; i < m.n(); ++i)
    for (int j = 0; j < m.k(); ++j) CHECK(result.matrix.value(i, j) == m.value(i, j));
  REQUIRE(result.report.size() == 2);
  for (const auto& row : result.report) {
    CHECK(row.n_imputed == 0);
    CHECK(row.fallback == "none");
  }
}

TEST_CASE("impute: observed cells bit-identical, gaps filled positive") {
  std::vector<Station> st = {testsup::station("A", 28.70, 77.10)};
  std::vector<std::vector<double>> rows = {
      {50, 60, testsup::kNaN, 55, 52, 61, testsup::kNaN, 58, 54, 57, 60, 53, 56, 59}};
  auto m = testsup::make_matrix_rows(st, 14, rows);
  TrainConfig cfg;
  cfg.hidden = 3;
  cfg.window = 6;
  cfg.epochs = 30;
  cfg.seed = 4;
  auto result = gapfill::impute(m, cfg);
  for (int j = 0; j < m.k(); ++j) {
    if (m.observed(0, j)) {
      CHECK(result.matrix.value(0, j) == m.value(0, j));
    } else {
      CHECK(result.matrix.observed(0, j));
      CHECK(result.matrix.value(0, j) >= 1e-6);
      CHECK(std::isfinite(result.matrix.value(0, j)));
    }
  }
  REQUIRE(result.report.size() == 1);
  CHECK(result.report[0].n_imputed == 2);
  CHECK(result.report[0].fallback == "none");

  // Seeded end to end: a second run reproduces every imputed value.
  auto again = gapfill::impute(m, cfg);
  for (int j = 0; j < m.k(); ++j)
    CHECK(again.matrix.value(0, j) == result.matrix.value(0, j));
}

TEST_CASE("impute: all-missing station falls back to the global mean") {
  std::vector<Station> st = {testsup::station("A", 28.70, 77.10),
                             testsup::station("B", 28.75, 77.12)};
  std::vector<std::vector<double>> rows = {
      {10, 20, 30, 40}, {testsup::kNaN, testsup::kNaN, testsup::kNaN, testsup::kNaN}};
  auto m = testsup::make_matrix_rows(st, 4, rows);
  TrainConfig cfg;
  cfg.window = 3;
  cfg.epochs = 5;
  auto result = gapfill::impute(m, cfg);
  REQUIRE(result.report.size() == 2);
  CHECK(result.report[1].fallback == "global_mean");
  CHECK(result.report[1].n_imputed == 4);
  for (int j = 0; j < 4; ++j)
    CHECK(result.matrix.value(1, j) == doctest::Approx(25.0));  // mean of 10,20,30,40
}

TEST_CASE("impute: series shorter than one window uses linear interpolation") {
  std::vector<Station> st = {testsup::station("A", 28.70, 77.10)};
  std::vector<std::vector<double>> rows = {
      {10, testsup::kNaN, 30, testsup::kNaN, testsup::kNaN, 60}};
  auto m = testsup::make_matrix_rows(st, 6, rows);
  TrainConfig cfg;
  cfg.window = 12;  // longer than the series
  auto result = gapfill::impute(m, cfg);
  CHECK(result.report[0].fallback == "linear");
  CHECK(result.matrix.value(0, 1) == doctest::Approx(20.0));
  CHECK(result.matrix.value(0, 3) == doctest::Approx(40.0));
  CHECK(result.matrix.value(0, 4) == doctest::Approx(50.0));

  // Leading/trailing gaps extend the nearest observation.
  std::vector<std::vector<double>> edges = {{testsup::kNaN, 20, 31, testsup::kNaN}};
  auto m2 = testsup::make_matrix_rows(st, 4, edges);
  auto r2 = gapfill::impute(m2, cfg);
  CHECK(r2.matrix.value(0, 0) == doctest::Approx(20.0));
  CHECK(r2.matrix.value(0, 3) == doctest::Approx(31.0));
}

TEST_CASE("impute: recovers a gapped sinusoid far better than mean imputation") {
  const int k = 60;
  std::vector<Station> st = {testsup::station("A", 28.70, 77.10)};
  std::vector<double> truth(k);
  for (int t = 0; t < k; ++t) truth[t] = 100.0 + 30.0 * std::sin(2.0 * M_PI * t / 12.0);

  std::vector<std::vector<double>> rows(1, truth);
  std::vector<int> gaps;
  for (int t = 0; t < k; ++t)
    if (t % 5 == 2) {
      rows[0][t] = testsup::kNaN;
      gaps.push_back(t);
    }
  auto m = testsup::make_matrix_rows(st, k, rows);

  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.window = 12;
  cfg.epochs = 300;
  cfg.learning_rate = 0.05;
  cfg.seed = 7;
  auto result = gapfill::impute(m, cfg);

  double obs_sum = 0.0;
  int obs_n = 0;
  for (int t = 0; t < k; ++t)
    if (m.observed(0, t)) {
      obs_sum += truth[t];
      ++obs_n;
    }
  double station_mean = obs_sum / obs_n;

  double se_model = 0.0, se_mean = 0.0;
  for (int t : gaps) {
    se_model += std::pow(result.matrix.value(0, t) - truth[t], 2);
    se_mean += std::pow(station_mean - truth[t], 2);
  }
  double rmse_model = std::sqrt(se_model / gaps.size());
  double rmse_mean = std::sqrt(se_mean / gaps.size());
  CHECK(rmse_mean > 0.0);
  CHECK(rmse_model <= 0.5 * rmse_mean);
}

TEST_CASE("impute: pooled training shares one model across stations") {
  std::vector<Station> st = {testsup::station("A", 28.70, 77.10),
                             testsup::station("B", 28.75, 77.12)};
  std::vector<std::vector<double>> rows(2, std::vector<double>(16));
  for (int t = 0; t < 16; ++t) {
    rows[0][t] = 50.0 + 5.0 * std::sin(t / 2.0);
    rows[1][t] = 80.0 + 8.0 * std::sin(t / 2.0 + 0.4);
  }
  rows[0][5] = testsup::kNaN;
  rows[1][9] = testsup::kNaN;
  auto m = testsup::make_matrix_rows(st, 16, rows);
  TrainConfig cfg;
  cfg.hidden = 3;
  cfg.window = 8;
  cfg.epochs = 30;
  cfg.seed = 2;
  cfg.pooled = true;
  auto result = gapfill::impute(m, cfg);
  CHECK(result.matrix.observed(0, 5));
  CHECK(result.matrix.observed(1, 9));
  CHECK(result.matrix.value(0, 5) > 0.0);
  CHECK(result.matrix.value(1, 9) > 0.0);
  // Deterministic under pooling as well.
  auto again = gapfill::impute(m, cfg);
  CHECK(again.matrix.value(0, 5) == result.matrix.value(0, 5));
  CHECK(again.matrix.value(1, 9) == result.matrix.value(1, 9));
}

TEST_CASE("impute report csv format") {
  std::vector<gapfill::ImputeReportRow> report = {{"A", 3, "none"}, {"B", 0, "linear"}};
  std::ostringstream out;
  gapfill::write_impute_report_csv(out, report);
  CHECK(out.str() == "station_id,n_imputed,fallback_used\nA,3,none\nB,0,linear\n");
}

TEST_CASE("save/load: text round-trip reproduces the model exactly") {
  TrainConfig cfg;
  cfg.hidden = 3;
  cfg.window = 5;
  cfg.epochs = 15;
  cfg.seed = 12;
  std::vector<double> series = {40, 42, 39, 45, 47, 44, 41, 48, 43, 46};
  std::vector<std::uint8_t> mask(series.size(), 1);
  BlstmModel trained = gapfill::train(series, mask, cfg);

  std::ostringstream out;
  gapfill::save_model(out, trained);
  std::istringstream in(out.str());
  BlstmModel loaded = gapfill::load_model(in);

  CHECK(loaded.hidden() == trained.hidden());
  CHECK(loaded.seed == trained.seed);
  CHECK(loaded.norm_mean == trained.norm_mean);
  CHECK(loaded.norm_std == trained.norm_std);
  CHECK(loaded.final_loss == trained.final_loss);
  auto slots_a = gapfill::parameter_slots(trained);
  auto slots_b = gapfill::parameter_slots(loaded);
  REQUIRE(slots_a.size() == slots_b.size());
  for (std::size_t s = 0; s < slots_a.size(); ++s) CHECK(*slots_a[s] == *slots_b[s]);

  std::vector<double> window = {41, 44, 40, 46, 43};
  auto pa = gapfill::blstm_forward(trained, window);
  auto pb = gapfill::blstm_forward(loaded, window);
  for (std::size_t t = 0; t < pa.size(); ++t) CHECK(pa[t] == pb[t]);

  std::istringstream junk("not-a-model 9");
  CHECK_THROWS_AS(gapfill::load_model(junk), Error);
}

TEST_CASE("parameter_count matches the slot list") {
  for (int H : {1, 2, 5}) {
    BlstmModel m = gapfill::init_model(H, 0);
    CHECK(gapfill::parameter_count(m) == static_cast<int>(gapfill::parameter_slots(m).size()));
  }
}
