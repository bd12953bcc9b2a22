#include "stcopula/gapfill.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "stcopula/errors.hpp"
#include "stcopula/rng.hpp"

namespace stcopula::gapfill {

namespace {

constexpr double kPositiveFloor = 1e-6;
constexpr double kStdFloor = 1e-8;

Eigen::VectorXd logistic(const Eigen::VectorXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

void lstm_step(const LstmCellParams& params, double x, const Eigen::VectorXd& h_prev,
               const Eigen::VectorXd& c_prev, Eigen::VectorXd& h, Eigen::VectorXd& c) {
  Eigen::VectorXd f = logistic(params.wx_f * x + params.wh_f * h_prev + params.b_f);
  Eigen::VectorXd i = logistic(params.wx_i * x + params.wh_i * h_prev + params.b_i);
  Eigen::VectorXd o = logistic(params.wx_o * x + params.wh_o * h_prev + params.b_o);
  Eigen::VectorXd g = (params.wx_g * x + params.wh_g * h_prev + params.b_g)
                          .unaryExpr([](double v) { return std::tanh(v); });
  c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  h = o.cwiseProduct(c.array().tanh().matrix());
}

namespace {

// Activations recorded during one directional scan, kept for BPTT.
struct CellTrace {
  std::vector<double> x;
  std::vector<Eigen::VectorXd> f, i, o, g, c, tanh_c, h, h_prev, c_prev;
};

CellTrace scan(const LstmCellParams& params, const std::vector<double>& xs) {
  int H = params.hidden();
  CellTrace trace;
  trace.x = xs;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(H);
  for (double x : xs) {
    trace.h_prev.push_back(h);
    trace.c_prev.push_back(c);
    Eigen::VectorXd f = logistic(params.wx_f * x + params.wh_f * h + params.b_f);
    Eigen::VectorXd i = logistic(params.wx_i * x + params.wh_i * h + params.b_i);
    Eigen::VectorXd o = logistic(params.wx_o * x + params.wh_o * h + params.b_o);
    Eigen::VectorXd g = (params.wx_g * x + params.wh_g * h + params.b_g)
                            .unaryExpr([](double v) { return std::tanh(v); });
    c = (f.cwiseProduct(c) + i.cwiseProduct(g)).eval();
    Eigen::VectorXd tc = c.array().tanh().matrix();
    h = o.cwiseProduct(tc);
    trace.f.push_back(f);
    trace.i.push_back(i);
    trace.o.push_back(o);
    trace.g.push_back(g);
    trace.c.push_back(c);
    trace.tanh_c.push_back(tc);
    trace.h.push_back(h);
  }
  return trace;
}

struct CellGrads {
  Eigen::VectorXd wx_f, wx_i, wx_o, wx_g;
  Eigen::MatrixXd wh_f, wh_i, wh_o, wh_g;
  Eigen::VectorXd b_f, b_i, b_o, b_g;

  explicit CellGrads(int H)
      : wx_f(Eigen::VectorXd::Zero(H)),
        wx_i(Eigen::VectorXd::Zero(H)),
        wx_o(Eigen::VectorXd::Zero(H)),
        wx_g(Eigen::VectorXd::Zero(H)),
        wh_f(Eigen::MatrixXd::Zero(H, H)),
        wh_i(Eigen::MatrixXd::Zero(H, H)),
        wh_o(Eigen::MatrixXd::Zero(H, H)),
        wh_g(Eigen::MatrixXd::Zero(H, H)),
        b_f(Eigen::VectorXd::Zero(H)),
        b_i(Eigen::VectorXd::Zero(H)),
        b_o(Eigen::VectorXd::Zero(H)),
        b_g(Eigen::VectorXd::Zero(H)) {}
};

// Backward pass through one directional scan. `ext_h[t]` is the loss
// gradient flowing into h[t] from the output projection.
CellGrads bptt(const LstmCellParams& params, const CellTrace& trace,
               const std::vector<Eigen::VectorXd>& ext_h) {
  int H = params.hidden();
  int W = static_cast<int>(trace.x.size());
  CellGrads grads(H);
  Eigen::VectorXd dh_carry = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dc_carry = Eigen::VectorXd::Zero(H);
  for (int t = W - 1; t >= 0; --t) {
    Eigen::VectorXd dh = ext_h[t] + dh_carry;
    Eigen::VectorXd d_o = dh.cwiseProduct(trace.tanh_c[t]);
    Eigen::VectorXd dao =
        d_o.cwiseProduct(trace.o[t].cwiseProduct(Eigen::VectorXd::Ones(H) - trace.o[t]));
    Eigen::VectorXd dc =
        dc_carry + dh.cwiseProduct(trace.o[t])
                       .cwiseProduct((Eigen::VectorXd::Ones(H) -
                                      trace.tanh_c[t].cwiseProduct(trace.tanh_c[t])));
    Eigen::VectorXd d_f = dc.cwiseProduct(trace.c_prev[t]);
    Eigen::VectorXd daf =
        d_f.cwiseProduct(trace.f[t].cwiseProduct(Eigen::VectorXd::Ones(H) - trace.f[t]));
    Eigen::VectorXd d_i = dc.cwiseProduct(trace.g[t]);
    Eigen::VectorXd dai =
        d_i.cwiseProduct(trace.i[t].cwiseProduct(Eigen::VectorXd::Ones(H) - trace.i[t]));
    Eigen::VectorXd d_g = dc.cwiseProduct(trace.i[t]);
    Eigen::VectorXd dag = d_g.cwiseProduct(
        (Eigen::VectorXd::Ones(H) - trace.g[t].cwiseProduct(trace.g[t])));

    grads.wx_f += daf * trace.x[t];
    grads.wx_i += dai * trace.x[t];
    grads.wx_o += dao * trace.x[t];
    grads.wx_g += dag * trace.x[t];
    grads.wh_f += daf * trace.h_prev[t].transpose();
    grads.wh_i += dai * trace.h_prev[t].transpose();
    grads.wh_o += dao * trace.h_prev[t].transpose();
    grads.wh_g += dag * trace.h_prev[t].transpose();
    grads.b_f += daf;
    grads.b_i += dai;
    grads.b_o += dao;
    grads.b_g += dag;

    dh_carry = params.wh_f.transpose() * daf + params.wh_i.transpose() * dai +
               params.wh_o.transpose() * dao + params.wh_g.transpose() * dag;
    dc_carry = dc.cwiseProduct(trace.f[t]);
  }
  return grads;
}

// Normalized predictions for one window plus the traces needed by BPTT.
struct WindowPass {
  CellTrace fwd;        // forward scan of the normalized window
  CellTrace bwd;        // forward scan of the reversed normalized window
  std::vector<double> p;  // normalized predictions
};

WindowPass run_window(const BlstmModel& model, const std::vector<double>& window,
                      double mean, double std) {
  int W = static_cast<int>(window.size());
  int H = model.hidden();
  std::vector<double> x(W);
  for (int t = 0; t < W; ++t) x[t] = (window[t] - mean) / std;
  std::vector<double> xr(x.rbegin(), x.rend());
  WindowPass pass;
  pass.fwd = scan(model.fwd, x);
  pass.bwd = scan(model.bwd, xr);
  pass.p.resize(W);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(H);
  for (int t = 0; t < W; ++t) {
    // bwd trace index s corresponds to original time W-1-s, so the state
    // after consuming x[t+1] sits at s = W-2-t.
    const Eigen::VectorXd& hf = t >= 1 ? pass.fwd.h[t - 1] : zero;
    const Eigen::VectorXd& hb = t <= W - 2 ? pass.bwd.h[W - 2 - t] : zero;
    pass.p[t] = model.w_out_f.dot(hf) + model.w_out_b.dot(hb) + model.b_out;
  }
  return pass;
}

struct ModelGrads {
  CellGrads fwd;
  CellGrads bwd;
  Eigen::VectorXd w_out_f, w_out_b;
  double b_out = 0.0;

  explicit ModelGrads(int H)
      : fwd(H),
        bwd(H),
        w_out_f(Eigen::VectorXd::Zero(H)),
        w_out_b(Eigen::VectorXd::Zero(H)) {}
};

// Adds d(sum of squared errors)/d(params) for one window into `grads` and
// returns {sum of squares, observed count}.
std::pair<double, int> accumulate_window(const BlstmModel& model,
                                         const std::vector<double>& window,
                                         const std::vector<double>& targets,
                                         const std::vector<std::uint8_t>& mask, double mean,
                                         double std, ModelGrads* grads) {
  int W = static_cast<int>(window.size());
  int H = model.hidden();
  WindowPass pass = run_window(model, window, mean, std);

  double sq_sum = 0.0;
  int observed = 0;
  std::vector<double> dp(W, 0.0);
  for (int t = 0; t < W; ++t) {
    if (!mask[t]) continue;
    double z = (targets[t] - mean) / std;
    double err = pass.p[t] - z;
    sq_sum += err * err;
    dp[t] = 2.0 * err;
    ++observed;
  }
  if (!grads || observed == 0) return {sq_sum, observed};

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(H);
  std::vector<Eigen::VectorXd> ext_f(W, zero);
  std::vector<Eigen::VectorXd> ext_b(W, zero);
  for (int t = 0; t < W; ++t) {
    if (dp[t] == 0.0) continue;
    if (t >= 1) {
      grads->w_out_f += dp[t] * pass.fwd.h[t - 1];
      ext_f[t - 1] += dp[t] * model.w_out_f;
    }
    if (t <= W - 2) {
      grads->w_out_b += dp[t] * pass.bwd.h[W - 2 - t];
      ext_b[W - 2 - t] += dp[t] * model.w_out_b;
    }
    grads->b_out += dp[t];
  }
  CellGrads gf = bptt(model.fwd, pass.fwd, ext_f);
  CellGrads gb = bptt(model.bwd, pass.bwd, ext_b);
  auto add_cell = [](CellGrads& into, const CellGrads& from) {
    into.wx_f += from.wx_f;
    into.wx_i += from.wx_i;
    into.wx_o += from.wx_o;
    into.wx_g += from.wx_g;
    into.wh_f += from.wh_f;
    into.wh_i += from.wh_i;
    into.wh_o += from.wh_o;
    into.wh_g += from.wh_g;
    into.b_f += from.b_f;
    into.b_i += from.b_i;
    into.b_o += from.b_o;
    into.b_g += from.b_g;
  };
  add_cell(grads->fwd, gf);
  add_cell(grads->bwd, gb);
  return {sq_sum, observed};
}

std::vector<double> flatten_grads(const BlstmModel& model, const ModelGrads& grads) {
  std::vector<double> flat;
  flat.reserve(parameter_count(model));
  auto push_vec = [&flat](const Eigen::VectorXd& v) {
    flat.insert(flat.end(), v.data(), v.data() + v.size());
  };
  auto push_mat = [&flat](const Eigen::MatrixXd& m) {
    flat.insert(flat.end(), m.data(), m.data() + m.size());
  };
  auto push_cell = [&](const CellGrads& c) {
    push_vec(c.wx_f);
    push_vec(c.wx_i);
    push_vec(c.wx_o);
    push_vec(c.wx_g);
    push_mat(c.wh_f);
    push_mat(c.wh_i);
    push_mat(c.wh_o);
    push_mat(c.wh_g);
    push_vec(c.b_f);
    push_vec(c.b_i);
    push_vec(c.b_o);
    push_vec(c.b_g);
  };
  push_cell(grads.fwd);
  push_cell(grads.bwd);
  push_vec(grads.w_out_f);
  push_vec(grads.w_out_b);
  flat.push_back(grads.b_out);
  return flat;
}

}  // namespace

std::vector<double> blstm_forward(const BlstmModel& model, const std::vector<double>& window) {
  WindowPass pass = run_window(model, window, model.norm_mean, model.norm_std);
  std::vector<double> out(pass.p.size());
  for (std::size_t t = 0; t < pass.p.size(); ++t)
    out[t] = pass.p[t] * model.norm_std + model.norm_mean;
  return out;
}

double masked_loss(const BlstmModel& model, const std::vector<double>& window,
                   const std::vector<double>& targets, const std::vector<std::uint8_t>& mask) {
  auto [sq_sum, observed] =
      accumulate_window(model, window, targets, mask, model.norm_mean, model.norm_std, nullptr);
  return observed > 0 ? sq_sum / observed : 0.0;
}

std::vector<double> loss_gradients(const BlstmModel& model, const std::vector<double>& window,
                                   const std::vector<double>& targets,
                                   const std::vector<std::uint8_t>& mask) {
  ModelGrads grads(model.hidden());
  auto [sq_sum, observed] =
      accumulate_window(model, window, targets, mask, model.norm_mean, model.norm_std, &grads);
  (void)sq_sum;
  std::vector<double> flat = flatten_grads(model, grads);
  if (observed > 0)
    for (double& g : flat) g /= observed;
  else
    std::fill(flat.begin(), flat.end(), 0.0);
  return flat;
}

std::vector<double*> parameter_slots(BlstmModel& model) {
  std::vector<double*> slots;
  auto push_vec = [&slots](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) slots.push_back(v.data() + i);
  };
  auto push_mat = [&slots](Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) slots.push_back(m.data() + i);
  };
  auto push_cell = [&](LstmCellParams& c) {
    push_vec(c.wx_f);
    push_vec(c.wx_i);
    push_vec(c.wx_o);
    push_vec(c.wx_g);
    push_mat(c.wh_f);
    push_mat(c.wh_i);
    push_mat(c.wh_o);
    push_mat(c.wh_g);
    push_vec(c.b_f);
    push_vec(c.b_i);
    push_vec(c.b_o);
    push_vec(c.b_g);
  };
  push_cell(model.fwd);
  push_cell(model.bwd);
  push_vec(model.w_out_f);
  push_vec(model.w_out_b);
  slots.push_back(&model.b_out);
  return slots;
}

int parameter_count(const BlstmModel& model) {
  int H = model.hidden();
  return 2 * (4 * H + 4 * H * H + 4 * H) + 2 * H + 1;
}

double max_gradient_rel_err(const BlstmModel& model, const std::vector<double>& window,
                            const std::vector<double>& targets,
                            const std::vector<std::uint8_t>& mask,
                            const std::vector<double>& analytic) {
  constexpr double eps = 1e-5;
  BlstmModel probe = model;
  std::vector<double*> slots = parameter_slots(probe);
  if (analytic.size() != slots.size())
    throw numeric_error("GradientShape", "analytic gradient length does not match model");
  double worst = 0.0;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    double saved = *slots[s];
    *slots[s] = saved + eps;
    double up = masked_loss(probe, window, targets, mask);
    *slots[s] = saved - eps;
    double down = masked_loss(probe, window, targets, mask);
    *slots[s] = saved;
    double numeric = (up - down) / (2.0 * eps);
    double denom = std::max(1e-10, std::abs(analytic[s]) + std::abs(numeric));
    worst = std::max(worst, std::abs(analytic[s] - numeric) / denom);
  }
  return worst;
}

double gradient_check(const BlstmModel& model, const std::vector<double>& window,
                      const std::vector<double>& targets,
                      const std::vector<std::uint8_t>& mask) {
  return max_gradient_rel_err(model, window, targets, mask,
                              loss_gradients(model, window, targets, mask));
}

BlstmModel init_model(int hidden, std::uint64_t seed) {
  if (hidden < 1) throw config_error("InvalidConfig", "hidden size must be >= 1");
  Rng rng(seed);
  double scale = 0.2 / std::sqrt(static_cast<double>(hidden));
  auto rand_vec = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
    return v;
  };
  auto rand_mat = [&](int n) {
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
    return m;
  };
  auto make_cell = [&](int H) {
    LstmCellParams c;
    c.wx_f = rand_vec(H);
    c.wx_i = rand_vec(H);
    c.wx_o = rand_vec(H);
    c.wx_g = rand_vec(H);
    c.wh_f = rand_mat(H);
    c.wh_i = rand_mat(H);
    c.wh_o = rand_mat(H);
    c.wh_g = rand_mat(H);
    // Forget bias starts open so early training can carry state.
    c.b_f = Eigen::VectorXd::Ones(H);
    c.b_i = Eigen::VectorXd::Zero(H);
    c.b_o = Eigen::VectorXd::Zero(H);
    c.b_g = Eigen::VectorXd::Zero(H);
    return c;
  };
  BlstmModel model;
  model.fwd = make_cell(hidden);
  model.bwd = make_cell(hidden);
  model.w_out_f = rand_vec(hidden);
  model.w_out_b = rand_vec(hidden);
  model.b_out = 0.0;
  model.seed = seed;
  return model;
}

namespace {

// One training series with its own normalization stats (pooled training
// mixes several stations, each normalized independently).
struct TrainSample {
  std::vector<double> window_src;  // gap-filled raw series
  std::vector<double> targets;     // raw series (gaps hold the fill value)
  std::vector<std::uint8_t> mask;
  double mean = 0.0;
  double std = 1.0;
};

struct SeriesStats {
  double mean = 0.0;
  double std = 1.0;
  int observed = 0;
};

SeriesStats series_stats(const std::vector<double>& series,
                         const std::vector<std::uint8_t>& mask) {
  SeriesStats st;
  double sum = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t)
    if (mask[t]) {
      sum += series[t];
      ++st.observed;
    }
  if (st.observed == 0) return st;
  st.mean = sum / st.observed;
  double ss = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t)
    if (mask[t]) ss += (series[t] - st.mean) * (series[t] - st.mean);
  st.std = std::sqrt(ss / st.observed);
  if (st.std < kStdFloor) st.std = 1.0;
  return st;
}

TrainSample make_sample(const std::vector<double>& series,
                        const std::vector<std::uint8_t>& mask, const SeriesStats& st) {
  TrainSample sample;
  sample.mean = st.mean;
  sample.std = st.std;
  sample.mask = mask;
  sample.window_src.resize(series.size());
  for (std::size_t t = 0; t < series.size(); ++t)
    sample.window_src[t] = mask[t] ? series[t] : st.mean;
  sample.targets = sample.window_src;
  return sample;
}

BlstmModel train_samples(const std::vector<TrainSample>& samples, const TrainConfig& cfg,
                         double model_mean, double model_std) {
  if (cfg.hidden < 1 || cfg.window < 2)
    throw config_error("InvalidConfig", "hidden >= 1 and window >= 2 required");
  if (!(cfg.learning_rate > 0.0) || cfg.epochs < 1)
    throw config_error("InvalidConfig", "learning rate > 0 and epochs >= 1 required");
  const int W = cfg.window;
  bool any_window = false;
  for (const auto& s : samples)
    if (static_cast<int>(s.window_src.size()) >= W) any_window = true;
  if (!any_window)
    throw data_error("InsufficientData", "no series long enough for one window");

  BlstmModel model = init_model(cfg.hidden, cfg.seed);
  model.norm_mean = model_mean;
  model.norm_std = model_std;

  // Full-batch pass: loss and gradients over every sliding window of
  // every sample, averaged over the total observed-target count.
  auto batch = [&](const BlstmModel& m, ModelGrads* grads) {
    double sq_sum = 0.0;
    long observed = 0;
    for (const auto& s : samples) {
      int n = static_cast<int>(s.window_src.size());
      if (n < W) continue;
      for (int start = 0; start + W <= n; ++start) {
        std::vector<double> window(s.window_src.begin() + start,
                                   s.window_src.begin() + start + W);
        std::vector<double> targets(s.targets.begin() + start, s.targets.begin() + start + W);
        std::vector<std::uint8_t> mask(s.mask.begin() + start, s.mask.begin() + start + W);
        auto [sq, obs] = accumulate_window(m, window, targets, mask, s.mean, s.std, grads);
        sq_sum += sq;
        observed += obs;
      }
    }
    return std::make_pair(sq_sum, observed);
  };

  auto batch_loss = [&](const BlstmModel& m) {
    auto [sq, obs] = batch(m, nullptr);
    return obs > 0 ? sq / obs : 0.0;
  };

  {
    auto [sq, obs] = batch(model, nullptr);
    if (obs == 0) throw data_error("InsufficientData", "no observed targets in any window");
    model.initial_loss = sq / obs;
  }

  std::vector<double*> slots = parameter_slots(model);
  std::vector<double> best(slots.size());
  double best_loss = std::numeric_limits<double>::infinity();
  auto snapshot_if_better = [&](double loss) {
    if (loss < best_loss) {
      best_loss = loss;
      for (std::size_t i = 0; i < slots.size(); ++i) best[i] = *slots[i];
    }
  };

  constexpr double kClipNorm = 5.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ModelGrads grads(cfg.hidden);
    auto [sq, obs] = batch(model, &grads);
    snapshot_if_better(sq / obs);
    std::vector<double> flat = flatten_grads(model, grads);
    double norm2 = 0.0;
    for (double& g : flat) {
      g /= obs;
      norm2 += g * g;
    }
    double norm = std::sqrt(norm2);
    double scale = norm > kClipNorm ? kClipNorm / norm : 1.0;
    for (std::size_t i = 0; i < slots.size(); ++i)
      *slots[i] -= cfg.learning_rate * scale * flat[i];
  }
  snapshot_if_better(batch_loss(model));

  for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = best[i];
  model.final_loss = best_loss;
  return model;
}

}  // namespace

BlstmModel train(const std::vector<double>& series, const std::vector<std::uint8_t>& mask,
                 const TrainConfig& cfg) {
  if (series.size() != mask.size())
    throw data_error("LengthMismatch", "series and mask lengths differ");
  if (static_cast<int>(series.size()) < cfg.window)
    throw data_error("InsufficientData", "series shorter than one window");
  SeriesStats st = series_stats(series, mask);
  if (st.observed == 0)
    throw data_error("InsufficientData", "series has no observed value");
  return train_samples({make_sample(series, mask, st)}, cfg, st.mean, st.std);
}

namespace {

std::vector<double> linear_fill(const std::vector<double>& series,
                                const std::vector<std::uint8_t>& mask) {
  int n = static_cast<int>(series.size());
  std::vector<double> out = series;
  int prev = -1;
  for (int t = 0; t < n; ++t) {
    if (mask[t]) {
      prev = t;
      continue;
    }
    int next = -1;
    for (int u = t + 1; u < n; ++u)
      if (mask[u]) {
        next = u;
        break;
      }
    if (prev < 0 && next < 0) break;  // handled by the global-mean fallback
    if (prev < 0)
      out[t] = series[next];
    else if (next < 0)
      out[t] = series[prev];
    else {
      double frac = static_cast<double>(t - prev) / (next - prev);
      out[t] = series[prev] + frac * (series[next] - series[prev]);
    }
  }
  return out;
}

}  // namespace

ImputeResult impute(const ObservationMatrix& matrix, const TrainConfig& cfg) {
  const int n = matrix.n();
  const int k = matrix.k();
  ImputeResult result;
  result.matrix = matrix;

  double global = matrix.global_mean();
  if (!std::isfinite(global)) global = 1.0;

  std::vector<std::vector<double>> series(n);
  std::vector<std::vector<std::uint8_t>> masks(n);
  std::vector<SeriesStats> stats(n);
  for (int i = 0; i < n; ++i) {
    series[i].resize(k);
    masks[i].resize(k);
    for (int j = 0; j < k; ++j) {
      masks[i][j] = matrix.observed(i, j) ? 1 : 0;
      series[i][j] = masks[i][j] ? matrix.value(i, j) : 0.0;
    }
    stats[i] = series_stats(series[i], masks[i]);
  }

  // Pooled mode trains one shared model over every trainable station.
  BlstmModel pooled_model;
  bool pooled_ready = false;
  if (cfg.pooled && k >= cfg.window) {
    std::vector<TrainSample> samples;
    for (int i = 0; i < n; ++i)
      if (stats[i].observed > 0) samples.push_back(make_sample(series[i], masks[i], stats[i]));
    if (!samples.empty()) {
      double mean_sum = 0.0;
      for (const auto& s : samples) mean_sum += s.mean;
      pooled_model = train_samples(samples, cfg, mean_sum / samples.size(), 1.0);
      pooled_ready = true;
    }
  }

  for (int i = 0; i < n; ++i) {
    ImputeReportRow row;
    row.station_id = matrix.stations()[i].id;
    row.fallback = "none";
    int n_missing = 0;
    for (int j = 0; j < k; ++j)
      if (!masks[i][j]) ++n_missing;
    row.n_imputed = n_missing;
    if (n_missing == 0) {
      result.report.push_back(row);
      continue;
    }

    std::vector<double> filled;
    if (stats[i].observed == 0) {
      filled.assign(k, global);
      row.fallback = "global_mean";
    } else if (k < cfg.window) {
      filled = linear_fill(series[i], masks[i]);
      row.fallback = "linear";
    } else {
      BlstmModel model;
      if (pooled_ready) {
        model = pooled_model;
      } else {
        TrainConfig station_cfg = cfg;
        station_cfg.seed = Rng(cfg.seed).split(static_cast<std::uint64_t>(i)).seed();
        model = train_samples({make_sample(series[i], masks[i], stats[i])}, station_cfg,
                              stats[i].mean, stats[i].std);
      }
      model.norm_mean = stats[i].mean;
      model.norm_std = stats[i].std;

      // Average the predictions of every window covering each cell.
      std::vector<double> pred_sum(k, 0.0);
      std::vector<int> pred_count(k, 0);
      std::vector<double> src(k);
      for (int j = 0; j < k; ++j) src[j] = masks[i][j] ? series[i][j] : stats[i].mean;
      const int W = cfg.window;
      for (int start = 0; start + W <= k; ++start) {
        std::vector<double> window(src.begin() + start, src.begin() + start + W);
        std::vector<double> pred = blstm_forward(model, window);
        for (int t = 0; t < W; ++t) {
          pred_sum[start + t] += pred[t];
          ++pred_count[start + t];
        }
      }
      filled.resize(k);
      for (int j = 0; j < k; ++j)
        filled[j] = pred_count[j] > 0 ? pred_sum[j] / pred_count[j] : stats[i].mean;
    }

    for (int j = 0; j < k; ++j) {
      if (masks[i][j]) continue;
      double v = filled[j];
      if (!std::isfinite(v) || v < kPositiveFloor) v = kPositiveFloor;
      result.matrix.set(i, j, v);
    }
    result.report.push_back(row);
  }
  return result;
}

void write_impute_report_csv(std::ostream& out, const std::vector<ImputeReportRow>& report) {
  out << "station_id,n_imputed,fallback_used\n";
  for (const auto& row : report)
    out << row.station_id << ',' << row.n_imputed << ',' << row.fallback << '\n';
}

void save_model(std::ostream& out, const BlstmModel& model) {
  out << std::setprecision(17);
  out << "blstm 1\n";
  out << model.hidden() << ' ' << model.seed << '\n';
  out << model.norm_mean << ' ' << model.norm_std << ' ' << model.initial_loss << ' '
      << model.final_loss << '\n';
  BlstmModel copy = model;
  for (double* slot : parameter_slots(copy)) out << *slot << '\n';
}

BlstmModel load_model(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "blstm" || version != 1)
    throw data_error("BadModelFile", "unrecognized model header");
  int hidden = 0;
  std::uint64_t seed = 0;
  in >> hidden >> seed;
  if (!in || hidden < 1) throw data_error("BadModelFile", "invalid hidden size");
  BlstmModel model = init_model(hidden, seed);
  in >> model.norm_mean >> model.norm_std >> model.initial_loss >> model.final_loss;
  for (double* slot : parameter_slots(model)) {
    if (!(in >> *slot)) throw data_error("BadModelFile", "truncated parameter block");
  }
  return model;
}

}  // namespace stcopula::gapfill
