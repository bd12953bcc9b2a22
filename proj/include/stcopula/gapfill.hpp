#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stcopula/types.hpp"

namespace stcopula::gapfill {

// One LSTM cell, input size 1, hidden size H. Gate order everywhere is
// forget, input, output, candidate.
struct LstmCellParams {
  Eigen::VectorXd wx_f, wx_i, wx_o, wx_g;  // input weights, H
  Eigen::MatrixXd wh_f, wh_i, wh_o, wh_g;  // recurrent weights, H x H
  Eigen::VectorXd b_f, b_i, b_o, b_g;      // biases, H

  int hidden() const { return static_cast<int>(b_f.size()); }
};

// Bidirectional LSTM over one window. The prediction at step t combines
// the forward state after x[t-1] and the backward state after x[t+1], so
// the network never conditions on its own target value.
struct BlstmModel {
  LstmCellParams fwd;
  LstmCellParams bwd;
  Eigen::VectorXd w_out_f;  // H, applied to the forward state
  Eigen::VectorXd w_out_b;  // H, applied to the backward state
  double b_out = 0.0;

  // Per-series z-score stats captured at training time; std is floored
  // above zero for constant series.
  double norm_mean = 0.0;
  double norm_std = 1.0;

  std::uint64_t seed = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;

  int hidden() const { return fwd.hidden(); }
};

struct TrainConfig {
  int hidden = 16;
  int window = 12;
  double learning_rate = 1e-2;
  int epochs = 200;
  std::uint64_t seed = 0;
  // Train one shared model over every station's windows (per-station
  // normalization) instead of one model per station.
  bool pooled = false;
};

// Standard LSTM recurrence: f, i, o = logistic gates, g = tanh candidate,
// c = f.c_prev + i.g, h = o.tanh(c).
void lstm_step(const LstmCellParams& params, double x, const Eigen::VectorXd& h_prev,
               const Eigen::VectorXd& c_prev, Eigen::VectorXd& h, Eigen::VectorXd& c);

// Full bidirectional pass over a raw-valued window (gaps pre-filled by the
// caller); returns denormalized predictions, one per step.
std::vector<double> blstm_forward(const BlstmModel& model, const std::vector<double>& window);

// Mean squared error in normalized space over masked positions (mask != 0
// marks a scored target); 0 when nothing is scored.
double masked_loss(const BlstmModel& model, const std::vector<double>& window,
                   const std::vector<double>& targets, const std::vector<std::uint8_t>& mask);

// Analytic loss gradient for every parameter, flattened in the fixed order
// used by parameter_slots.
std::vector<double> loss_gradients(const BlstmModel& model, const std::vector<double>& window,
                                   const std::vector<double>& targets,
                                   const std::vector<std::uint8_t>& mask);

// Mutable views of every trainable parameter in a fixed order: forward
// cell gates (wx, wh, b per gate), backward cell, output weights, bias.
std::vector<double*> parameter_slots(BlstmModel& model);
int parameter_count(const BlstmModel& model);

// Max relative error between `analytic` and central finite differences of
// masked_loss (epsilon 1e-5).
double max_gradient_rel_err(const BlstmModel& model, const std::vector<double>& window,
                            const std::vector<double>& targets,
                            const std::vector<std::uint8_t>& mask,
                            const std::vector<double>& analytic);

// max_gradient_rel_err against the model's own BPTT gradients.
double gradient_check(const BlstmModel& model, const std::vector<double>& window,
                      const std::vector<double>& targets,
                      const std::vector<std::uint8_t>& mask);

// Seeded initialization: small uniform weights, forget bias 1.
BlstmModel init_model(int hidden, std::uint64_t seed);

// Full-batch gradient descent over all sliding windows of the series,
// loss restricted to observed positions; keeps the best-epoch parameters.
// Throws InsufficientData when the series is shorter than one window or
// has no observed value.
BlstmModel train(const std::vector<double>& series, const std::vector<std::uint8_t>& mask,
                 const TrainConfig& cfg);

struct ImputeReportRow {
  std::string station_id;
  int n_imputed = 0;
  std::string fallback;  // "none", "linear", or "global_mean"
};

struct ImputeResult {
  ObservationMatrix matrix;
  std::vector<ImputeReportRow> report;
};

// Fills every missing cell. Stations too short to train fall back to
// linear interpolation; all-missing stations to the global mean. Observed
// cells pass through bit-identically; imputed values are clamped to a
// small positive floor.
ImputeResult impute(const ObservationMatrix& matrix, const TrainConfig& cfg);

void write_impute_report_csv(std::ostream& out, const std::vector<ImputeReportRow>& report);

// Text round-trip of all parameter arrays, dimensions, stats, and seed.
void save_model(std::ostream& out, const BlstmModel& model);
BlstmModel load_model(std::istream& in);

}  // namespace stcopula::gapfill
