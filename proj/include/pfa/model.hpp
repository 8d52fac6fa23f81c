#pragma once

// Recurrent Gaussian-emission forecaster.
//
// A stack of LSTM layers reads one scalar per step; the top layer's hidden
// state feeds two affine heads producing the location and (through exp) the
// scale of the next value's Gaussian. Initial recurrent state is zero.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pfa/autodiff.hpp"

namespace pfa {

struct LstmLayer {
  // 4H x (input + H), column-major; gate blocks ordered input, forget, cell, output.
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;  // 4H
};

struct ForecastModel {
  std::vector<LstmLayer> layers;
  Eigen::VectorXd head_mu;  // H
  double bias_mu = 0.0;
  Eigen::VectorXd head_sigma;  // H
  double bias_sigma = 0.0;

  int layer_count() const { return static_cast<int>(layers.size()); }
  int hidden_size() const { return static_cast<int>(head_mu.size()); }
  std::size_t parameter_count() const;

  /// All parameters flattened in a fixed order: per layer (weights, bias),
  /// then head_mu, bias_mu, head_sigma, bias_sigma.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  bool all_finite() const;

  static ForecastModel zeros(int layers, int hidden);
  /// Uniform in +-1/sqrt(H).
  static ForecastModel random(int layers, int hidden, std::uint64_t seed);
};

struct LayerState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

struct HiddenState {
  std::vector<LayerState> layers;
  static HiddenState zeros(const ForecastModel& model);
};

struct GaussianParams {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Emission parameters read from the top layer of `state`.
GaussianParams emit(const ForecastModel& model, const HiddenState& state);

/// One recurrent step in place; returns the emission for the next value.
GaussianParams advance(const ForecastModel& model, HiddenState& state, double prev_value);

std::pair<HiddenState, GaussianParams> step(const ForecastModel& model, const HiddenState& state,
                                            double prev_value);

/// Fold the observed prefix into the recurrent state, starting from zero.
std::pair<HiddenState, GaussianParams> condition(const ForecastModel& model, std::span<const double> observed);

double log_density(const GaussianParams& params, double value);

/// One teacher-forced sequence: targets[i] is the value following inputs[i].
struct TeacherForcedSample {
  std::vector<double> inputs;
  std::vector<double> targets;
};

/// Split a full sequence into its one-step-ahead teacher-forcing pair.
TeacherForcedSample teacher_forcing(std::span<const double> sequence);

/// Mean over samples and steps of the negative log-density of each target.
double nll(const ForecastModel& model, std::span<const TeacherForcedSample> batch);

// ---------------------------------------------------------------------------
// Tape-side model. Parameters are either constants referencing the model's
// own storage (gradients w.r.t. inputs only) or tape inputs (gradients w.r.t.
// parameters). The ForecastModel must outlive the tape in the constant case.

struct TapeModel {
  const ForecastModel* model = nullptr;
  bool parameters_are_inputs = false;
  std::vector<ad::Var> weights;  // only when parameters_are_inputs
  std::vector<ad::Var> biases;
  ad::Var head_mu;
  ad::Var bias_mu;
  ad::Var head_sigma;
  ad::Var bias_sigma;
  ad::Var zero_hidden;

  static TapeModel constants(ad::Tape& tape, const ForecastModel& model);
  static TapeModel inputs(ad::Tape& tape, const ForecastModel& model);

  /// Parameter gradients in ForecastModel::flatten() order.
  std::vector<double> gather(const ad::Gradients& grads) const;
  void accumulate(const ad::Gradients& grads, std::span<double> into) const;
};

struct TapeState {
  std::vector<ad::Var> h;
  std::vector<ad::Var> c;
};

struct TapeGaussian {
  ad::Var mu;
  ad::Var sigma;
};

TapeState zero_state(const TapeModel& model);
TapeGaussian tape_emit(ad::Tape& tape, const TapeModel& model, const TapeState& state);
TapeGaussian tape_advance(ad::Tape& tape, const TapeModel& model, TapeState& state, ad::Var prev_value);
ad::Var tape_log_density(ad::Tape& tape, const TapeGaussian& params, ad::Var value);

/// Sum over steps of the negative log-density (not the mean), recorded on tape.
ad::Var tape_sequence_nll(ad::Tape& tape, const TapeModel& model, const TeacherForcedSample& sample);

/// Gradient of nll(model, batch) w.r.t. every parameter, flatten() order.
std::vector<double> nll_gradient(const ForecastModel& model, std::span<const TeacherForcedSample> batch,
                                 double* nll_out = nullptr);

/// Hand-set model whose location follows mu = a * prev + b with a fixed
/// scale. The LSTM is driven in its small-signal regime (saturated gates and
/// a tiny cell gain) so the relation holds to about 1e-9 relative for
/// |prev| up to a few hundred units.
ForecastModel ar1_model(double a, double b, double sigma);

// Checkpoint file: text, versioned, hexadecimal floats (bit-exact round trip).
void save_checkpoint(const ForecastModel& model, const std::string& path);
ForecastModel load_checkpoint(const std::string& path);
std::string checkpoint_to_string(const ForecastModel& model);
ForecastModel checkpoint_from_string(const std::string& text);

}  // namespace pfa
