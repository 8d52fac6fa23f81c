#include "pfa/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "pfa/error.hpp"
#include "pfa/random.hpp"

namespace pfa {

namespace {

inline double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void check_shapes(const ForecastModel& model, const HiddenState& state) {
  if (state.layers.size() != model.layers.size()) fail(ErrorKind::invalid_argument, "hidden state layer count mismatch");
  for (const auto& l : state.layers) {
    if (l.h.size() != model.hidden_size() || l.c.size() != model.hidden_size())
      fail(ErrorKind::invalid_argument, "hidden state width mismatch");
  }
}

}  // namespace

std::size_t ForecastModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n + 2 * static_cast<std::size_t>(head_mu.size()) + 2;
}

std::vector<double> ForecastModel::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weights.data(), l.weights.data() + l.weights.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  flat.insert(flat.end(), head_mu.data(), head_mu.data() + head_mu.size());
  flat.push_back(bias_mu);
  flat.insert(flat.end(), head_sigma.data(), head_sigma.data() + head_sigma.size());
  flat.push_back(bias_sigma);
  return flat;
}

void ForecastModel::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) fail(ErrorKind::invalid_argument, "parameter vector has the wrong length");
  std::size_t k = 0;
  auto take = [&](double* dst, Eigen::Index n) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), n, dst);
    k += static_cast<std::size_t>(n);
  };
  for (auto& l : layers) {
    take(l.weights.data(), l.weights.size());
    take(l.bias.data(), l.bias.size());
  }
  take(head_mu.data(), head_mu.size());
  bias_mu = flat[k++];
  take(head_sigma.data(), head_sigma.size());
  bias_sigma = flat[k++];
}

bool ForecastModel::all_finite() const {
  for (double v : flatten()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ForecastModel ForecastModel::zeros(int layer_count, int hidden) {
  if (layer_count < 1 || hidden < 1) fail(ErrorKind::invalid_argument, "model needs at least one layer and one unit");
  ForecastModel m;
  for (int d = 0; d < layer_count; ++d) {
    const int in = d == 0 ? 1 : hidden;
    m.layers.push_back({Eigen::MatrixXd::Zero(4 * hidden, in + hidden), Eigen::VectorXd::Zero(4 * hidden)});
  }
  m.head_mu = Eigen::VectorXd::Zero(hidden);
  m.head_sigma = Eigen::VectorXd::Zero(hidden);
  return m;
}

ForecastModel ForecastModel::random(int layer_count, int hidden, std::uint64_t seed) {
  ForecastModel m = zeros(layer_count, hidden);
  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> flat = m.flatten();
  for (double& v : flat) v = u(rng);
  m.assign(flat);
  return m;
}

HiddenState HiddenState::zeros(const ForecastModel& model) {
  HiddenState s;
  s.layers.assign(model.layers.size(),
                  LayerState{Eigen::VectorXd::Zero(model.hidden_size()), Eigen::VectorXd::Zero(model.hidden_size())});
  return s;
}

GaussianParams emit(const ForecastModel& model, const HiddenState& state) {
  const auto& top = state.layers.back().h;
  GaussianParams p;
  p.mu = model.head_mu.dot(top) + model.bias_mu;
  p.sigma = std::exp(model.head_sigma.dot(top) + model.bias_sigma);
  if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || !(p.sigma > 0.0))
    fail(ErrorKind::numeric, "emission parameters are not finite");
  return p;
}

GaussianParams advance(const ForecastModel& model, HiddenState& state, double prev_value) {
  if (!std::isfinite(prev_value)) fail(ErrorKind::numeric, "non-finite input value");
  const Eigen::Index hidden = model.hidden_size();
  Eigen::VectorXd input(1);
  input[0] = prev_value;
  Eigen::VectorXd z(4 * hidden);
  for (std::size_t d = 0; d < model.layers.size(); ++d) {
    const LstmLayer& layer = model.layers[d];
    LayerState& s = state.layers[d];
    const Eigen::Index in = layer.weights.cols() - hidden;
    z.noalias() = layer.weights.leftCols(in) * input;
    z.noalias() += layer.weights.rightCols(hidden) * s.h;
    z += layer.bias;
    for (Eigen::Index j = 0; j < hidden; ++j) {
      const double ig = sigmoid(z[j]);
      const double fg = sigmoid(z[hidden + j]);
      const double gg = std::tanh(z[2 * hidden + j]);
      const double og = sigmoid(z[3 * hidden + j]);
      s.c[j] = fg * s.c[j] + ig * gg;
      s.h[j] = og * std::tanh(s.c[j]);
    }
    input = s.h;
  }
  return emit(model, state);
}

std::pair<HiddenState, GaussianParams> step(const ForecastModel& model, const HiddenState& state,
                                            double prev_value) {
  check_shapes(model, state);
  HiddenState next = state;
  GaussianParams p = advance(model, next, prev_value);
  return {std::move(next), p};
}

std::pair<HiddenState, GaussianParams> condition(const ForecastModel& model, std::span<const double> observed) {
  if (observed.empty()) fail(ErrorKind::invalid_argument, "cannot condition on an empty prefix");
  HiddenState state = HiddenState::zeros(model);
  GaussianParams p;
  for (double v : observed) p = advance(model, state, v);
  return {std::move(state), p};
}

double log_density(const GaussianParams& params, double value) {
  const double z = (value - params.mu) / params.sigma;
  return -std::log(params.sigma) - kHalfLog2Pi - 0.5 * z * z;
}

TeacherForcedSample teacher_forcing(std::span<const double> sequence) {
  if (sequence.size() < 2) fail(ErrorKind::invalid_argument, "teacher forcing needs at least two values");
  TeacherForcedSample s;
  s.inputs.assign(sequence.begin(), sequence.end() - 1);
  s.targets.assign(sequence.begin() + 1, sequence.end());
  return s;
}

double nll(const ForecastModel& model, std::span<const TeacherForcedSample> batch) {
  if (batch.empty()) fail(ErrorKind::invalid_argument, "empty batch");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& sample : batch) {
    if (sample.inputs.size() != sample.targets.size() || sample.inputs.empty())
      fail(ErrorKind::invalid_argument, "inputs and targets are misaligned");
    HiddenState state = HiddenState::zeros(model);
    for (std::size_t i = 0; i < sample.inputs.size(); ++i) {
      const GaussianParams p = advance(model, state, sample.inputs[i]);
      total -= log_density(p, sample.targets[i]);
    }
    count += sample.inputs.size();
  }
  return total / static_cast<double>(count);
}

// ---------------------------------------------------------------------------

TapeModel TapeModel::constants(ad::Tape& tape, const ForecastModel& model) {
  TapeModel t;
  t.model = &model;
  for (const auto& l : model.layers) t.biases.push_back(tape.constant({l.bias.data(), std::size_t(l.bias.size())}));
  t.head_mu = tape.constant({model.head_mu.data(), std::size_t(model.head_mu.size())});
  t.bias_mu = tape.constant(model.bias_mu);
  t.head_sigma = tape.constant({model.head_sigma.data(), std::size_t(model.head_sigma.size())});
  t.bias_sigma = tape.constant(model.bias_sigma);
  const std::vector<double> zero(static_cast<std::size_t>(model.hidden_size()), 0.0);
  t.zero_hidden = tape.constant(zero);
  return t;
}

TapeModel TapeModel::inputs(ad::Tape& tape, const ForecastModel& model) {
  TapeModel t;
  t.model = &model;
  t.parameters_are_inputs = true;
  for (const auto& l : model.layers) {
    t.weights.push_back(tape.input({l.weights.data(), std::size_t(l.weights.size())}));
    t.biases.push_back(tape.input({l.bias.data(), std::size_t(l.bias.size())}));
  }
  t.head_mu = tape.input({model.head_mu.data(), std::size_t(model.head_mu.size())});
  t.bias_mu = tape.input(model.bias_mu);
  t.head_sigma = tape.input({model.head_sigma.data(), std::size_t(model.head_sigma.size())});
  t.bias_sigma = tape.input(model.bias_sigma);
  const std::vector<double> zero(static_cast<std::size_t>(model.hidden_size()), 0.0);
  t.zero_hidden = tape.constant(zero);
  return t;
}

void TapeModel::accumulate(const ad::Gradients& grads, std::span<double> into) const {
  if (!parameters_are_inputs) fail(ErrorKind::invalid_argument, "parameters were recorded as constants");
  std::size_t k = 0;
  auto add = [&](ad::Var v) {
    for (double g : grads.wrt(v)) into[k++] += g;
  };
  for (std::size_t d = 0; d < weights.size(); ++d) {
    add(weights[d]);
    add(biases[d]);
  }
  add(head_mu);
  add(bias_mu);
  add(head_sigma);
  add(bias_sigma);
}

std::vector<double> TapeModel::gather(const ad::Gradients& grads) const {
  std::vector<double> out(model->parameter_count(), 0.0);
  accumulate(grads, out);
  return out;
}

TapeState zero_state(const TapeModel& model) {
  TapeState s;
  s.h.assign(model.model->layers.size(), model.zero_hidden);
  s.c.assign(model.model->layers.size(), model.zero_hidden);
  return s;
}

TapeGaussian tape_emit(ad::Tape& tape, const TapeModel& model, const TapeState& state) {
  const ad::Var top = state.h.back();
  const auto hidden = static_cast<std::uint32_t>(model.model->hidden_size());
  ad::Var mu_lin;
  ad::Var sigma_lin;
  if (model.parameters_are_inputs) {
    mu_lin = tape.matvec(model.head_mu, 1, top);
    sigma_lin = tape.matvec(model.head_sigma, 1, top);
  } else {
    mu_lin = tape.matvec_const(model.model->head_mu.data(), 1, hidden, top);
    sigma_lin = tape.matvec_const(model.model->head_sigma.data(), 1, hidden, top);
  }
  return {mu_lin + model.bias_mu, tape.exp(sigma_lin + model.bias_sigma)};
}

TapeGaussian tape_advance(ad::Tape& tape, const TapeModel& model, TapeState& state, ad::Var prev_value) {
  const auto hidden = static_cast<std::uint32_t>(model.model->hidden_size());
  ad::Var input = prev_value;
  for (std::size_t d = 0; d < model.model->layers.size(); ++d) {
    const LstmLayer& layer = model.model->layers[d];
    const ad::Var joint = tape.concat(input, state.h[d]);
    ad::Var z = model.parameters_are_inputs
                    ? tape.matvec(model.weights[d], 4 * hidden, joint)
                    : tape.matvec_const(layer.weights.data(), 4 * hidden,
                                        static_cast<std::uint32_t>(layer.weights.cols()), joint);
    z = z + model.biases[d];
    const ad::Var if_gates = tape.sigmoid(tape.slice(z, 0, 2 * hidden));
    const ad::Var ig = tape.slice(if_gates, 0, hidden);
    const ad::Var fg = tape.slice(if_gates, hidden, hidden);
    const ad::Var gg = tape.tanh(tape.slice(z, 2 * hidden, hidden));
    const ad::Var og = tape.sigmoid(tape.slice(z, 3 * hidden, hidden));
    state.c[d] = fg * state.c[d] + ig * gg;
    state.h[d] = og * tape.tanh(state.c[d]);
    input = state.h[d];
  }
  return tape_emit(tape, model, state);
}

ad::Var tape_log_density(ad::Tape& tape, const TapeGaussian& params, ad::Var value) {
  const ad::Var z = (value - params.mu) / params.sigma;
  return (-tape.log(params.sigma) - kHalfLog2Pi) - 0.5 * tape.square(z);
}

ad::Var tape_sequence_nll(ad::Tape& tape, const TapeModel& model, const TeacherForcedSample& sample) {
  if (sample.inputs.size() != sample.targets.size() || sample.inputs.empty())
    fail(ErrorKind::invalid_argument, "inputs and targets are misaligned");
  TapeState state = zero_state(model);
  const ad::Var inputs = tape.constant(sample.inputs);
  const ad::Var targets = tape.constant(sample.targets);
  ad::Var total = tape.constant(0.0);
  for (std::uint32_t i = 0; i < sample.inputs.size(); ++i) {
    const TapeGaussian p = tape_advance(tape, model, state, tape.element(inputs, i));
    total = total - tape_log_density(tape, p, tape.element(targets, i));
  }
  return total;
}

std::vector<double> nll_gradient(const ForecastModel& model, std::span<const TeacherForcedSample> batch,
                                 double* nll_out) {
  if (batch.empty()) fail(ErrorKind::invalid_argument, "empty batch");
  std::vector<double> grad(model.parameter_count(), 0.0);
  ad::Tape tape;
  ad::Gradients g;
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& sample : batch) {
    tape.clear();
    const TapeModel tm = TapeModel::inputs(tape, model);
    const ad::Var loss = tape_sequence_nll(tape, tm, sample);
    total += loss.value();
    count += sample.inputs.size();
    tape.backward(loss, 1.0, g);
    tm.accumulate(g, grad);
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : grad) v *= inv;
  if (nll_out) *nll_out = total * inv;
  return grad;
}

ForecastModel ar1_model(double a, double b, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::invalid_argument, "AR(1) model needs sigma > 0");
  constexpr double kGain = 1e-7;
  constexpr double kSaturate = 40.0;
  ForecastModel m = ForecastModel::zeros(1, 1);
  LstmLayer& l = m.layers[0];
  l.bias << kSaturate, -kSaturate, 0.0, kSaturate;  // input gate open, forget gate shut, output open
  l.weights(2, 0) = kGain;                            // cell candidate tanh(kGain * prev)
  m.head_mu[0] = a / kGain;
  m.bias_mu = b;
  m.bias_sigma = std::log(sigma);
  return m;
}

}  // namespace pfa
