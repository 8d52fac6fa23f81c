#include "pfa/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "pfa/autodiff.hpp"
#include "pfa/error.hpp"
#include "pfa/random.hpp"

namespace pfa {

namespace {

using ad::Var;

// Conditioning prefix x + delta recorded once; every sample branches off it.
struct TapePrefix {
  TapeModel model;
  Var delta;
  Var input;  // x + delta
  Var x_last;
  TapeState state;
  TapeGaussian first;
  TapeDecodeState decode;
};

TapePrefix record_prefix(ad::Tape& tape, const Query& q, std::span<const double> delta) {
  TapePrefix p;
  p.model = TapeModel::constants(tape, *q.model);
  p.delta = tape.input(delta);
  p.input = tape.constant(q.x) + p.delta;
  const auto n = static_cast<std::uint32_t>(q.x.size());
  p.x_last = tape.element(p.input, n - 1);
  const Var encoded = q.transform.encode(tape, p.input);
  if (encoded.size() == 0) fail(ErrorKind::invalid_argument, "input too short for the transform");
  p.state = zero_state(p.model);
  for (std::uint32_t i = 0; i < encoded.size(); ++i)
    p.first = tape_advance(tape, p.model, p.state, tape.element(encoded, i));
  p.decode = q.transform.start_decode(tape, p.input);
  return p;
}

void check_query(const Query& q, std::span<const double> delta) {
  if (q.model == nullptr) fail(ErrorKind::invalid_argument, "query without a model");
  if (q.x.empty()) fail(ErrorKind::invalid_argument, "empty input");
  if (delta.size() != q.x.size()) fail(ErrorKind::invalid_argument, "perturbation length differs from input length");
}

std::vector<double> perturbed(const Query& q, std::span<const double> delta) {
  std::vector<double> x(q.x);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += delta[i];
  return x;
}

// One tape per thread, reused so its buffers are not reallocated on every call.
ad::Tape& scratch_tape() {
  thread_local ad::Tape tape;
  tape.clear();
  return tape;
}

GradientEstimate finish(const ad::Tape& tape, Var out, Var delta, EstimatorKind kind, std::size_t samples,
                        std::uint64_t seed) {
  GradientEstimate g;
  g.kind = kind;
  g.samples = samples;
  g.seed = seed;
  g.value = out.value();
  thread_local ad::Gradients grads;
  tape.backward(out, 1.0, grads);
  const auto w = grads.wrt(delta);
  g.grad.assign(w.begin(), w.end());
  for (double v : g.grad)
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "non-finite gradient component");
  return g;
}

}  // namespace

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "score_function" || name == "score") return EstimatorKind::score_function;
  if (name == "reparametrization" || name == "reparam") return EstimatorKind::reparametrization;
  fail(ErrorKind::config, "unknown estimator '" + name + "'");
}

std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::score_function ? "score_function" : "reparametrization";
}

std::size_t Query::steps() const {
  std::size_t m = std::max<std::size_t>(horizon, stat.horizon);
  if (!obs.trivial()) m = std::max(m, obs.index);
  return std::max<std::size_t>(m, 1);
}

GradientEstimate reparam_gradient(const Query& q, std::span<const double> delta, std::size_t samples,
                                  std::uint64_t seed) {
  check_query(q, delta);
  if (samples < 1) fail(ErrorKind::invalid_argument, "need at least one sample");
  const std::size_t m = q.steps();
  const NoiseMatrix noise = draw_noise(samples, m, seed);

  ad::Tape& tape = scratch_tape();
  const TapePrefix p = record_prefix(tape, q, delta);
  std::vector<Var> chi(samples);
  std::vector<Var> log_w(samples);
  std::vector<Var> values(m);
  for (std::size_t l = 0; l < samples; ++l) {
    TapeState state = p.state;
    TapeGaussian params = p.first;
    TapeDecodeState dec = p.decode;
    const auto eta = noise.row(l);
    for (std::size_t i = 0; i < m; ++i) {
      Var zeta;
      if (!q.obs.trivial() && i + 1 == q.obs.index) {
        const Var v = q.obs.relative ? p.x_last * q.obs.value : tape.constant(q.obs.value);
        const TapeInverted inv = q.transform.invert_step(tape, dec, v);
        zeta = inv.zeta;
        log_w[l] = tape_log_density(tape, params, zeta) + inv.log_jacobian;
        q.transform.clamp_step(tape, dec, v);
        values[i] = v;
      } else {
        zeta = params.mu + params.sigma * eta[i];
        values[i] = q.transform.decode_step(tape, dec, zeta);
      }
      if (i + 1 < m) params = tape_advance(tape, p.model, state, zeta);
    }
    chi[l] = q.stat.evaluate(tape, values, p.x_last);
  }

  Var out;
  if (q.obs.trivial()) {
    Var total = chi[0];
    for (std::size_t l = 1; l < samples; ++l) total = total + chi[l];
    out = total / static_cast<double>(samples);
  } else {
    // exp(log w - max) leaves the ratio unchanged and keeps it representable.
    double top = -INFINITY;
    for (const Var& v : log_w) top = std::max(top, v.value());
    if (!std::isfinite(top)) fail(ErrorKind::degenerate_observation, "every importance weight is zero");
    Var num = tape.constant(0.0);
    Var den = tape.constant(0.0);
    for (std::size_t l = 0; l < samples; ++l) {
      const Var w = tape.exp(log_w[l] - top);
      num = num + chi[l] * w;
      den = den + w;
    }
    out = num / den;
  }
  return finish(tape, out, p.delta, EstimatorKind::reparametrization, samples, seed);
}

double reparam_estimate(const Query& q, std::span<const double> delta, std::size_t samples, std::uint64_t seed) {
  check_query(q, delta);
  const std::vector<double> x = perturbed(q, delta);
  const ConditionedModel cond = ConditionedModel::make(*q.model, q.transform, x);
  const NoiseMatrix noise = draw_noise(samples, q.steps(), seed);
  const TrajectoryBatch prior = sample_batch(cond, noise);
  if (q.obs.trivial()) return mc_expectation(prior, q.stat).value;
  return bayes_expectation(apply_observation(cond, prior, q.obs), q.stat).value;
}

GradientEstimate score_function_gradient(const Query& q, std::span<const double> delta, std::size_t samples,
                                         std::uint64_t seed) {
  check_query(q, delta);
  if (!q.obs.trivial())
    fail(ErrorKind::unsupported, "the score-function estimator supports only the trivially-true observation");
  if (samples < 1) fail(ErrorKind::invalid_argument, "need at least one sample");
  const std::size_t m = q.steps();
  const NoiseMatrix noise = draw_noise(samples, m, seed);

  // Samples from q[. | x + delta]; the recorded surrogate has gradient
  // (1/L) sum_l [d chi / d delta |_zeta + chi_l d log q(zeta^l | x + delta)].
  const std::vector<double> x = perturbed(q, delta);
  const ConditionedModel cond = ConditionedModel::make(*q.model, q.transform, x);
  const TrajectoryBatch batch = sample_batch(cond, noise);

  ad::Tape& tape = scratch_tape();
  const TapePrefix p = record_prefix(tape, q, delta);
  Var total = tape.constant(0.0);
  std::vector<Var> values(m);
  double value_sum = 0.0;
  for (std::size_t l = 0; l < samples; ++l) {
    const Trajectory& t = batch.trajectories[l];
    TapeState state = p.state;
    TapeGaussian params = p.first;
    TapeDecodeState dec = p.decode;
    Var log_q = tape.constant(0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const Var zeta = tape.constant(t.model_values[i]);
      log_q = log_q + tape_log_density(tape, params, zeta);
      values[i] = q.transform.decode_step(tape, dec, zeta);
      if (i + 1 < m) params = tape_advance(tape, p.model, state, zeta);
    }
    const Var chi = q.stat.evaluate(tape, values, p.x_last);
    value_sum += chi.value();
    total = total + chi + chi.value() * log_q;
  }
  const Var surrogate = total / static_cast<double>(samples);
  GradientEstimate g = finish(tape, surrogate, p.delta, EstimatorKind::score_function, samples, seed);
  g.value = value_sum / static_cast<double>(samples);
  return g;
}

GradientEstimate estimate_gradient(EstimatorKind kind, const Query& q, std::span<const double> delta,
                                   std::size_t samples, std::uint64_t seed) {
  return kind == EstimatorKind::score_function ? score_function_gradient(q, delta, samples, seed)
                                               : reparam_gradient(q, delta, samples, seed);
}

AgreementReport estimator_agreement(const Query& q, std::size_t trials, std::size_t samples, std::uint64_t seed) {
  if (trials < 2) fail(ErrorKind::invalid_argument, "agreement needs at least two trials");
  const std::size_t n = q.x.size();
  const std::vector<double> zero(n, 0.0);
  std::vector<double> sum_s(n, 0.0), sum_r(n, 0.0), sq_s(n, 0.0), sq_r(n, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto gs = score_function_gradient(q, zero, samples, mix_seed(seed, t, 0));
    const auto gr = reparam_gradient(q, zero, samples, mix_seed(seed, t, 1));
    for (std::size_t i = 0; i < n; ++i) {
      sum_s[i] += gs.grad[i];
      sq_s[i] += gs.grad[i] * gs.grad[i];
      sum_r[i] += gr.grad[i];
      sq_r[i] += gr.grad[i] * gr.grad[i];
    }
  }
  AgreementReport r;
  r.trials = trials;
  r.samples = samples;
  const double k = static_cast<double>(trials);
  double dot = 0.0, ns = 0.0, nr = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ms = sum_s[i] / k;
    const double mr = sum_r[i] / k;
    const double vs = std::max(0.0, (sq_s[i] - k * ms * ms) / (k - 1.0));
    const double vr = std::max(0.0, (sq_r[i] - k * mr * mr) / (k - 1.0));
    r.mean_score.push_back(ms);
    r.mean_reparam.push_back(mr);
    r.se_score.push_back(std::sqrt(vs / k));
    r.se_reparam.push_back(std::sqrt(vr / k));
    r.variance_score += vs;
    r.variance_reparam += vr;
    const double combined = std::sqrt(vs / k + vr / k);
    if (std::abs(ms - mr) <= 3.0 * combined) ++within;
    dot += ms * mr;
    ns += ms * ms;
    nr += mr * mr;
  }
  r.cosine = (ns > 0.0 && nr > 0.0) ? dot / std::sqrt(ns * nr) : 0.0;
  r.fraction_within_3se = static_cast<double>(within) / static_cast<double>(n);
  return r;
}

}  // namespace pfa
