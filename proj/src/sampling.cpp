#include "pfa/sampling.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "pfa/error.hpp"
#include "pfa/random.hpp"

namespace pfa {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

std::size_t parse_index(const std::string& s, const std::string& context) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorKind::config, "bad index '" + s + "' in " + context);
  }
  if (pos != s.size() || v == 0) fail(ErrorKind::config, "bad index '" + s + "' in " + context);
  return static_cast<std::size_t>(v);
}

double parse_real(const std::string& s, const std::string& context) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorKind::config, "bad number '" + s + "' in " + context);
  }
  if (pos != s.size() || !std::isfinite(v)) fail(ErrorKind::config, "bad number '" + s + "' in " + context);
  return v;
}

std::string format_real(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct KindName {
  StatisticKind kind;
  const char* name;
  bool has_strike;
};

constexpr KindName kKinds[] = {
    {StatisticKind::cum_return, "cum_return", false}, {StatisticKind::call, "call", true},
    {StatisticKind::put, "put", true},                {StatisticKind::limit_sell, "limit_sell", true},
    {StatisticKind::limit_buy, "limit_buy", true},    {StatisticKind::coordinate, "coordinate", false},
};

void check_horizon(const Statistic& stat, std::size_t length) {
  if (stat.horizon < 1 || stat.horizon > length)
    fail(ErrorKind::invalid_argument, "statistic horizon " + std::to_string(stat.horizon) +
                                          " outside trajectory of length " + std::to_string(length));
}

double sum_squares_se(std::span<const double> chi, std::span<const double> omega, double est) {
  const std::size_t n = chi.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double d = (chi[l] - est) * (omega.empty() ? 1.0 : omega[l]);
    acc += d * d;
  }
  return std::sqrt(acc / (static_cast<double>(n) * static_cast<double>(n - 1)));
}

}  // namespace

NoiseMatrix draw_noise(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) fail(ErrorKind::invalid_argument, "noise matrix needs L >= 1 and m >= 1");
  NoiseMatrix out;
  out.rows = rows;
  out.cols = cols;
  out.seed = seed;
  out.eta.resize(rows * cols);
  for (std::size_t l = 0; l < rows; ++l) {
    Rng rng = make_rng(seed, l);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < cols; ++j) out.eta[l * cols + j] = normal(rng);
  }
  return out;
}

// --- statistics -----------------------------------------------------------------

Statistic Statistic::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) fail(ErrorKind::config, "empty statistic spec");
  for (const auto& k : kKinds) {
    if (parts[0] != k.name) continue;
    const std::size_t expected = k.has_strike ? 3 : 2;
    if (parts.size() != expected) fail(ErrorKind::config, "statistic '" + text + "' has the wrong number of fields");
    Statistic s;
    s.kind = k.kind;
    s.horizon = parse_index(parts[1], text);
    if (k.has_strike) {
      s.strike = parse_real(parts[2], text);
      if (!(s.strike > 0.0)) fail(ErrorKind::config, "statistic level must be positive in '" + text + "'");
    }
    return s;
  }
  fail(ErrorKind::config, "unknown statistic '" + text + "'");
}

std::string Statistic::to_string() const {
  for (const auto& k : kKinds) {
    if (k.kind != kind) continue;
    std::string out = std::string(k.name) + ":" + std::to_string(horizon);
    if (k.has_strike) out += ":" + format_real(strike);
    return out;
  }
  return "?";
}

double Statistic::evaluate(std::span<const double> y, double x_last) const {
  check_horizon(*this, y.size());
  if (uses_reference() && x_last == 0.0) fail(ErrorKind::domain, "ratio statistic with x_last = 0");
  const double yh = y[horizon - 1];
  switch (kind) {
    case StatisticKind::cum_return: return yh / x_last - 1.0;
    case StatisticKind::call: return std::max(0.0, yh / x_last - strike);
    case StatisticKind::put: return std::max(0.0, strike - yh / x_last);
    case StatisticKind::limit_sell: {
      const double hi = *std::max_element(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(horizon));
      return hi / x_last >= strike ? 1.0 : 0.0;
    }
    case StatisticKind::limit_buy: {
      const double lo = *std::min_element(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(horizon));
      return lo / x_last <= strike ? 1.0 : 0.0;
    }
    case StatisticKind::coordinate: return yh;
  }
  return 0.0;
}

ad::Var Statistic::evaluate(ad::Tape& tape, std::span<const ad::Var> y, ad::Var x_last) const {
  check_horizon(*this, y.size());
  if (uses_reference() && x_last.value() == 0.0) fail(ErrorKind::domain, "ratio statistic with x_last = 0");
  const ad::Var yh = y[horizon - 1];
  switch (kind) {
    case StatisticKind::cum_return: return yh / x_last - 1.0;
    case StatisticKind::call: return tape.max(yh / x_last - strike, tape.constant(0.0));
    case StatisticKind::put: return tape.max(strike - yh / x_last, tape.constant(0.0));
    case StatisticKind::limit_sell:
    case StatisticKind::limit_buy: {
      // Piecewise constant in y: zero gradient everywhere it is defined.
      std::vector<double> values(horizon);
      for (std::size_t i = 0; i < horizon; ++i) values[i] = y[i].value();
      return tape.constant(evaluate(values, x_last.value()));
    }
    case StatisticKind::coordinate: return yh;
  }
  return yh;
}

// --- observations ---------------------------------------------------------------

Observation Observation::parse(const std::string& text) {
  if (text == "true" || text.empty()) return none();
  const auto parts = split(text, ':');
  if (parts.size() != 3 || (parts[0] != "value" && parts[0] != "ratio"))
    fail(ErrorKind::config, "unknown observation '" + text + "'");
  return coordinate(parse_index(parts[1], text), parse_real(parts[2], text), parts[0] == "ratio");
}

std::string Observation::to_string() const {
  if (trivial()) return "true";
  return std::string(relative ? "ratio:" : "value:") + std::to_string(index) + ":" + format_real(value);
}

// --- sampling ---------------------------------------------------------------------

ConditionedModel ConditionedModel::make(const ForecastModel& model, const SeriesTransform& transform,
                                        std::span<const double> input) {
  if (input.empty()) fail(ErrorKind::invalid_argument, "empty conditioning prefix");
  ConditionedModel c;
  c.model = &model;
  c.transform = transform;
  c.input.assign(input.begin(), input.end());
  const auto encoded = transform.encode(input);
  auto [state, first] = condition(model, encoded);
  c.state = std::move(state);
  c.first = first;
  c.decode = transform.start_decode(input);
  return c;
}

Trajectory sample_reparam(const ConditionedModel& cond, std::span<const double> eta, const Observation& obs) {
  const std::size_t m = eta.size();
  if (m == 0) fail(ErrorKind::invalid_argument, "empty noise row");
  if (!obs.trivial() && (obs.index < 1 || obs.index > m))
    fail(ErrorKind::invalid_argument, "observation index outside the horizon");
  const ForecastModel& model = *cond.model;
  HiddenState state = cond.state;
  GaussianParams params = cond.first;
  DecodeState decode = cond.decode;
  Trajectory t;
  t.values.reserve(m);
  t.model_values.reserve(m);
  double log_weight = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double zeta = 0.0;
    double value = 0.0;
    if (!obs.trivial() && i + 1 == obs.index) {
      value = obs.target_value(cond.x_last());
      const Inverted inv = cond.transform.invert_step(decode, value);
      zeta = inv.zeta;
      log_weight = log_density(params, zeta) + inv.log_jacobian;
      cond.transform.clamp_step(decode, value);
    } else {
      zeta = params.mu + eta[i] * params.sigma;
      t.log_likelihood += log_density(params, zeta);
      value = cond.transform.decode_step(decode, zeta);
    }
    if (!std::isfinite(zeta) || !std::isfinite(value))
      fail(ErrorKind::numeric, "non-finite sample at step " + std::to_string(i + 1));
    t.values.push_back(value);
    t.model_values.push_back(zeta);
    if (i + 1 < m) params = advance(model, state, zeta);
  }
  t.weight = obs.trivial() ? 1.0 : std::exp(log_weight);
  return t;
}

Trajectory sample_reparam(const ForecastModel& model, std::span<const double> prefix, std::span<const double> eta) {
  return sample_reparam(ConditionedModel::make(model, SeriesTransform{}, prefix), eta);
}

TrajectoryBatch sample_batch(const ConditionedModel& cond, const NoiseMatrix& noise) {
  TrajectoryBatch batch;
  batch.noise = noise;
  batch.input = cond.input;
  batch.x_last = cond.x_last();
  batch.trajectories.reserve(noise.rows);
  for (std::size_t l = 0; l < noise.rows; ++l) batch.trajectories.push_back(sample_reparam(cond, noise.row(l)));
  return batch;
}

TrajectoryBatch apply_observation(const ConditionedModel& cond, const TrajectoryBatch& prior, const Observation& obs) {
  TrajectoryBatch out;
  out.noise = prior.noise;
  out.input = prior.input;
  out.x_last = prior.x_last;
  if (obs.trivial()) {
    out.trajectories = prior.trajectories;
    for (auto& t : out.trajectories) t.weight = 1.0;
    return out;
  }
  out.trajectories.reserve(prior.noise.rows);
  double total = 0.0;
  for (std::size_t l = 0; l < prior.noise.rows; ++l) {
    out.trajectories.push_back(sample_reparam(cond, prior.noise.row(l), obs));
    total += out.trajectories.back().weight;
  }
  if (!(total > 0.0)) fail(ErrorKind::degenerate_observation, "every importance weight is zero");
  return out;
}

double eval_statistic(const Statistic& stat, const Trajectory& y, double x_last) {
  return stat.evaluate(y.values, x_last);
}

// --- estimates ---------------------------------------------------------------------

bool Estimate::has_standard_error() const { return std::isfinite(standard_error); }

Estimate mc_expectation(const TrajectoryBatch& batch, const Statistic& stat) {
  const std::size_t n = batch.trajectories.size();
  if (n == 0) fail(ErrorKind::invalid_argument, "Monte-Carlo estimate over an empty batch");
  std::vector<double> chi(n);
  double sum = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    chi[l] = eval_statistic(stat, batch.trajectories[l], batch.x_last);
    sum += chi[l];
  }
  Estimate e;
  e.samples = n;
  e.value = sum / static_cast<double>(n);
  e.standard_error = sum_squares_se(chi, {}, e.value);
  return e;
}

Estimate bayes_expectation(const TrajectoryBatch& batch, const Statistic& stat) {
  const std::size_t n = batch.trajectories.size();
  if (n == 0) fail(ErrorKind::invalid_argument, "importance-sampling estimate over an empty batch");
  const double w0 = batch.trajectories.front().weight;
  const bool uniform = std::all_of(batch.trajectories.begin(), batch.trajectories.end(),
                                   [w0](const Trajectory& t) { return t.weight == w0; });
  if (uniform && w0 > 0.0) return mc_expectation(batch, stat);

  std::vector<double> chi(n);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double w = batch.trajectories[l].weight;
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorKind::numeric, "invalid importance weight");
    chi[l] = eval_statistic(stat, batch.trajectories[l], batch.x_last);
    num += chi[l] * w;
    den += w;
  }
  if (!(den > 0.0)) fail(ErrorKind::degenerate_observation, "total importance weight is zero");
  Estimate e;
  e.samples = n;
  e.value = num / den;
  std::vector<double> omega(n);
  for (std::size_t l = 0; l < n; ++l) omega[l] = batch.trajectories[l].weight * static_cast<double>(n) / den;
  e.standard_error = sum_squares_se(chi, omega, e.value);
  return e;
}

Interval confidence_interval(double estimate, double standard_error, std::size_t samples, double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::invalid_argument, "confidence level must lie in (0, 1)");
  if (samples < 2) fail(ErrorKind::invalid_argument, "confidence interval needs at least two samples");
  const boost::math::students_t dist(static_cast<double>(samples - 1));
  const double q = boost::math::quantile(dist, 0.5 * (1.0 + level));
  const double half = q * standard_error;
  return {estimate - half, estimate + half};
}

Estimate estimate_expectation(const ConditionedModel& cond, const Statistic& stat, const Observation& obs,
                              std::size_t samples, std::uint64_t seed) {
  const std::size_t m = std::max(stat.horizon, obs.trivial() ? std::size_t{1} : obs.index);
  const NoiseMatrix noise = draw_noise(samples, m, seed);
  const TrajectoryBatch prior = sample_batch(cond, noise);
  if (obs.trivial()) return mc_expectation(prior, stat);
  return bayes_expectation(apply_observation(cond, prior, obs), stat);
}

// --- export ---------------------------------------------------------------------------

void write_batch_csv(std::ostream& out, const TrajectoryBatch& batch) {
  out << "sample,step,value,weight\n";
  out.precision(17);
  for (std::size_t l = 0; l < batch.trajectories.size(); ++l) {
    const auto& t = batch.trajectories[l];
    for (std::size_t i = 0; i < t.values.size(); ++i)
      out << l << ',' << (i + 1) << ',' << t.values[i] << ',' << t.weight << '\n';
  }
}

std::string batch_to_json(const TrajectoryBatch& batch) {
  nlohmann::json j;
  j["seed"] = batch.noise.seed;
  j["x_last"] = batch.x_last;
  j["input"] = batch.input;
  auto& rows = j["trajectories"] = nlohmann::json::array();
  for (std::size_t l = 0; l < batch.trajectories.size(); ++l) {
    const auto& t = batch.trajectories[l];
    rows.push_back({{"sample", l}, {"values", t.values}, {"weight", t.weight}, {"log_likelihood", t.log_likelihood}});
  }
  return j.dump(2);
}

}  // namespace pfa
