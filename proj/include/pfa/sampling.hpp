#pragma once

// Trajectory sampling from the forecaster, output-sequence statistics and
// Monte-Carlo / importance-sampling estimates of their expectations.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pfa/autodiff.hpp"
#include "pfa/data.hpp"
#include "pfa/model.hpp"

namespace pfa {

struct NoiseMatrix {
  std::size_t rows = 0;  // L
  std::size_t cols = 0;  // horizon
  std::uint64_t seed = 0;
  std::vector<double> eta;  // row-major

  std::span<const double> row(std::size_t l) const { return {eta.data() + l * cols, cols}; }
};

/// Row l is drawn from its own stream mix_seed(seed, l), so any row can be
/// regenerated without the others.
NoiseMatrix draw_noise(std::size_t rows, std::size_t cols, std::uint64_t seed);

enum class StatisticKind { cum_return, call, put, limit_sell, limit_buy, coordinate };

/// Real-valued functional of an output sequence. Ratio statistics are taken
/// relative to the last observed input value x_last.
struct Statistic {
  StatisticKind kind = StatisticKind::cum_return;
  std::size_t horizon = 1;  // 1-based
  double strike = 1.0;      // call / put / limit levels

  static Statistic cum_return(std::size_t h) { return {StatisticKind::cum_return, h, 1.0}; }
  static Statistic call(std::size_t h, double strike) { return {StatisticKind::call, h, strike}; }
  static Statistic put(std::size_t h, double strike) { return {StatisticKind::put, h, strike}; }
  static Statistic limit_sell(std::size_t h, double level) { return {StatisticKind::limit_sell, h, level}; }
  static Statistic limit_buy(std::size_t h, double level) { return {StatisticKind::limit_buy, h, level}; }
  static Statistic coordinate(std::size_t h) { return {StatisticKind::coordinate, h, 1.0}; }

  /// "cum_return:10", "call:10:1.02", "put:10:0.98", "limit_sell:10:1.05",
  /// "limit_buy:10:0.95", "coordinate:18".
  static Statistic parse(const std::string& text);
  std::string to_string() const;
  bool uses_reference() const { return kind != StatisticKind::coordinate; }

  double evaluate(std::span<const double> y, double x_last) const;
  ad::Var evaluate(ad::Tape& tape, std::span<const ad::Var> y, ad::Var x_last) const;
};

/// Conditioning event over the output sequence.
struct Observation {
  enum class Kind { trivially_true, coordinate_value };
  Kind kind = Kind::trivially_true;
  std::size_t index = 0;  // 1-based horizon index
  double value = 0.0;
  bool relative = false;  // value is y_index / x_last rather than y_index

  static Observation none() { return {}; }
  static Observation coordinate(std::size_t index, double value, bool relative = false) {
    return {Kind::coordinate_value, index, value, relative};
  }
  bool trivial() const { return kind == Kind::trivially_true; }

  /// "true", "value:J:V" or "ratio:J:V".
  static Observation parse(const std::string& text);
  std::string to_string() const;
  double target_value(double x_last) const { return relative ? value * x_last : value; }
};

struct Trajectory {
  std::vector<double> values;        // application space
  std::vector<double> model_values;  // what the recurrence was fed
  double log_likelihood = 0.0;       // model-space log-density of the sampled steps
  double weight = 1.0;
};

struct TrajectoryBatch {
  std::vector<Trajectory> trajectories;
  NoiseMatrix noise;
  std::vector<double> input;  // conditioning prefix, application space
  double x_last = 0.0;
};

/// Forecaster state after folding an application-space prefix.
struct ConditionedModel {
  const ForecastModel* model = nullptr;
  SeriesTransform transform;
  std::vector<double> input;
  HiddenState state;
  GaussianParams first;
  DecodeState decode;

  static ConditionedModel make(const ForecastModel& model, const SeriesTransform& transform,
                               std::span<const double> input);
  double x_last() const { return input.back(); }
};

/// Iterated prediction y_i = mu(h_i) + eta_i sigma(h_i) with each value fed
/// back. A coordinate observation replaces its step by the observed value and
/// sets the weight to the predictive density there (importance weight).
Trajectory sample_reparam(const ConditionedModel& cond, std::span<const double> eta,
                          const Observation& obs = Observation::none());
Trajectory sample_reparam(const ForecastModel& model, std::span<const double> prefix, std::span<const double> eta);

TrajectoryBatch sample_batch(const ConditionedModel& cond, const NoiseMatrix& noise);

/// Reweight a prior batch by the observation (re-rolling each row with the
/// same noise and the observed coordinate clamped).
TrajectoryBatch apply_observation(const ConditionedModel& cond, const TrajectoryBatch& prior, const Observation& obs);

double eval_statistic(const Statistic& stat, const Trajectory& y, double x_last);

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;  // NaN when fewer than two samples
  std::size_t samples = 0;
  bool has_standard_error() const;
};

Estimate mc_expectation(const TrajectoryBatch& batch, const Statistic& stat);
/// Self-normalised importance-sampling estimate; standard error from the
/// linearised ratio-estimator variance.
Estimate bayes_expectation(const TrajectoryBatch& batch, const Statistic& stat);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// estimate +- t_{L-1, (1+level)/2} * SE
Interval confidence_interval(double estimate, double standard_error, std::size_t samples, double level);

/// Sample L trajectories for x and estimate E[stat | x, obs] (MC when the
/// observation is trivial, importance sampling otherwise).
Estimate estimate_expectation(const ConditionedModel& cond, const Statistic& stat, const Observation& obs,
                              std::size_t samples, std::uint64_t seed);

// Batch export. CSV columns: sample,step,value,weight (step is 1-based).
void write_batch_csv(std::ostream& out, const TrajectoryBatch& batch);
std::string batch_to_json(const TrajectoryBatch& batch);

}  // namespace pfa
