#pragma once

// Downstream evaluation: interval classification, long-short backtests,
// ranked probability scores and attack success curves.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pfa/data.hpp"
#include "pfa/estimators.hpp"
#include "pfa/model.hpp"

namespace pfa {

enum class Label { buy, sell, uncertain };
std::string to_string(Label label);

struct Classification {
  Label label = Label::uncertain;
  double low = 0.0;
  double high = 0.0;
  double tau = 0.0;
};

/// Buy if the interval lies above tau, sell if below, uncertain otherwise.
Classification classify(double low, double high, double tau);

// --- backtest ---------------------------------------------------------------------

/// One asset at one rebalancing step.
struct BacktestEntry {
  Timestamp time = 0;
  std::string series_id;
  double predicted = 0.0;  // ranking score
  double realized = 0.0;   // ground-truth return over the holding period
};

struct BacktestReport {
  std::size_t h = 0;
  std::size_t k = 0;
  std::vector<Timestamp> times;
  std::vector<double> step_returns;
  std::vector<bool> shortfall;  // fewer than 2k names at that step
  double mean = 0.0;
  double stddev = 0.0;  // across steps
  std::size_t shortfall_steps = 0;
};

/// Rank by `predicted` (descending, ties by series id ascending); go long the
/// top k and short the bottom k with equal capital on both legs:
/// (mean long realized - mean short realized) / 2.
BacktestReport backtest_scores(std::vector<BacktestEntry> entries, std::size_t k, std::size_t h = 0);

/// Same entries ranked by the realized returns (perfect foresight).
BacktestReport backtest_oracle(std::vector<BacktestEntry> entries, std::size_t k, std::size_t h = 0);

/// Model-driven entries: predicted = MC estimate of CumReturn(h) from L
/// samples, realized = target[h-1] / input.back() - 1. Windows sharing an
/// input end time form one rebalancing step.
std::vector<BacktestEntry> backtest_entries(const ForecastModel& model, const SeriesTransform& transform,
                                            std::span<const WindowSample> windows, std::size_t h, std::size_t samples,
                                            std::uint64_t seed);

BacktestReport backtest(const ForecastModel& model, const SeriesTransform& transform,
                        std::span<const WindowSample> windows, std::size_t h, std::size_t k, std::size_t samples,
                        std::uint64_t seed);

struct PeriodSummary {
  double mean = 0.0;    // mean of per-period mean returns
  double stddev = 0.0;  // sample standard deviation across periods
};
PeriodSummary summarize_periods(std::span<const BacktestReport> periods);

// --- ranked probability score -----------------------------------------------------

struct RpsConfig {
  std::vector<double> edges;  // strictly increasing; edges.size() + 1 bins
  std::size_t bins() const { return edges.size() + 1; }
};

/// Edges at the empirical quantiles j / bins of `training` (duplicates dropped).
RpsConfig quantile_bins(std::span<const double> training, std::size_t bins = 100);

std::size_t bin_of(const RpsConfig& config, double value);
std::vector<double> histogram(const RpsConfig& config, std::span<const double> samples);

/// sum_k (CDF_p(k) - CDF_truth(k))^2
double rps(std::span<const double> probabilities, std::size_t truth_bin);
double rps(const RpsConfig& config, std::span<const double> samples, double truth);

/// mean RPS(model) / mean RPS(reference); lower is better, 1 for the reference.
double skill_ratio(std::span<const double> model_scores, std::span<const double> reference_scores);

// --- attack outcomes --------------------------------------------------------------

struct AttackOutcome {
  std::string window_id;
  std::string period;
  std::string estimator;
  double epsilon = 0.0;
  bool success = false;
  double relative_shift = 0.0;  // (achieved - reference) / reference
};

struct CurveRow {
  std::string estimator;
  double epsilon = 0.0;
  double success_rate = 0.0;
  double stddev = 0.0;  // across periods
  std::size_t count = 0;
};

/// Success rate per (estimator, epsilon). A window counts as a success at
/// epsilon when it succeeded at any epsilon' <= epsilon, since every smaller-
/// budget perturbation is admissible for the larger budget.
std::vector<CurveRow> attack_curves(std::span<const AttackOutcome> outcomes);

/// Relative shifts of the outcomes at one epsilon and estimator, sorted.
std::vector<double> shift_distribution(std::span<const AttackOutcome> outcomes, const std::string& estimator,
                                       double epsilon);

void write_curves_csv(std::ostream& out, std::span<const CurveRow> rows);
void write_backtest_csv(std::ostream& out, std::span<const BacktestReport> reports);

}  // namespace pfa
