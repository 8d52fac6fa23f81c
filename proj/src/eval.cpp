#include "pfa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "pfa/error.hpp"
#include "pfa/random.hpp"
#include "pfa/sampling.hpp"

namespace pfa {

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string to_string(Label label) {
  switch (label) {
    case Label::buy: return "buy";
    case Label::sell: return "sell";
    case Label::uncertain: return "uncertain";
  }
  return "?";
}

Classification classify(double low, double high, double tau) {
  if (!(low <= high)) fail(ErrorKind::invalid_argument, "interval bounds out of order");
  Classification c{Label::uncertain, low, high, tau};
  if (low > tau) c.label = Label::buy;
  else if (high < tau) c.label = Label::sell;
  return c;
}

// --- backtest ------------------------------------------------------------------------

BacktestReport backtest_scores(std::vector<BacktestEntry> entries, std::size_t k, std::size_t h) {
  if (k < 1) fail(ErrorKind::invalid_argument, "portfolio size k must be at least 1");
  std::stable_sort(entries.begin(), entries.end(), [](const BacktestEntry& a, const BacktestEntry& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.predicted != b.predicted) return a.predicted > b.predicted;
    return a.series_id < b.series_id;
  });
  BacktestReport r;
  r.h = h;
  r.k = k;
  for (std::size_t begin = 0; begin < entries.size();) {
    std::size_t end = begin;
    while (end < entries.size() && entries[end].time == entries[begin].time) ++end;
    const std::size_t n = end - begin;
    const bool short_of_names = n < 2 * k;
    const std::size_t legs = short_of_names ? n / 2 : k;
    double ret = 0.0;
    if (legs > 0) {
      double longs = 0.0, shorts = 0.0;
      for (std::size_t i = 0; i < legs; ++i) {
        longs += entries[begin + i].realized;
        shorts += entries[end - 1 - i].realized;
      }
      ret = (longs / static_cast<double>(legs) - shorts / static_cast<double>(legs)) / 2.0;
    }
    r.times.push_back(entries[begin].time);
    r.step_returns.push_back(ret);
    r.shortfall.push_back(short_of_names);
    if (short_of_names) ++r.shortfall_steps;
    begin = end;
  }
  r.mean = mean_of(r.step_returns);
  r.stddev = sample_stddev(r.step_returns);
  return r;
}

BacktestReport backtest_oracle(std::vector<BacktestEntry> entries, std::size_t k, std::size_t h) {
  for (auto& e : entries) e.predicted = e.realized;
  return backtest_scores(std::move(entries), k, h);
}

std::vector<BacktestEntry> backtest_entries(const ForecastModel& model, const SeriesTransform& transform,
                                            std::span<const WindowSample> windows, std::size_t h, std::size_t samples,
                                            std::uint64_t seed) {
  std::vector<BacktestEntry> out;
  out.reserve(windows.size());
  const Statistic stat = Statistic::cum_return(h);
  for (const auto& w : windows) {
    if (w.target.size() < h) fail(ErrorKind::config, "backtest horizon exceeds the window target length");
    const ConditionedModel cond = ConditionedModel::make(model, transform, w.input);
    // Common random numbers across assets so ranking differences are not noise-driven.
    const Estimate e = estimate_expectation(cond, stat, Observation::none(), samples, seed);
    BacktestEntry b;
    b.time = w.input_end;
    b.series_id = w.series_id;
    b.predicted = e.value;
    b.realized = w.target[h - 1] / w.input.back() - 1.0;
    out.push_back(std::move(b));
  }
  return out;
}

BacktestReport backtest(const ForecastModel& model, const SeriesTransform& transform,
                        std::span<const WindowSample> windows, std::size_t h, std::size_t k, std::size_t samples,
                        std::uint64_t seed) {
  return backtest_scores(backtest_entries(model, transform, windows, h, samples, seed), k, h);
}

PeriodSummary summarize_periods(std::span<const BacktestReport> periods) {
  std::vector<double> means;
  for (const auto& p : periods) means.push_back(p.mean);
  return {mean_of(means), sample_stddev(means)};
}

// --- RPS --------------------------------------------------------------------------------

RpsConfig quantile_bins(std::span<const double> training, std::size_t bins) {
  if (training.empty()) fail(ErrorKind::invalid_argument, "quantile bins need training values");
  if (bins < 2) fail(ErrorKind::invalid_argument, "need at least two bins");
  std::vector<double> sorted(training.begin(), training.end());
  std::sort(sorted.begin(), sorted.end());
  RpsConfig c;
  for (std::size_t j = 1; j < bins; ++j) {
    const double pos = static_cast<double>(j) / static_cast<double>(bins) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    const double q = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    if (c.edges.empty() || q > c.edges.back()) c.edges.push_back(q);
  }
  return c;
}

std::size_t bin_of(const RpsConfig& config, double value) {
  return static_cast<std::size_t>(std::upper_bound(config.edges.begin(), config.edges.end(), value) -
                                  config.edges.begin());
}

std::vector<double> histogram(const RpsConfig& config, std::span<const double> samples) {
  if (samples.empty()) fail(ErrorKind::invalid_argument, "histogram of no samples");
  std::vector<double> p(config.bins(), 0.0);
  for (double s : samples) p[bin_of(config, s)] += 1.0;
  for (double& v : p) v /= static_cast<double>(samples.size());
  return p;
}

double rps(std::span<const double> probabilities, std::size_t truth_bin) {
  if (truth_bin >= probabilities.size()) fail(ErrorKind::invalid_argument, "truth bin out of range");
  double cum = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    cum += probabilities[k];
    const double d = cum - (k >= truth_bin ? 1.0 : 0.0);
    total += d * d;
  }
  return total;
}

double rps(const RpsConfig& config, std::span<const double> samples, double truth) {
  if (!std::isfinite(truth)) fail(ErrorKind::invalid_argument, "ground truth must be finite");
  return rps(histogram(config, samples), bin_of(config, truth));
}

double skill_ratio(std::span<const double> model_scores, std::span<const double> reference_scores) {
  if (model_scores.size() != reference_scores.size() || model_scores.empty())
    fail(ErrorKind::invalid_argument, "score lists must be non-empty and aligned");
  double m = 0.0, r = 0.0;
  for (std::size_t i = 0; i < model_scores.size(); ++i) {
    m += model_scores[i];
    r += reference_scores[i];
  }
  if (r == 0.0) fail(ErrorKind::numeric, "reference scores are all zero");
  return m / r;
}

// --- attack curves -------------------------------------------------------------------

std::vector<CurveRow> attack_curves(std::span<const AttackOutcome> outcomes) {
  std::vector<CurveRow> rows;
  if (outcomes.empty()) return rows;
  std::map<std::string, std::set<double>> eps_by_estimator;
  // (estimator, window) -> (epsilon -> success, period)
  std::map<std::pair<std::string, std::string>, std::map<double, bool>> by_window;
  std::map<std::pair<std::string, std::string>, std::string> period_of;
  for (const auto& o : outcomes) {
    eps_by_estimator[o.estimator].insert(o.epsilon);
    auto& cell = by_window[{o.estimator, o.window_id}][o.epsilon];
    cell = cell || o.success;
    period_of[{o.estimator, o.window_id}] = o.period;
  }
  for (const auto& [estimator, eps_set] : eps_by_estimator) {
    for (double eps : eps_set) {
      std::map<std::string, std::pair<std::size_t, std::size_t>> per_period;  // successes, count
      std::size_t successes = 0, count = 0;
      for (const auto& [key, cells] : by_window) {
        if (key.first != estimator) continue;
        bool any_at_or_below = false;
        bool evaluated = false;
        for (const auto& [e, ok] : cells) {
          if (e > eps) break;
          evaluated = true;
          any_at_or_below = any_at_or_below || ok;
        }
        if (!evaluated) continue;
        ++count;
        auto& pp = per_period[period_of[key]];
        ++pp.second;
        if (any_at_or_below) {
          ++successes;
          ++pp.first;
        }
      }
      CurveRow row;
      row.estimator = estimator;
      row.epsilon = eps;
      row.count = count;
      row.success_rate = count ? static_cast<double>(successes) / static_cast<double>(count) : 0.0;
      std::vector<double> rates;
      for (const auto& [p, sc] : per_period)
        rates.push_back(static_cast<double>(sc.first) / static_cast<double>(sc.second));
      row.stddev = sample_stddev(rates);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<double> shift_distribution(std::span<const AttackOutcome> outcomes, const std::string& estimator,
                                       double epsilon) {
  std::vector<double> out;
  for (const auto& o : outcomes)
    if (o.estimator == estimator && o.epsilon == epsilon) out.push_back(o.relative_shift);
  std::sort(out.begin(), out.end());
  return out;
}

void write_curves_csv(std::ostream& out, std::span<const CurveRow> rows) {
  out << "estimator,epsilon,success_rate,std,count\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.estimator << ',' << r.epsilon << ',' << r.success_rate << ',' << r.stddev << ',' << r.count << '\n';
}

void write_backtest_csv(std::ostream& out, std::span<const BacktestReport> reports) {
  out << "h,k,mean,std,steps,shortfall_steps\n";
  out.precision(17);
  for (const auto& r : reports)
    out << r.h << ',' << r.k << ',' << r.mean << ',' << r.stddev << ',' << r.step_returns.size() << ','
        << r.shortfall_steps << '\n';
}

}  // namespace pfa
