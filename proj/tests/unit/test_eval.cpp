#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "pfa/eval.hpp"

using namespace pfa;

namespace {

BacktestEntry entry(Timestamp t, std::string id, double predicted, double realized) {
  return {t, std::move(id), predicted, realized};
}

AttackOutcome outcome(std::string window, std::string est, double eps, bool ok, std::string period = "p") {
  AttackOutcome o;
  o.window_id = std::move(window);
  o.estimator = std::move(est);
  o.epsilon = eps;
  o.success = ok;
  o.period = std::move(period);
  return o;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("interval classification") {
  CHECK(classify(0.02, 0.05, 0.01).label == Label::buy);
  CHECK(classify(-0.05, -0.02, 0.01).label == Label::sell);
  CHECK(classify(-0.01, 0.03, 0.01).label == Label::uncertain);
  CHECK(classify(0.01, 0.03, 0.01).label == Label::uncertain);
  CHECK(to_string(Label::buy) == "buy");
  CHECK(testing::error_kind_of([] { classify(1.0, 0.0, 0.0); }) == ErrorKind::invalid_argument);
}

TEST_CASE("two-asset long-short step") {
  const std::vector<BacktestEntry> e{entry(0, "A", 0.1, 0.10), entry(0, "B", -0.1, -0.05)};
  const auto r = backtest_scores(e, 1);
  REQUIRE(r.step_returns.size() == 1);
  CHECK(r.step_returns[0] == doctest::Approx(0.075).epsilon(1e-14));
  CHECK(r.shortfall_steps == 0);
  CHECK(r.mean == r.step_returns[0]);
}

TEST_CASE("ties rank by series id") {
  const std::vector<BacktestEntry> e{entry(0, "B", 0.0, -0.2), entry(0, "A", 0.0, 0.2)};
  CHECK(backtest_scores(e, 1).step_returns[0] == doctest::Approx(0.2));
}

TEST_CASE("perfect foresight dominates") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BacktestEntry> e;
    for (Timestamp t = 0; t < 5; ++t)
      for (int i = 0; i < 12; ++i) e.push_back(entry(t, "S" + std::to_string(i), z(rng), z(rng)));
    const auto model = backtest_scores(e, 3);
    const auto oracle = backtest_oracle(e, 3);
    REQUIRE(model.step_returns.size() == 5);
    for (std::size_t s = 0; s < 5; ++s) CHECK(oracle.step_returns[s] >= model.step_returns[s] - 1e-15);
    CHECK(oracle.mean >= 0.0);
  }
}

TEST_CASE("shortfall uses the names available") {
  const std::vector<BacktestEntry> e{entry(0, "A", 3, 0.3), entry(0, "B", 2, 0.1), entry(0, "C", 1, -0.1),
                                     entry(1, "A", 1, 0.0)};
  const auto r = backtest_scores(e, 2);
  REQUIRE(r.step_returns.size() == 2);
  CHECK(r.shortfall[0]);
  CHECK(r.shortfall[1]);
  CHECK(r.shortfall_steps == 2);
  CHECK(r.step_returns[0] == doctest::Approx(0.2));
  CHECK(r.step_returns[1] == 0.0);
  CHECK(testing::error_kind_of([&] { backtest_scores(e, 0); }) == ErrorKind::invalid_argument);
}

TEST_CASE("model backtest is invariant to price scale under the returns transform") {
  const ForecastModel m = ForecastModel::random(1, 3, 4);
  SeriesTransform t;
  t.kind = TransformKind::normalized_returns;
  t.sigma = 0.02;
  std::mt19937_64 rng(8);
  std::vector<WindowSample> windows, scaled;
  for (int i = 0; i < 6; ++i) {
    const auto path = testing::positive_series(rng, 15, 10.0 + i, 0.02);
    WindowSample w;
    w.series_id = "S" + std::to_string(i);
    w.input.assign(path.begin(), path.begin() + 10);
    w.target.assign(path.begin() + 10, path.end());
    w.input_end = 100;
    windows.push_back(w);
    for (auto& v : w.input) v *= 3.0;
    for (auto& v : w.target) v *= 3.0;
    scaled.push_back(w);
  }
  const auto a = backtest_entries(m, t, windows, 5, 200, 2);
  const auto b = backtest_entries(m, t, scaled, 5, 200, 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].predicted == doctest::Approx(a[i].predicted).epsilon(1e-10));
    CHECK(b[i].realized == doctest::Approx(a[i].realized).epsilon(1e-12));
  }
  CHECK(testing::error_kind_of([&] { backtest_entries(m, t, windows, 6, 10, 1); }) == ErrorKind::config);
  const auto r = backtest(m, t, windows, 5, 2, 200, 2);
  CHECK(r.step_returns.size() == 1);
}

TEST_CASE("period summary") {
  std::vector<BacktestReport> periods(3);
  periods[0].mean = 0.01;
  periods[1].mean = 0.02;
  periods[2].mean = 0.03;
  const auto s = summarize_periods(periods);
  CHECK(s.mean == doctest::Approx(0.02));
  CHECK(s.stddev == doctest::Approx(0.01));
}

TEST_CASE("ranked probability score") {
  const double point[] = {0.0, 1.0, 0.0};
  CHECK(rps(point, 1) == 0.0);
  CHECK(rps(point, 2) == doctest::Approx(1.0));
  CHECK(rps(point, 0) == doctest::Approx(1.0));
  const double spread[] = {0.5, 0.5};
  CHECK(rps(spread, 0) == doctest::Approx(0.25));
  CHECK(testing::error_kind_of([&] { rps(point, 3); }) == ErrorKind::invalid_argument);

  std::vector<double> train(1000);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  for (auto& v : train) v = z(rng);
  const RpsConfig cfg = quantile_bins(train, 10);
  for (std::size_t i = 1; i < cfg.edges.size(); ++i) CHECK(cfg.edges[i] > cfg.edges[i - 1]);
  CHECK(cfg.bins() <= 10);
  CHECK(bin_of(cfg, -100.0) == 0);
  CHECK(bin_of(cfg, 100.0) == cfg.bins() - 1);
  const auto hist = histogram(cfg, train);
  double total = 0.0;
  for (double p : hist) total += p;
  CHECK(total == doctest::Approx(1.0));

  const std::vector<double> constant(100, 1.0);
  CHECK(rps(cfg, constant, 1.0) == 0.0);

  const std::vector<double> scores{0.2, 0.4, 0.3};
  CHECK(skill_ratio(scores, scores) == 1.0);
  const std::vector<double> half{0.1, 0.2, 0.15};
  CHECK(skill_ratio(half, scores) == doctest::Approx(0.5));
}

TEST_CASE("attack curves") {
  SUBCASE("empty input") { CHECK(attack_curves({}).empty()); }
  SUBCASE("success carries to larger budgets") {
    const std::vector<AttackOutcome> o{outcome("w1", "rp", 0.001, true), outcome("w1", "rp", 0.01, false),
                                       outcome("w1", "rp", 0.1, false), outcome("w2", "rp", 0.001, false),
                                       outcome("w2", "rp", 0.01, false), outcome("w2", "rp", 0.1, true)};
    const auto rows = attack_curves(o);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].success_rate == 0.5);
    CHECK(rows[1].success_rate == 0.5);
    CHECK(rows[2].success_rate == 1.0);
    for (const auto& r : rows) CHECK(r.count == 2);
  }
  SUBCASE("monotone in epsilon, one row per estimator and budget") {
    std::mt19937_64 rng(4);
    std::bernoulli_distribution coin(0.3);
    std::vector<AttackOutcome> o;
    for (const char* est : {"reparametrization", "score_function"})
      for (int w = 0; w < 40; ++w)
        for (double eps : {0.001, 0.01, 0.1})
          o.push_back(outcome("w" + std::to_string(w), est, eps, coin(rng), w < 20 ? "p1" : "p2"));
    const auto rows = attack_curves(o);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < rows.size(); i += 3) {
      CHECK(rows[i].estimator == rows[i + 2].estimator);
      CHECK(rows[i].success_rate <= rows[i + 1].success_rate);
      CHECK(rows[i + 1].success_rate <= rows[i + 2].success_rate);
      CHECK(rows[i].stddev >= 0.0);
    }
    std::ostringstream csv;
    write_curves_csv(csv, rows);
    const std::string s = csv.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 7);
  }
}

TEST_CASE("shift distribution is sorted and filtered") {
  auto a = outcome("w1", "rp", 0.1, true);
  a.relative_shift = 0.3;
  auto b = outcome("w2", "rp", 0.1, true);
  b.relative_shift = -0.1;
  auto c = outcome("w3", "sf", 0.1, true);
  const std::vector<AttackOutcome> o{a, b, c};
  CHECK(shift_distribution(o, "rp", 0.1) == std::vector<double>{-0.1, 0.3});
  CHECK(shift_distribution(o, "rp", 0.01).empty());
}

}  // TEST_SUITE
