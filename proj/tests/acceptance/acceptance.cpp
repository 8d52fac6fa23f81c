// Acceptance suite: one PASS/FAIL line per criterion.
//
//   pfa_acceptance            run all criteria
//   pfa_acceptance --only 6   run one
//   pfa_acceptance --only 6 --windows 10   smaller attack suite (tuning only)

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pfa/attack.hpp"
#include "pfa/data.hpp"
#include "pfa/estimators.hpp"
#include "pfa/eval.hpp"
#include "pfa/model.hpp"
#include "pfa/random.hpp"
#include "pfa/sampling.hpp"
#include "pfa/train.hpp"

using namespace pfa;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

std::vector<double> lognormal_path(std::mt19937_64& rng, std::size_t n, double start, double vol) {
  std::normal_distribution<double> z(0.0, vol);
  std::vector<double> p(n);
  double v = start;
  for (auto& x : p) {
    x = v;
    v *= std::exp(z(rng));
  }
  return p;
}

// Independent copy of the perturbation norm.
double norm_by_hand(const std::vector<double>& d, const std::vector<double>& x) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const long double r = static_cast<long double>(d[i]) / static_cast<long double>(x[i]);
    s += r * r;
  }
  return static_cast<double>(std::sqrt(s));
}

TrainDataset to_dataset(const WindowSet& w, const SeriesTransform& t) {
  TrainDataset d;
  for (const auto& s : w.train) d.train.push_back(teacher_forcing(t.encode_training(s.input, s.target)));
  for (const auto& s : w.validation) d.validation.push_back(teacher_forcing(t.encode_training(s.input, s.target)));
  return d;
}

// --- 1 ------------------------------------------------------------------------------

void autodiff_correctness(Outcome& out) {
  const ForecastModel m = ForecastModel::random(1, 4, 2024);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<TeacherForcedSample> batch;
  for (int b = 0; b < 3; ++b) {
    std::vector<double> seq(6);  // one input value and five predicted steps
    for (auto& v : seq) v = z(rng);
    batch.push_back(teacher_forcing(seq));
  }
  const std::vector<double> g = nll_gradient(m, batch);
  std::vector<double> theta = m.flatten();
  ForecastModel probe = m;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
    const double keep = theta[i];
    theta[i] = keep + h;
    probe.assign(theta);
    const double up = nll(probe, batch);
    theta[i] = keep - h;
    probe.assign(theta);
    const double down = nll(probe, batch);
    theta[i] = keep;
    worst = std::max(worst, rel_err(g[i], (up - down) / (2 * h), 1e-6));
  }
  out.detail << "parameters " << theta.size() << ", worst relative error " << worst << ' ';
  out.require(g.size() == theta.size(), "gradient length");
  out.require(worst < 1e-4, "relative error < 1e-4");
}

// --- 2 ------------------------------------------------------------------------------

void reparam_exactness(Outcome& out) {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const ForecastModel m = ForecastModel::random(1 + pair % 2, 3 + pair % 3, 100 + pair);
    Query q;
    q.model = &m;
    q.x = lognormal_path(rng, 8, 1.0 + pair, 0.03);
    switch (pair % 3) {
      case 0:
        q.transform.kind = TransformKind::normalized_returns;
        q.transform.sigma = 0.03;
        q.stat = Statistic::cum_return(4);
        break;
      case 1:
        q.transform.kind = TransformKind::scale_by_average;
        q.stat = Statistic::coordinate(3);
        break;
      default:
        q.stat = Statistic::coordinate(4);
        break;
    }
    const std::size_t L = 40;
    const std::uint64_t seed = 900 + pair;
    const auto g = reparam_gradient(q, std::vector<double>(q.x.size(), 0.0), L, seed).grad;
    std::vector<double> d(q.x.size(), 0.0);
    double scale = 0.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double h = 1e-6 * q.x[i];
      d[i] = h;
      const double up = reparam_estimate(q, d, L, seed);
      d[i] = -h;
      const double down = reparam_estimate(q, d, L, seed);
      d[i] = 0.0;
      worst = std::max(worst, rel_err(g[i], (up - down) / (2 * h), 1e-6 * scale + 1e-12));
    }
  }
  out.detail << "20 pairs, worst relative error " << worst << ' ';
  out.require(worst < 1e-3, "relative error < 1e-3");
}

// --- 3 ------------------------------------------------------------------------------

void estimator_agreement_check(Outcome& out) {
  // A toy forecaster whose next value leans on the last input.
  ForecastModel m = ForecastModel::random(1, 4, 7);
  for (auto& layer : m.layers) layer.weights *= 2.0;
  Query q;
  q.model = &m;
  q.x = {0.5, -0.2, 0.3, 0.8};
  q.stat = Statistic::coordinate(3);
  const std::size_t trials = 200, L = 1000, n = q.x.size();
  std::vector<std::vector<double>> sf(trials), rp(trials);
  const std::vector<double> zero(n, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    sf[t] = score_function_gradient(q, zero, L, mix_seed(31, t, 0)).grad;
    rp[t] = reparam_gradient(q, zero, L, mix_seed(31, t, 1)).grad;
  }
  auto mean_se = [&](const std::vector<std::vector<double>>& g) {
    std::vector<double> mean(n, 0.0), se(n, 0.0);
    for (const auto& v : g)
      for (std::size_t i = 0; i < n; ++i) mean[i] += v[i] / trials;
    for (const auto& v : g)
      for (std::size_t i = 0; i < n; ++i) se[i] += (v[i] - mean[i]) * (v[i] - mean[i]);
    for (auto& s : se) s = std::sqrt(s / (trials - 1) / trials);
    return std::pair{mean, se};
  };
  const auto [ms, ss] = mean_se(sf);
  const auto [mr, sr] = mean_se(rp);
  double dot = 0.0, ns = 0.0, nr = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += ms[i] * mr[i];
    ns += ms[i] * ms[i];
    nr += mr[i] * mr[i];
    if (std::abs(ms[i] - mr[i]) <= 3.0 * std::sqrt(ss[i] * ss[i] + sr[i] * sr[i])) ++within;
  }
  const double cosine = dot / std::sqrt(ns * nr);
  const double fraction = static_cast<double>(within) / static_cast<double>(n);
  out.detail << "means (sf/rp):";
  for (std::size_t i = 0; i < n; ++i) out.detail << ' ' << ms[i] << '/' << mr[i];
  out.detail << "; cosine " << cosine << ", within 3 SE " << within << "/" << n << ' ';
  out.require(cosine > 0.95, "cosine > 0.95");
  out.require(fraction >= 0.95, "95% of coordinates within 3 SE");
}

// --- 4 ------------------------------------------------------------------------------

void closed_form_oracle(Outcome& out) {
  const double a = 0.8, b = 0.05, sigma = 0.1;
  const ForecastModel m = ar1_model(a, b, sigma);
  const std::vector<double> x{0.1, -0.3, 0.6};
  const ConditionedModel cond = ConditionedModel::make(m, SeriesTransform{}, x);
  Query q;
  q.model = &m;
  q.x = x;
  for (std::size_t n : {1u, 2u, 5u, 10u}) {
    const double an = std::pow(a, static_cast<double>(n));
    const double expected = an * x.back() + b * (1.0 - an) / (1.0 - a);
    const TrajectoryBatch batch = sample_batch(cond, draw_noise(20000, n, 40 + n));
    const Estimate e = mc_expectation(batch, Statistic::coordinate(n));
    const double z = std::abs(e.value - expected) / e.standard_error;
    q.stat = Statistic::coordinate(n);
    const double g = reparam_gradient(q, std::vector<double>(x.size(), 0.0), 1000, 50 + n).grad.back();
    out.detail << "n=" << n << ": |z| " << z << ", grad/a^n " << g / an << "; ";
    out.require(z <= 4.0, "mean within 4 SE at n=" + std::to_string(n));
    out.require(std::abs(g / an - 1.0) <= 0.05, "last-input gradient within 5% at n=" + std::to_string(n));
  }
}

// --- 5 ------------------------------------------------------------------------------

void bayesian_reduction(Outcome& out) {
  std::size_t checks = 0;
  for (int k = 0; k < 10; ++k) {
    const ForecastModel m = ForecastModel::random(1 + k % 2, 4, 300 + k);
    std::mt19937_64 rng(k);
    const auto x = lognormal_path(rng, 10, 5.0, 0.02);
    SeriesTransform t;
    t.kind = k % 2 ? TransformKind::normalized_returns : TransformKind::scale_by_average;
    t.sigma = 0.02;
    const ConditionedModel cond = ConditionedModel::make(m, t, x);
    const TrajectoryBatch prior = sample_batch(cond, draw_noise(500, 6, 70 + k));
    const TrajectoryBatch trivial = apply_observation(cond, prior, Observation::none());
    for (const Statistic& s : {Statistic::cum_return(6), Statistic::coordinate(4), Statistic::call(5, 1.0)}) {
      const Estimate mc = mc_expectation(prior, s);
      const Estimate is = bayes_expectation(trivial, s);
      out.require(mc.value == is.value && mc.standard_error == is.standard_error, "bitwise equality");
      ++checks;
    }
    const Observation obs = Observation::coordinate(2, x.back() * (1.0 + 0.01 * (k - 5)));
    TrajectoryBatch weighted = apply_observation(cond, prior, obs);
    bool non_negative = true;
    for (const auto& tr : weighted.trajectories) non_negative = non_negative && tr.weight >= 0.0;
    out.require(non_negative, "weights >= 0");
    const Estimate before = bayes_expectation(weighted, Statistic::cum_return(6));
    for (auto& tr : weighted.trajectories) tr.weight *= 2.0;
    const Estimate after = bayes_expectation(weighted, Statistic::cum_return(6));
    out.require(before.value == after.value && before.standard_error == after.standard_error,
                "estimate unchanged by doubling weights");
  }
  out.detail << checks << " trivial-observation comparisons, 10 weighted batches ";
}

// --- 6 ------------------------------------------------------------------------------

struct FinancialSetup {
  std::vector<PriceSeries> series;
  WindowSet windows;
  SeriesTransform transform;
  ForecastModel model;
};

FinancialSetup financial_setup(std::size_t input_length, std::size_t horizon) {
  FinancialSetup s;
  SyntheticSpec spec;
  spec.a = 0.5;
  spec.sigma = 0.02;
  spec.price_start = 1.0;
  spec.series_count = 20;
  spec.length = 500;
  spec.seed = 6;
  s.series = generate(spec);
  const Timestamp end = s.series.front().timestamps.back();
  SplitRule split;
  split.train_begin = s.series.front().timestamps.front();
  split.train_end = s.series.front().timestamps[349];
  split.test_begin = split.train_end + 1;
  split.test_end = end;
  WindowOptions opt;
  opt.input_length = input_length;
  opt.horizon = horizon;
  opt.train_stride = 2;
  opt.seed = 6;
  s.windows = make_windows(s.series, opt, split);
  s.transform.kind = TransformKind::normalized_returns;
  const Moments mo = fit_return_normalization(s.series, split);
  s.transform.mu = mo.mean;
  s.transform.sigma = mo.stddev;
  TrainConfig tc;
  tc.batch_size = 256;
  tc.learning_rate = 0.01;
  tc.max_epochs = 30;
  tc.patience = 5;
  tc.seed = 6;
  s.model = train(ForecastModel::random(1, 25, 6), to_dataset(s.windows, s.transform), tc).model;
  return s;
}

void attack_efficacy(Outcome& out, std::size_t window_count, bool verbose) {
  const std::size_t horizon = 10;
  const FinancialSetup s = financial_setup(41, horizon);
  const Statistic stat = Statistic::cum_return(horizon);
  std::vector<WindowSample> suite;
  const auto& test = s.windows.test;
  for (std::size_t i = 0; i < window_count && i < test.size(); ++i)
    suite.push_back(test[i * test.size() / std::min(window_count, test.size())]);
  double tau = 0.0;
  for (const auto& w : test) tau += stat.evaluate(w.target, w.input.back());
  tau /= static_cast<double>(test.size());

  AttackConfig ac = AttackConfig::preset("financial");
  ac.iterations = 200;
  ac.eval_samples = 10000;
  ac.keep_traces = false;
  const double eps[] = {0.001, 0.01, 0.1};
  const EstimatorKind kinds[] = {EstimatorKind::reparametrization, EstimatorKind::score_function};
  std::size_t successes[2][3] = {};
  std::size_t halved = 0;
  for (std::size_t wi = 0; wi < suite.size(); ++wi) {
    Query q;
    q.model = &s.model;
    q.transform = s.transform;
    q.x = suite[wi].input;
    q.stat = stat;
    AttackConfig wc = ac;
    wc.seed = mix_seed(66, wi);
    const CRun base = evaluate_candidate(q, std::vector<double>(q.x.size(), 0.0), 0.0, wc);
    const auto [buy, sell] = classification_targets(tau, 0.03);
    AttackTarget target;
    target.tau = tau;
    const bool to_buy = base.estimate <= tau;
    target.kind = to_buy ? TargetKind::classification_buy : TargetKind::classification_sell;
    target.t = to_buy ? buy : sell;
    for (int k = 0; k < 2; ++k) {
      wc.estimator = kinds[k];
      const auto results = pgd_attack_multi(q, target, wc, eps);
      for (int e = 0; e < 3; ++e)
        if (results[e].success) ++successes[k][e];
      if (verbose) {
        std::printf("  %s %s t %.4f base %.4f:", suite[wi].id().c_str(), to_string(kinds[k]).c_str(), target.t,
                    results[0].baseline);
        for (const auto& r : results)
          std::printf(" [eps %g c %g E %.4f ci %.4f..%.4f norm %.4f %s]", r.epsilon, r.chosen_c, r.achieved, r.ci_low,
                      r.ci_high, r.norm, r.success ? "ok" : "-");
        std::printf("\n");
      }
      if (k == 0) {
        const auto& r = results[2];
        if (std::abs(r.achieved - target.t) <= 0.5 * std::abs(r.baseline - target.t)) ++halved;
      }
    }
  }
  const double n = static_cast<double>(suite.size());
  out.detail << suite.size() << " windows, tau " << tau << "; gap halved at eps 0.1: " << halved / n
             << "; success rp/sf:";
  for (int e = 0; e < 3; ++e) out.detail << " eps " << eps[e] << " " << successes[0][e] / n << "/" << successes[1][e] / n;
  out.detail << ' ';
  out.require(halved >= 0.8 * n, "gap halved on >= 80% of windows");
  for (int e = 0; e < 3; ++e) out.require(successes[0][e] >= successes[1][e], "rp >= sf at every epsilon");
  out.require(successes[0][0] < successes[0][2], "success at 1e-3 below success at 1e-1");
}

// --- 7 ------------------------------------------------------------------------------

void constraint_discipline(Outcome& out) {
  // Persistent normalised returns: the forecast reacts strongly to the last prices.
  const ForecastModel m = ar1_model(0.9, 0.0, 1.0);
  std::mt19937_64 rng(7);
  std::size_t iterates = 0, violations = 0, succeeded = 0, over_budget = 0;
  for (int w = 0; w < 12; ++w) {
    Query q;
    q.model = &m;
    q.transform.kind = TransformKind::normalized_returns;
    q.transform.sigma = 0.02;
    q.x = lognormal_path(rng, 15, 1.0 + w, 0.02);
    q.stat = Statistic::cum_return(5);
    AttackConfig ac;
    ac.c_grid = {1.0, 1e2, 1e4};
    ac.iterations = 40;
    ac.samples = 20;
    ac.eval_samples = 500;
    ac.learning_rate = w % 2 ? 0.5 : 0.01;  // the large step repeatedly hits the positivity floor
    ac.seed = 700 + w;
    ac.keep_traces = false;
    ac.on_iterate = [&](double, std::size_t, std::span<const double> d) {
      ++iterates;
      for (std::size_t i = 0; i < d.size(); ++i)
        if (!(q.x[i] + d[i] > 0.0)) ++violations;
    };
    const double base = evaluate_candidate(q, std::vector<double>(q.x.size(), 0.0), 0.0, ac).estimate;
    const AttackTarget target =
        w % 3 == 0 ? AttackTarget::explicit_target(-0.5, 0.005) : AttackTarget::explicit_target(base + 0.004 * w, 0.003);
    const double eps[] = {0.001, 0.01, 0.1, 1.0};
    for (auto kind : {EstimatorKind::reparametrization, EstimatorKind::score_function}) {
      ac.estimator = kind;
      for (const auto& r : pgd_attack_multi(q, target, ac, eps)) {
        if (!r.success) continue;
        ++succeeded;
        if (norm_by_hand(r.delta, q.x) > r.epsilon) ++over_budget;
      }
    }
  }
  double worst = 0.0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> logk(-6.0, 6.0);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + t % 50;
    std::vector<double> d(n), x(n), kd(n), kx(n);
    const double k = std::pow(10.0, logk(rng));
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::pow(10.0, 3.0 * u(rng));
      d[i] = x[i] * u(rng);
      kd[i] = k * d[i];
      kx[i] = k * x[i];
    }
    const double a = weighted_norm(d, x);
    worst = std::max(worst, std::abs(weighted_norm(kd, kx) - a) / std::max(a, 1e-300));
  }
  out.detail << iterates << " iterates, " << violations << " non-positive; " << succeeded << " successes, "
             << over_budget << " over budget; scale invariance worst " << worst << ' ';
  out.require(iterates > 0 && violations == 0, "every iterate positive");
  out.require(succeeded > 0, "some successes to audit");
  out.require(over_budget == 0, "successes within budget");
  out.require(worst <= 1e-12, "scale invariance to 1e-12");
}

// --- 8 ------------------------------------------------------------------------------

void preprocessing_identities(Outcome& out) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> logp(-4.0, 4.0), vol(0.001, 0.2);
  std::uniform_int_distribution<std::size_t> len(2, 400);
  double worst_price = 0.0, worst_norm = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const auto p = lognormal_path(rng, len(rng), std::pow(10.0, logp(rng)), vol(rng));
    const auto r = to_returns(p);
    const auto back = from_returns(p.front(), r);
    for (std::size_t i = 0; i < p.size(); ++i) worst_price = std::max(worst_price, std::abs(back[i] - p[i]) / p[i]);
    const Moments mo = moments(r);
    const double sd = mo.stddev > 0 ? mo.stddev : 1.0;
    const auto z = normalize(r, mo.mean, sd);
    const auto rr = denormalize(z, mo.mean, sd);
    for (std::size_t i = 0; i < r.size(); ++i)
      worst_norm = std::max(worst_norm, std::abs(rr[i] - r[i]) / std::max(std::abs(r[i]), 1e-300));
  }
  // Overlap audit across rolling study periods; recomputed here from the window time ranges.
  SyntheticSpec spec;
  spec.series_count = 3;
  spec.length = 6 * 365;
  spec.price_start = 10.0;
  spec.sigma = 0.01;
  spec.start = make_date(2010, 1, 1);
  const auto series = generate(spec);
  std::size_t library = 0, by_hand = 0, periods = 0;
  for (const SplitRule& split : study_periods(2010, 2015, 3, 1)) {
    WindowOptions opt;
    opt.input_length = 30;
    opt.horizon = 10;
    opt.train_stride = 5;
    opt.test_stride = 5;
    const WindowSet w = make_windows(series, opt, split);
    ++periods;
    library += target_overlap_count(w);
    for (const auto* set : {&w.train, &w.validation})
      for (const auto& a : *set)
        for (const auto& b : w.test)
          if (a.series_id == b.series_id && a.target_begin <= b.target_end && b.target_begin <= a.target_end)
            ++by_hand;
  }
  out.detail << "price round trip " << worst_price << ", normalisation round trip " << worst_norm << ", " << periods
             << " periods, overlaps " << library << "/" << by_hand << ' ';
  out.require(worst_price <= 1e-10, "price <-> return within 1e-10");
  out.require(worst_norm <= 1e-10, "normalize <-> denormalize within 1e-10");
  out.require(periods > 0 && library == 0 && by_hand == 0, "zero target overlaps");
}

// --- 9 ------------------------------------------------------------------------------

void training_sanity(Outcome& out) {
  const double a = 0.7, sigma = 0.1;
  SyntheticSpec spec;
  spec.a = a;
  spec.sigma = sigma;
  spec.series_count = 50;
  spec.length = 1020;
  spec.seed = 9;
  const auto series = generate(spec);
  SplitRule split;
  split.train_begin = series.front().timestamps.front();
  split.train_end = series.front().timestamps.back();
  split.test_begin = split.train_end + 1;
  split.test_end = split.test_begin;
  WindowOptions opt;
  opt.input_length = 15;
  opt.horizon = 5;
  opt.seed = 9;
  const WindowSet w = make_windows(series, opt, split);
  const TrainDataset data = to_dataset(w, SeriesTransform{});
  TrainConfig tc;
  tc.batch_size = 512;
  tc.learning_rate = 0.01;
  tc.max_epochs = 40;
  tc.patience = 8;
  tc.seed = 9;
  const ForecastModel init = ForecastModel::random(1, 8, 9);
  const auto first = train(init, data, tc);
  const auto second = train(init, data, tc);
  const double analytic = 0.5 * std::log(2.0 * M_PI * sigma * sigma) + 0.5;
  const double achieved = first.trace[first.best_epoch].validation_nll;
  out.detail << (data.train.size() + data.validation.size()) << " windows, validation nll " << achieved
             << " vs analytic " << analytic << " (best epoch " << first.best_epoch << " of "
             << first.trace.back().epoch << ") ";
  out.require(data.train.size() + data.validation.size() >= 50000, "50k windows");
  out.require(std::abs(achieved - analytic) <= 0.05, "validation nll within 0.05");
  out.require(first.model.flatten() == second.model.flatten(), "bitwise reproducible");
}

// --- 10 -----------------------------------------------------------------------------

void evaluation_metrics(Outcome& out) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> training(5000), truths(500);
  for (auto& v : training) v = z(rng);
  for (auto& v : truths) v = z(rng);
  const RpsConfig bins = quantile_bins(training, 100);
  bool zero = true;
  for (double t : truths) zero = zero && rps(bins, std::vector<double>(3, t), t) == 0.0;
  std::vector<double> clim;
  for (double t : truths) clim.push_back(rps(bins, training, t));
  const double self = skill_ratio(clim, clim);

  bool identity = true;
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int t = 0; t < 1000; ++t) {
    const double ra = u(rng), rb = u(rng);
    const std::vector<BacktestEntry> e{{0, "A", u(rng), ra}, {0, "B", u(rng), rb}};
    const BacktestReport r = backtest_oracle(e, 1);
    identity = identity && r.step_returns[0] == (std::max(ra, rb) - std::min(ra, rb)) / 2.0;
  }

  // Foresight against a trained model on the same synthetic data.
  SyntheticSpec spec;
  spec.a = 0.3;
  spec.sigma = 0.02;
  spec.price_start = 1.0;
  spec.series_count = 12;
  spec.length = 300;
  spec.seed = 10;
  const auto series = generate(spec);
  SplitRule split;
  split.train_begin = series.front().timestamps.front();
  split.train_end = series.front().timestamps[199];
  split.test_begin = split.train_end + 1;
  split.test_end = series.front().timestamps.back();
  WindowOptions opt;
  opt.input_length = 21;
  opt.horizon = 5;
  opt.test_stride = 5;
  const WindowSet w = make_windows(series, opt, split);
  SeriesTransform t;
  t.kind = TransformKind::normalized_returns;
  const Moments mo = fit_return_normalization(series, split);
  t.mu = mo.mean;
  t.sigma = mo.stddev;
  TrainConfig tc;
  tc.batch_size = 128;
  tc.max_epochs = 10;
  tc.seed = 10;
  const ForecastModel model = train(ForecastModel::random(1, 8, 10), to_dataset(w, t), tc).model;
  const auto entries = backtest_entries(model, t, w.test, 5, 200, 10);
  const BacktestReport trained = backtest_scores(entries, 3, 5);
  const BacktestReport oracle = backtest_oracle(entries, 3, 5);
  bool dominates = oracle.step_returns.size() == trained.step_returns.size() && !trained.step_returns.empty();
  for (std::size_t i = 0; dominates && i < oracle.step_returns.size(); ++i)
    dominates = oracle.step_returns[i] >= trained.step_returns[i];
  out.detail << "self-skill " << self << ", " << oracle.step_returns.size() << " steps, mean return model "
             << trained.mean << " foresight " << oracle.mean << ' ';
  out.require(zero, "same-bin point forecasts score 0");
  out.require(std::abs(self - 1.0) <= 1e-12, "climatology self-skill 1");
  out.require(identity, "two-asset identity exact");
  out.require(dominates && oracle.mean >= trained.mean, "foresight dominates");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::size_t windows = 100;
  bool verbose = false;
  app.add_option("--only", only, "run a single criterion (1-10)");
  app.add_option("--windows", windows, "attack suite size for criterion 6");
  app.add_flag("--verbose", verbose, "per-window attack results");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"autodiff correctness", autodiff_correctness},
      {"reparametrization gradient exactness", reparam_exactness},
      {"estimator agreement", estimator_agreement_check},
      {"closed-form AR(1) oracle", closed_form_oracle},
      {"Bayesian reduction", bayesian_reduction},
      {"attack efficacy", [&](Outcome& o) { attack_efficacy(o, windows, verbose); }},
      {"constraint discipline", constraint_discipline},
      {"preprocessing identities", preprocessing_identities},
      {"training sanity", training_sanity},
      {"evaluation metrics", evaluation_metrics},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "] ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu (%s): %s  %s(%.1f s)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
