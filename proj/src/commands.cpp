#include "pfa/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "pfa/attack.hpp"
#include "pfa/error.hpp"
#include "pfa/estimators.hpp"
#include "pfa/eval.hpp"
#include "pfa/model.hpp"
#include "pfa/random.hpp"
#include "pfa/sampling.hpp"
#include "pfa/train.hpp"

namespace fs = std::filesystem;

namespace pfa {

namespace {

struct Workspace {
  fs::path out;
};

Workspace prepare(const RunConfig& config) {
  Workspace w;
  w.out = config.get("out_dir");
  if (w.out.empty()) fail(ErrorKind::config, "out_dir must not be empty");
  std::error_code ec;
  fs::create_directories(w.out, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + w.out.string() + ": " + ec.message());
  config.write_resolved((w.out / "resolved.cfg").string());
  return w;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out.precision(17);
  return out;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct Dataset {
  std::vector<PriceSeries> series;
  SplitRule split;
  SeriesTransform transform;
  WindowSet windows;
};

SplitRule resolve_split(const RunConfig& config, const std::vector<PriceSeries>& series) {
  const std::string keys[] = {"train_begin", "train_end", "test_begin", "test_end"};
  std::size_t given = 0;
  for (const auto& k : keys) given += config.get(k).empty() ? 0 : 1;
  SplitRule r;
  if (given == 4) {
    r.train_begin = parse_timestamp(config.get("train_begin"));
    r.train_end = parse_timestamp(config.get("train_end"));
    r.test_begin = parse_timestamp(config.get("test_begin"));
    r.test_end = parse_timestamp(config.get("test_end"));
    if (r.train_end < r.train_begin || r.test_end < r.test_begin)
      fail(ErrorKind::config, "split ranges are out of order");
    return r;
  }
  if (given != 0) fail(ErrorKind::config, "train_begin, train_end, test_begin and test_end must be given together");
  Timestamp lo = std::numeric_limits<Timestamp>::max();
  Timestamp hi = std::numeric_limits<Timestamp>::min();
  for (const auto& s : series) {
    if (s.timestamps.empty()) continue;
    lo = std::min(lo, s.timestamps.front());
    hi = std::max(hi, s.timestamps.back());
  }
  if (lo > hi) fail(ErrorKind::data, "no observations");
  const double frac = config.get_real("train_fraction");
  if (!(frac > 0.0 && frac < 1.0)) fail(ErrorKind::config, "train_fraction must lie in (0, 1)");
  const auto boundary = lo + static_cast<Timestamp>(std::floor(frac * static_cast<double>(hi - lo)));
  r.train_begin = lo;
  r.train_end = boundary;
  r.test_begin = boundary + 1;
  r.test_end = hi;
  return r;
}

Dataset load_dataset(const RunConfig& config, std::ostream& log) {
  Dataset d;
  const TransformKind kind = parse_transform(config.get("transform"));
  const std::string source = config.get("data_source");
  if (source == "csv") {
    const std::string path = config.get("data_path");
    if (path.empty()) fail(ErrorKind::config, "data_path is required for data_source = csv");
    if (!fs::exists(path)) fail(ErrorKind::data, "data file not found: " + path);
    d.series = read_series_csv(path, kind != TransformKind::identity);
  } else if (source == "synthetic") {
    d.series = generate(synthetic_spec(config));
  } else {
    fail(ErrorKind::config, "data_source must be csv or synthetic");
  }
  if (d.series.empty()) fail(ErrorKind::data, "no series loaded");
  d.split = resolve_split(config, d.series);

  WindowOptions opt;
  opt.input_length = config.get_count("input_length");
  opt.horizon = config.get_count("horizon");
  opt.train_stride = config.get_count("train_stride");
  opt.test_stride = config.get_count("test_stride");
  opt.validation_fraction = config.get_real("validation_fraction");
  opt.seed = config.get_seed("seed");
  d.windows = make_windows(d.series, opt, d.split);
  for (const auto& w : d.windows.warnings) log << "warning: " << w << "\n";

  d.transform.kind = kind;
  if (kind == TransformKind::normalized_returns) {
    const Moments m = fit_return_normalization(d.series, d.split);
    d.transform.mu = m.mean;
    d.transform.sigma = m.stddev;
  }
  log << "windows: train " << d.windows.train.size() << ", validation " << d.windows.validation.size() << ", test "
      << d.windows.test.size() << "\n";
  return d;
}

std::string checkpoint_path(const RunConfig& config) {
  const std::string& c = config.get("checkpoint");
  if (!c.empty()) return c;
  return (fs::path(config.get("out_dir")) / "model.ckpt").string();
}

std::vector<WindowSample> limited(const std::vector<WindowSample>& windows, std::size_t max) {
  if (max == 0 || windows.size() <= max) return windows;
  // Evenly spaced subset, deterministic.
  std::vector<WindowSample> out;
  for (std::size_t i = 0; i < max; ++i) out.push_back(windows[i * windows.size() / max]);
  return out;
}

std::vector<Statistic> statistics_of(const RunConfig& config) {
  std::vector<Statistic> out;
  for (const auto& s : config.get_list("statistics")) out.push_back(Statistic::parse(s));
  if (out.empty()) fail(ErrorKind::config, "statistics list is empty");
  return out;
}

void check_horizon(const RunConfig& config, const Statistic& stat, const Observation& obs) {
  const std::size_t m = config.get_count("horizon");
  if (stat.horizon > m)
    fail(ErrorKind::config, "statistic " + stat.to_string() + " exceeds the configured horizon " + std::to_string(m));
  if (!obs.trivial() && obs.index > m) fail(ErrorKind::config, "observation index exceeds the configured horizon");
}

int year_of(Timestamp t) { return std::stoi(format_timestamp(t).substr(0, 4)); }

// --- train -----------------------------------------------------------------------

void cmd_train(const RunConfig& config, std::ostream& log) {
  const Dataset d = load_dataset(config, log);
  if (d.windows.train.empty()) fail(ErrorKind::data, "no training windows");
  if (d.windows.validation.empty()) fail(ErrorKind::data, "no validation windows");
  const Workspace w = prepare(config);

  TrainDataset data;
  for (const auto& s : d.windows.train) data.train.push_back(teacher_forcing(d.transform.encode_training(s.input, s.target)));
  for (const auto& s : d.windows.validation)
    data.validation.push_back(teacher_forcing(d.transform.encode_training(s.input, s.target)));

  TrainConfig tc;
  tc.learning_rate = config.get_real("learning_rate");
  tc.batch_size = config.get_count("batch_size");
  tc.patience = config.get_count("patience");
  tc.max_epochs = config.get_count("max_epochs");
  tc.optimizer = parse_optimizer(config.get("optimizer"));
  tc.clip_norm = config.get_real("clip_norm");
  tc.seed = config.get_seed("seed");

  const auto layers = static_cast<int>(config.get_count("layers"));
  const auto hidden = static_cast<int>(config.get_count("hidden"));
  if (layers < 1 || hidden < 1) fail(ErrorKind::config, "layers and hidden must be at least 1");
  const ForecastModel init = ForecastModel::random(layers, hidden, mix_seed(tc.seed, 0x1417));
  const TrainResult result = train(init, data, tc, [&](const EpochRecord& r) {
    log << "epoch " << r.epoch << " train " << r.train_nll << " validation " << r.validation_nll << "\n";
  });

  std::ofstream trace = open_out(w.out / "train_trace.csv");
  trace << "epoch,train_nll,validation_nll\n";
  for (const auto& r : result.trace) trace << r.epoch << ',' << r.train_nll << ',' << r.validation_nll << '\n';
  save_checkpoint(result.model, checkpoint_path(config));
  log << "best epoch " << result.best_epoch << ", checkpoint " << checkpoint_path(config) << "\n";
}

// --- forecast ----------------------------------------------------------------------

void cmd_forecast(const RunConfig& config, std::ostream& log) {
  const std::vector<Statistic> stats = statistics_of(config);
  const Observation obs = Observation::parse(config.get("observation"));
  for (const auto& s : stats) check_horizon(config, s, obs);
  const std::size_t samples = config.get_count("samples");
  if (samples < 1) fail(ErrorKind::config, "samples must be at least 1");
  const double level = config.get_real("confidence");
  const ForecastModel model = load_checkpoint(checkpoint_path(config));
  const Dataset d = load_dataset(config, log);
  const Workspace w = prepare(config);
  const std::uint64_t seed = config.get_seed("seed");

  std::ofstream csv = open_out(w.out / "forecast.csv");
  csv << "window,statistic,estimate,standard_error,ci_low,ci_high,samples\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& win : limited(d.windows.test, config.get_count("max_windows"))) {
    const ConditionedModel cond = ConditionedModel::make(model, d.transform, win.input);
    for (const auto& stat : stats) {
      const Estimate e = estimate_expectation(cond, stat, obs, samples, seed);
      double lo = std::numeric_limits<double>::quiet_NaN();
      double hi = lo;
      if (e.has_standard_error()) {
        const Interval ci = confidence_interval(e.value, e.standard_error, e.samples, level);
        lo = ci.low;
        hi = ci.high;
      }
      csv << win.id() << ',' << stat.to_string() << ',' << fmt(e.value) << ',' << fmt(e.standard_error) << ','
          << fmt(lo) << ',' << fmt(hi) << ',' << e.samples << '\n';
      nlohmann::json r{{"window", win.id()}, {"statistic", stat.to_string()}, {"estimate", e.value},
                       {"samples", e.samples}};
      if (e.has_standard_error()) {
        r["standard_error"] = e.standard_error;
        r["ci"] = {lo, hi};
      }
      rows.push_back(std::move(r));
    }
  }
  std::ofstream json = open_out(w.out / "forecast.json");
  json << nlohmann::json{{"observation", obs.to_string()}, {"rows", rows}}.dump(2) << '\n';
  log << "forecast rows: " << rows.size() << "\n";
}

// --- attack ---------------------------------------------------------------------------

AttackConfig attack_config(const RunConfig& config) {
  AttackConfig ac = AttackConfig::preset(config.get("attack_preset"));
  if (!config.get("attack_c_grid").empty()) ac.c_grid = config.get_reals("attack_c_grid");
  if (!config.get("attack_learning_rate").empty()) ac.learning_rate = config.get_real("attack_learning_rate");
  if (!config.get("attack_optimizer").empty()) ac.optimizer = parse_optimizer(config.get("attack_optimizer"));
  ac.iterations = config.get_count("attack_iterations");
  ac.samples = config.get_count("attack_samples");
  ac.eval_samples = config.get_count("attack_eval_samples");
  ac.fresh_noise = config.get_bool("attack_fresh_noise");
  ac.keep_traces = config.get_bool("attack_traces");
  ac.confidence = config.get_real("confidence");
  ac.workers = std::max<std::size_t>(1, config.get_count("workers"));
  ac.seed = config.get_seed("seed");
  return ac;
}

AttackTarget resolve_target(const RunConfig& config, const Query& q, const WindowSample& win, double tau,
                            const AttackConfig& ac) {
  const std::string kind = config.get("attack_target");
  if (kind == "explicit")
    return AttackTarget::explicit_target(config.get_real("attack_target_value"), config.get_real("attack_tolerance"));
  if (kind == "over" || kind == "under") {
    if (q.stat.kind != StatisticKind::coordinate)
      fail(ErrorKind::config, "consumption targets need a coordinate statistic");
    return consumption_target(*q.model, q.transform, q.x, q.stat.horizon, kind == "over", ac.eval_samples,
                              mix_seed(ac.seed, 0xC0));
  }
  AttackTarget t;
  t.tau = tau;
  if (kind == "trading") {
    t.kind = TargetKind::trading_reversal;
    t.reference = q.stat.evaluate(win.target, win.input.back());
    t.t = trading_target(tau, config.get_real("attack_alpha"), t.reference);
    return t;
  }
  const auto [buy, sell] = classification_targets(tau, config.get_real("attack_lambda"));
  bool to_buy = false;
  if (kind == "buy") {
    to_buy = true;
  } else if (kind == "sell") {
    to_buy = false;
  } else if (kind == "classification") {
    // Push toward the opposite side of tau from the current estimate.
    const CRun base = evaluate_candidate(q, std::vector<double>(q.x.size(), 0.0), 0.0, ac);
    to_buy = base.estimate <= tau;
  } else {
    fail(ErrorKind::config, "unknown attack_target '" + kind + "'");
  }
  t.kind = to_buy ? TargetKind::classification_buy : TargetKind::classification_sell;
  t.t = to_buy ? buy : sell;
  return t;
}

void cmd_attack(const RunConfig& config, std::ostream& log) {
  const Statistic stat = config.get("attack_statistic").empty() ? statistics_of(config).front()
                                                                : Statistic::parse(config.get("attack_statistic"));
  const Observation obs = Observation::parse(config.get("observation"));
  check_horizon(config, stat, obs);
  AttackConfig ac = attack_config(config);
  ac.validate();
  std::vector<EstimatorKind> estimators;
  for (const auto& e : config.get_list("estimators")) estimators.push_back(parse_estimator(e));
  if (estimators.empty()) fail(ErrorKind::config, "estimators list is empty");
  for (EstimatorKind e : estimators)
    if (e == EstimatorKind::score_function && !obs.trivial())
      fail(ErrorKind::unsupported, "the score-function estimator supports only the trivially-true observation");
  std::vector<double> epsilons = config.get_reals("attack_epsilons");
  if (epsilons.empty()) fail(ErrorKind::config, "attack_epsilons is empty");
  std::sort(epsilons.begin(), epsilons.end());

  const ForecastModel model = load_checkpoint(checkpoint_path(config));
  const Dataset d = load_dataset(config, log);
  if (d.windows.test.empty()) fail(ErrorKind::data, "no test windows");
  const Workspace w = prepare(config);

  // tau: average ground-truth statistic over the test windows.
  double tau = 0.0;
  if (stat.uses_reference()) {
    for (const auto& win : d.windows.test) tau += stat.evaluate(win.target, win.input.back());
    tau /= static_cast<double>(d.windows.test.size());
  }

  std::vector<AttackOutcome> outcomes;
  nlohmann::json windows = nlohmann::json::array();
  std::ofstream traces;
  if (ac.keep_traces) {
    traces = open_out(w.out / "attack_traces.csv");
    traces << "window,estimator,epsilon,iteration,c,objective,norm,phi\n";
  }
  const auto suite = limited(d.windows.test, config.get_count("attack_max_windows"));
  for (std::size_t wi = 0; wi < suite.size(); ++wi) {
    const WindowSample& win = suite[wi];
    Query q;
    q.model = &model;
    q.transform = d.transform;
    q.x = win.input;
    q.stat = stat;
    q.obs = obs;
    q.horizon = config.get_count("horizon");
    AttackConfig wc = ac;
    wc.seed = mix_seed(ac.seed, wi);
    const AttackTarget target = resolve_target(config, q, win, tau, wc);
    nlohmann::json entry{{"window", win.id()}, {"target", target.t}, {"target_kind", to_string(target.kind)},
                         {"tau", target.tau}, {"reference", target.reference}};
    auto& results = entry["results"] = nlohmann::json::array();
    for (EstimatorKind e : estimators) {
      wc.estimator = e;
      const auto per_eps = pgd_attack_multi(q, target, wc, epsilons);
      for (const AttackResult& r : per_eps) {
        results.push_back(nlohmann::json::parse(result_to_json(r, false)));
        AttackOutcome o;
        o.window_id = win.id();
        o.period = std::to_string(year_of(win.target_begin));
        o.estimator = to_string(e);
        o.epsilon = r.epsilon;
        o.success = r.success;
        const double ref = (target.kind == TargetKind::consumption_over || target.kind == TargetKind::consumption_under)
                               ? target.reference
                               : r.baseline;
        o.relative_shift = ref != 0.0 ? (r.achieved - ref) / std::abs(ref) : 0.0;
        outcomes.push_back(o);
        if (ac.keep_traces) {
          for (const CRun& run : r.runs)
            for (const TracePoint& p : run.trace)
              traces << win.id() << ',' << to_string(e) << ',' << r.epsilon << ',' << p.iteration << ',' << run.c
                     << ',' << p.objective << ',' << p.norm << ',' << p.phi << '\n';
        }
      }
    }
    log << "attacked " << win.id() << " (" << (wi + 1) << "/" << suite.size() << ")\n";
    windows.push_back(std::move(entry));
  }
  std::ofstream json = open_out(w.out / "attack_results.json");
  json << nlohmann::json{{"statistic", stat.to_string()}, {"observation", obs.to_string()}, {"tau", tau},
                         {"windows", windows}}
              .dump(2)
       << '\n';
  const auto rows = attack_curves(outcomes);
  std::ofstream curves = open_out(w.out / "attack_curves.csv");
  write_curves_csv(curves, rows);
  for (const auto& r : rows)
    log << r.estimator << " eps " << r.epsilon << ": success " << r.success_rate << " (" << r.count << ")\n";
}

// --- backtest -----------------------------------------------------------------------

void cmd_backtest(const RunConfig& config, std::ostream& log) {
  const std::size_t h = config.get_count("backtest_h");
  const std::size_t k = config.get_count("backtest_k");
  const std::size_t samples = config.get_count("backtest_samples");
  if (h < 1 || h > config.get_count("horizon")) fail(ErrorKind::config, "backtest_h must lie within the horizon");
  if (k < 1 || samples < 1) fail(ErrorKind::config, "backtest_k and backtest_samples must be at least 1");
  const ForecastModel model = load_checkpoint(checkpoint_path(config));
  const Dataset d = load_dataset(config, log);
  if (d.windows.test.empty()) fail(ErrorKind::data, "no test windows");
  const Workspace w = prepare(config);
  const std::uint64_t seed = config.get_seed("seed");

  std::vector<std::pair<std::string, BacktestReport>> reports;
  auto entries = backtest_entries(model, d.transform, d.windows.test, h, samples, seed);
  reports.emplace_back("model", backtest_scores(entries, k, h));
  reports.emplace_back("oracle", backtest_oracle(entries, k, h));

  const std::string attack_path = config.get("backtest_attack_results");
  if (!attack_path.empty()) {
    std::ifstream in(attack_path);
    if (!in) fail(ErrorKind::data, "cannot read attack results " + attack_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
      fail(ErrorKind::data, std::string("malformed attack results: ") + e.what());
    }
    const std::string est = config.get("backtest_attack_estimator");
    const double eps = config.get_real("backtest_attack_epsilon");
    std::map<std::string, std::vector<double>> deltas;
    for (const auto& win : j.at("windows"))
      for (const auto& r : win.at("results"))
        if (r.at("estimator") == est && r.at("epsilon").get<double>() == eps)
          deltas[win.at("window").get<std::string>()] = r.at("delta").get<std::vector<double>>();
    std::vector<WindowSample> attacked = d.windows.test;
    std::size_t applied = 0;
    for (auto& win : attacked) {
      auto it = deltas.find(win.id());
      if (it == deltas.end()) continue;
      if (it->second.size() != win.input.size()) fail(ErrorKind::data, "attack delta length mismatch for " + win.id());
      for (std::size_t i = 0; i < win.input.size(); ++i) win.input[i] += it->second[i];
      ++applied;
    }
    auto post = backtest_entries(model, d.transform, attacked, h, samples, seed);
    // Realized returns stay those of the unperturbed series.
    for (std::size_t i = 0; i < post.size(); ++i) post[i].realized = entries[i].realized;
    reports.emplace_back("post_attack", backtest_scores(post, k, h));
    log << "applied " << applied << " attack perturbations\n";
  }

  std::ofstream csv = open_out(w.out / "backtest.csv");
  csv << "strategy,h,k,mean,std,steps,shortfall_steps\n";
  std::ofstream steps = open_out(w.out / "backtest_steps.csv");
  steps << "strategy,time,return,shortfall\n";
  for (const auto& [name, r] : reports) {
    csv << name << ',' << r.h << ',' << r.k << ',' << r.mean << ',' << r.stddev << ',' << r.step_returns.size() << ','
        << r.shortfall_steps << '\n';
    for (std::size_t i = 0; i < r.times.size(); ++i)
      steps << name << ',' << format_timestamp(r.times[i]) << ',' << r.step_returns[i] << ','
            << (r.shortfall[i] ? 1 : 0) << '\n';
    log << name << ": mean " << r.mean << " std " << r.stddev << " shortfall steps " << r.shortfall_steps << "\n";
  }
}

// --- synth ------------------------------------------------------------------------------

void cmd_synth(const RunConfig& config, std::ostream& log) {
  const SyntheticSpec spec = synthetic_spec(config);
  const auto series = generate(spec);
  const Workspace w = prepare(config);
  write_series_csv((w.out / "data.csv").string(), series);
  std::ofstream manifest = open_out(w.out / "manifest.txt");
  manifest << synthetic_manifest(spec);
  log << "wrote " << series.size() << " series of length " << spec.length << "\n";
}

// --- grad-check ---------------------------------------------------------------------------

void cmd_grad_check(const RunConfig& config, std::ostream& log) {
  const std::uint64_t seed = config.get_seed("seed");
  const auto hidden = static_cast<int>(config.get_count("gc_hidden"));
  const std::size_t n = config.get_count("gc_input_length");
  const std::size_t m = config.get_count("gc_horizon");
  const std::size_t trials = config.get_count("gc_trials");
  const std::size_t samples = config.get_count("gc_samples");
  if (hidden < 1 || n < 1 || m < 1 || trials < 2 || samples < 1) fail(ErrorKind::config, "grad-check sizes too small");
  const Workspace w = prepare(config);

  ForecastModel model = ForecastModel::random(1, hidden, seed);
  Rng rng = make_rng(seed, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> seq(n + m);
  for (double& v : seq) v = normal(rng);

  // Parameter gradient of the teacher-forced NLL against central differences.
  const TeacherForcedSample sample = teacher_forcing(seq);
  const std::vector<TeacherForcedSample> batch{sample};
  const std::vector<double> analytic = nll_gradient(model, batch);
  std::vector<double> params = model.flatten();
  double nll_error = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double step = 1e-5;
    const double saved = params[i];
    params[i] = saved + step;
    model.assign(params);
    const double up = nll(model, batch);
    params[i] = saved - step;
    model.assign(params);
    const double down = nll(model, batch);
    params[i] = saved;
    model.assign(params);
    const double fd = (up - down) / (2 * step);
    nll_error = std::max(nll_error, std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), 1e-8}));
  }

  // Reparametrization gradient against common-random-number differences.
  Query q;
  q.model = &model;
  q.x.assign(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(n));
  q.stat = Statistic::coordinate(m);
  q.horizon = m;
  const std::vector<double> zero(n, 0.0);
  const GradientEstimate rp = reparam_gradient(q, zero, samples, seed);
  double reparam_error = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d = zero;
    const double step = 1e-5;
    d[i] = step;
    const double up = reparam_estimate(q, d, samples, seed);
    d[i] = -step;
    const double down = reparam_estimate(q, d, samples, seed);
    const double fd = (up - down) / (2 * step);
    reparam_error =
        std::max(reparam_error, std::abs(fd - rp.grad[i]) / std::max({std::abs(fd), std::abs(rp.grad[i]), 1e-6}));
  }

  const AgreementReport agree = estimator_agreement(q, trials, samples, seed);
  const bool ok = nll_error < 1e-4 && reparam_error < 1e-3;
  nlohmann::json j{{"nll_max_relative_error", nll_error},
                   {"reparam_max_relative_error", reparam_error},
                   {"agreement",
                    {{"trials", agree.trials},
                     {"samples", agree.samples},
                     {"cosine", agree.cosine},
                     {"fraction_within_3se", agree.fraction_within_3se},
                     {"variance_score", agree.variance_score},
                     {"variance_reparam", agree.variance_reparam},
                     {"mean_score", agree.mean_score},
                     {"mean_reparam", agree.mean_reparam}}},
                   {"passed", ok}};
  std::ofstream out = open_out(w.out / "grad_check.json");
  out << j.dump(2) << '\n';
  log << "nll gradient max relative error " << nll_error << "\n"
      << "reparametrization gradient max relative error " << reparam_error << "\n"
      << "estimator agreement cosine " << agree.cosine << ", within 3 SE " << agree.fraction_within_3se << "\n";
  if (!ok) fail(ErrorKind::numeric, "gradient check failed");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"train", "forecast", "attack", "backtest", "synth", "grad-check"};
  return names;
}

SyntheticSpec synthetic_spec(const RunConfig& config) {
  SyntheticSpec s;
  const std::string kind = config.get("synth_kind");
  if (kind == "ar1") s.kind = SyntheticKind::ar1;
  else if (kind == "seasonal") s.kind = SyntheticKind::seasonal;
  else fail(ErrorKind::config, "synth_kind must be ar1 or seasonal");
  s.a = config.get_real("synth_a");
  s.b = config.get_real("synth_b");
  s.sigma = config.get_real("synth_sigma");
  s.x0 = config.get_real("synth_x0");
  s.price_start = config.get_real("synth_price_start");
  s.level = config.get_real("synth_level");
  s.amplitude = config.get_real("synth_amplitude");
  s.period = config.get_real("synth_period");
  s.noise = config.get_real("synth_noise");
  s.series_count = config.get_count("synth_series");
  s.length = config.get_count("synth_length");
  s.seed = config.get_seed("seed");
  s.start = parse_timestamp(config.get("synth_start"));
  s.step_seconds = config.get_int("synth_step_seconds");
  if (s.step_seconds <= 0) fail(ErrorKind::config, "synth_step_seconds must be positive");
  if (s.kind == SyntheticKind::ar1 && !(s.sigma >= 0.0)) fail(ErrorKind::config, "synth_sigma must be non-negative");
  return s;
}

void run_command(const std::string& name, const RunConfig& config, std::ostream& log) {
  if (name == "train") return cmd_train(config, log);
  if (name == "forecast") return cmd_forecast(config, log);
  if (name == "attack") return cmd_attack(config, log);
  if (name == "backtest") return cmd_backtest(config, log);
  if (name == "synth") return cmd_synth(config, log);
  if (name == "grad-check") return cmd_grad_check(config, log);
  fail(ErrorKind::config, "unknown command '" + name + "'");
}

}  // namespace pfa
