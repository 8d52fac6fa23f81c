#include "pfa/attack.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "pfa/error.hpp"
#include "pfa/random.hpp"

namespace pfa {

namespace {

constexpr std::uint64_t kEvalStream = 0x5eed'e7a1ULL;

std::vector<double> add(std::span<const double> x, std::span<const double> delta) {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta[i];
  return out;
}

CRun optimise_one(const Query& q, double target, double c, std::uint64_t run_seed, const AttackConfig& config) {
  const std::size_t n = q.x.size();
  CRun run;
  run.c = c;
  run.delta.assign(n, 0.0);
  Optimizer opt(config.optimizer, config.learning_rate, n);
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const std::uint64_t s = config.fresh_noise ? mix_seed(run_seed, it) : run_seed;
    ObjectiveValue f;
    try {
      f = objective(q, run.delta, target, c, config.estimator, config.samples, s);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::unsupported) throw;
      run.aborted = true;
      run.abort_reason = e.what();
      break;
    }
    if (!std::isfinite(f.value)) {
      run.aborted = true;
      run.abort_reason = "non-finite objective";
      break;
    }
    opt.step(run.delta, f.grad);
    if (config.positive_inputs) project(run.delta, q.x, config.positivity_floor);
    ++run.iterates;
    if (config.on_iterate) config.on_iterate(c, it, run.delta);
    for (std::size_t i = 0; i < n; ++i) {
      if (config.positive_inputs && !(q.x[i] + run.delta[i] > 0.0)) {
        ++run.positivity_violations;
        break;
      }
    }
    if (config.keep_traces) run.trace.push_back({it, f.value, f.norm, f.phi});
  }
  return run;
}

}  // namespace

// --- configuration ------------------------------------------------------------

AttackConfig AttackConfig::preset(const std::string& name) {
  AttackConfig c;
  if (name == "financial") return c;
  if (name == "electricity") {
    c.c_grid = {0.1, 0.2, 0.3, 0.5, 0.7, 1, 2, 3, 5, 7, 10, 20, 30, 50, 70, 100, 200, 300};
    c.learning_rate = 0.01;
    c.optimizer = OptimizerKind::adam;
    return c;
  }
  fail(ErrorKind::config, "unknown attack preset '" + name + "'");
}

void AttackConfig::validate() const {
  if (c_grid.empty()) fail(ErrorKind::config, "c grid is empty");
  for (double c : c_grid)
    if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorKind::config, "c grid values must be positive");
  if (iterations < 1) fail(ErrorKind::config, "attack needs at least one iteration");
  if (samples < 1 || eval_samples < 2) fail(ErrorKind::config, "attack sample counts too small");
  if (!(learning_rate > 0.0)) fail(ErrorKind::config, "attack learning rate must be positive");
  if (!(epsilon >= 0.0)) fail(ErrorKind::config, "epsilon must be non-negative");
  if (!(confidence > 0.0 && confidence < 1.0)) fail(ErrorKind::config, "confidence must lie in (0, 1)");
}

TargetKind parse_target_kind(const std::string& name) {
  if (name == "buy" || name == "classification_buy") return TargetKind::classification_buy;
  if (name == "sell" || name == "classification_sell") return TargetKind::classification_sell;
  if (name == "trading" || name == "trading_reversal") return TargetKind::trading_reversal;
  if (name == "over" || name == "consumption_over") return TargetKind::consumption_over;
  if (name == "under" || name == "consumption_under") return TargetKind::consumption_under;
  if (name == "explicit") return TargetKind::explicit_value;
  fail(ErrorKind::config, "unknown target construction '" + name + "'");
}

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::classification_buy: return "classification_buy";
    case TargetKind::classification_sell: return "classification_sell";
    case TargetKind::trading_reversal: return "trading_reversal";
    case TargetKind::consumption_over: return "consumption_over";
    case TargetKind::consumption_under: return "consumption_under";
    case TargetKind::explicit_value: return "explicit";
  }
  return "?";
}

// --- targets ---------------------------------------------------------------------

std::pair<double, double> classification_targets(double tau, double lambda) {
  if (!(lambda >= 0.0)) fail(ErrorKind::invalid_argument, "lambda must be non-negative");
  return {tau + lambda, tau - lambda};
}

double trading_target(double tau, double alpha, double chi_truth) { return tau - alpha * (chi_truth - tau); }

AttackTarget consumption_target(const ForecastModel& model, const SeriesTransform& transform,
                                std::span<const double> x, std::size_t h, bool over, std::size_t samples,
                                std::uint64_t seed) {
  const ConditionedModel cond = ConditionedModel::make(model, transform, x);
  const Estimate y = estimate_expectation(cond, Statistic::coordinate(h), Observation::none(), samples, seed);
  AttackTarget a;
  a.kind = over ? TargetKind::consumption_over : TargetKind::consumption_under;
  a.reference = y.value;
  a.t = (over ? 1.5 : 0.5) * y.value;
  return a;
}

// --- norm and projection ---------------------------------------------------------

double weighted_norm(std::span<const double> delta, std::span<const double> x) {
  if (delta.size() != x.size()) fail(ErrorKind::invalid_argument, "perturbation and input lengths differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) fail(ErrorKind::domain, "weighted norm undefined for a zero input value");
    const double r = delta[i] / x[i];
    acc += r * r;
  }
  return std::sqrt(acc);
}

std::vector<double> weighted_norm_gradient(std::span<const double> delta, std::span<const double> x) {
  const double norm = weighted_norm(delta, x);
  std::vector<double> g(x.size(), 0.0);
  if (norm == 0.0) return g;
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = delta[i] / (x[i] * x[i]) / norm;
  return g;
}

void project(std::span<double> delta, std::span<const double> x, double floor) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) fail(ErrorKind::domain, "positivity constraint needs positive inputs");
    delta[i] = std::max(delta[i], (floor - 1.0) * x[i]);
  }
}

ObjectiveValue objective(const Query& q, std::span<const double> delta, double target, double c,
                         EstimatorKind kind, std::size_t samples, std::uint64_t seed) {
  ObjectiveValue f;
  f.norm = weighted_norm(delta, q.x);
  f.grad = weighted_norm_gradient(delta, q.x);
  if (c == 0.0) {
    f.value = f.norm;
    f.estimate = reparam_estimate(q, delta, samples, seed);
    f.phi = (f.estimate - target) * (f.estimate - target);
    return f;
  }
  const GradientEstimate g = estimate_gradient(kind, q, delta, samples, seed);
  f.estimate = g.value;
  const double diff = g.value - target;
  f.phi = diff * diff;
  f.value = f.norm + c * f.phi;
  const double scale = c * 2.0 * diff;
  for (std::size_t i = 0; i < f.grad.size(); ++i) f.grad[i] += scale * g.grad[i];
  return f;
}

// --- search ----------------------------------------------------------------------

CRun evaluate_candidate(const Query& q, std::span<const double> delta, double target, const AttackConfig& config) {
  CRun r;
  r.delta.assign(delta.begin(), delta.end());
  r.norm = weighted_norm(delta, q.x);
  const std::vector<double> xp = add(q.x, delta);
  const ConditionedModel cond = ConditionedModel::make(*q.model, q.transform, xp);
  const Estimate e =
      estimate_expectation(cond, q.stat, q.obs, config.eval_samples, mix_seed(config.seed, kEvalStream));
  r.estimate = e.value;
  r.standard_error = e.standard_error;
  r.phi = (e.value - target) * (e.value - target);
  return r;
}

std::vector<CRun> run_c_grid(const Query& q, double target, const AttackConfig& config) {
  config.validate();
  if (!q.obs.trivial() && config.estimator == EstimatorKind::score_function)
    fail(ErrorKind::unsupported, "the score-function estimator supports only the trivially-true observation");
  const std::size_t k = config.c_grid.size();
  std::vector<CRun> runs(k);
  auto work = [&](std::size_t i) {
    CRun r = optimise_one(q, target, config.c_grid[i], mix_seed(config.seed, i), config);
    if (!r.aborted) {
      try {
        CRun scored = evaluate_candidate(q, r.delta, target, config);
        r.norm = scored.norm;
        r.estimate = scored.estimate;
        r.standard_error = scored.standard_error;
        r.phi = scored.phi;
      } catch (const Error& e) {
        r.aborted = true;
        r.abort_reason = e.what();
      }
    }
    runs[i] = std::move(r);
  };
  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, k);
  if (workers == 1) {
    for (std::size_t i = 0; i < k; ++i) work(i);
    return runs;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < k; i = next++) work(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return runs;
}

std::pair<std::size_t, bool> select_c(std::span<const CRun> runs, double epsilon) {
  if (runs.empty()) fail(ErrorKind::invalid_argument, "no candidates to select from");
  std::size_t best = runs.size();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const CRun& r = runs[i];
    if (r.aborted || !(r.norm <= epsilon)) continue;
    if (best == runs.size() || r.phi < runs[best].phi || (r.phi == runs[best].phi && r.c < runs[best].c)) best = i;
  }
  if (best != runs.size()) return {best, true};
  best = runs.size();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const CRun& r = runs[i];
    if (r.aborted) continue;
    if (best == runs.size() || r.norm < runs[best].norm || (r.norm == runs[best].norm && r.c < runs[best].c)) best = i;
  }
  if (best == runs.size()) best = 0;
  return {best, false};
}

bool attack_succeeded(const AttackTarget& target, double estimate, double ci_low, double ci_high) {
  switch (target.kind) {
    case TargetKind::classification_buy: return ci_low > target.tau;
    case TargetKind::classification_sell: return ci_high < target.tau;
    case TargetKind::trading_reversal: return (estimate - target.tau) * (target.reference - target.tau) < 0.0;
    case TargetKind::consumption_over: return estimate >= (1.0 + target.min_shift) * target.reference;
    case TargetKind::consumption_under: return estimate <= (1.0 - target.min_shift) * target.reference;
    case TargetKind::explicit_value: return std::abs(estimate - target.t) <= target.tolerance;
  }
  return false;
}

AttackResult finalize(const Query& q, std::span<const CRun> runs, const AttackTarget& target, double epsilon,
                      const AttackConfig& config) {
  (void)q;
  const auto [index, admissible] = select_c(runs, epsilon);
  const CRun& r = runs[index];
  AttackResult out;
  out.delta = r.delta;
  out.norm = r.norm;
  out.achieved = r.estimate;
  out.standard_error = r.standard_error;
  const Interval ci = confidence_interval(r.estimate, r.standard_error, config.eval_samples, config.confidence);
  out.ci_low = ci.low;
  out.ci_high = ci.high;
  out.phi = r.phi;
  out.chosen_c = r.c;
  out.epsilon = epsilon;
  out.estimator = config.estimator;
  out.success = admissible && out.norm <= epsilon && attack_succeeded(target, out.achieved, ci.low, ci.high);
  for (const CRun& c : runs)
    if (c.c == 0.0 && c.iterates == 0) out.baseline = c.estimate;
  out.runs.assign(runs.begin(), runs.end());
  return out;
}

std::vector<AttackResult> pgd_attack_multi(const Query& q, const AttackTarget& target, const AttackConfig& config,
                                           std::span<const double> epsilons) {
  std::vector<CRun> runs;
  runs.push_back(evaluate_candidate(q, std::vector<double>(q.x.size(), 0.0), target.t, config));
  for (CRun& r : run_c_grid(q, target.t, config)) runs.push_back(std::move(r));
  std::vector<AttackResult> out;
  for (double eps : epsilons) out.push_back(finalize(q, runs, target, eps, config));
  return out;
}

AttackResult pgd_attack(const Query& q, const AttackTarget& target, const AttackConfig& config) {
  const double eps[] = {config.epsilon};
  return pgd_attack_multi(q, target, config, eps).front();
}

// --- serialization ----------------------------------------------------------------

std::string result_to_json(const AttackResult& result, bool include_traces) {
  nlohmann::json j;
  j["delta"] = result.delta;
  j["norm"] = result.norm;
  j["achieved"] = result.achieved;
  j["standard_error"] = result.standard_error;
  j["ci"] = {result.ci_low, result.ci_high};
  j["phi"] = result.phi;
  j["success"] = result.success;
  j["chosen_c"] = result.chosen_c;
  j["epsilon"] = result.epsilon;
  j["baseline"] = result.baseline;
  j["estimator"] = to_string(result.estimator);
  if (include_traces) {
    auto& traces = j["traces"] = nlohmann::json::array();
    for (const CRun& r : result.runs) {
      nlohmann::json t;
      t["c"] = r.c;
      t["norm"] = r.norm;
      t["estimate"] = r.estimate;
      t["phi"] = r.phi;
      t["aborted"] = r.aborted;
      if (r.aborted) t["abort_reason"] = r.abort_reason;
      auto& pts = t["iterations"] = nlohmann::json::array();
      for (const TracePoint& p : r.trace) pts.push_back({p.iteration, p.objective, p.norm, p.phi});
      traces.push_back(std::move(t));
    }
  }
  return j.dump(2);
}

void write_trace_csv(std::ostream& out, const AttackResult& result) {
  out << "iteration,c,objective,norm,phi\n";
  out.precision(17);
  for (const CRun& r : result.runs)
    for (const TracePoint& p : r.trace)
      out << p.iteration << ',' << r.c << ',' << p.objective << ',' << p.norm << ',' << p.phi << '\n';
}

}  // namespace pfa
