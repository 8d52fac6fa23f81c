#pragma once

// Adversarial perturbations of the conditioning input: minimise
// weighted_norm(delta, x) + c * (E[stat | x + delta, obs] - t)^2 by projected
// gradient descent over a grid of c, then pick the best admissible iterate.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pfa/estimators.hpp"
#include "pfa/optim.hpp"

namespace pfa {

struct AttackConfig {
  double epsilon = 0.1;
  std::vector<double> c_grid{1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  double learning_rate = 0.001;
  std::size_t iterations = 1000;
  std::size_t samples = 50;  // L inside each gradient evaluation
  EstimatorKind estimator = EstimatorKind::reparametrization;
  OptimizerKind optimizer = OptimizerKind::rmsprop;
  std::uint64_t seed = 0;
  bool fresh_noise = true;          // resample the noise at every iteration
  std::size_t eval_samples = 10000;  // final iterates are scored with this many samples
  double confidence = 0.95;
  double positivity_floor = 1e-6;  // x_i + delta_i >= floor * x_i
  bool positive_inputs = true;
  bool keep_traces = true;
  std::size_t workers = 1;
  /// Sees every projected iterate as (c, iteration, delta). Called from the
  /// worker threads when workers > 1.
  std::function<void(double, std::size_t, std::span<const double>)> on_iterate;

  /// "financial" or "electricity".
  static AttackConfig preset(const std::string& name);
  void validate() const;
};

enum class TargetKind {
  classification_buy,
  classification_sell,
  trading_reversal,
  consumption_over,
  consumption_under,
  explicit_value,
};

TargetKind parse_target_kind(const std::string& name);
std::string to_string(TargetKind kind);

struct AttackTarget {
  double t = 0.0;
  TargetKind kind = TargetKind::explicit_value;
  double tau = 0.0;        // classification / trading threshold
  double reference = 0.0;  // ground-truth statistic (trading) or unperturbed y* (consumption)
  double tolerance = 0.0;  // explicit targets: success iff |E - t| <= tolerance
  double min_shift = 0.2;  // consumption: relative shift counted as success

  static AttackTarget explicit_target(double t, double tolerance) {
    AttackTarget a;
    a.t = t;
    a.tolerance = tolerance;
    return a;
  }
};

/// (tau + lambda, tau - lambda)
std::pair<double, double> classification_targets(double tau, double lambda = 0.03);
/// tau - alpha (chi_truth - tau)
double trading_target(double tau, double alpha, double chi_truth);
/// (1 +- 0.5) y* with y* = E[y_h | x] estimated from `samples` trajectories.
AttackTarget consumption_target(const ForecastModel& model, const SeriesTransform& transform,
                                std::span<const double> x, std::size_t h, bool over, std::size_t samples = 10000,
                                std::uint64_t seed = 0);

/// sqrt(sum (delta_i / x_i)^2)
double weighted_norm(std::span<const double> delta, std::span<const double> x);
/// Gradient of weighted_norm; zero at delta = 0.
std::vector<double> weighted_norm_gradient(std::span<const double> delta, std::span<const double> x);

/// Clamp delta so that x + delta stays above the positivity floor.
void project(std::span<double> delta, std::span<const double> x, double floor);

struct ObjectiveValue {
  double value = 0.0;
  double norm = 0.0;
  double estimate = 0.0;
  double phi = 0.0;
  std::vector<double> grad;
};

ObjectiveValue objective(const Query& q, std::span<const double> delta, double target, double c,
                         EstimatorKind kind, std::size_t samples, std::uint64_t seed);

struct TracePoint {
  std::size_t iteration = 0;
  double objective = 0.0;
  double norm = 0.0;
  double phi = 0.0;
};

struct CRun {
  double c = 0.0;  // 0 marks the unperturbed baseline candidate
  std::vector<double> delta;
  double norm = 0.0;
  double estimate = 0.0;  // with eval_samples under the evaluation seed
  double standard_error = 0.0;
  double phi = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::size_t iterates = 0;
  std::size_t positivity_violations = 0;
  std::vector<TracePoint> trace;
};

struct AttackResult {
  std::vector<double> delta;
  double norm = 0.0;
  double achieved = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double phi = 0.0;
  bool success = false;
  double chosen_c = 0.0;
  double epsilon = 0.0;
  double baseline = 0.0;  // estimate at delta = 0
  EstimatorKind estimator = EstimatorKind::reparametrization;
  std::vector<CRun> runs;
};

/// Optimise every c of the grid from delta = 0; runs are independent and
/// seeded by mix_seed(seed, c_index).
std::vector<CRun> run_c_grid(const Query& q, double target, const AttackConfig& config);

/// Scores an arbitrary delta the same way the final iterates are scored.
CRun evaluate_candidate(const Query& q, std::span<const double> delta, double target, const AttackConfig& config);

/// Minimal phi among candidates with norm <= epsilon (ties toward smaller c);
/// if none is admissible, the smallest-norm candidate. Returns its index and
/// whether it was admissible.
std::pair<std::size_t, bool> select_c(std::span<const CRun> runs, double epsilon);

bool attack_succeeded(const AttackTarget& target, double estimate, double ci_low, double ci_high);

/// Build the result for one epsilon from candidate runs (baseline included).
AttackResult finalize(const Query& q, std::span<const CRun> runs, const AttackTarget& target, double epsilon,
                      const AttackConfig& config);

AttackResult pgd_attack(const Query& q, const AttackTarget& target, const AttackConfig& config);

/// One c-grid run shared by several tolerances; one result per epsilon.
std::vector<AttackResult> pgd_attack_multi(const Query& q, const AttackTarget& target, const AttackConfig& config,
                                           std::span<const double> epsilons);

std::string result_to_json(const AttackResult& result, bool include_traces);
/// Columns: iteration,c,objective,norm,phi
void write_trace_csv(std::ostream& out, const AttackResult& result);

}  // namespace pfa
