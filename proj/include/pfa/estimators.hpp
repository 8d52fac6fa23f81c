#pragma once

// Gradient of E[stat(y) | x + delta, obs] with respect to the perturbation
// delta, by the score-function and the reparametrization estimators.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pfa/data.hpp"
#include "pfa/model.hpp"
#include "pfa/sampling.hpp"

namespace pfa {

enum class EstimatorKind { score_function, reparametrization };

EstimatorKind parse_estimator(const std::string& name);
std::string to_string(EstimatorKind kind);

/// Everything that defines the expectation being differentiated.
struct Query {
  const ForecastModel* model = nullptr;
  SeriesTransform transform;
  std::vector<double> x;  // unperturbed input, application space
  Statistic stat;
  Observation obs;
  /// Simulated horizon; 0 means just long enough for stat and obs.
  std::size_t horizon = 0;

  std::size_t steps() const;
};

struct GradientEstimate {
  std::vector<double> grad;  // one entry per input coordinate
  double value = 0.0;        // the Monte-Carlo estimate the gradient belongs to
  EstimatorKind kind = EstimatorKind::reparametrization;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// (1/L) sum_l chi(y^l) grad log q(y^l | x + delta), with the sampled model
/// values held fixed, plus the explicit dependence of chi on the reference
/// value. Trivial observations only.
GradientEstimate score_function_gradient(const Query& q, std::span<const double> delta, std::size_t samples,
                                         std::uint64_t seed);

/// Exact gradient of sum_l chi(y^l) w^l / sum_l w^l with y^l = g(delta, eta^l)
/// under fixed noise eta^l.
GradientEstimate reparam_gradient(const Query& q, std::span<const double> delta, std::size_t samples,
                                  std::uint64_t seed);

/// Same Monte-Carlo estimate as reparam_gradient, without the tape.
double reparam_estimate(const Query& q, std::span<const double> delta, std::size_t samples, std::uint64_t seed);

GradientEstimate estimate_gradient(EstimatorKind kind, const Query& q, std::span<const double> delta,
                                   std::size_t samples, std::uint64_t seed);

struct AgreementReport {
  std::size_t trials = 0;
  std::size_t samples = 0;
  std::vector<double> mean_score;
  std::vector<double> mean_reparam;
  std::vector<double> se_score;  // standard error of the mean, per coordinate
  std::vector<double> se_reparam;
  double cosine = 0.0;
  double fraction_within_3se = 0.0;
  double variance_score = 0.0;  // summed per-coordinate variance of single estimates
  double variance_reparam = 0.0;
};

/// Both estimators over `trials` independent seeds at delta = 0.
AgreementReport estimator_agreement(const Query& q, std::size_t trials, std::size_t samples, std::uint64_t seed);

}  // namespace pfa
