#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace pfa {

enum class OptimizerKind { rmsprop, adam };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

/// First-order optimizer over a flat parameter vector. Defaults follow the
/// common framework defaults: RMSProp rho 0.9, eps 1e-7; Adam 0.9/0.999, eps 1e-8.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, std::size_t size);

  /// params -= update(grad)
  void step(std::span<double> params, std::span<const double> grad);
  OptimizerKind kind() const { return kind_; }

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

/// Scales grad in place so its Euclidean norm is at most max_norm; returns the pre-clip norm.
double clip_global_norm(std::span<double> grad, double max_norm);

}  // namespace pfa
