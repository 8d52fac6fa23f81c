#include "pfa/optim.hpp"

#include "pfa/error.hpp"

namespace pfa {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  if (name == "adam") return OptimizerKind::adam;
  fail(ErrorKind::config, "unknown optimizer '" + name + "' (expected rmsprop or adam)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "rmsprop"; }

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::size_t size)
    : kind_(kind), lr_(learning_rate), m_(size, 0.0), v_(size, 0.0) {
  if (!(learning_rate > 0.0)) fail(ErrorKind::config, "learning rate must be positive");
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size() || params.size() != v_.size())
    fail(ErrorKind::invalid_argument, "optimizer size mismatch");
  ++t_;
  if (kind_ == OptimizerKind::rmsprop) {
    constexpr double rho = 0.9;
    constexpr double eps = 1e-7;
    for (std::size_t i = 0; i < params.size(); ++i) {
      v_[i] = rho * v_[i] + (1.0 - rho) * grad[i] * grad[i];
      params[i] -= lr_ * grad[i] / (std::sqrt(v_[i]) + eps);
    }
    return;
  }
  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  constexpr double eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

double clip_global_norm(std::span<double> grad, double max_norm) {
  double ss = 0.0;
  for (double g : grad) ss += g * g;
  const double norm = std::sqrt(ss);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
  return norm;
}

}  // namespace pfa
