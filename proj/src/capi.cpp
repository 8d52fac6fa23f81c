#include "pfa/pfa.h"

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "pfa/attack.hpp"
#include "pfa/commands.hpp"
#include "pfa/config.hpp"
#include "pfa/error.hpp"
#include "pfa/estimators.hpp"
#include "pfa/model.hpp"
#include "pfa/sampling.hpp"

struct pfa_config {
  pfa::RunConfig config;
};

struct pfa_model {
  pfa::ForecastModel model;
};

namespace {

thread_local std::string g_last_error;

pfa_status status_of(pfa::ErrorKind kind) {
  switch (kind) {
    case pfa::ErrorKind::config: return PFA_ERR_CONFIG;
    case pfa::ErrorKind::data: return PFA_ERR_DATA;
    case pfa::ErrorKind::numeric: return PFA_ERR_NUMERIC;
    case pfa::ErrorKind::domain: return PFA_ERR_DOMAIN;
    case pfa::ErrorKind::degenerate_observation: return PFA_ERR_DEGENERATE;
    case pfa::ErrorKind::unsupported: return PFA_ERR_UNSUPPORTED;
    case pfa::ErrorKind::io: return PFA_ERR_IO;
    case pfa::ErrorKind::invalid_argument: return PFA_ERR_INVALID_ARGUMENT;
  }
  return PFA_ERR_INTERNAL;
}

template <class F>
pfa_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return PFA_OK;
  } catch (const pfa::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PFA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PFA_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) pfa::fail(pfa::ErrorKind::invalid_argument, std::string(what) + " is null");
}

pfa::SeriesTransform parse_transform_spec(const char* spec) {
  pfa::SeriesTransform t;
  const std::string s = spec ? spec : "identity";
  if (s.empty() || s == "identity") return t;
  if (s == "scale") {
    t.kind = pfa::TransformKind::scale_by_average;
    return t;
  }
  if (s.rfind("returns:", 0) == 0) {
    const auto second = s.find(':', 8);
    if (second == std::string::npos) pfa::fail(pfa::ErrorKind::config, "transform returns:MU:SIGMA expected");
    t.kind = pfa::TransformKind::normalized_returns;
    try {
      t.mu = std::stod(s.substr(8, second - 8));
      t.sigma = std::stod(s.substr(second + 1));
    } catch (const std::exception&) {
      pfa::fail(pfa::ErrorKind::config, "bad transform '" + s + "'");
    }
    if (!(t.sigma > 0.0)) pfa::fail(pfa::ErrorKind::config, "transform sigma must be positive");
    return t;
  }
  pfa::fail(pfa::ErrorKind::config, "unknown transform '" + s + "'");
}

// Forwards complete lines to the callback as they are written.
class CallbackBuf : public std::stringbuf {
 public:
  CallbackBuf(pfa_log_fn fn, void* user) : fn_(fn), user_(user) {}
  int sync() override {
    flush_lines(false);
    return 0;
  }
  void flush_lines(bool all) {
    std::string s = str();
    std::size_t pos = 0;
    for (std::size_t nl; (nl = s.find('\n', pos)) != std::string::npos; pos = nl + 1)
      if (fn_) fn_(s.substr(pos, nl - pos + 1).c_str(), user_);
    if (all && pos < s.size()) {
      if (fn_) fn_(s.substr(pos).c_str(), user_);
      pos = s.size();
    }
    str(s.substr(pos));
  }

 protected:
  int overflow(int c) override {
    const int r = std::stringbuf::overflow(c);
    if (c == '\n') flush_lines(false);
    return r;
  }

 private:
  pfa_log_fn fn_;
  void* user_;
};

}  // namespace

extern "C" {

const char* pfa_version(void) { return "1.0.0"; }

const char* pfa_last_error(void) { return g_last_error.c_str(); }

const char* pfa_status_name(pfa_status status) {
  switch (status) {
    case PFA_OK: return "ok";
    case PFA_ERR_CONFIG: return "config";
    case PFA_ERR_DATA: return "data";
    case PFA_ERR_NUMERIC: return "numeric";
    case PFA_ERR_DOMAIN: return "domain";
    case PFA_ERR_DEGENERATE: return "degenerate_observation";
    case PFA_ERR_UNSUPPORTED: return "unsupported";
    case PFA_ERR_IO: return "io";
    case PFA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PFA_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int pfa_exit_code(pfa_status status) {
  switch (status) {
    case PFA_OK: return 0;
    case PFA_ERR_CONFIG:
    case PFA_ERR_UNSUPPORTED:
    case PFA_ERR_INVALID_ARGUMENT: return 2;
    case PFA_ERR_DATA:
    case PFA_ERR_IO: return 3;
    case PFA_ERR_NUMERIC:
    case PFA_ERR_DOMAIN:
    case PFA_ERR_DEGENERATE:
    case PFA_ERR_INTERNAL: return 4;
  }
  return 4;
}

pfa_status pfa_config_new(pfa_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pfa_config{};
  });
}

pfa_status pfa_config_load(const char* path, pfa_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pfa_config{pfa::RunConfig::load(path)};
  });
}

pfa_status pfa_config_set(pfa_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->config.set(key, value);
  });
}

pfa_status pfa_config_get(const pfa_config* config, const char* key, char* buf, size_t capacity, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    const std::string& v = config->config.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && capacity >= v.size() + 1) std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

void pfa_config_free(pfa_config* config) { delete config; }

pfa_status pfa_run(const char* command, const pfa_config* config, pfa_log_fn log, void* user) {
  CallbackBuf buf(log, user);
  std::ostream out(&buf);
  const pfa_status s = guarded([&] {
    need(command, "command");
    need(config, "config");
    pfa::run_command(command, config->config, out);
  });
  buf.flush_lines(true);
  return s;
}

pfa_status pfa_model_random(int layers, int hidden, uint64_t seed, pfa_model** out) {
  return guarded([&] {
    need(out, "out");
    if (layers < 1 || hidden < 1) pfa::fail(pfa::ErrorKind::invalid_argument, "layers and hidden must be >= 1");
    *out = new pfa_model{pfa::ForecastModel::random(layers, hidden, seed)};
  });
}

pfa_status pfa_model_ar1(double a, double b, double sigma, pfa_model** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pfa_model{pfa::ar1_model(a, b, sigma)};
  });
}

pfa_status pfa_model_load(const char* path, pfa_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pfa_model{pfa::load_checkpoint(path)};
  });
}

pfa_status pfa_model_save(const pfa_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    pfa::save_checkpoint(model->model, path);
  });
}

pfa_status pfa_model_parameter_count(const pfa_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->model.parameter_count();
  });
}

void pfa_model_free(pfa_model* model) { delete model; }

pfa_status pfa_expectation(const pfa_model* model, const double* x, size_t n, const char* transform,
                           const char* statistic, const char* observation, size_t samples, uint64_t seed,
                           double* estimate, double* standard_error) {
  return guarded([&] {
    need(model, "model");
    need(x, "x");
    need(statistic, "statistic");
    need(estimate, "estimate");
    if (n == 0) pfa::fail(pfa::ErrorKind::invalid_argument, "empty input");
    const auto cond = pfa::ConditionedModel::make(model->model, parse_transform_spec(transform), {x, n});
    const auto e = pfa::estimate_expectation(cond, pfa::Statistic::parse(statistic),
                                             pfa::Observation::parse(observation ? observation : "true"), samples,
                                             seed);
    *estimate = e.value;
    if (standard_error) *standard_error = e.standard_error;
  });
}

pfa_status pfa_gradient(const pfa_model* model, const double* x, size_t n, const char* transform,
                        const char* statistic, const char* observation, const char* estimator, size_t samples,
                        uint64_t seed, double* grad, double* value) {
  return guarded([&] {
    need(model, "model");
    need(x, "x");
    need(statistic, "statistic");
    need(grad, "grad");
    if (n == 0) pfa::fail(pfa::ErrorKind::invalid_argument, "empty input");
    pfa::Query q;
    q.model = &model->model;
    q.transform = parse_transform_spec(transform);
    q.x.assign(x, x + n);
    q.stat = pfa::Statistic::parse(statistic);
    q.obs = pfa::Observation::parse(observation ? observation : "true");
    const std::vector<double> zero(n, 0.0);
    const auto kind = pfa::parse_estimator(estimator ? estimator : "reparametrization");
    const auto g = pfa::estimate_gradient(kind, q, zero, samples, seed);
    std::copy(g.grad.begin(), g.grad.end(), grad);
    if (value) *value = g.value;
  });
}

pfa_status pfa_weighted_norm(const double* delta, const double* x, size_t n, double* out) {
  return guarded([&] {
    need(delta, "delta");
    need(x, "x");
    need(out, "out");
    *out = pfa::weighted_norm({delta, n}, {x, n});
  });
}

}  // extern "C"
