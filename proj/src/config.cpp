#include "pfa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "pfa/error.hpp"

namespace pfa {

namespace {

// key, default
const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"seed", "0"},
      {"out_dir", "out"},
      {"workers", "1"},
      // data
      {"data_source", "csv"},
      {"data_path", ""},
      {"input_length", "241"},
      {"horizon", "10"},
      {"train_stride", "1"},
      {"test_stride", "1"},
      {"validation_fraction", "0.15"},
      {"transform", "returns"},
      {"train_begin", ""},
      {"train_end", ""},
      {"test_begin", ""},
      {"test_end", ""},
      {"train_fraction", "0.75"},
      // synthetic
      {"synth_kind", "ar1"},
      {"synth_a", "0.7"},
      {"synth_b", "0"},
      {"synth_sigma", "0.1"},
      {"synth_x0", "0"},
      {"synth_price_start", "0"},
      {"synth_level", "1"},
      {"synth_amplitude", "0.5"},
      {"synth_period", "24"},
      {"synth_noise", "0.1"},
      {"synth_series", "1"},
      {"synth_length", "1000"},
      {"synth_start", "2000-01-01"},
      {"synth_step_seconds", "86400"},
      // model and training
      {"layers", "1"},
      {"hidden", "25"},
      {"learning_rate", "0.01"},
      {"batch_size", "2048"},
      {"patience", "20"},
      {"max_epochs", "200"},
      {"optimizer", "rmsprop"},
      {"clip_norm", "10"},
      {"checkpoint", ""},
      // forecasting
      {"statistics", "cum_return:10"},
      {"observation", "true"},
      {"samples", "10000"},
      {"confidence", "0.95"},
      {"max_windows", "0"},
      // attack
      {"attack_preset", "financial"},
      {"attack_statistic", ""},
      {"attack_target", "classification"},
      {"attack_lambda", "0.03"},
      {"attack_alpha", "0.1"},
      {"attack_target_value", "0"},
      {"attack_tolerance", "0.001"},
      {"attack_epsilons", "0.001,0.01,0.1"},
      {"attack_c_grid", ""},
      {"attack_learning_rate", ""},
      {"attack_iterations", "1000"},
      {"attack_samples", "50"},
      {"attack_eval_samples", "10000"},
      {"attack_optimizer", ""},
      {"attack_fresh_noise", "true"},
      {"attack_traces", "false"},
      {"attack_max_windows", "0"},
      {"estimators", "reparametrization"},
      // backtest
      {"backtest_k", "10"},
      {"backtest_h", "10"},
      {"backtest_samples", "1000"},
      {"backtest_attack_results", ""},
      {"backtest_attack_estimator", "reparametrization"},
      {"backtest_attack_epsilon", "0.1"},
      // grad-check
      {"gc_hidden", "4"},
      {"gc_input_length", "6"},
      {"gc_horizon", "5"},
      {"gc_trials", "50"},
      {"gc_samples", "200"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : defaults()) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }();
  return keys;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::config, "line " + std::to_string(number) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::config, "unknown config key '" + key + "'");
  it->second = value;
  set_[key] = true;
}

bool RunConfig::explicitly_set(const std::string& key) const { return set_.count(key) != 0; }

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::config, "unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_real(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorKind::config, key + ": '" + s + "' is not a number");
  }
  if (pos != s.size() || !std::isfinite(v)) fail(ErrorKind::config, key + ": '" + s + "' is not a finite number");
  return v;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorKind::config, key + ": '" + s + "' is not an integer");
  }
  if (pos != s.size()) fail(ErrorKind::config, key + ": '" + s + "' is not an integer");
  return v;
}

std::size_t RunConfig::get_count(const std::string& key) const {
  const std::int64_t v = get_int(key);
  if (v < 0) fail(ErrorKind::config, key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::get_seed(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorKind::config, key + ": '" + s + "' is not a seed");
  }
  if (pos != s.size() || (!s.empty() && s[0] == '-')) fail(ErrorKind::config, key + ": '" + s + "' is not a seed");
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorKind::config, key + ": '" + s + "' is not a boolean");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> RunConfig::get_reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      fail(ErrorKind::config, key + ": '" + item + "' is not a number");
    }
    if (pos != item.size() || !std::isfinite(v)) fail(ErrorKind::config, key + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void RunConfig::write_resolved(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << resolved();
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

}  // namespace pfa
