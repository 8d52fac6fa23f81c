// pfa: command-line front end over the C library interface.

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "pfa/pfa.h"

namespace {

struct ConfigDeleter {
  void operator()(pfa_config* c) const { pfa_config_free(c); }
};
using ConfigPtr = std::unique_ptr<pfa_config, ConfigDeleter>;

void print_log(const char* text, void*) {
  std::fputs(text, stderr);
}

int report(pfa_status s) {
  std::fprintf(stderr, "error (%s): %s\n", pfa_status_name(s), pfa_last_error());
  return pfa_exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic forecasting, inference and adversarial attacks"};
  app.set_version_flag("--version", std::string(pfa_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--seed", seed, "overrides the seed key");
  app.add_option("--out", out_dir, "overrides the out_dir key");
  app.add_option("--set", overrides, "extra key=value override (repeatable)");

  const char* descriptions[][2] = {
      {"train", "fit the forecaster by teacher-forced likelihood"},
      {"forecast", "Monte-Carlo / importance-sampling statistic estimates"},
      {"attack", "adversarial perturbations over the test windows"},
      {"backtest", "long-short portfolio backtest"},
      {"synth", "write a synthetic dataset and its manifest"},
      {"grad-check", "finite-difference and estimator agreement checks"},
  };
  for (const auto& d : descriptions) app.add_subcommand(d[0], d[1])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  pfa_config* raw = nullptr;
  pfa_status s = config_path.empty() ? pfa_config_new(&raw) : pfa_config_load(config_path.c_str(), &raw);
  if (s != PFA_OK) return report(s);
  ConfigPtr config(raw);

  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error (config): --set expects key=value, got '%s'\n", kv.c_str());
      return 2;
    }
    s = pfa_config_set(config.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (s != PFA_OK) return report(s);
  }
  if (!seed.empty() && (s = pfa_config_set(config.get(), "seed", seed.c_str())) != PFA_OK) return report(s);
  if (!out_dir.empty() && (s = pfa_config_set(config.get(), "out_dir", out_dir.c_str())) != PFA_OK) return report(s);

  const std::string command = app.get_subcommands().front()->get_name();
  s = pfa_run(command.c_str(), config.get(), print_log, nullptr);
  if (s != PFA_OK) return report(s);
  return 0;
}
