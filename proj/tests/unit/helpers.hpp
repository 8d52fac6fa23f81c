#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pfa/error.hpp"

namespace testing {

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pfa_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::vector<double> positive_series(std::mt19937_64& rng, std::size_t n, double start = 1.0,
                                           double vol = 0.02) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> p(n);
  double v = start;
  for (auto& x : p) {
    x = v;
    v *= std::exp(vol * z(rng));
  }
  return p;
}

template <class F>
pfa::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const pfa::Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return pfa::ErrorKind::invalid_argument;
}

}  // namespace testing
