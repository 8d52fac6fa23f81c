#pragma once

// Series ingestion, preprocessing between the application space (prices,
// consumption) and the model space, windowing with train/test splits, and
// synthetic generators with closed-form oracles.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pfa/autodiff.hpp"

namespace pfa {

using Timestamp = std::int64_t;  // seconds since 1970-01-01 UTC

Timestamp parse_timestamp(const std::string& text);
/// "YYYY-MM-DD" at midnight, "YYYY-MM-DD HH:MM:SS" otherwise.
std::string format_timestamp(Timestamp t);
Timestamp make_date(int year, unsigned month, unsigned day);

struct PriceSeries {
  std::string id;
  std::vector<Timestamp> timestamps;
  std::vector<double> values;  // NaN marks a missing observation
};

// CSV schema: header `date,id,value`, one observation per row. Missing values
// (empty, "nan", "NA") are kept as NaN and disqualify the windows touching them.
std::vector<PriceSeries> read_series_csv(const std::string& path, bool require_positive);
std::vector<PriceSeries> parse_series_csv(std::istream& in, bool require_positive);
void write_series_csv(const std::string& path, const std::vector<PriceSeries>& series);
void write_series_csv(std::ostream& out, const std::vector<PriceSeries>& series);

// --- preprocessing ----------------------------------------------------------

/// r_i = p_i / p_{i-1} - 1
std::vector<double> to_returns(std::span<const double> prices);
/// p_1, p_1 (1 + r_2), ...
std::vector<double> from_returns(double first_price, std::span<const double> returns);
ad::Var to_returns(ad::Tape& tape, ad::Var prices);
ad::Var from_returns(ad::Tape& tape, ad::Var first_price, ad::Var returns);

std::vector<double> normalize(std::span<const double> values, double mu, double sigma);
std::vector<double> denormalize(std::span<const double> values, double mu, double sigma);

struct Scaled {
  std::vector<double> values;
  double factor = 1.0;  // the average of the input window
};
Scaled scale_by_average(std::span<const double> window);

struct Moments {
  double mean = 0.0;
  double stddev = 1.0;
};
/// Population mean and standard deviation.
Moments moments(std::span<const double> values);

enum class TransformKind { identity, normalized_returns, scale_by_average };

TransformKind parse_transform(const std::string& name);
std::string to_string(TransformKind kind);

/// Running state of the model-space -> application-space map over a horizon.
struct DecodeState {
  double previous = 0.0;  // last application-space value (returns)
  double factor = 1.0;    // window average (scale_by_average)
};

struct TapeDecodeState {
  ad::Var previous;
  ad::Var factor;
};

/// Model-space value and log |d zeta / d y| for a given application-space value.
struct Inverted {
  double zeta = 0.0;
  double log_jacobian = 0.0;
};

struct TapeInverted {
  ad::Var zeta;
  ad::Var log_jacobian;
};

/// Bidirectional map between application-space windows and the sequences the
/// forecaster consumes and emits. All maps have tape versions so gradients
/// can be taken in application space.
struct SeriesTransform {
  TransformKind kind = TransformKind::identity;
  double mu = 0.0;     // return normalisation
  double sigma = 1.0;  // return normalisation

  /// Model inputs for an application-space input window.
  std::vector<double> encode(std::span<const double> input) const;
  ad::Var encode(ad::Tape& tape, ad::Var input) const;

  /// Teacher-forcing sequence covering the input window followed by the target.
  std::vector<double> encode_training(std::span<const double> input, std::span<const double> target) const;

  DecodeState start_decode(std::span<const double> input) const;
  double decode_step(DecodeState& state, double zeta) const;
  Inverted invert_step(const DecodeState& state, double value) const;
  /// Feed an externally fixed application-space value through the state.
  void clamp_step(DecodeState& state, double value) const;

  TapeDecodeState start_decode(ad::Tape& tape, ad::Var input) const;
  ad::Var decode_step(ad::Tape& tape, TapeDecodeState& state, ad::Var zeta) const;
  TapeInverted invert_step(ad::Tape& tape, const TapeDecodeState& state, ad::Var value) const;
  void clamp_step(ad::Tape& tape, TapeDecodeState& state, ad::Var value) const;

  /// Decode a whole model-space horizon.
  std::vector<double> decode(std::span<const double> input, std::span<const double> zetas) const;

  /// Model-space length for an application-space input of length n.
  std::size_t encoded_length(std::size_t n) const;
};

// --- windows and splits ----------------------------------------------------

struct WindowSample {
  std::string series_id;
  std::size_t start = 0;  // index of the first input value in the series
  std::vector<double> input;
  std::vector<double> target;
  Timestamp input_end = 0;
  Timestamp target_begin = 0;
  Timestamp target_end = 0;

  /// Deterministic window identifier `seriesID:startIndex`.
  std::string id() const;
};

/// Inclusive time ranges.
struct SplitRule {
  Timestamp train_begin = 0;
  Timestamp train_end = 0;
  Timestamp test_begin = 0;
  Timestamp test_end = 0;
};

/// Rolling study periods: `train_years` of training followed by `test_years`
/// of testing, advanced by `test_years` so test ranges never overlap.
std::vector<SplitRule> study_periods(int first_year, int last_year, int train_years = 3, int test_years = 1);

struct WindowOptions {
  std::size_t input_length = 241;
  std::size_t horizon = 10;
  std::size_t train_stride = 1;
  std::size_t test_stride = 1;
  double validation_fraction = 0.15;
  std::uint64_t seed = 0;
};

struct WindowSet {
  std::vector<WindowSample> train;
  std::vector<WindowSample> validation;
  std::vector<WindowSample> test;
  std::vector<std::string> warnings;
};

WindowSet make_windows(const std::vector<PriceSeries>& series, const WindowOptions& options, const SplitRule& split);

/// Number of (train or validation, test) pairs on the same series whose
/// target time ranges intersect.
std::size_t target_overlap_count(const WindowSet& windows);

/// Return normalisation fitted on the training period only.
Moments fit_return_normalization(const std::vector<PriceSeries>& series, const SplitRule& split);

// --- synthetic data -------------------------------------------------------

enum class SyntheticKind { ar1, seasonal };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::ar1;
  // x_{t+1} = a x_t + b + sigma eta_t, x_0 = x0
  double a = 0.7;
  double b = 0.0;
  double sigma = 0.1;
  double x0 = 0.0;
  /// When positive the AR(1) values are daily returns and the emitted series
  /// is the price path starting at this value.
  double price_start = 0.0;
  // seasonal: level_i (1 + amplitude sin(2 pi t / period)) exp(noise eta_t)
  double level = 1.0;
  double amplitude = 0.5;
  double period = 24.0;
  double noise = 0.1;

  std::size_t series_count = 1;
  std::size_t length = 100;
  std::uint64_t seed = 0;
  Timestamp start = 0;
  std::int64_t step_seconds = 86400;
};

std::vector<PriceSeries> generate(const SyntheticSpec& spec);

struct Ar1Oracle {
  double mean = 0.0;
  double derivative = 0.0;  // d mean / d x_last
  double variance = 0.0;
};

/// Closed form of E[x_{t+n} | x_t = x_last] for the AR(1) recursion.
Ar1Oracle ar1_oracle(double a, double b, double sigma, double x_last, std::size_t n);

// Manifest: flat key=value text recording the synthetic spec.
std::string synthetic_manifest(const SyntheticSpec& spec);
SyntheticSpec parse_synthetic_manifest(const std::string& text);

}  // namespace pfa
