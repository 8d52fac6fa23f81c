#include "pfa/data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "pfa/error.hpp"
#include "pfa/random.hpp"

namespace pfa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s, std::size_t pos, std::size_t len, const std::string& context) {
  int v = 0;
  if (pos + len > s.size()) fail(ErrorKind::data, "malformed timestamp '" + context + "'");
  auto res = std::from_chars(s.data() + pos, s.data() + pos + len, v);
  if (res.ec != std::errc() || res.ptr != s.data() + pos + len) fail(ErrorKind::data, "malformed timestamp '" + context + "'");
  return v;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const std::string t = trim(s);
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    fail(ErrorKind::data, "malformed number '" + s + "' for " + what);
  return v;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

// --- timestamps ----------------------------------------------------------------

Timestamp make_date(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) fail(ErrorKind::data, "invalid calendar date");
  return sys_days{ymd}.time_since_epoch().count() * 86400LL;
}

Timestamp parse_timestamp(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') fail(ErrorKind::data, "malformed timestamp '" + raw + "'");
  const int y = parse_int(s, 0, 4, raw);
  const int mo = parse_int(s, 5, 2, raw);
  const int d = parse_int(s, 8, 2, raw);
  if (mo < 1 || mo > 12 || d < 1 || d > 31) fail(ErrorKind::data, "malformed timestamp '" + raw + "'");
  Timestamp t = make_date(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  if (s.size() == 10) return t;
  if ((s[10] != ' ' && s[10] != 'T') || s.size() < 16 || s[13] != ':')
    fail(ErrorKind::data, "malformed timestamp '" + raw + "'");
  const int hh = parse_int(s, 11, 2, raw);
  const int mm = parse_int(s, 14, 2, raw);
  int ss = 0;
  if (s.size() >= 19 && s[16] == ':') ss = parse_int(s, 17, 2, raw);
  return t + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const Timestamp day = (t >= 0 ? t : t - 86399) / 86400;
  const Timestamp rem = t - day * 86400;
  const year_month_day ymd{sys_days{days{day}}};
  char buf[64];
  if (rem == 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02lld:%02lld:%02lld", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()), static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
  }
  return buf;
}

// --- CSV -----------------------------------------------------------------------

std::vector<PriceSeries> parse_series_csv(std::istream& in, bool require_positive) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::data, "empty CSV input");
  if (trim(line) != "date,id,value") fail(ErrorKind::data, "CSV header must be 'date,id,value'");

  std::map<std::string, std::vector<std::pair<Timestamp, double>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) fail(ErrorKind::data, "line " + std::to_string(line_no) + ": expected 3 fields");
    const Timestamp t = parse_timestamp(line.substr(0, c1));
    const std::string id = trim(line.substr(c1 + 1, c2 - c1 - 1));
    const std::string vs = trim(line.substr(c2 + 1));
    if (id.empty()) fail(ErrorKind::data, "line " + std::to_string(line_no) + ": empty id");
    double v = kNaN;
    if (!vs.empty() && vs != "nan" && vs != "NaN" && vs != "NA") {
      v = parse_double(vs, "line " + std::to_string(line_no));
      if (!std::isfinite(v)) fail(ErrorKind::data, "line " + std::to_string(line_no) + ": non-finite value");
      if (require_positive && !(v > 0.0))
        fail(ErrorKind::data, "line " + std::to_string(line_no) + ": values must be positive");
    }
    rows[id].emplace_back(t, v);
  }

  std::vector<PriceSeries> out;
  for (auto& [id, obs] : rows) {
    std::stable_sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    PriceSeries s;
    s.id = id;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (i > 0 && obs[i].first == obs[i - 1].first)
        fail(ErrorKind::data, "series " + id + ": duplicate timestamp " + format_timestamp(obs[i].first));
      s.timestamps.push_back(obs[i].first);
      s.values.push_back(obs[i].second);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PriceSeries> read_series_csv(const std::string& path, bool require_positive) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data, "cannot open data file " + path);
  return parse_series_csv(in, require_positive);
}

void write_series_csv(std::ostream& out, const std::vector<PriceSeries>& series) {
  out << "date,id,value\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      out << format_timestamp(s.timestamps[i]) << ',' << s.id << ',';
      if (std::isfinite(s.values[i])) out << shortest(s.values[i]);
      out << '\n';
    }
  }
}

void write_series_csv(const std::string& path, const std::vector<PriceSeries>& series) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  write_series_csv(out, series);
}

// --- preprocessing ---------------------------------------------------------------

std::vector<double> to_returns(std::span<const double> prices) {
  if (prices.size() < 2) fail(ErrorKind::invalid_argument, "need at least two prices for returns");
  std::vector<double> r(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) {
    if (!(prices[i - 1] > 0.0) || !(prices[i] > 0.0)) fail(ErrorKind::domain, "prices must be positive");
    r[i - 1] = prices[i] / prices[i - 1] - 1.0;
  }
  return r;
}

std::vector<double> from_returns(double first_price, std::span<const double> returns) {
  std::vector<double> p{first_price};
  p.reserve(returns.size() + 1);
  for (double r : returns) {
    if (!(1.0 + r > 0.0)) fail(ErrorKind::domain, "return factor must be positive");
    p.push_back(p.back() * (1.0 + r));
  }
  return p;
}

ad::Var to_returns(ad::Tape& tape, ad::Var prices) {
  const auto n = static_cast<std::uint32_t>(prices.size());
  if (n < 2) fail(ErrorKind::invalid_argument, "need at least two prices for returns");
  for (double p : prices.values()) {
    if (!(p > 0.0)) fail(ErrorKind::domain, "prices must be positive");
  }
  return tape.slice(prices, 1, n - 1) / tape.slice(prices, 0, n - 1) - 1.0;
}

ad::Var from_returns(ad::Tape& tape, ad::Var first_price, ad::Var returns) {
  ad::Var out = first_price;
  ad::Var last = first_price;
  for (std::uint32_t i = 0; i < returns.size(); ++i) {
    const ad::Var factor = tape.element(returns, i) + 1.0;
    if (!(factor.value() > 0.0)) fail(ErrorKind::domain, "return factor must be positive");
    last = last * factor;
    out = tape.concat(out, last);
  }
  return out;
}

std::vector<double> normalize(std::span<const double> values, double mu, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::invalid_argument, "normalisation needs sigma > 0");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mu) / sigma;
  return out;
}

std::vector<double> denormalize(std::span<const double> values, double mu, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::invalid_argument, "normalisation needs sigma > 0");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * sigma + mu;
  return out;
}

Scaled scale_by_average(std::span<const double> window) {
  if (window.empty()) fail(ErrorKind::invalid_argument, "empty window");
  const double v = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
  if (!(v > 0.0)) fail(ErrorKind::domain, "window average must be positive");
  Scaled s;
  s.factor = v;
  s.values.reserve(window.size());
  for (double x : window) s.values.push_back(x / v);
  return s;
}

Moments moments(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::invalid_argument, "moments of an empty sample");
  Moments m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return m;
}

TransformKind parse_transform(const std::string& name) {
  if (name == "identity") return TransformKind::identity;
  if (name == "returns") return TransformKind::normalized_returns;
  if (name == "scale") return TransformKind::scale_by_average;
  fail(ErrorKind::config, "unknown transform '" + name + "' (expected identity, returns or scale)");
}

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::identity: return "identity";
    case TransformKind::normalized_returns: return "returns";
    case TransformKind::scale_by_average: return "scale";
  }
  return "identity";
}

std::size_t SeriesTransform::encoded_length(std::size_t n) const {
  return kind == TransformKind::normalized_returns ? (n == 0 ? 0 : n - 1) : n;
}

std::vector<double> SeriesTransform::encode(std::span<const double> input) const {
  switch (kind) {
    case TransformKind::identity: return {input.begin(), input.end()};
    case TransformKind::normalized_returns: return normalize(to_returns(input), mu, sigma);
    case TransformKind::scale_by_average: return scale_by_average(input).values;
  }
  return {};
}

ad::Var SeriesTransform::encode(ad::Tape& tape, ad::Var input) const {
  switch (kind) {
    case TransformKind::identity: return input;
    case TransformKind::normalized_returns: {
      if (!(sigma > 0.0)) fail(ErrorKind::invalid_argument, "normalisation needs sigma > 0");
      return (to_returns(tape, input) - mu) / sigma;
    }
    case TransformKind::scale_by_average: {
      const ad::Var avg = tape.sum(input) / static_cast<double>(input.size());
      if (!(avg.value() > 0.0)) fail(ErrorKind::domain, "window average must be positive");
      return input / avg;
    }
  }
  return input;
}

std::vector<double> SeriesTransform::encode_training(std::span<const double> input,
                                                     std::span<const double> target) const {
  std::vector<double> all(input.begin(), input.end());
  all.insert(all.end(), target.begin(), target.end());
  switch (kind) {
    case TransformKind::identity: return all;
    case TransformKind::normalized_returns: return normalize(to_returns(all), mu, sigma);
    case TransformKind::scale_by_average: {
      const double v = scale_by_average(input).factor;
      for (double& x : all) x /= v;
      return all;
    }
  }
  return all;
}

DecodeState SeriesTransform::start_decode(std::span<const double> input) const {
  if (input.empty()) fail(ErrorKind::invalid_argument, "empty input window");
  DecodeState s;
  s.previous = input.back();
  if (kind == TransformKind::scale_by_average) s.factor = scale_by_average(input).factor;
  return s;
}

double SeriesTransform::decode_step(DecodeState& state, double zeta) const {
  switch (kind) {
    case TransformKind::identity: state.previous = zeta; return zeta;
    case TransformKind::normalized_returns:
      state.previous = state.previous * (1.0 + mu + sigma * zeta);
      return state.previous;
    case TransformKind::scale_by_average: state.previous = state.factor * zeta; return state.previous;
  }
  return zeta;
}

Inverted SeriesTransform::invert_step(const DecodeState& state, double value) const {
  switch (kind) {
    case TransformKind::identity: return {value, 0.0};
    case TransformKind::normalized_returns: {
      if (state.previous == 0.0) fail(ErrorKind::domain, "cannot invert a return from a zero price");
      const double r = value / state.previous - 1.0;
      return {(r - mu) / sigma, -std::log(sigma * std::abs(state.previous))};
    }
    case TransformKind::scale_by_average: return {value / state.factor, -std::log(state.factor)};
  }
  return {value, 0.0};
}

void SeriesTransform::clamp_step(DecodeState& state, double value) const { state.previous = value; }

TapeDecodeState SeriesTransform::start_decode(ad::Tape& tape, ad::Var input) const {
  const auto n = static_cast<std::uint32_t>(input.size());
  if (n == 0) fail(ErrorKind::invalid_argument, "empty input window");
  TapeDecodeState s;
  s.previous = tape.element(input, n - 1);
  s.factor = kind == TransformKind::scale_by_average ? tape.sum(input) / static_cast<double>(n) : tape.constant(1.0);
  return s;
}

ad::Var SeriesTransform::decode_step(ad::Tape& tape, TapeDecodeState& state, ad::Var zeta) const {
  (void)tape;
  switch (kind) {
    case TransformKind::identity: state.previous = zeta; break;
    case TransformKind::normalized_returns: state.previous = state.previous * ((zeta * sigma) + (1.0 + mu)); break;
    case TransformKind::scale_by_average: state.previous = state.factor * zeta; break;
  }
  return state.previous;
}

TapeInverted SeriesTransform::invert_step(ad::Tape& tape, const TapeDecodeState& state, ad::Var value) const {
  switch (kind) {
    case TransformKind::identity: return {value, tape.constant(0.0)};
    case TransformKind::normalized_returns: {
      const ad::Var r = value / state.previous - 1.0;
      const double prev = state.previous.value();
      const ad::Var abs_prev = prev >= 0 ? state.previous : -state.previous;
      return {(r - mu) / sigma, -tape.log(abs_prev * sigma)};
    }
    case TransformKind::scale_by_average: return {value / state.factor, -tape.log(state.factor)};
  }
  return {value, tape.constant(0.0)};
}

void SeriesTransform::clamp_step(ad::Tape& tape, TapeDecodeState& state, ad::Var value) const {
  (void)tape;
  state.previous = value;
}

std::vector<double> SeriesTransform::decode(std::span<const double> input, std::span<const double> zetas) const {
  DecodeState s = start_decode(input);
  std::vector<double> out;
  out.reserve(zetas.size());
  for (double z : zetas) out.push_back(decode_step(s, z));
  return out;
}

// --- windows ---------------------------------------------------------------------

std::string WindowSample::id() const { return series_id + ":" + std::to_string(start); }

std::vector<SplitRule> study_periods(int first_year, int last_year, int train_years, int test_years) {
  if (train_years < 1 || test_years < 1) fail(ErrorKind::config, "study periods need positive train/test years");
  std::vector<SplitRule> out;
  for (int test_first = first_year + train_years; test_first + test_years - 1 <= last_year; test_first += test_years) {
    SplitRule r;
    r.train_begin = make_date(test_first - train_years, 1, 1);
    r.train_end = make_date(test_first, 1, 1) - 1;
    r.test_begin = make_date(test_first, 1, 1);
    r.test_end = make_date(test_first + test_years, 1, 1) - 1;
    out.push_back(r);
  }
  return out;
}

WindowSet make_windows(const std::vector<PriceSeries>& series, const WindowOptions& options, const SplitRule& split) {
  const std::size_t n = options.input_length;
  const std::size_t m = options.horizon;
  if (n < 2 || m < 1) fail(ErrorKind::config, "window needs input length >= 2 and horizon >= 1");
  const std::size_t train_stride = std::max<std::size_t>(1, options.train_stride);
  const std::size_t test_stride = std::max<std::size_t>(1, options.test_stride);
  const auto threshold = static_cast<std::uint64_t>(std::llround(options.validation_fraction * 1e6));

  WindowSet out;
  for (const auto& s : series) {
    if (s.values.size() < n + m) {
      out.warnings.push_back("series " + s.id + " skipped: " + std::to_string(s.values.size()) +
                             " observations, window needs " + std::to_string(n + m));
      continue;
    }
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    for (std::size_t start = 0; start + n + m <= s.values.size(); ++start) {
      const Timestamp first = s.timestamps[start];
      const Timestamp target_begin = s.timestamps[start + n];
      const Timestamp target_end = s.timestamps[start + n + m - 1];
      const bool is_train = first >= split.train_begin && target_end <= split.train_end;
      const bool is_test = target_begin >= split.test_begin && target_end <= split.test_end;
      if (!is_train && !is_test) continue;
      if (is_train && (train_count++ % train_stride) != 0) continue;
      if (is_test && (test_count++ % test_stride) != 0) continue;
      const auto begin = s.values.begin() + static_cast<std::ptrdiff_t>(start);
      if (std::any_of(begin, begin + static_cast<std::ptrdiff_t>(n + m), [](double v) { return !std::isfinite(v); }))
        continue;
      WindowSample w;
      w.series_id = s.id;
      w.start = start;
      w.input.assign(begin, begin + static_cast<std::ptrdiff_t>(n));
      w.target.assign(begin + static_cast<std::ptrdiff_t>(n), begin + static_cast<std::ptrdiff_t>(n + m));
      w.input_end = s.timestamps[start + n - 1];
      w.target_begin = target_begin;
      w.target_end = target_end;
      if (is_test) {
        out.test.push_back(std::move(w));
      } else if (mix_seed(options.seed, fnv1a(w.id())) % 1000000 < threshold) {
        out.validation.push_back(std::move(w));
      } else {
        out.train.push_back(std::move(w));
      }
    }
  }
  return out;
}

std::size_t target_overlap_count(const WindowSet& windows) {
  std::map<std::string, std::vector<std::pair<Timestamp, Timestamp>>> tests;
  for (const auto& w : windows.test) tests[w.series_id].emplace_back(w.target_begin, w.target_end);
  std::size_t count = 0;
  auto audit = [&](const std::vector<WindowSample>& set) {
    for (const auto& w : set) {
      auto it = tests.find(w.series_id);
      if (it == tests.end()) continue;
      for (const auto& [b, e] : it->second) {
        if (w.target_begin <= e && b <= w.target_end) ++count;
      }
    }
  };
  audit(windows.train);
  audit(windows.validation);
  return count;
}

Moments fit_return_normalization(const std::vector<PriceSeries>& series, const SplitRule& split) {
  std::vector<double> returns;
  for (const auto& s : series) {
    for (std::size_t i = 1; i < s.values.size(); ++i) {
      if (s.timestamps[i - 1] < split.train_begin || s.timestamps[i] > split.train_end) continue;
      const double a = s.values[i - 1];
      const double b = s.values[i];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      if (!(a > 0.0) || !(b > 0.0)) fail(ErrorKind::data, "series " + s.id + ": returns need positive prices");
      returns.push_back(b / a - 1.0);
    }
  }
  if (returns.size() < 2) fail(ErrorKind::data, "not enough training returns to fit the normalisation");
  Moments m = moments(returns);
  if (!(m.stddev > 0.0)) fail(ErrorKind::data, "training returns have zero variance");
  return m;
}

// --- synthetic ----------------------------------------------------------------------

std::vector<PriceSeries> generate(const SyntheticSpec& spec) {
  if (spec.length < 1 || spec.series_count < 1) fail(ErrorKind::config, "synthetic spec needs length and series count >= 1");
  std::vector<PriceSeries> out;
  for (std::size_t k = 0; k < spec.series_count; ++k) {
    Rng rng = make_rng(spec.seed, k);
    std::normal_distribution<double> normal(0.0, 1.0);
    PriceSeries s;
    char id[32];
    std::snprintf(id, sizeof(id), "S%03zu", k);
    s.id = id;
    s.values.reserve(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t) s.timestamps.push_back(spec.start + static_cast<Timestamp>(t) * spec.step_seconds);
    if (spec.kind == SyntheticKind::ar1) {
      if (spec.price_start > 0.0) {
        double price = spec.price_start;
        double r = spec.x0;
        s.values.push_back(price);
        for (std::size_t t = 1; t < spec.length; ++t) {
          r = spec.a * r + spec.b + spec.sigma * normal(rng);
          if (!(1.0 + r > 0.0)) fail(ErrorKind::numeric, "synthetic return below -100%");
          price *= 1.0 + r;
          s.values.push_back(price);
        }
      } else {
        double x = spec.x0;
        s.values.push_back(x);
        for (std::size_t t = 1; t < spec.length; ++t) {
          x = spec.a * x + spec.b + spec.sigma * normal(rng);
          s.values.push_back(x);
        }
      }
    } else {
      const double level = spec.level * (1.0 + 0.1 * static_cast<double>(k));
      for (std::size_t t = 0; t < spec.length; ++t) {
        const double season = 1.0 + spec.amplitude * std::sin(2.0 * M_PI * static_cast<double>(t) / spec.period);
        s.values.push_back(level * season * std::exp(spec.noise * normal(rng)));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

Ar1Oracle ar1_oracle(double a, double b, double sigma, double x_last, std::size_t n) {
  if (n < 1) fail(ErrorKind::invalid_argument, "oracle horizon must be >= 1");
  const double an = std::pow(a, static_cast<double>(n));
  Ar1Oracle o;
  o.derivative = an;
  if (a == 1.0) {
    o.mean = x_last + static_cast<double>(n) * b;
    o.variance = sigma * sigma * static_cast<double>(n);
  } else {
    o.mean = an * x_last + b * (1.0 - an) / (1.0 - a);
    o.variance = a * a == 1.0 ? sigma * sigma * static_cast<double>(n) : sigma * sigma * (1.0 - an * an) / (1.0 - a * a);
  }
  return o;
}

std::string synthetic_manifest(const SyntheticSpec& spec) {
  std::ostringstream out;
  out << "kind=" << (spec.kind == SyntheticKind::ar1 ? "ar1" : "seasonal") << '\n'
      << "a=" << shortest(spec.a) << '\n'
      << "b=" << shortest(spec.b) << '\n'
      << "sigma=" << shortest(spec.sigma) << '\n'
      << "x0=" << shortest(spec.x0) << '\n'
      << "price_start=" << shortest(spec.price_start) << '\n'
      << "level=" << shortest(spec.level) << '\n'
      << "amplitude=" << shortest(spec.amplitude) << '\n'
      << "period=" << shortest(spec.period) << '\n'
      << "noise=" << shortest(spec.noise) << '\n'
      << "series=" << spec.series_count << '\n'
      << "length=" << spec.length << '\n'
      << "seed=" << spec.seed << '\n'
      << "start=" << format_timestamp(spec.start) << '\n'
      << "step_seconds=" << spec.step_seconds << '\n';
  return out.str();
}

SyntheticSpec parse_synthetic_manifest(const std::string& text) {
  SyntheticSpec spec;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::data, "manifest line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "kind") {
      if (value == "ar1") spec.kind = SyntheticKind::ar1;
      else if (value == "seasonal") spec.kind = SyntheticKind::seasonal;
      else fail(ErrorKind::data, "unknown synthetic kind " + value);
    } else if (key == "a") spec.a = parse_double(value, key);
    else if (key == "b") spec.b = parse_double(value, key);
    else if (key == "sigma") spec.sigma = parse_double(value, key);
    else if (key == "x0") spec.x0 = parse_double(value, key);
    else if (key == "price_start") spec.price_start = parse_double(value, key);
    else if (key == "level") spec.level = parse_double(value, key);
    else if (key == "amplitude") spec.amplitude = parse_double(value, key);
    else if (key == "period") spec.period = parse_double(value, key);
    else if (key == "noise") spec.noise = parse_double(value, key);
    else if (key == "series") spec.series_count = std::stoull(value);
    else if (key == "length") spec.length = std::stoull(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else if (key == "start") spec.start = parse_timestamp(value);
    else if (key == "step_seconds") spec.step_seconds = std::stoll(value);
    else fail(ErrorKind::data, "unknown manifest key " + key);
  }
  return spec;
}

}  // namespace pfa
