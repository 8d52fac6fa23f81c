#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pfa/error.hpp"
#include "pfa/model.hpp"

namespace pfa {

namespace {

constexpr const char* kMagic = "pfa-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_hex(const std::string& token) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    fail(ErrorKind::data, "checkpoint: malformed number '" + token + "'");
  return v;
}

}  // namespace

std::string checkpoint_to_string(const ForecastModel& model) {
  std::ostringstream out;
  const auto flat = model.flatten();
  out << kMagic << ' ' << kVersion << '\n';
  out << "layers " << model.layer_count() << '\n';
  out << "hidden " << model.hidden_size() << '\n';
  out << "params " << flat.size() << '\n';
  for (double v : flat) out << hex(v) << '\n';
  out << "end\n";
  return out.str();
}

ForecastModel checkpoint_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string magic, key;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) fail(ErrorKind::data, "not a model checkpoint");
  if (version != kVersion) fail(ErrorKind::data, "unsupported checkpoint version " + std::to_string(version));
  int layers = 0, hidden = 0;
  std::size_t count = 0;
  if (!(in >> key >> layers) || key != "layers") fail(ErrorKind::data, "checkpoint: expected 'layers'");
  if (!(in >> key >> hidden) || key != "hidden") fail(ErrorKind::data, "checkpoint: expected 'hidden'");
  if (!(in >> key >> count) || key != "params") fail(ErrorKind::data, "checkpoint: expected 'params'");
  if (layers < 1 || hidden < 1) fail(ErrorKind::data, "checkpoint: invalid architecture");
  ForecastModel model = ForecastModel::zeros(layers, hidden);
  if (count != model.parameter_count()) fail(ErrorKind::data, "checkpoint: parameter count does not match architecture");
  std::vector<double> flat(count);
  std::string token;
  for (auto& v : flat) {
    if (!(in >> token)) fail(ErrorKind::data, "checkpoint: truncated parameter list");
    v = parse_hex(token);
  }
  if (!(in >> token) || token != "end") fail(ErrorKind::data, "checkpoint: missing end marker");
  model.assign(flat);
  if (!model.all_finite()) fail(ErrorKind::data, "checkpoint: non-finite parameters");
  return model;
}

void save_checkpoint(const ForecastModel& model, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write checkpoint " + path);
    out << checkpoint_to_string(model);
    if (!out) fail(ErrorKind::io, "failed writing checkpoint " + path);
  }
  std::filesystem::rename(tmp, path);
}

ForecastModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data, "cannot read checkpoint " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace pfa
