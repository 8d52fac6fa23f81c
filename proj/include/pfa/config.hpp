#pragma once

// Flat key=value run configuration. Every key has a default; unknown keys are
// rejected so typos surface as configuration errors.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pfa {

class RunConfig {
 public:
  RunConfig();

  static RunConfig load(const std::string& path);
  /// Lines of `key = value`; `#` starts a comment.
  static RunConfig parse(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool explicitly_set(const std::string& key) const;

  const std::string& get(const std::string& key) const;
  double get_real(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::size_t get_count(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  /// Comma-separated list; empty value gives an empty list.
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_reals(const std::string& key) const;

  /// All keys with their resolved values, sorted, in the loadable format.
  std::string resolved() const;
  void write_resolved(const std::string& path) const;

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> set_;
};

}  // namespace pfa
