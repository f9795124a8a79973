#ifndef KLMC_CONFIG_HPP_
#define KLMC_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "klmc/core.hpp"

namespace klmc {

/// Flat `key = value` run configuration; `#` starts a comment.
///
/// Lists are comma separated. A term `a:b:h` expands to a, a+h, ..., b
/// (inclusive, exact decimal steps). The maturity list also accepts
/// `weekly`, meaning k/52 for k = 1..52T.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& file);

  /// Throws InvalidArgument on a key outside `allowed` or a missing `required` key.
  void validate(const std::set<std::string>& allowed, const std::set<std::string>& required) const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  Index integer(const std::string& key) const;
  Index integer(const std::string& key, Index fallback) const;
  std::uint64_t seed(const std::string& key = "seed") const;
  bool flag(const std::string& key, bool fallback = false) const;

  std::vector<double> numbers(const std::string& key) const;
  std::vector<Index> integers(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;
  /// Maturity list; `weekly` expands against `horizon`.
  std::vector<double> maturities(const std::string& key, double horizon) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace klmc

#endif  // KLMC_CONFIG_HPP_
