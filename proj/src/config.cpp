#include "klmc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace klmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw InvalidArgument("config: '" + key + "' expects a number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& s) {
  // Integers may be written as powers of two: 2^16.
  const auto caret = s.find('^');
  if (caret != std::string::npos) {
    const long long base = to_integer(key, s.substr(0, caret));
    const long long exp = to_integer(key, s.substr(caret + 1));
    if (exp < 0 || exp > 62) throw InvalidArgument("config: '" + key + "' exponent out of range");
    long long v = 1;
    for (long long i = 0; i < exp; ++i) v *= base;
    return v;
  }
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("config: '" + key + "' expects an integer, got '" + s + "'");
  return v;
}

int decimals(const std::string& s) {
  const auto dot = s.find('.');
  return dot == std::string::npos ? 0 : static_cast<int>(s.size() - dot - 1);
}

std::vector<double> expand_numbers(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& term : split_list(value, ',')) {
    const auto parts = split_list(term, ':');
    if (parts.size() == 1) {
      out.push_back(to_double(key, parts[0]));
      continue;
    }
    if (parts.size() != 3) throw InvalidArgument("config: '" + key + "' range must be a:b:h");
    const double a = to_double(key, parts[0]), b = to_double(key, parts[1]),
                 h = to_double(key, parts[2]);
    if (!(h > 0) || b < a) throw InvalidArgument("config: '" + key + "' range needs h > 0, a <= b");
    const double scale =
        std::pow(10.0, std::max({decimals(parts[0]), decimals(parts[1]), decimals(parts[2])}));
    const auto count = static_cast<long long>(std::floor((b - a) / h + 1e-9));
    for (long long i = 0; i <= count; ++i) out.push_back(std::round((a + double(i) * h) * scale) / scale);
  }
  if (out.empty()) throw InvalidArgument("config: '" + key + "' is an empty list");
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw InvalidArgument("config line " + std::to_string(line_no) + ": empty key or value");
    if (cfg.values_.count(key))
      throw InvalidArgument("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InvalidArgument("config: cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::validate(const std::set<std::string>& allowed,
                         const std::set<std::string>& required) const {
  for (const auto& [key, value] : values_)
    if (!allowed.count(key)) throw InvalidArgument("config: unknown key '" + key + "'");
  for (const auto& key : required)
    if (!values_.count(key)) throw InvalidArgument("config: missing required key '" + key + "'");
}

std::string RunConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("config: missing required key '" + key + "'");
  return it->second;
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double RunConfig::number(const std::string& key) const { return to_double(key, text(key)); }

double RunConfig::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

Index RunConfig::integer(const std::string& key) const {
  return static_cast<Index>(to_integer(key, text(key)));
}

Index RunConfig::integer(const std::string& key, Index fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t RunConfig::seed(const std::string& key) const {
  const std::string s = text(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("config: '" + key + "' expects an unsigned 64-bit integer");
  return v;
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = text(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidArgument("config: '" + key + "' expects true or false");
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  return expand_numbers(key, text(key));
}

std::vector<Index> RunConfig::integers(const std::string& key) const {
  std::vector<Index> out;
  for (const auto& term : split_list(text(key), ',')) {
    const auto parts = split_list(term, ':');
    if (parts.size() == 1) {
      out.push_back(static_cast<Index>(to_integer(key, parts[0])));
      continue;
    }
    if (parts.size() != 2 && parts.size() != 3)
      throw InvalidArgument("config: '" + key + "' range must be a:b or a:b:h");
    const long long a = to_integer(key, parts[0]), b = to_integer(key, parts[1]);
    const long long h = parts.size() == 3 ? to_integer(key, parts[2]) : 1;
    if (h <= 0 || b < a) throw InvalidArgument("config: '" + key + "' range needs h > 0, a <= b");
    for (long long v = a; v <= b; v += h) out.push_back(static_cast<Index>(v));
  }
  if (out.empty()) throw InvalidArgument("config: '" + key + "' is an empty list");
  return out;
}

std::vector<std::string> RunConfig::words(const std::string& key) const {
  auto out = split_list(text(key), ',');
  if (out.empty()) throw InvalidArgument("config: '" + key + "' is an empty list");
  return out;
}

std::vector<double> RunConfig::maturities(const std::string& key, double horizon) const {
  if (text(key) != "weekly") return numbers(key);
  const auto weeks = static_cast<long long>(std::llround(52.0 * horizon));
  if (weeks < 1) throw InvalidArgument("config: weekly maturities need T >= 1/52");
  std::vector<double> out;
  for (long long k = 1; k <= weeks; ++k) out.push_back(double(k) / 52.0);
  return out;
}

}  // namespace klmc
