#include "fkpp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fkpp/errors.hpp"

namespace fkpp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::pair<std::string_view, std::string_view> split_pair(std::string_view item) {
  const auto colon = item.find(':');
  if (colon == std::string_view::npos)
    throw ConfigError(fmt::format("expected 'a:b', got '{}'", item));
  return {trim(item.substr(0, colon)), trim(item.substr(colon + 1))};
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("config line {}: expected key=value", lineno));
    const auto key = trim(view.substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("config line {}: empty key", lineno));
    cfg.set(std::string(key), std::string(trim(view.substr(eq + 1))));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  return parse(in);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

double KeyValueConfig::get_real(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_real(*v) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = get(key);
  return v ? parse_int(*v) : fallback;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double parse_real(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(fmt::format("not a number: '{}'", text));
  return value;
}

std::int64_t parse_int(std::string_view text) {
  text = trim(text);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    // Accept integral reals such as 1e5.
    const double real = parse_real(text);
    if (!(std::abs(real) < 9.0e18) || real != std::trunc(real))
      throw ConfigError(fmt::format("not an integer: '{}'", text));
    return static_cast<std::int64_t>(real);
  }
  return value;
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto item : split(text, ',')) out.push_back(parse_real(item));
  return out;
}

std::vector<JumpAtom> parse_jumps(std::string_view text) {
  std::vector<JumpAtom> out;
  if (trim(text).empty()) return out;
  for (auto item : split(text, ',')) {
    const auto [size, prob] = split_pair(item);
    out.push_back({parse_real(size), parse_real(prob)});
  }
  return out;
}

OffspringLaw parse_offspring(std::string_view text) {
  std::vector<std::pair<std::size_t, double>> pairs;
  for (auto item : split(text, ',')) {
    const auto [k, p] = split_pair(item);
    const auto count = parse_int(k);
    if (count < 0) throw ConfigError(fmt::format("negative offspring count in '{}'", item));
    pairs.emplace_back(static_cast<std::size_t>(count), parse_real(p));
  }
  try {
    return OffspringLaw::from_pairs(pairs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

LevyModel levy_model_from(const KeyValueConfig& config) {
  LevyModel model;
  model.drift = config.get_real("drift", 0.0);
  model.diffusion = config.get_real("sigma", 1.0);
  model.jump_intensity = config.get_real("jump_intensity", 0.0);
  model.jumps = parse_jumps(config.get_string("jumps", ""));
  model.theta_max = config.get_real("theta_max", 50.0);
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return model;
}

OffspringLaw offspring_from(const KeyValueConfig& config) {
  return parse_offspring(config.get_string("offspring", "2:1"));
}

}  // namespace fkpp
