#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fkpp/levy.hpp"
#include "fkpp/reaction.hpp"

namespace fkpp {

/// Plain-text `key=value` settings. Blank lines and `#` comments are ignored;
/// later assignments override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_string(std::string_view text);
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  double get_real(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

double parse_real(std::string_view text);
std::int64_t parse_int(std::string_view text);
/// "1,2,4.5"
std::vector<double> parse_real_list(std::string_view text);
/// "0.5:0.25,1.0:0.75" as size:prob pairs.
std::vector<JumpAtom> parse_jumps(std::string_view text);
/// "0:0.25,2:0.75" as k:p_k pairs.
OffspringLaw parse_offspring(std::string_view text);

/// Keys: drift, sigma, jump_intensity, jumps, theta_max. Missing keys take
/// the standard Brownian defaults (drift 0, sigma 1, no jumps).
LevyModel levy_model_from(const KeyValueConfig& config);
/// Key: offspring (default dyadic "2:1").
OffspringLaw offspring_from(const KeyValueConfig& config);

}  // namespace fkpp
