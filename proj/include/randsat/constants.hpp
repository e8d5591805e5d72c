#pragma once

// Named universal constants.  Their values are not fixed by the theory, so
// every experiment may override them and every report embeds a snapshot.

#include <json.hpp>

#include <map>
#include <string>

namespace randsat {

class Constants {
 public:
  /// c0..c5, C, c_prime, C_prime, c_k, C2, C_net, beta = 1; c_case1 = 0.1;
  /// C_meanwidth = 4.
  static Constants defaults();

  /// Throws std::invalid_argument for an unknown name.
  [[nodiscard]] double get(const std::string& name) const;
  /// Only known names may be set; values must be finite and positive.
  void set(const std::string& name, double value);
  /// Parses "KEY=VAL".
  void set_from_string(const std::string& assignment);
  void apply(const std::map<std::string, double>& overrides);

  [[nodiscard]] const std::map<std::string, double>& values() const { return values_; }
  [[nodiscard]] nlohmann::json to_json() const;

 private:
  std::map<std::string, double> values_;
};

}  // namespace randsat
