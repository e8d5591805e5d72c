#include "randsat/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace randsat {

Constants Constants::defaults() {
  Constants c;
  c.values_ = {{"c1", 1.0},     {"C", 1.0},      {"c_prime", 1.0}, {"C2", 1.0},  {"C_net", 1.0},
               {"beta", 1.0},   {"c0", 1.0},     {"c2", 1.0}, {"c3", 1.0},
               {"c4", 1.0},     {"c5", 1.0},     {"c_case1", 0.1}, {"C_meanwidth", 4.0},
               {"C_prime", 1.0}, {"c_k", 1.0}};
  return c;
}

double Constants::get(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw std::invalid_argument("unknown constant '" + name + "'");
  return it->second;
}

void Constants::set(const std::string& name, double value) {
  if (values_.find(name) == values_.end()) throw std::invalid_argument("unknown constant '" + name + "'");
  if (!std::isfinite(value) || value <= 0.0) throw std::invalid_argument("constant '" + name + "' must be positive");
  values_[name] = value;
}

void Constants::set_from_string(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected KEY=VAL, got '" + assignment + "'");
  std::size_t used = 0;
  const std::string rhs = assignment.substr(eq + 1);
  double v = 0.0;
  try {
    v = std::stod(rhs, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value in '" + assignment + "'");
  }
  if (used != rhs.size()) throw std::invalid_argument("bad value in '" + assignment + "'");
  set(assignment.substr(0, eq), v);
}

void Constants::apply(const std::map<std::string, double>& overrides) {
  for (const auto& [k, v] : overrides) set(k, v);
}

nlohmann::json Constants::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

}  // namespace randsat
