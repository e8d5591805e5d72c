#pragma once

// Set selection for column-stochastic dependency matrices: find J with
// |J| >= ceil(N/3) such that every column j in J keeps mass >= 1/3 outside J.

#include "randsat/randcore.hpp"

#include <json.hpp>

#include <stdexcept>
#include <vector>

namespace randsat {

struct DecouplingInstance {
  int n = 0;
  Matrix lambda;  ///< lambda(i, j); columns sum to 1, zero diagonal
};

/// Throws std::invalid_argument naming the violated condition.
void validate(const DecouplingInstance& inst);

enum class DecouplingStatus { found, heuristic_miss };

struct DecouplingResult {
  std::vector<int> j_set;  ///< sorted, 0-based
  int ell = 0;             ///< ceil(N/3)
  double min_outside_mass = 0.0;
  DecouplingStatus status = DecouplingStatus::found;
};

/// min over j in J of sum_{i not in J} lambda(i, j); +inf for empty J.
double min_outside_mass(const DecouplingInstance& inst, const std::vector<int>& j_set);

/// Best-improvement swap search over sets of size ceil(N/3), 50 restarts from
/// `seed`, exhaustive fallback for N <= 15.  The returned J is validated before
/// return.  For N > 15 a search that finds nothing is reported as heuristic_miss.
DecouplingResult find_decoupling_set(const DecouplingInstance& inst, const SeedStream& seed = {});

/// Enumerates sets by increasing size from ceil(N/3); among the valid sets of
/// the smallest size, the lexicographically first with maximal outside mass.
DecouplingResult exhaustive_oracle(const DecouplingInstance& inst);

class InvalidWitness : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Witness {
  int i = 0;
  int j = 0;
  double inner_product = 0.0;  ///< <G x_{i,j}, z_j> after the sign fix
};

/// lambda(i, j) = inner_product / kappa_j; contributions with equal (i, j) add.
DecouplingInstance build_lambda_from_witnesses(int n, const std::vector<double>& kappa,
                                               const std::vector<Witness>& witnesses);

nlohmann::json to_json(const DecouplingInstance& inst);
nlohmann::json to_json(const DecouplingResult& res);

}  // namespace randsat
