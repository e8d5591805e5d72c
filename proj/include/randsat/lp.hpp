#pragma once

// Dense tableau simplex for small problems of the form
//   maximize c^T z  subject to  A z <= b,  z >= 0,  with b >= 0,
// so the origin is always feasible and no phase one is needed.

#include "randsat/randcore.hpp"

namespace randsat::lp {

/// numerical_failure: the final basis violates a constraint beyond round-off.
enum class Status { optimal, unbounded, iteration_limit, numerical_failure };

struct Result {
  Status status = Status::iteration_limit;
  double value = 0.0;
  Vector z;
};

Result maximize(const Vector& c, const Matrix& a, const Vector& b, int max_pivots = 20000);

}  // namespace randsat::lp
