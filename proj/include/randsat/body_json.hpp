#pragma once

// Canonical JSON AST for bodies: {"type": <tag>, ...children}, matrices as
// {"rows": r, "cols": c, "data": [row-major entries]}.

#include "randsat/body.hpp"

#include <json.hpp>

namespace randsat {

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json body_to_json(const Body& body);
Body body_from_json(const nlohmann::json& j);

}  // namespace randsat
