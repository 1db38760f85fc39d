#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "warpimm/linalg.hpp"

namespace warpimm {

using Json = nlohmann::json;

/// Row-major nested arrays.
Json matrixToJson(const MatrixXd& m);
Json vectorToJson(const VectorXd& v);

/// Throws ParseError naming `what` when the shape is wrong.
MatrixXd matrixFromJson(const Json& j, const std::string& what);
VectorXd vectorFromJson(const Json& j, const std::string& what);

const Json& requireField(const Json& doc, const std::string& key, const std::string& context);

}  // namespace warpimm
