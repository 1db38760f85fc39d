#include "warpimm/json_io.hpp"

#include "warpimm/errors.hpp"

namespace warpimm {

Json matrixToJson(const MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json vectorToJson(const VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

MatrixXd matrixFromJson(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::ParseError, what + ": expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) fail(ErrorKind::ParseError, what + ": rows must be arrays");
  const std::size_t cols = j[0].size();
  MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      fail(ErrorKind::ParseError, what + ": ragged matrix", {{"row", r}});
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail(ErrorKind::ParseError, what + ": matrix entries must be numbers", {{"row", r}, {"col", c}});
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

VectorXd vectorFromJson(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorKind::ParseError, what + ": expected an array of numbers");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::ParseError, what + ": entries must be numbers", {{"index", i}});
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

const Json& requireField(const Json& doc, const std::string& key, const std::string& context) {
  if (!doc.is_object() || !doc.contains(key))
    fail(ErrorKind::ParseError, context + ": missing field \"" + key + "\"");
  return doc.at(key);
}

}  // namespace warpimm
