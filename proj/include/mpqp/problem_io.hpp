#pragma once

#include <json.hpp>

#include <string>

#include "mpqp/model.hpp"

namespace mpqp {

using Json = nlohmann::json;

// Dense matrices are arrays of rows; vectors are flat arrays. Infinite box
// bounds are written as null.
Json matrix_to_json(const Matrix& M);
Json vector_to_json(const Vector& x);
Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols, const char* name);
Vector vector_from_json(const Json& j, Eigen::Index size, const char* name);

Json problem_to_json(const Problem& problem);
/// Parses a problem document. Absent equality block means me = 0, absent
/// user_maps means identity maps. Missing box rows are appended to (G, h).
Problem problem_from_json(const Json& doc);

Problem load_problem(const std::string& path);
void save_problem(const Problem& problem, const std::string& path);

}  // namespace mpqp
