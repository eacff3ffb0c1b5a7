#include "mpqp/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace mpqp {

namespace {

double number_or_inf(const Json& j, double inf_value) {
  if (j.is_null()) return inf_value;
  if (!j.is_number()) throw FormatError("expected a number or null");
  return j.get<double>();
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

int get_dim(const Json& doc, const char* key, int fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_number_integer() || doc.at(key).get<int>() < 0)
    throw FormatError(std::string("field '") + key + "' must be a nonnegative integer");
  return doc.at(key).get<int>();
}

std::vector<NamedBlock> blocks_from_json(const Json& j, const char* name) {
  std::vector<NamedBlock> out;
  if (!j.is_array()) throw FormatError(std::string(name) + " must be an array");
  for (const auto& e : j) {
    if (e.is_string()) {
      out.push_back({e.get<std::string>(), 1});
    } else if (e.is_object() && e.contains("name")) {
      out.push_back({e.at("name").get<std::string>(), e.value("size", 1)});
    } else {
      throw FormatError(std::string(name) + " entries must be strings or {name, size} objects");
    }
  }
  return out;
}

Json blocks_to_json(const std::vector<NamedBlock>& blocks) {
  Json out = Json::array();
  for (const auto& b : blocks) out.push_back({{"name", b.name}, {"size", b.size}});
  return out;
}

}  // namespace

Json matrix_to_json(const Matrix& M) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Json vector_to_json(const Vector& x) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(number_or_null(x(i)));
  return out;
}

Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw FormatError(std::string("matrix '") + name + "' must have " + std::to_string(rows) + " rows");
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw FormatError(std::string("matrix '") + name + "' row " + std::to_string(i) + " must have " +
                        std::to_string(cols) + " entries");
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!row[k].is_number()) throw FormatError(std::string("matrix '") + name + "' has a non-numeric entry");
      M(i, k) = row[k].get<double>();
    }
  }
  return M;
}

Vector vector_from_json(const Json& j, Eigen::Index size, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
    throw FormatError(std::string("vector '") + name + "' must have length " + std::to_string(size));
  Vector x(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    if (!j[i].is_number()) throw FormatError(std::string("vector '") + name + "' has a non-numeric entry");
    x(i) = j[i].get<double>();
  }
  return x;
}

Json problem_to_json(const Problem& problem) {
  const auto& qp = problem.qp;
  Json doc;
  if (!problem.name.empty()) doc["name"] = problem.name;
  doc["n"] = qp.n();
  doc["m"] = qp.m();
  doc["me"] = qp.me();
  doc["p"] = qp.p();
  doc["regularize"] = qp.regularize;
  doc["P"] = matrix_to_json(qp.P);
  doc["A"] = matrix_to_json(qp.A);
  doc["E"] = matrix_to_json(qp.E);
  doc["u"] = vector_to_json(qp.u);
  doc["U"] = matrix_to_json(qp.U);
  doc["v"] = vector_to_json(qp.v);
  doc["V"] = matrix_to_json(qp.V);
  doc["w"] = vector_to_json(qp.w);
  doc["W"] = matrix_to_json(qp.W);
  doc["theta_G"] = matrix_to_json(qp.theta_set.G);
  doc["theta_h"] = vector_to_json(qp.theta_set.h);
  if (qp.theta_set.has_box()) {
    doc["theta_box_lo"] = vector_to_json(qp.theta_set.box_lo);
    doc["theta_box_hi"] = vector_to_json(qp.theta_set.box_hi);
  }
  const auto& maps = problem.maps;
  Json um;
  um["C"] = matrix_to_json(maps.C);
  um["c"] = vector_to_json(maps.c);
  um["R"] = matrix_to_json(maps.R);
  um["r"] = vector_to_json(maps.r);
  um["param_names"] = blocks_to_json(maps.params);
  um["var_names"] = blocks_to_json(maps.vars);
  um["dual_groups"] = maps.dual_groups;
  doc["user_maps"] = std::move(um);
  return doc;
}

Problem problem_from_json(const Json& doc) {
  if (!doc.is_object()) throw FormatError("problem document must be a JSON object");
  for (const char* key : {"n", "p", "P", "u", "U"})
    if (!doc.contains(key)) throw FormatError(std::string("missing required field '") + key + "'");

  Problem problem;
  problem.name = doc.value("name", std::string());
  auto& qp = problem.qp;
  const int n = get_dim(doc, "n", 0);
  const int m = get_dim(doc, "m", 0);
  const int me = doc.contains("E") ? get_dim(doc, "me", 0) : 0;
  const int p = get_dim(doc, "p", 0);

  qp.regularize = doc.value("regularize", false);
  qp.P = matrix_from_json(doc.at("P"), n, n, "P");
  qp.u = vector_from_json(doc.at("u"), n, "u");
  qp.U = matrix_from_json(doc.at("U"), n, p, "U");
  if (m > 0) {
    for (const char* key : {"A", "v", "V"})
      if (!doc.contains(key)) throw FormatError(std::string("missing required field '") + key + "'");
    qp.A = matrix_from_json(doc.at("A"), m, n, "A");
    qp.v = vector_from_json(doc.at("v"), m, "v");
    qp.V = matrix_from_json(doc.at("V"), m, p, "V");
  } else {
    qp.A = Matrix::Zero(0, n);
    qp.v = Vector::Zero(0);
    qp.V = Matrix::Zero(0, p);
  }
  if (me > 0) {
    for (const char* key : {"w", "W"})
      if (!doc.contains(key)) throw FormatError(std::string("missing required field '") + key + "'");
    qp.E = matrix_from_json(doc.at("E"), me, n, "E");
    qp.w = vector_from_json(doc.at("w"), me, "w");
    qp.W = matrix_from_json(doc.at("W"), me, p, "W");
  } else {
    qp.E = Matrix::Zero(0, n);
    qp.w = Vector::Zero(0);
    qp.W = Matrix::Zero(0, p);
  }

  const Eigen::Index theta_rows = doc.contains("theta_h") ? doc.at("theta_h").size() : 0;
  qp.theta_set.G = theta_rows > 0 ? matrix_from_json(doc.at("theta_G"), theta_rows, p, "theta_G")
                                  : Matrix(Matrix::Zero(0, p));
  qp.theta_set.h = theta_rows > 0 ? vector_from_json(doc.at("theta_h"), theta_rows, "theta_h")
                                  : Vector(Vector::Zero(0));

  if (doc.contains("theta_box_lo") || doc.contains("theta_box_hi")) {
    const double inf = std::numeric_limits<double>::infinity();
    Vector lo = Vector::Constant(p, -inf);
    Vector hi = Vector::Constant(p, inf);
    if (doc.contains("theta_box_lo")) {
      const Json& j = doc.at("theta_box_lo");
      if (!j.is_array() || static_cast<int>(j.size()) != p) throw FormatError("theta_box_lo must have length p");
      for (int i = 0; i < p; ++i) lo(i) = number_or_inf(j[i], -inf);
    }
    if (doc.contains("theta_box_hi")) {
      const Json& j = doc.at("theta_box_hi");
      if (!j.is_array() || static_cast<int>(j.size()) != p) throw FormatError("theta_box_hi must have length p");
      for (int i = 0; i < p; ++i) hi(i) = number_or_inf(j[i], inf);
    }
    // Append any box rows that (G, h) does not already carry.
    const ParamPolyhedron box = ParamPolyhedron::box(lo, hi);
    auto& set = qp.theta_set;
    for (int r = 0; r < box.rows(); ++r) {
      bool present = false;
      for (int k = 0; k < set.rows() && !present; ++k)
        present = set.G.row(k) == box.G.row(r) && set.h(k) == box.h(r);
      if (present) continue;
      set.G.conservativeResize(set.rows() + 1, p);
      set.h.conservativeResize(set.h.size() + 1);
      set.G.row(set.G.rows() - 1) = box.G.row(r);
      set.h(set.h.size() - 1) = box.h(r);
    }
    set.box_lo = lo;
    set.box_hi = hi;
  }

  if (doc.contains("user_maps")) {
    const Json& um = doc.at("user_maps");
    auto& maps = problem.maps;
    const Eigen::Index p_user = um.contains("C") && um.at("C").size() > 0 ? um.at("C")[0].size() : 0;
    maps.C = matrix_from_json(um.at("C"), p, p_user, "C");
    maps.c = um.contains("c") ? vector_from_json(um.at("c"), p, "c") : Vector(Vector::Zero(p));
    const Eigen::Index n_user = um.at("R").size();
    maps.R = matrix_from_json(um.at("R"), n_user, n + m + me, "R");
    maps.r = um.contains("r") ? vector_from_json(um.at("r"), n_user, "r") : Vector(Vector::Zero(n_user));
    maps.params = um.contains("param_names") ? blocks_from_json(um.at("param_names"), "param_names")
                                             : std::vector<NamedBlock>{{"theta", static_cast<int>(p_user)}};
    maps.vars = um.contains("var_names") ? blocks_from_json(um.at("var_names"), "var_names")
                                         : std::vector<NamedBlock>{{"x", static_cast<int>(n_user)}};
    if (um.contains("dual_groups")) {
      maps.dual_groups = um.at("dual_groups").get<std::vector<int>>();
    } else {
      if (m > 0) maps.dual_groups.push_back(m);
      if (me > 0) maps.dual_groups.push_back(me);
    }
  } else {
    problem.maps = UserMaps::identity(n, m, me, p);
  }
  return problem;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open problem file '" + path + "'");
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw FormatError("problem file '" + path + "' is not valid JSON: " + e.what());
  }
  return problem_from_json(doc);
}

void save_problem(const Problem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write problem file '" + path + "'");
  out << problem_to_json(problem).dump(1) << '\n';
}

}  // namespace mpqp
