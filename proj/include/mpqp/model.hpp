#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "mpqp/errors.hpp"

namespace mpqp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Upper limit on the number of inequality rows (active sets are fixed-width bit strings).
inline constexpr int kMaxInequalities = 1024;

/// Parameter set Theta = {theta : G theta <= h}. The optional box is kept
/// separately for clamping; every finite box bound also appears as a row of (G, h).
struct ParamPolyhedron {
  Matrix G;
  Vector h;
  Vector box_lo;  // -inf where unbounded; empty when no box at all
  Vector box_hi;  // +inf where unbounded

  int rows() const { return static_cast<int>(h.size()); }
  bool has_box() const { return box_lo.size() > 0; }

  /// Box-only polyhedron lo <= theta <= hi (rows ordered +e_0, -e_0, +e_1, ...).
  static ParamPolyhedron box(const Vector& lo, const Vector& hi);
  /// Unconstrained Theta = R^p.
  static ParamPolyhedron whole_space(int p);

  bool contains(const Vector& theta, double tol = 1e-9) const;
};

/// A labelled block of consecutive coordinates (a user parameter or variable).
struct NamedBlock {
  std::string name;
  int size = 1;
};

/// Affine translations between user space and canonical space:
/// theta = C theta_user + c and x_user = R z + r with z = (x, lambda, nu).
struct UserMaps {
  Matrix C;
  Vector c;
  Matrix R;
  Vector r;
  std::vector<NamedBlock> params;
  std::vector<NamedBlock> vars;
  /// Sizes of dual groups over the stacked (lambda, nu) rows, in constraint order.
  std::vector<int> dual_groups;

  int p_user() const { return static_cast<int>(C.cols()); }
  int n_user() const { return static_cast<int>(R.rows()); }

  /// Identity canonicalization: theta_user = theta, x_user = x.
  static UserMaps identity(int n, int m, int me, int p);
};

/// minimize 1/2 x'Px + q'x  s.t.  A x <= b,  E x = f
/// with q = u + U theta, b = v + V theta, f = w + W theta and theta in Theta.
struct ParametricQP {
  Matrix P;
  Matrix A;
  Matrix E;
  Vector u;
  Matrix U;
  Vector v;
  Matrix V;
  Vector w;
  Matrix W;
  ParamPolyhedron theta_set;
  /// Opt-in Tikhonov term P + eps I for semidefinite P.
  bool regularize = false;

  int n() const { return static_cast<int>(P.rows()); }
  int m() const { return static_cast<int>(A.rows()); }
  int me() const { return static_cast<int>(E.rows()); }
  int p() const { return static_cast<int>(U.cols()); }
};

/// A problem file: canonical QP plus user-space maps and a display name.
struct Problem {
  std::string name;
  ParametricQP qp;
  UserMaps maps;
};

/// Numeric QP data for one parameter value.
struct QPInstance {
  Vector q;
  Vector b;
  Vector f;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// eps = 1e-8 * trace(P) / n when regularization is on, else 0.
double regularization_epsilon(const ParametricQP& qp);
/// The Hessian actually used by every solve: P or P + eps I.
Matrix effective_hessian(const ParametricQP& qp);

ValidationReport validate(const ParametricQP& qp);
ValidationReport validate(const Problem& problem);

QPInstance instantiate(const ParametricQP& qp, const Vector& theta);

Vector map_user_params(const UserMaps& maps, const Vector& theta_user);
Vector retrieve_user_solution(const UserMaps& maps, const Vector& z);

/// Stable 64-bit content hash of all problem data (FNV-1a over the raw bytes).
std::uint64_t content_hash(const ParametricQP& qp);

}  // namespace mpqp
