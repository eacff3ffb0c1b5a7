#pragma once

#include <optional>

#include "mpqp/model.hpp"

namespace mpqp {

/// Lower-triangular factor with P = L L'. ok is false when a pivot drops
/// below 1e-12 times the largest diagonal entry.
struct CholFactor {
  Matrix L;
  bool ok = false;
  double pivot_min = 0.0;
};

CholFactor cholesky(const Matrix& P);

/// Solves L y = b for lower-triangular L (column-wise for matrix right-hand sides).
Vector forward_substitute(const Matrix& L, const Vector& b);
Matrix forward_substitute(const Matrix& L, const Matrix& B);
/// Solves L' x = y.
Vector back_substitute_transposed(const Matrix& L, const Vector& y);
/// Solves P x = b given P = L L'.
Vector cholesky_solve(const CholFactor& factor, const Vector& b);

/// Numerical rank by completely pivoted elimination. Pivots smaller than
/// tol times the first (largest) pivot count as zero.
int rank_of(const Matrix& M, double tol = 1e-10);

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective = 0.0;
  /// Set when the simplex hit a near-singular pivot or its iteration cap.
  bool warning = false;
};

/// minimize c'x  s.t.  G x <= h,  Geq x = heq  (x free).
/// Dense two-phase tableau simplex with Bland's rule. Pass an empty Geq for
/// no equality rows.
LpResult solve_lp(const Vector& c, const Matrix& G, const Vector& h,
                  const Matrix& Geq = Matrix(), const Vector& heq = Vector());

/// Radius reported for unbounded inscribed balls.
inline constexpr double kRadiusCap = 1e6;

struct ChebyshevBall {
  Vector center;
  double radius = 0.0;
};

/// Largest ball inside {x : G x <= h}, radius capped at kRadiusCap.
/// nullopt when the polyhedron is empty.
std::optional<ChebyshevBall> chebyshev_center(const Matrix& G, const Vector& h);

}  // namespace mpqp
