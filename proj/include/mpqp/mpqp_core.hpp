#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mpqp/active_set.hpp"
#include "mpqp/densela.hpp"
#include "mpqp/model.hpp"

namespace mpqp {

/// Primal/dual solution of one equality-constrained KKT system.
struct KktSolution {
  Vector x;
  Vector nu;             // equality duals
  Vector lambda_active;  // duals of the active inequality rows, in index order
};

/// Caches the Cholesky factor of the (possibly regularized) Hessian and
/// L^{-1} [E' A'] so every active set reuses them. The reduced system is
/// S y = A~ P^{-1} t - s with S = A~ P^{-1} A~', where A~ stacks E above the
/// active rows of A.
class KktSystem {
 public:
  /// Throws std::invalid_argument if the effective Hessian is not positive definite.
  explicit KktSystem(const ParametricQP& qp);

  const ParametricQP& qp() const { return qp_; }
  const Matrix& hessian() const { return hessian_; }

  /// Solves [P A~'; A~ 0] [x; y] = [top; bottom] column-wise with one step of
  /// iterative refinement. bottom has me + |active| rows. nullopt when the
  /// active rows violate LICQ.
  std::optional<Matrix> solve(const ActiveSet& active, const Matrix& top, const Matrix& bottom) const;

 private:
  Matrix stacked_rows(const std::vector<int>& active) const;

  ParametricQP qp_;
  Matrix hessian_;
  CholFactor chol_;
  Matrix z_all_;  // L^{-1} [E' A']
};

/// Solves the KKT system for x and the duals (rhs_b stacks f above b_active).
/// nullopt signals an LICQ failure, i.e. skip this active set.
std::optional<KktSolution> kkt_solve(const KktSystem& sys, const ActiveSet& active, const Vector& rhs_q,
                                     const Vector& rhs_b);
std::optional<KktSolution> kkt_solve(const ParametricQP& qp, const ActiveSet& active, const Vector& rhs_q,
                                     const Vector& rhs_b);

/// (x, nu, lambda~) = F theta + g for one active set. Rows are ordered x (n),
/// equality duals (me), active inequality duals (|active|).
struct AffineLaw {
  ActiveSet active;
  Matrix F;
  Vector g;
  int n = 0;
  int me = 0;

  int rows() const { return static_cast<int>(g.size()); }
  int num_active() const { return rows() - n - me; }
  int lambda_offset() const { return n + me; }
};

std::optional<AffineLaw> affine_law(const KktSystem& sys, const ActiveSet& active);
std::optional<AffineLaw> affine_law(const ParametricQP& qp, const ActiveSet& active);

/// Where a region row came from: the primal row of an inactive constraint,
/// the dual-sign row of an active constraint, or a row of Theta.
struct FacetOrigin {
  enum class Kind : std::uint8_t { primal = 0, dual = 1, theta = 2 };
  Kind kind = Kind::primal;
  int index = 0;
  bool operator==(const FacetOrigin&) const = default;
};

/// H theta <= j with one origin tag per row.
struct RegionIneq {
  Matrix H;
  Vector j;
  std::vector<FacetOrigin> origin;

  int rows() const { return static_cast<int>(j.size()); }
};

/// Primal-feasibility rows of the inactive constraints (increasing index),
/// then dual-nonnegativity rows of the active constraints.
RegionIneq region_ineq(const ParametricQP& qp, const AffineLaw& law);

struct KktReport {
  double primal_ineq = 0.0;      // max (Ax - b)_+
  double primal_eq = 0.0;        // max |Ex - f|
  double dual_sign = 0.0;        // max (-lambda)_+
  double stationarity = 0.0;     // ||Px + q + A'lambda + E'nu||_inf
  double complementarity = 0.0;  // max |lambda_i (a_i'x - b_i)|
  bool ok = false;

  double worst() const;
};

/// Optimality residuals at theta. Uses the effective (regularized) Hessian.
KktReport check_kkt(const ParametricQP& qp, const Vector& theta, const Vector& x, const Vector& lambda,
                    const Vector& nu, double tol = 1e-8);

struct OracleOptions {
  double tol = 1e-8;
  /// Largest m accepted; the enumeration is exponential in m.
  int max_m = 25;
};

struct OracleResult {
  bool feasible = false;
  Vector x;
  Vector lambda;  // full length m, zero for inactive rows
  Vector nu;
  ActiveSet active;
};

/// Brute-force solve: enumerate active sets by increasing cardinality
/// (lexicographic within a cardinality) and return the first one passing
/// check_kkt. Infeasibility is certified by a phase-1 LP.
/// Throws SizeLimitError when m > options.max_m.
OracleResult oracle_solve(const KktSystem& sys, const Vector& theta, const OracleOptions& options = {});
OracleResult oracle_solve(const ParametricQP& qp, const Vector& theta, const OracleOptions& options = {});

}  // namespace mpqp
