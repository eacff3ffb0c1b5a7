#include "mpqp/mpqp_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpqp {

KktSystem::KktSystem(const ParametricQP& qp) : qp_(qp), hessian_(effective_hessian(qp)) {
  chol_ = cholesky(hessian_);
  if (!chol_.ok) throw std::invalid_argument("KktSystem: Hessian is not positive definite");
  Matrix rows_t(qp_.n(), qp_.me() + qp_.m());
  if (qp_.me() > 0) rows_t.leftCols(qp_.me()) = qp_.E.transpose();
  if (qp_.m() > 0) rows_t.rightCols(qp_.m()) = qp_.A.transpose();
  z_all_ = forward_substitute(chol_.L, rows_t);
}

Matrix KktSystem::stacked_rows(const std::vector<int>& active) const {
  const int me = qp_.me();
  Matrix out(me + static_cast<int>(active.size()), qp_.n());
  if (me > 0) out.topRows(me) = qp_.E;
  for (std::size_t k = 0; k < active.size(); ++k) out.row(me + k) = qp_.A.row(active[k]);
  return out;
}

std::optional<Matrix> KktSystem::solve(const ActiveSet& active, const Matrix& top, const Matrix& bottom) const {
  const int n = qp_.n();
  const int me = qp_.me();
  const std::vector<int> idx = active.indices();
  const int rows = me + static_cast<int>(idx.size());
  if (top.rows() != n || bottom.rows() != rows || top.cols() != bottom.cols())
    throw DimensionError("KktSystem::solve: right-hand side has wrong shape");
  if (rows > n) return std::nullopt;

  const Matrix At = stacked_rows(idx);
  if (rows > 0 && rank_of(At, 1e-10) < rows) return std::nullopt;

  Matrix Z(n, rows);
  if (me > 0) Z.leftCols(me) = z_all_.leftCols(me);
  for (std::size_t k = 0; k < idx.size(); ++k) Z.col(me + k) = z_all_.col(me + idx[k]);
  const CholFactor schur = cholesky(Z.transpose() * Z);
  if (!schur.ok) return std::nullopt;

  const auto& L = chol_.L;
  auto base_solve = [&](const Matrix& t, const Matrix& s) {
    const Matrix Wt = L.triangularView<Eigen::Lower>().solve(t);
    Matrix y(rows, t.cols());
    if (rows > 0) {
      const Matrix rhs = Z.transpose() * Wt - s;
      y = schur.L.transpose().triangularView<Eigen::Upper>().solve(
          schur.L.triangularView<Eigen::Lower>().solve(rhs));
    }
    const Matrix x = L.transpose().triangularView<Eigen::Upper>().solve(rows > 0 ? Matrix(Wt - Z * y) : Wt);
    Matrix out(n + rows, t.cols());
    out.topRows(n) = x;
    if (rows > 0) out.bottomRows(rows) = y;
    return out;
  };

  Matrix sol = base_solve(top, bottom);
  // One refinement step against the unreduced KKT residual.
  Matrix r_top = top - hessian_ * sol.topRows(n);
  Matrix r_bottom = bottom;
  if (rows > 0) {
    r_top -= At.transpose() * sol.bottomRows(rows);
    r_bottom -= At * sol.topRows(n);
  }
  sol += base_solve(r_top, r_bottom);
  return sol;
}

std::optional<KktSolution> kkt_solve(const KktSystem& sys, const ActiveSet& active, const Vector& rhs_q,
                                     const Vector& rhs_b) {
  const int n = sys.qp().n();
  const int me = sys.qp().me();
  auto sol = sys.solve(active, Matrix(-rhs_q), Matrix(rhs_b));
  if (!sol) return std::nullopt;
  KktSolution out;
  out.x = sol->col(0).head(n);
  out.nu = sol->col(0).segment(n, me);
  out.lambda_active = sol->col(0).tail(sol->rows() - n - me);
  return out;
}

std::optional<KktSolution> kkt_solve(const ParametricQP& qp, const ActiveSet& active, const Vector& rhs_q,
                                     const Vector& rhs_b) {
  return kkt_solve(KktSystem(qp), active, rhs_q, rhs_b);
}

std::optional<AffineLaw> affine_law(const KktSystem& sys, const ActiveSet& active) {
  const auto& qp = sys.qp();
  const int n = qp.n();
  const int p = qp.p();
  const int me = qp.me();
  const std::vector<int> idx = active.indices();
  const int rows = me + static_cast<int>(idx.size());

  Matrix top(n, p + 1);
  top.leftCols(p) = -qp.U;
  top.col(p) = -qp.u;
  Matrix bottom(rows, p + 1);
  if (me > 0) {
    bottom.topLeftCorner(me, p) = qp.W;
    bottom.col(p).head(me) = qp.w;
  }
  for (std::size_t k = 0; k < idx.size(); ++k) {
    bottom.row(me + k).head(p) = qp.V.row(idx[k]);
    bottom(me + k, p) = qp.v(idx[k]);
  }

  auto sol = sys.solve(active, top, bottom);
  if (!sol) return std::nullopt;
  AffineLaw law;
  law.active = active;
  law.F = sol->leftCols(p);
  law.g = sol->col(p);
  law.n = n;
  law.me = me;
  return law;
}

std::optional<AffineLaw> affine_law(const ParametricQP& qp, const ActiveSet& active) {
  return affine_law(KktSystem(qp), active);
}

RegionIneq region_ineq(const ParametricQP& qp, const AffineLaw& law) {
  const int m = qp.m();
  const int p = qp.p();
  const int n = law.n;
  const std::vector<int> idx = law.active.indices();
  const int k = static_cast<int>(idx.size());

  RegionIneq out;
  out.H.resize(m - k + k, p);
  out.j.resize(m);
  out.origin.reserve(m);
  const auto Fx = law.F.topRows(n);
  const auto gx = law.g.head(n);
  int row = 0;
  for (int i = 0; i < m; ++i) {
    if (law.active.contains(i)) continue;
    out.H.row(row) = qp.A.row(i) * Fx - qp.V.row(i);
    out.j(row) = -qp.A.row(i).dot(gx) + qp.v(i);
    out.origin.push_back({FacetOrigin::Kind::primal, i});
    ++row;
  }
  for (int a = 0; a < k; ++a) {
    out.H.row(row) = -law.F.row(law.lambda_offset() + a);
    out.j(row) = law.g(law.lambda_offset() + a);
    out.origin.push_back({FacetOrigin::Kind::dual, idx[a]});
    ++row;
  }
  return out;
}

double KktReport::worst() const {
  return std::max({primal_ineq, primal_eq, dual_sign, stationarity, complementarity});
}

KktReport check_kkt(const ParametricQP& qp, const Vector& theta, const Vector& x, const Vector& lambda,
                    const Vector& nu, double tol) {
  if (x.size() != qp.n() || lambda.size() != qp.m() || nu.size() != qp.me())
    throw DimensionError("check_kkt: vector sizes do not match the problem");
  const QPInstance inst = instantiate(qp, theta);
  KktReport r;
  Vector grad = effective_hessian(qp) * x + inst.q;
  if (qp.m() > 0) {
    const Vector slack = qp.A * x - inst.b;
    r.primal_ineq = std::max(0.0, slack.maxCoeff());
    r.dual_sign = std::max(0.0, (-lambda).maxCoeff());
    r.complementarity = lambda.cwiseProduct(slack).cwiseAbs().maxCoeff();
    grad += qp.A.transpose() * lambda;
  }
  if (qp.me() > 0) {
    r.primal_eq = (qp.E * x - inst.f).cwiseAbs().maxCoeff();
    grad += qp.E.transpose() * nu;
  }
  r.stationarity = qp.n() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  r.ok = r.worst() <= tol;
  return r;
}

OracleResult oracle_solve(const KktSystem& sys, const Vector& theta, const OracleOptions& options) {
  const auto& qp = sys.qp();
  const int m = qp.m();
  const int n = qp.n();
  const int me = qp.me();
  if (m > options.max_m)
    throw SizeLimitError("oracle_solve: m = " + std::to_string(m) + " exceeds the enumeration limit " +
                         std::to_string(options.max_m));
  const QPInstance inst = instantiate(qp, theta);
  const int max_card = std::max(0, std::min(m, n - me));

  std::vector<int> combo;
  Vector rhs_b;
  for (int card = 0; card <= max_card; ++card) {
    combo.resize(card);
    for (int i = 0; i < card; ++i) combo[i] = i;
    while (true) {
      const ActiveSet active = ActiveSet::from_indices(combo);
      rhs_b.resize(me + card);
      rhs_b.head(me) = inst.f;
      for (int i = 0; i < card; ++i) rhs_b(me + i) = inst.b(combo[i]);
      if (auto sol = kkt_solve(sys, active, inst.q, rhs_b)) {
        Vector lambda = Vector::Zero(m);
        for (int i = 0; i < card; ++i) lambda(combo[i]) = sol->lambda_active(i);
        if (check_kkt(qp, theta, sol->x, lambda, sol->nu, options.tol).ok) {
          return OracleResult{true, sol->x, lambda, sol->nu, active};
        }
      }
      // Next combination in lexicographic order.
      int i = card - 1;
      while (i >= 0 && combo[i] == m - card + i) --i;
      if (i < 0) break;
      ++combo[i];
      for (int k = i + 1; k < card; ++k) combo[k] = combo[k - 1] + 1;
    }
  }

  const LpResult phase1 = solve_lp(Vector::Zero(n), qp.A, inst.b, qp.E, inst.f);
  if (phase1.status == LpStatus::infeasible) {
    OracleResult out;
    out.feasible = false;
    return out;
  }
  throw std::runtime_error("oracle_solve: no active set satisfies the KKT conditions at a feasible parameter");
}

OracleResult oracle_solve(const ParametricQP& qp, const Vector& theta, const OracleOptions& options) {
  return oracle_solve(KktSystem(qp), theta, options);
}

}  // namespace mpqp
