#include "mpqp/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "mpqp/densela.hpp"

namespace mpqp {

ParamPolyhedron ParamPolyhedron::box(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size()) throw DimensionError("box: lo/hi length mismatch");
  const Eigen::Index p = lo.size();
  ParamPolyhedron out;
  int count = 0;
  for (Eigen::Index i = 0; i < p; ++i) count += std::isfinite(hi(i)) + std::isfinite(lo(i));
  out.G = Matrix::Zero(count, p);
  out.h = Vector::Zero(count);
  int row = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::isfinite(hi(i))) {
      out.G(row, i) = 1.0;
      out.h(row++) = hi(i);
    }
    if (std::isfinite(lo(i))) {
      out.G(row, i) = -1.0;
      out.h(row++) = -lo(i);
    }
  }
  out.box_lo = lo;
  out.box_hi = hi;
  return out;
}

ParamPolyhedron ParamPolyhedron::whole_space(int p) {
  ParamPolyhedron out;
  out.G = Matrix::Zero(0, p);
  out.h = Vector::Zero(0);
  return out;
}

bool ParamPolyhedron::contains(const Vector& theta, double tol) const {
  if (rows() == 0) return true;
  return (G * theta - h).maxCoeff() <= tol;
}

UserMaps UserMaps::identity(int n, int m, int me, int p) {
  UserMaps maps;
  maps.C = Matrix::Identity(p, p);
  maps.c = Vector::Zero(p);
  maps.R = Matrix::Zero(n, n + m + me);
  maps.R.leftCols(n).setIdentity();
  maps.r = Vector::Zero(n);
  if (p > 0) maps.params.push_back({"theta", p});
  if (n > 0) maps.vars.push_back({"x", n});
  if (m > 0) maps.dual_groups.push_back(m);
  if (me > 0) maps.dual_groups.push_back(me);
  return maps;
}

double regularization_epsilon(const ParametricQP& qp) {
  if (!qp.regularize || qp.n() == 0) return 0.0;
  return 1e-8 * qp.P.trace() / qp.n();
}

Matrix effective_hessian(const ParametricQP& qp) {
  Matrix P = qp.P;
  const double eps = regularization_epsilon(qp);
  if (eps > 0.0) P.diagonal().array() += eps;
  return P;
}

namespace {

void check_shape(std::vector<std::string>& out, const char* name, Eigen::Index rows,
                 Eigen::Index cols, Eigen::Index want_rows, Eigen::Index want_cols) {
  if (rows == want_rows && cols == want_cols) return;
  // Empty blocks with zero rows may carry any column count.
  if (rows == 0 && want_rows == 0) return;
  std::ostringstream msg;
  msg << "dimension mismatch: " << name << " is " << rows << "x" << cols << ", expected "
      << want_rows << "x" << want_cols;
  out.push_back(msg.str());
}

}  // namespace

ValidationReport validate(const ParametricQP& qp) {
  ValidationReport report;
  auto& v = report.violations;
  const Eigen::Index n = qp.P.rows();
  const Eigen::Index m = qp.A.rows();
  const Eigen::Index me = qp.E.rows();
  const Eigen::Index p = qp.U.cols();

  check_shape(v, "P", qp.P.rows(), qp.P.cols(), n, n);
  check_shape(v, "A", m, qp.A.cols(), m, n);
  check_shape(v, "E", me, qp.E.cols(), me, n);
  check_shape(v, "u", qp.u.size(), 1, n, 1);
  check_shape(v, "U", qp.U.rows(), qp.U.cols(), n, p);
  check_shape(v, "v", qp.v.size(), 1, m, 1);
  check_shape(v, "V", qp.V.rows(), qp.V.cols(), m, p);
  check_shape(v, "w", qp.w.size(), 1, me, 1);
  check_shape(v, "W", qp.W.rows(), qp.W.cols(), me, p);
  check_shape(v, "theta_G", qp.theta_set.G.rows(), qp.theta_set.G.cols(), qp.theta_set.h.size(), p);
  if (qp.theta_set.has_box()) {
    check_shape(v, "theta_box_lo", qp.theta_set.box_lo.size(), 1, p, 1);
    check_shape(v, "theta_box_hi", qp.theta_set.box_hi.size(), 1, p, 1);
  }

  if (m > kMaxInequalities) {
    v.push_back("m exceeds 1024 (m = " + std::to_string(m) + ")");
  }
  if (!v.empty()) return report;

  if (n > 0) {
    const double scale = std::max(1.0, qp.P.cwiseAbs().maxCoeff());
    if ((qp.P - qp.P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      v.push_back("P is not symmetric");
    } else if (!cholesky(effective_hessian(qp)).ok) {
      v.push_back(qp.regularize ? "P is not positive definite even after regularization"
                                : "P is not positive definite (enable regularization for PSD P)");
    }
  }

  const auto& box_lo = qp.theta_set.box_lo;
  const auto& box_hi = qp.theta_set.box_hi;
  if (qp.theta_set.has_box()) {
    for (Eigen::Index i = 0; i < p; ++i) {
      for (int side = 0; side < 2; ++side) {
        const double bound = side == 0 ? box_hi(i) : -box_lo(i);
        if (!std::isfinite(bound)) continue;
        const double sign = side == 0 ? 1.0 : -1.0;
        bool found = false;
        for (int r = 0; r < qp.theta_set.rows() && !found; ++r) {
          Vector e = Vector::Zero(p);
          e(i) = sign;
          found = (qp.theta_set.G.row(r).transpose() - e).cwiseAbs().maxCoeff() == 0.0 &&
                  qp.theta_set.h(r) == bound;
        }
        if (!found) v.push_back("box bound of theta[" + std::to_string(i) + "] is not a row of (G, h)");
      }
    }
  }

  if (qp.theta_set.rows() > 0) {
    const LpResult lp = solve_lp(Vector::Zero(p), qp.theta_set.G, qp.theta_set.h);
    if (lp.status == LpStatus::infeasible) v.push_back("empty parameter set");
  }
  return report;
}

ValidationReport validate(const Problem& problem) {
  ValidationReport report = validate(problem.qp);
  const auto& qp = problem.qp;
  const auto& maps = problem.maps;
  auto& v = report.violations;
  const Eigen::Index z = qp.n() + qp.m() + qp.me();
  if (maps.C.rows() != qp.p()) v.push_back("dimension mismatch: C must have p rows");
  if (maps.c.size() != qp.p()) v.push_back("dimension mismatch: c must have length p");
  if (maps.R.cols() != z) v.push_back("dimension mismatch: R must have n+m+me columns");
  if (maps.r.size() != maps.R.rows()) v.push_back("dimension mismatch: r must match rows of R");
  int psum = 0;
  for (const auto& b : maps.params) psum += b.size;
  int vsum = 0;
  for (const auto& b : maps.vars) vsum += b.size;
  int dsum = 0;
  for (int d : maps.dual_groups) dsum += d;
  if (psum != maps.C.cols()) v.push_back("dimension mismatch: param_names sizes must sum to columns of C");
  if (vsum != maps.R.rows()) v.push_back("dimension mismatch: var_names sizes must sum to rows of R");
  if (dsum != qp.m() + qp.me()) v.push_back("dimension mismatch: dual_groups must sum to m+me");
  return report;
}

QPInstance instantiate(const ParametricQP& qp, const Vector& theta) {
  if (theta.size() != qp.p()) throw DimensionError("instantiate: theta has wrong length");
  QPInstance inst;
  inst.q = qp.u + qp.U * theta;
  inst.b = qp.m() > 0 ? Vector(qp.v + qp.V * theta) : Vector(0);
  inst.f = qp.me() > 0 ? Vector(qp.w + qp.W * theta) : Vector(0);
  return inst;
}

Vector map_user_params(const UserMaps& maps, const Vector& theta_user) {
  if (theta_user.size() != maps.C.cols()) throw DimensionError("map_user_params: theta_user has wrong length");
  return maps.C * theta_user + maps.c;
}

Vector retrieve_user_solution(const UserMaps& maps, const Vector& z) {
  if (z.size() != maps.R.cols()) throw DimensionError("retrieve_user_solution: z has wrong length");
  return maps.R * z + maps.r;
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void matrix(const Matrix& M) {
    const std::int64_t dims[2] = {M.rows(), M.cols()};
    bytes(dims, sizeof dims);
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const double x = M(i, j);
        bytes(&x, sizeof x);
      }
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t content_hash(const ParametricQP& qp) {
  Fnv1a h;
  for (const Matrix* M : {&qp.P, &qp.A, &qp.E, &qp.U, &qp.V, &qp.W, &qp.theta_set.G}) h.matrix(*M);
  for (const Vector* x : {&qp.u, &qp.v, &qp.w, &qp.theta_set.h, &qp.theta_set.box_lo, &qp.theta_set.box_hi})
    h.matrix(*x);
  const char reg = qp.regularize ? 1 : 0;
  h.bytes(&reg, 1);
  return h.value();
}

}  // namespace mpqp
