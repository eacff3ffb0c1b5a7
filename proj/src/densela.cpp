#include "mpqp/densela.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mpqp {

CholFactor cholesky(const Matrix& P) {
  if (P.rows() != P.cols()) throw DimensionError("cholesky: matrix is not square");
  const Eigen::Index n = P.rows();
  CholFactor out;
  out.L = Matrix::Zero(n, n);
  if (n == 0) {
    out.ok = true;
    return out;
  }

  const double max_diag = P.diagonal().cwiseAbs().maxCoeff();
  const double threshold = 1e-12 * max_diag;
  out.pivot_min = std::numeric_limits<double>::infinity();
  Matrix& L = out.L;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = P(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    out.pivot_min = std::min(out.pivot_min, d);
    if (!(d > threshold)) {
      out.ok = false;
      return out;
    }
    const double ljj = std::sqrt(d);
    L(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = P(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / ljj;
    }
  }
  out.ok = true;
  return out;
}

Vector forward_substitute(const Matrix& L, const Vector& b) {
  const Eigen::Index n = L.rows();
  if (b.size() != n) throw DimensionError("forward_substitute: size mismatch");
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = b(i);
    for (Eigen::Index k = 0; k < i; ++k) s -= L(i, k) * y(k);
    y(i) = s / L(i, i);
  }
  return y;
}

Matrix forward_substitute(const Matrix& L, const Matrix& B) {
  Matrix Y(B.rows(), B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j) Y.col(j) = forward_substitute(L, Vector(B.col(j)));
  return Y;
}

Vector back_substitute_transposed(const Matrix& L, const Vector& y) {
  const Eigen::Index n = L.rows();
  if (y.size() != n) throw DimensionError("back_substitute_transposed: size mismatch");
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = y(i);
    for (Eigen::Index k = i + 1; k < n; ++k) s -= L(k, i) * x(k);
    x(i) = s / L(i, i);
  }
  return x;
}

Vector cholesky_solve(const CholFactor& factor, const Vector& b) {
  return back_substitute_transposed(factor.L, forward_substitute(factor.L, b));
}

int rank_of(const Matrix& M, double tol) {
  Matrix work = M;
  const Eigen::Index rows = work.rows();
  const Eigen::Index cols = work.cols();
  int rank = 0;
  double first_pivot = 0.0;
  for (Eigen::Index step = 0; step < std::min(rows, cols); ++step) {
    Eigen::Index pr = 0;
    Eigen::Index pc = 0;
    const double pivot =
        work.bottomRightCorner(rows - step, cols - step).cwiseAbs().maxCoeff(&pr, &pc);
    if (step == 0) first_pivot = pivot;
    if (pivot == 0.0 || pivot <= tol * first_pivot) break;
    pr += step;
    pc += step;
    work.row(step).swap(work.row(pr));
    work.col(step).swap(work.col(pc));
    for (Eigen::Index i = step + 1; i < rows; ++i) {
      const double factor = work(i, step) / work(step, step);
      work.row(i).tail(cols - step) -= factor * work.row(step).tail(cols - step);
    }
    ++rank;
  }
  return rank;
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-11;

// Dense simplex tableau in canonical form: the basic columns form an identity.
// Row-major so that pivots sweep contiguous rows.
class Tableau {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tableau(Storage rows, std::vector<int> basis, int num_cols)
      : t_(std::move(rows)), basis_(std::move(basis)), allowed_(num_cols, true) {}

  Eigen::Index num_rows() const { return t_.rows(); }
  int num_cols() const { return static_cast<int>(allowed_.size()); }
  double rhs(Eigen::Index i) const { return t_(i, num_cols()); }
  double at(Eigen::Index i, int j) const { return t_(i, j); }
  const std::vector<int>& basis() const { return basis_; }
  void forbid(int j) { allowed_[j] = false; }

  void drop_row(Eigen::Index i) {
    Storage next(t_.rows() - 1, t_.cols());
    next << t_.topRows(i), t_.bottomRows(t_.rows() - i - 1);
    t_ = std::move(next);
    basis_.erase(basis_.begin() + i);
  }

  void pivot(Eigen::Index row, int col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    if (reduced_.size() > 0) {
      const double f = reduced_(col);
      if (f != 0.0) reduced_ -= f * t_.row(row).transpose();
    }
    basis_[row] = col;
  }

  enum class Outcome { optimal, unbounded, stalled };

  // Minimizes cost'y over the current basis with Bland's rule.
  Outcome minimize(const Vector& cost, int max_iter) {
    // Reduced costs (last entry: minus the objective), updated by pivots.
    reduced_ = Vector::Zero(t_.cols());
    reduced_.head(num_cols()) = cost;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      const double cb = cost(basis_[i]);
      if (cb != 0.0) reduced_ -= cb * t_.row(i).transpose();
    }
    Outcome out = Outcome::stalled;
    for (int iter = 0; iter < max_iter; ++iter) {
      int entering = -1;
      for (int j = 0; j < num_cols(); ++j) {
        if (allowed_[j] && reduced_(j) < -kCostTol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) {
        out = Outcome::optimal;
        break;
      }

      Eigen::Index leaving = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < t_.rows(); ++i) {
        const double a = t_(i, entering);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(i) / a;
        if (ratio < best - 1e-12 ||
            (std::abs(ratio - best) <= 1e-12 && basis_[i] < basis_[leaving])) {
          best = std::min(best, ratio);
          leaving = i;
        }
      }
      if (leaving < 0) {
        out = Outcome::unbounded;
        break;
      }
      pivot(leaving, entering);
    }
    reduced_.resize(0);
    return out;
  }

  double value(const Vector& cost) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) s += cost(basis_[i]) * rhs(i);
    return s;
  }

 private:
  Storage t_;
  Vector reduced_;
  std::vector<int> basis_;
  std::vector<bool> allowed_;
};

}  // namespace

LpResult solve_lp(const Vector& c, const Matrix& G, const Vector& h, const Matrix& Geq,
                  const Vector& heq) {
  const Eigen::Index nx = c.size();
  const Eigen::Index mi = G.rows();
  const Eigen::Index meq = Geq.rows();
  if (G.cols() != nx && mi > 0) throw DimensionError("solve_lp: G has wrong column count");
  if (h.size() != mi) throw DimensionError("solve_lp: h has wrong length");
  if (meq > 0 && Geq.cols() != nx) throw DimensionError("solve_lp: Geq has wrong column count");
  if (heq.size() != meq) throw DimensionError("solve_lp: heq has wrong length");

  // Standard form columns: x+ (nx), x- (nx), slacks (mi), artificials.
  const Eigen::Index rows = mi + meq;
  std::vector<bool> needs_art(rows, false);
  Eigen::Index num_art = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const bool is_eq = i >= mi;
    const double b = is_eq ? heq(i - mi) : h(i);
    needs_art[i] = is_eq || b < 0.0;
    if (needs_art[i]) ++num_art;
  }
  const Eigen::Index first_slack = 2 * nx;
  const Eigen::Index first_art = first_slack + mi;
  const Eigen::Index cols = first_art + num_art;

  Tableau::Storage t = Tableau::Storage::Zero(rows, cols + 1);
  std::vector<int> basis(rows, -1);
  Eigen::Index art = first_art;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const bool is_eq = i >= mi;
    Eigen::RowVectorXd a = is_eq ? Eigen::RowVectorXd(Geq.row(i - mi)) : Eigen::RowVectorXd(G.row(i));
    double b = is_eq ? heq(i - mi) : h(i);
    double sign = b < 0.0 ? -1.0 : 1.0;
    t.row(i).head(nx) = sign * a;
    t.row(i).segment(nx, nx) = -sign * a;
    if (!is_eq) t(i, first_slack + i) = sign;
    t(i, cols) = sign * b;
    if (needs_art[i]) {
      t(i, art) = 1.0;
      basis[i] = static_cast<int>(art++);
    } else {
      basis[i] = static_cast<int>(first_slack + i);
    }
  }

  Tableau tab(std::move(t), std::move(basis), static_cast<int>(cols));
  const int max_iter = 200 * static_cast<int>(rows + cols) + 1000;
  LpResult result;

  if (num_art > 0) {
    Vector phase1 = Vector::Zero(cols);
    phase1.tail(num_art).setOnes();
    const auto outcome = tab.minimize(phase1, max_iter);
    if (outcome == Tableau::Outcome::stalled) {
      result.warning = true;
      return result;
    }
    const double scale = std::max({1.0, h.size() ? h.cwiseAbs().maxCoeff() : 0.0,
                                   heq.size() ? heq.cwiseAbs().maxCoeff() : 0.0});
    if (tab.value(phase1) > 1e-9 * scale) return result;

    // Drive remaining (zero-valued) artificials out of the basis.
    for (Eigen::Index i = tab.num_rows() - 1; i >= 0; --i) {
      if (tab.basis()[i] < first_art) continue;
      int col = -1;
      for (int j = 0; j < first_art; ++j) {
        if (std::abs(tab.at(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(i, col);
      } else {
        tab.drop_row(i);
      }
    }
    for (Eigen::Index j = first_art; j < cols; ++j) tab.forbid(static_cast<int>(j));
  }

  Vector phase2 = Vector::Zero(cols);
  phase2.head(nx) = c;
  phase2.segment(nx, nx) = -c;
  const auto outcome = tab.minimize(phase2, max_iter);
  if (outcome == Tableau::Outcome::stalled) {
    result.warning = true;
    return result;
  }
  if (outcome == Tableau::Outcome::unbounded) {
    result.status = LpStatus::unbounded;
    return result;
  }

  Vector y = Vector::Zero(cols);
  for (Eigen::Index i = 0; i < tab.num_rows(); ++i) y(tab.basis()[i]) = tab.rhs(i);
  result.status = LpStatus::optimal;
  result.x = y.head(nx) - y.segment(nx, nx);
  result.objective = c.dot(result.x);
  if (mi > 0 && ((G * result.x - h).maxCoeff() > 1e-8)) result.warning = true;
  if (meq > 0 && ((Geq * result.x - heq).cwiseAbs().maxCoeff() > 1e-8)) result.warning = true;
  return result;
}

std::optional<ChebyshevBall> chebyshev_center(const Matrix& G, const Vector& h) {
  const Eigen::Index p = G.cols();
  const Eigen::Index rows = G.rows();
  Matrix lp_G(rows + 2, p + 1);
  Vector lp_h(rows + 2);
  lp_G.topLeftCorner(rows, p) = G;
  lp_G.block(0, p, rows, 1) = G.rowwise().norm();
  lp_h.head(rows) = h;
  // 0 <= r <= cap
  lp_G.row(rows).setZero();
  lp_G(rows, p) = 1.0;
  lp_h(rows) = kRadiusCap;
  lp_G.row(rows + 1).setZero();
  lp_G(rows + 1, p) = -1.0;
  lp_h(rows + 1) = 0.0;

  Vector cost = Vector::Zero(p + 1);
  cost(p) = -1.0;
  const LpResult lp = solve_lp(cost, lp_G, lp_h);
  if (lp.status != LpStatus::optimal) return std::nullopt;
  return ChebyshevBall{lp.x.head(p), lp.x(p)};
}

}  // namespace mpqp
