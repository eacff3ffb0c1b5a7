#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mpqp/pointlocate.hpp"

namespace mpqp {

enum class SolveStatus { optimal, infeasible };

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  Vector theta;   // clamped parameter actually used
  Vector x;
  Vector lambda;  // all m multipliers, zero for inactive rows
  Vector nu;
  int region_index = -1;
};

/// Clips every coordinate that has box bounds into [lo, hi].
Vector clamp_param(const ExplicitSolution& solution, const Vector& theta_raw);

/// 0.5 x'Px + q(theta)'x with the unregularized P.
double objective_value(const ParametricQP& qp, const Vector& theta, const Vector& x);

/// Operation counts of one online evaluation.
struct OpCounts {
  std::int64_t add = 0, sub = 0, mul = 0, div = 0, cmp = 0;
  std::int64_t arithmetic() const { return add + sub + mul + div + cmp; }
};

/// Scalar that records every arithmetic operation applied to it.
class TracedReal {
 public:
  TracedReal() = default;
  explicit TracedReal(double v) : v_(v) {}
  double value() const { return v_; }

  static OpCounts& counts();
  static void reset() { counts() = OpCounts{}; }

  friend TracedReal operator+(TracedReal a, TracedReal b) { ++counts().add; return TracedReal(a.v_ + b.v_); }
  friend TracedReal operator-(TracedReal a, TracedReal b) { ++counts().sub; return TracedReal(a.v_ - b.v_); }
  friend TracedReal operator*(TracedReal a, TracedReal b) { ++counts().mul; return TracedReal(a.v_ * b.v_); }
  friend TracedReal operator/(TracedReal a, TracedReal b) { ++counts().div; return TracedReal(a.v_ / b.v_); }
  friend bool operator<(TracedReal a, TracedReal b) { ++counts().cmp; return a.v_ < b.v_; }
  friend bool operator>(TracedReal a, TracedReal b) { ++counts().cmp; return a.v_ > b.v_; }
  friend bool operator<=(TracedReal a, TracedReal b) { ++counts().cmp; return a.v_ <= b.v_; }
  friend bool operator>=(TracedReal a, TracedReal b) { ++counts().cmp; return a.v_ >= b.v_; }

 private:
  double v_ = 0.0;
};

/// Scratch space for Evaluator::eval_into; sized once, reused per call.
struct Workspace {
  std::vector<double> theta;
  std::vector<double> law;
};

/// Online evaluator over flat, row-major copies of the solution data.
/// Immutable after construction, so one instance serves concurrent callers
/// that each own a Workspace.
class Evaluator {
 public:
  explicit Evaluator(const ExplicitSolution& solution, const SearchTree* tree = nullptr);

  Workspace make_workspace() const;
  /// Result with vectors already sized for eval_into.
  SolveResult make_result() const;

  SolveResult eval(const Vector& theta_raw) const;
  /// Allocation-free when ws and out come from make_workspace/make_result.
  void eval_into(const Vector& theta_raw, Workspace& ws, SolveResult& out) const;

  /// Runs the arithmetic path on TracedReal and returns its counts.
  OpCounts trace(const Vector& theta_raw) const;

  int p() const { return p_; }

 private:
  template <typename Real>
  int kernel(const double* theta_raw, Real* theta, Real* law) const;

  struct Region {
    int law_rows, law_at;   // into law_F (law_rows * p) and law_g
    int rows, ineq_at;      // into ineq_H and ineq_j
    int active_at, active;  // into active_idx
  };

  int p_ = 0, n_ = 0, m_ = 0, me_ = 0, max_law_rows_ = 0;
  std::vector<double> box_lo_, box_hi_;
  std::vector<char> has_lo_, has_hi_;
  std::vector<Region> regions_;
  std::vector<double> law_F_, law_g_, ineq_H_, ineq_j_;
  std::vector<int> active_idx_;
  bool has_tree_ = false;
  std::int32_t root_ = -1;
  std::vector<double> node_normal_, node_offset_;
  std::vector<std::int32_t> node_low_, node_high_;
  std::vector<int> leaf_at_, leaf_len_, leaf_regions_;
};

/// One-off evaluation; builds an Evaluator internally.
SolveResult eval(const ExplicitSolution& solution, const SearchTree* tree, const Vector& theta_raw);

struct UserSolveResult {
  Vector x_user;  // empty when infeasible
  SolveResult result;
};

/// Maps theta_user through (C, c), evaluates, and retrieves R z + r with
/// z = (x, lambda, nu).
UserSolveResult eval_user(const ExplicitSolution& solution, const SearchTree* tree, const Vector& theta_user_raw);

/// Worst-case add/sub/mul/compare count of one evaluation.
std::int64_t flop_bound(const ExplicitSolution& solution, const SearchTree* tree);

}  // namespace mpqp
