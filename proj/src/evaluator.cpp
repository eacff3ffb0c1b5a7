#include "mpqp/evaluator.hpp"

#include <algorithm>
#include <cmath>

namespace mpqp {

Vector clamp_param(const ExplicitSolution& solution, const Vector& theta_raw) {
  const auto& set = solution.qp().theta_set;
  if (theta_raw.size() != solution.qp().p()) throw DimensionError("clamp_param: theta has wrong length");
  Vector theta = theta_raw;
  if (!set.has_box()) return theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (std::isfinite(set.box_lo(i)) && theta(i) < set.box_lo(i)) {
      theta(i) = set.box_lo(i);
    } else if (std::isfinite(set.box_hi(i)) && theta(i) > set.box_hi(i)) {
      theta(i) = set.box_hi(i);
    }
  }
  return theta;
}

double objective_value(const ParametricQP& qp, const Vector& theta, const Vector& x) {
  if (x.size() != qp.n()) throw DimensionError("objective_value: x has wrong length");
  const QPInstance inst = instantiate(qp, theta);
  return 0.5 * x.dot(qp.P * x) + inst.q.dot(x);
}

OpCounts& TracedReal::counts() {
  thread_local OpCounts c;
  return c;
}

namespace {

// a[0] t[0] + ... + a[p-1] t[p-1], accumulated left to right.
template <typename Real>
inline Real dot(const double* a, const Real* t, int p) {
  if (p == 0) return Real(0.0);
  Real acc = Real(a[0]) * t[0];
  for (int i = 1; i < p; ++i) acc = acc + Real(a[i]) * t[i];
  return acc;
}

}  // namespace

Evaluator::Evaluator(const ExplicitSolution& solution, const SearchTree* tree) {
  const auto& qp = solution.qp();
  p_ = qp.p();
  n_ = qp.n();
  m_ = qp.m();
  me_ = qp.me();
  const auto& set = qp.theta_set;
  box_lo_.assign(p_, 0.0);
  box_hi_.assign(p_, 0.0);
  has_lo_.assign(p_, 0);
  has_hi_.assign(p_, 0);
  if (set.has_box()) {
    for (int i = 0; i < p_; ++i) {
      has_lo_[i] = std::isfinite(set.box_lo(i));
      has_hi_[i] = std::isfinite(set.box_hi(i));
      if (has_lo_[i]) box_lo_[i] = set.box_lo(i);
      if (has_hi_[i]) box_hi_[i] = set.box_hi(i);
    }
  }

  auto enforced_by_clamp = [&](const auto& h, double j) {
    int axis = -1;
    for (int c = 0; c < p_; ++c) {
      if (h(c) == 0.0) continue;
      if (axis >= 0 || std::abs(h(c)) != 1.0) return false;
      axis = c;
    }
    if (axis < 0) return false;
    if (h(axis) > 0) return has_hi_[axis] && j == box_hi_[axis];
    return has_lo_[axis] && j == -box_lo_[axis];
  };

  for (const auto& r : solution.regions) {
    Region d{};
    d.law_rows = r.law.rows();
    d.law_at = static_cast<int>(law_g_.size());
    d.ineq_at = static_cast<int>(ineq_j_.size());
    const auto active = r.active().indices();
    d.active_at = static_cast<int>(active_idx_.size());
    d.active = static_cast<int>(active.size());
    for (int i = 0; i < d.law_rows; ++i) {
      for (int c = 0; c < p_; ++c) law_F_.push_back(r.law.F(i, c));
      law_g_.push_back(r.law.g(i));
    }
    // Rows copied from a box bound of Theta hold after the clamp, so they are not stored.
    d.rows = 0;
    for (int i = 0; i < r.rows(); ++i) {
      if (enforced_by_clamp(r.H.row(i), r.j(i))) continue;
      for (int c = 0; c < p_; ++c) ineq_H_.push_back(r.H(i, c));
      ineq_j_.push_back(r.j(i) + kMembershipSlack);
      ++d.rows;
    }
    active_idx_.insert(active_idx_.end(), active.begin(), active.end());
    max_law_rows_ = std::max(max_law_rows_, d.law_rows);
    regions_.push_back(d);
  }

  if (tree) {
    has_tree_ = true;
    root_ = tree->root;
    for (const auto& node : tree->nodes) {
      for (int c = 0; c < p_; ++c) node_normal_.push_back(node.plane.normal(c));
      node_offset_.push_back(node.plane.offset);
      node_low_.push_back(node.low);
      node_high_.push_back(node.high);
    }
    for (const auto& leaf : tree->leaves) {
      leaf_at_.push_back(static_cast<int>(leaf_regions_.size()));
      leaf_len_.push_back(static_cast<int>(leaf.size()));
      leaf_regions_.insert(leaf_regions_.end(), leaf.begin(), leaf.end());
    }
  }
}

template <typename Real>
int Evaluator::kernel(const double* theta_raw, Real* theta, Real* law) const {
  for (int i = 0; i < p_; ++i) {
    Real t(theta_raw[i]);
    if (has_lo_[i] && t < Real(box_lo_[i])) {
      t = Real(box_lo_[i]);
    } else if (has_hi_[i] && t > Real(box_hi_[i])) {
      t = Real(box_hi_[i]);
    }
    theta[i] = t;
  }

  auto inside = [&](const Region& d) {
    for (int r = 0; r < d.rows; ++r) {
      const int at = d.ineq_at + r;
      if (!(dot(&ineq_H_[static_cast<std::size_t>(at) * p_], theta, p_) <= Real(ineq_j_[at]))) return false;
    }
    return true;
  };

  int found = -1;
  if (has_tree_) {
    std::int32_t ref = root_;
    while (ref >= 0) {
      const bool low = dot(&node_normal_[static_cast<std::size_t>(ref) * p_], theta, p_) <= Real(node_offset_[ref]);
      ref = low ? node_low_[ref] : node_high_[ref];
    }
    const int leaf = ~ref;
    for (int c = 0; c < leaf_len_[leaf] && found < 0; ++c) {
      const int k = leaf_regions_[leaf_at_[leaf] + c];
      if (inside(regions_[k])) found = k;
    }
  } else {
    for (int k = 0; k < static_cast<int>(regions_.size()) && found < 0; ++k)
      if (inside(regions_[k])) found = k;
  }
  if (found < 0) return -1;

  const Region& d = regions_[found];
  for (int i = 0; i < d.law_rows; ++i) {
    const int at = d.law_at + i;
    law[i] = p_ == 0 ? Real(law_g_[at]) : dot(&law_F_[static_cast<std::size_t>(at) * p_], theta, p_) + Real(law_g_[at]);
  }
  return found;
}

Workspace Evaluator::make_workspace() const {
  Workspace ws;
  ws.theta.resize(p_);
  ws.law.resize(max_law_rows_);
  return ws;
}

SolveResult Evaluator::make_result() const {
  SolveResult out;
  out.theta = Vector::Zero(p_);
  out.x = Vector::Zero(n_);
  out.lambda = Vector::Zero(m_);
  out.nu = Vector::Zero(me_);
  return out;
}

void Evaluator::eval_into(const Vector& theta_raw, Workspace& ws, SolveResult& out) const {
  if (theta_raw.size() != p_) throw DimensionError("eval: theta has wrong length");
  const int k = kernel<double>(theta_raw.data(), ws.theta.data(), ws.law.data());
  for (int i = 0; i < p_; ++i) out.theta(i) = ws.theta[i];
  out.region_index = k;
  if (k < 0) {
    out.status = SolveStatus::infeasible;
    return;
  }
  out.status = SolveStatus::optimal;
  const Region& d = regions_[k];
  for (int i = 0; i < n_; ++i) out.x(i) = ws.law[i];
  for (int i = 0; i < me_; ++i) out.nu(i) = ws.law[n_ + i];
  out.lambda.setZero();
  for (int a = 0; a < d.active; ++a) out.lambda(active_idx_[d.active_at + a]) = ws.law[n_ + me_ + a];
}

SolveResult Evaluator::eval(const Vector& theta_raw) const {
  Workspace ws = make_workspace();
  SolveResult out = make_result();
  eval_into(theta_raw, ws, out);
  return out;
}

OpCounts Evaluator::trace(const Vector& theta_raw) const {
  if (theta_raw.size() != p_) throw DimensionError("trace: theta has wrong length");
  std::vector<TracedReal> theta(p_), law(max_law_rows_);
  TracedReal::reset();
  kernel<TracedReal>(theta_raw.data(), theta.data(), law.data());
  return TracedReal::counts();
}

SolveResult eval(const ExplicitSolution& solution, const SearchTree* tree, const Vector& theta_raw) {
  return Evaluator(solution, tree).eval(theta_raw);
}

UserSolveResult eval_user(const ExplicitSolution& solution, const SearchTree* tree, const Vector& theta_user_raw) {
  const auto& maps = solution.problem.maps;
  UserSolveResult out;
  out.result = eval(solution, tree, map_user_params(maps, theta_user_raw));
  if (out.result.status != SolveStatus::optimal) return out;
  const auto& r = out.result;
  Vector z(r.x.size() + r.lambda.size() + r.nu.size());
  z << r.x, r.lambda, r.nu;
  out.x_user = retrieve_user_solution(maps, z);
  return out;
}

std::int64_t flop_bound(const ExplicitSolution& solution, const SearchTree* tree) {
  const std::int64_t p = solution.qp().p();
  const std::int64_t row_cost = 2 * p + 1;
  std::int64_t law = 0;
  for (const auto& r : solution.regions) law = std::max<std::int64_t>(law, r.law.rows());

  std::int64_t locate = 0;
  if (tree) {
    tree->for_each_leaf([&](int leaf, int depth) {
      std::int64_t rows = 0;
      for (int k : tree->leaves[leaf]) rows += solution.regions[k].rows();
      locate = std::max(locate, (depth + rows) * row_cost);
    });
  } else {
    for (const auto& r : solution.regions) locate += r.rows() * row_cost;
  }
  return 2 * p + locate + law * row_cost;
}

}  // namespace mpqp
