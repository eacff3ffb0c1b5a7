#include "mpqp/benchmarks.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>

namespace mpqp::bench {

namespace {

Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = dist(rng);
  return M;
}

ParametricQP empty_qp(int n, int m, int me, int p) {
  ParametricQP qp;
  qp.P = Matrix::Zero(n, n);
  qp.A = Matrix::Zero(m, n);
  qp.E = Matrix::Zero(me, n);
  qp.u = Vector::Zero(n);
  qp.U = Matrix::Zero(n, p);
  qp.v = Vector::Zero(m);
  qp.V = Matrix::Zero(m, p);
  qp.w = Vector::Zero(me);
  qp.W = Matrix::Zero(me, p);
  return qp;
}

UserMaps primal_maps(int n, int m, int me, int p, std::vector<NamedBlock> params, std::vector<NamedBlock> vars) {
  UserMaps maps = UserMaps::identity(n, m, me, p);
  maps.params = std::move(params);
  maps.vars = std::move(vars);
  return maps;
}

}  // namespace

Problem clamp_problem() {
  Problem pr;
  pr.name = "clamp";
  auto& qp = pr.qp;
  qp = empty_qp(1, 2, 0, 1);
  qp.P(0, 0) = 1.0;
  qp.U(0, 0) = -1.0;
  qp.A(0, 0) = 1.0;  // x <= 1
  qp.v(0) = 1.0;
  qp.A(1, 0) = -1.0;  // -x <= 0
  qp.theta_set = ParamPolyhedron::box(Vector::Constant(1, -5.0), Vector::Constant(1, 5.0));
  pr.maps = primal_maps(1, 2, 0, 1, {{"theta", 1}}, {{"x", 1}});
  return pr;
}

Problem power_management() {
  constexpr double kCharge = 1.0;     // C
  constexpr double kDischarge = 1.0;  // D
  constexpr double kPeriod = 0.05;    // h
  constexpr double kCapacity = 1.0;   // Q
  constexpr double kTarget = 0.5;     // q_tar
  constexpr double kAlpha = 0.1;
  constexpr double kBeta = 0.1;
  enum { s = 0, b = 1, g = 2, qp_ = 3 };
  enum { L = 0, S = 1, Price = 2, Charge = 3 };

  Problem pr;
  pr.name = "power";
  auto& qp = pr.qp;
  qp = empty_qp(4, 7, 2, 4);
  qp.regularize = true;
  qp.P(b, b) = 2.0 * kBeta;
  qp.P(qp_, qp_) = 2.0 * kAlpha;
  qp.u(qp_) = -2.0 * kAlpha * kTarget;
  qp.U(g, Price) = kPeriod;

  qp.A(0, s) = -1.0;  // s >= 0
  qp.A(1, s) = 1.0;   // s <= S
  qp.V(1, S) = 1.0;
  qp.A(2, b) = -1.0;  // b >= -C
  qp.v(2) = kCharge;
  qp.A(3, b) = 1.0;  // b <= D
  qp.v(3) = kDischarge;
  qp.A(4, g) = -1.0;    // g >= 0
  qp.A(5, qp_) = -1.0;  // q+ >= 0
  qp.A(6, qp_) = 1.0;   // q+ <= Q
  qp.v(6) = kCapacity;

  qp.E(0, s) = qp.E(0, b) = qp.E(0, g) = 1.0;  // L = s + b + g
  qp.W(0, L) = 1.0;
  qp.E(1, qp_) = 1.0;  // q+ = q - h b
  qp.E(1, b) = kPeriod;
  qp.W(1, Charge) = 1.0;

  Vector lo(4), hi(4);
  lo << 0.0, 0.0, 1.0, 0.0;
  hi << 1.0, 0.5, 2.0, kCapacity;
  qp.theta_set = ParamPolyhedron::box(lo, hi);
  pr.maps = primal_maps(4, 7, 2, 4, {{"L", 1}, {"S", 1}, {"P", 1}, {"q", 1}},
                        {{"s", 1}, {"b", 1}, {"g", 1}, {"q_plus", 1}});
  return pr;
}

Problem monotone_regression(std::uint64_t seed, int d, int q) {
  std::mt19937_64 rng(seed);
  const Matrix data = gaussian(rng, q, d);
  Problem pr;
  pr.name = "monotone";
  auto& qp = pr.qp;
  qp = empty_qp(d, d - 1, 0, q);
  qp.P = 2.0 * data.transpose() * data;
  qp.U = -2.0 * data.transpose();
  for (int i = 0; i + 1 < d; ++i) {
    qp.A(i, i) = 1.0;
    qp.A(i, i + 1) = -1.0;
  }
  qp.theta_set = ParamPolyhedron::box(Vector::Constant(q, -1.0), Vector::Constant(q, 1.0));
  pr.maps = primal_maps(d, d - 1, 0, q, {{"b", q}}, {{"x", d}});
  return pr;
}

Problem portfolio(std::uint64_t seed, int assets, double gamma) {
  std::mt19937_64 rng(seed);
  const Matrix factors = gaussian(rng, assets, assets);
  Matrix cov = factors * factors.transpose() + 0.5 * assets * Matrix::Identity(assets, assets);
  const Vector scale = cov.diagonal().cwiseSqrt().cwiseInverse();
  const Matrix corr = scale.asDiagonal() * cov * scale.asDiagonal();
  std::uniform_real_distribution<double> variance(0.02, 0.10);
  Vector vol(assets);
  for (auto& s : vol) s = std::sqrt(variance(rng));
  Matrix sigma = vol.asDiagonal() * corr * vol.asDiagonal();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();

  Problem pr;
  pr.name = "portfolio";
  auto& qp = pr.qp;
  qp = empty_qp(assets, assets, 1, assets);
  qp.P = 2.0 * gamma * sigma;
  qp.U = -Matrix::Identity(assets, assets);
  qp.A = -Matrix::Identity(assets, assets);
  qp.E.setOnes();
  qp.w(0) = 1.0;
  qp.theta_set = ParamPolyhedron::box(Vector::Constant(assets, -1.0), Vector::Constant(assets, 1.0));
  pr.maps = primal_maps(assets, assets, 1, assets, {{"mu", assets}}, {{"w", assets}});
  return pr;
}

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P) {
  const Matrix BtPA = B.transpose() * P * A;
  const Matrix next = A.transpose() * P * A - BtPA.transpose() * (R + B.transpose() * P * B).ldlt().solve(BtPA) + Q;
  return (P - next).cwiseAbs().maxCoeff();
}

Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, double tol, int max_iter) {
  Matrix P = Q;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Matrix BtPA = B.transpose() * P * A;
    Matrix next = A.transpose() * P * A - BtPA.transpose() * (R + B.transpose() * P * B).ldlt().solve(BtPA) + Q;
    next = 0.5 * (next + next.transpose()).eval();
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (change <= tol * std::max(1.0, P.cwiseAbs().maxCoeff())) break;
  }
  return P;
}

MpcData mpc_data(std::uint64_t seed, int nz, int nu) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> diag(0.0, 1.0);
  std::normal_distribution<double> offdiag(0.0, std::sqrt(0.01));
  MpcData data;
  data.A.resize(nz, nz);
  for (int i = 0; i < nz; ++i)
    for (int j = 0; j < nz; ++j) data.A(i, j) = i == j ? diag(rng) : offdiag(rng);
  const double rho = Eigen::EigenSolver<Matrix>(data.A, false).eigenvalues().cwiseAbs().maxCoeff();
  data.A /= rho;
  data.B = gaussian(rng, nz, nu, std::sqrt(0.001));
  data.Q = Matrix::Identity(nz, nz);
  data.R = 0.1 * Matrix::Identity(nu, nu);
  data.P = solve_dare(data.A, data.B, data.Q, data.R);
  return data;
}

Problem mpc_problem(const MpcData& data, int horizon) {
  const int nz = static_cast<int>(data.A.rows());
  const int nu = static_cast<int>(data.B.cols());
  const int n_states = nz * (horizon + 1);
  const int n = n_states + nu * horizon;
  const int m = 2 * nu * horizon;
  const int me = nz * (horizon + 1);
  auto z = [&](int t) { return t * nz; };
  auto u = [&](int t) { return n_states + t * nu; };

  Problem pr;
  pr.name = "mpc";
  auto& qp = pr.qp;
  qp = empty_qp(n, m, me, nz);
  for (int t = 0; t < horizon; ++t) {
    qp.P.block(z(t), z(t), nz, nz) = 2.0 * data.Q;
    qp.P.block(u(t), u(t), nu, nu) = 2.0 * data.R;
  }
  qp.P.block(z(horizon), z(horizon), nz, nz) = 2.0 * data.P;

  // z_0 = z_init
  qp.E.block(0, z(0), nz, nz).setIdentity();
  qp.W.topRows(nz).setIdentity();
  // z_{t+1} - A z_t - B u_t = 0
  for (int t = 0; t < horizon; ++t) {
    const int row = nz * (t + 1);
    qp.E.block(row, z(t + 1), nz, nz).setIdentity();
    qp.E.block(row, z(t), nz, nz) = -data.A;
    qp.E.block(row, u(t), nz, nu) = -data.B;
  }
  for (int t = 0; t < horizon; ++t) {
    for (int k = 0; k < nu; ++k) {
      const int row = 2 * (t * nu + k);
      qp.A(row, u(t) + k) = 1.0;
      qp.v(row) = 1.0;
      qp.A(row + 1, u(t) + k) = -1.0;
      qp.v(row + 1) = 1.0;
    }
  }
  qp.theta_set = ParamPolyhedron::box(Vector::Constant(nz, -1.0), Vector::Constant(nz, 1.0));
  pr.maps = primal_maps(n, m, me, nz, {{"z_init", nz}}, {{"z", n_states}, {"u", nu * horizon}});
  return pr;
}

Problem mpc_problem(std::uint64_t seed, int nz, int nu, int horizon) {
  return mpc_problem(mpc_data(seed, nz, nu), horizon);
}

Problem hello_world(std::uint64_t seed) {
  constexpr int d = 2;
  constexpr int p = 3;
  std::mt19937_64 rng(seed);
  Matrix M(p, d + 1);
  M.leftCols(d) = gaussian(rng, p, d);
  M.col(d).setOnes();
  Matrix perm = Matrix::Zero(p, p);  // theta_i = y_{p-1-i}
  for (int i = 0; i < p; ++i) perm(i, p - 1 - i) = 1.0;

  Problem pr;
  pr.name = "hello";
  auto& qp = pr.qp;
  qp = empty_qp(d + 1, d, 0, p);
  qp.P = 2.0 * M.transpose() * M;
  qp.U = -2.0 * M.transpose() * perm.transpose();
  for (int i = 0; i < d; ++i) qp.A(i, i) = -1.0;
  qp.theta_set = ParamPolyhedron::box(Vector::Zero(p), Vector::Ones(p));

  auto& maps = pr.maps;
  maps.C = perm;
  maps.c = Vector::Zero(p);
  maps.R = Matrix::Zero(d + 1, d + 1 + d);
  maps.R.leftCols(d + 1).setIdentity();
  maps.r = Vector::Zero(d + 1);
  maps.params = {{"y", p}};
  maps.vars = {{"beta", d}, {"v", 1}};
  maps.dual_groups = {d};
  return pr;
}

Problem random_small_qp(std::uint64_t seed, int n, int m, int p) {
  std::mt19937_64 rng(seed);
  const int me = (seed % 3 == 0 && n >= 2) ? 1 : 0;
  Problem pr;
  pr.name = "random";
  auto& qp = pr.qp;
  qp = empty_qp(n, m, me, p);
  const Matrix M = gaussian(rng, n, n);
  qp.P = M.transpose() * M + 0.5 * Matrix::Identity(n, n);
  qp.A = gaussian(rng, m, n);
  qp.u = gaussian(rng, n, 1);
  qp.U = gaussian(rng, n, p);
  std::uniform_real_distribution<double> offset(0.5, 1.5);
  for (int i = 0; i < m; ++i) qp.v(i) = offset(rng);
  qp.V = gaussian(rng, m, p, 0.5);
  if (me > 0) {
    qp.E = gaussian(rng, me, n);
    qp.W = gaussian(rng, me, p, 0.3);
  }
  qp.theta_set = ParamPolyhedron::box(Vector::Constant(p, -1.0), Vector::Constant(p, 1.0));
  pr.maps = UserMaps::identity(n, m, me, p);
  return pr;
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> kNames{"clamp", "power", "monotone", "mpc", "portfolio", "hello"};
  return kNames;
}

Problem by_name(const std::string& name, std::uint64_t seed) {
  if (name == "clamp") return clamp_problem();
  if (name == "power") return power_management();
  if (name == "monotone") return monotone_regression(seed);
  if (name == "mpc") return mpc_problem(seed);
  if (name == "portfolio") return portfolio(seed);
  if (name == "hello") return hello_world(seed);
  throw std::invalid_argument("unknown benchmark '" + name + "'");
}

}  // namespace mpqp::bench
