#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpqp/model.hpp"

namespace mpqp::bench {

/// minimize 1/2 x^2 - theta x  s.t.  x <= 1, -x <= 0, Theta = [-5, 5].
Problem clamp_problem();

/// Residential power management with
/// C = D = 1, h = 0.05, Q = 1, q_tar = 0.5, alpha = beta = 0.1.
/// Variables (s, b, g, q_plus), parameters (L, S, P, q). P is only
/// semidefinite, so the problem is built with regularization enabled.
Problem power_management();

/// minimize ||A x - b||^2 s.t. x_1 <= ... <= x_d with b in [-1, 1]^q, A ~ N(0, 1).
Problem monotone_regression(std::uint64_t seed, int d = 5, int q = 10);

/// Markowitz portfolio with N assets: maximize mu'w - gamma w'Sigma w,
/// 1'w = 1, w >= 0, mu in [-1, 1]^N. Sigma is a seeded random SPD matrix
/// with variances in [0.02, 0.10].
Problem portfolio(std::uint64_t seed, int assets = 7, double gamma = 2.0);

struct MpcData {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
  Matrix P;  // terminal cost from the discrete algebraic Riccati equation
};

/// Fixed-point iteration P <- A'PA - A'PB (R + B'PB)^{-1} B'PA + Q.
Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, double tol = 1e-10,
                  int max_iter = 5'000'000);
/// ||P - (A'PA - A'PB (R + B'PB)^{-1} B'PA + Q)||_inf
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P);

/// A with N(0,1) diagonal and N(0,0.01) off-diagonal entries scaled to unit
/// spectral radius, B ~ N(0, 0.001), Q = I, R = 0.1 I.
MpcData mpc_data(std::uint64_t seed, int nz = 6, int nu = 1);

/// States are kept as variables with dynamics as equality rows;
/// |u_t| <= 1 becomes +-u_t <= 1. Parameter z_init in [-1, 1]^nz.
Problem mpc_problem(std::uint64_t seed, int nz = 6, int nu = 1, int horizon = 5);
Problem mpc_problem(const MpcData& data, int horizon);

/// minimize ||X beta + v 1 - y||^2 s.t. beta >= 0 with d = 2, p = 3,
/// X ~ N(0, 1), y in [0, 1]^3. The canonical parameter is y reversed
/// (C is a permutation) and x_user = (beta, v).
Problem hello_world(std::uint64_t seed);

/// Small random strictly convex QP with Theta = [-1, 1]^p. Every third seed
/// carries one equality row.
Problem random_small_qp(std::uint64_t seed, int n, int m, int p);

/// "clamp", "power", "monotone", "mpc", "portfolio" or "hello".
Problem by_name(const std::string& name, std::uint64_t seed);
const std::vector<std::string>& names();

}  // namespace mpqp::bench
