#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mpqp/benchmarks.hpp"
#include "mpqp/mpqp_core.hpp"
#include "mpqp/problem_io.hpp"
#include "support.hpp"

using namespace mpqp;
using testing::mat;
using testing::vec;

namespace {

ParametricQP identity_qp() {
  ParametricQP qp;
  qp.P = Matrix::Identity(2, 2);
  qp.A = Matrix::Zero(0, 2);
  qp.E = Matrix::Zero(0, 2);
  qp.u = Vector::Zero(2);
  qp.U = Matrix::Identity(2, 2);
  qp.v = Vector::Zero(0);
  qp.V = Matrix::Zero(0, 2);
  qp.w = Vector::Zero(0);
  qp.W = Matrix::Zero(0, 2);
  qp.theta_set = ParamPolyhedron::box(vec({0, 0}), vec({1, 1}));
  return qp;
}

bool has_violation(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("validate: identity problem on the unit box is ok") {
  const auto report = validate(identity_qp());
  CHECK(report.ok());
}

TEST_CASE("validate: m = 1025 is rejected") {
  ParametricQP qp = identity_qp();
  qp.A = Matrix::Zero(1025, 2);
  qp.A.col(0).setOnes();
  qp.v = Vector::Ones(1025);
  qp.V = Matrix::Zero(1025, 2);
  const auto report = validate(qp);
  CHECK(has_violation(report, "m exceeds 1024"));

  qp.A.conservativeResize(1024, 2);
  qp.v.conservativeResize(1024);
  qp.V.conservativeResize(1024, 2);
  CHECK(validate(qp).ok());
}

TEST_CASE("validate: contradictory parameter bounds give an empty parameter set") {
  ParametricQP qp;
  qp.P = Matrix::Identity(1, 1);
  qp.A = Matrix::Zero(0, 1);
  qp.E = Matrix::Zero(0, 1);
  qp.u = Vector::Zero(1);
  qp.U = Matrix::Identity(1, 1);
  qp.v = Vector::Zero(0);
  qp.V = Matrix::Zero(0, 1);
  qp.w = Vector::Zero(0);
  qp.W = Matrix::Zero(0, 1);
  qp.theta_set.G = mat({{1}, {-1}});
  qp.theta_set.h = vec({0, -1});
  CHECK(has_violation(validate(qp), "empty parameter set"));
}

TEST_CASE("validate: asymmetric, indefinite and mis-shaped data") {
  ParametricQP qp = identity_qp();
  qp.P(0, 1) = 0.5;
  CHECK(has_violation(validate(qp), "not symmetric"));

  qp = identity_qp();
  qp.P(1, 1) = -1;
  CHECK(has_violation(validate(qp), "positive definite"));

  qp = identity_qp();
  qp.U = Matrix::Identity(3, 2);
  CHECK(has_violation(validate(qp), "dimension mismatch"));

  // PSD P passes once regularization is requested.
  qp = identity_qp();
  qp.P(1, 1) = 0.0;
  CHECK_FALSE(validate(qp).ok());
  qp.regularize = true;
  CHECK(validate(qp).ok());
  CHECK(regularization_epsilon(qp) == doctest::Approx(1e-8 * 1.0 / 2.0));
}

TEST_CASE("validate: a box bound missing from (G, h) is reported") {
  ParametricQP qp = identity_qp();
  qp.theta_set.box_hi(1) = 0.5;
  CHECK(has_violation(validate(qp), "box bound"));
}

TEST_CASE("instantiate: identity and constant maps") {
  ParametricQP qp = identity_qp();
  const auto inst = instantiate(qp, vec({1, 2}));
  CHECK(inst.q(0) == 1.0);
  CHECK(inst.q(1) == 2.0);

  qp.A = mat({{1, 0}, {0, 1}});
  qp.v = vec({1, 0});
  qp.V = Matrix::Zero(2, 2);
  for (const Vector& t : {vec({0.3, 0.1}), vec({-4, 9})}) {
    const auto b = instantiate(qp, t).b;
    CHECK(b(0) == 1.0);
    CHECK(b(1) == 0.0);
  }
  CHECK_THROWS_AS(instantiate(qp, vec({1})), DimensionError);
}

TEST_CASE("instantiate: power management balance holds at the oracle solution") {
  const Problem power = bench::power_management();
  const Vector theta = vec({1, 0.5, 2, 0.5});
  const auto sol = oracle_solve(power.qp, theta);
  REQUIRE(sol.feasible);
  // x = (s, b, g, q_plus) and L = s + b + g.
  CHECK(std::abs(sol.x(0) + sol.x(1) + sol.x(2) - theta(0)) <= 1e-9);
}

TEST_CASE("instantiate is affine in theta") {
  const Problem problem = bench::mpc_problem(3);
  const auto& qp = problem.qp;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Vector t1(qp.p()), t2(qp.p());
    for (auto& x : t1) x = unif(rng);
    for (auto& x : t2) x = unif(rng);
    const double a = 0.5 * (unif(rng) + 1);
    const auto mix = instantiate(qp, a * t1 + (1 - a) * t2);
    const auto i1 = instantiate(qp, t1);
    const auto i2 = instantiate(qp, t2);
    CHECK(testing::inf_norm(mix.q - (a * i1.q + (1 - a) * i2.q)) <= 1e-12);
    CHECK(testing::inf_norm(mix.b - (a * i1.b + (1 - a) * i2.b)) <= 1e-12);
    CHECK(testing::inf_norm(mix.f - (a * i1.f + (1 - a) * i2.f)) <= 1e-12);
  }
}

TEST_CASE("map_user_params") {
  UserMaps maps = UserMaps::identity(2, 0, 0, 2);
  const Vector t = vec({0.25, -3});
  CHECK(map_user_params(maps, t) == t);

  maps.C = mat({{2}});
  maps.c = vec({1});
  CHECK(map_user_params(maps, vec({3}))(0) == 7.0);
  CHECK_THROWS_AS(map_user_params(maps, vec({3, 4})), DimensionError);
}

TEST_CASE("map_user_params: hello world permutes y") {
  const Problem hello = bench::hello_world(7);
  const Vector y = vec({0.6, 0.8, 0.2});
  const Vector theta = map_user_params(hello.maps, y);
  CHECK(theta(0) == 0.2);
  CHECK(theta(1) == 0.8);
  CHECK(theta(2) == 0.6);
  // C is a 0/1 selection matrix.
  for (Eigen::Index i = 0; i < hello.maps.C.size(); ++i) {
    const double c = hello.maps.C.data()[i];
    CHECK((c == 0.0 || c == 1.0));
  }
  CHECK(hello.maps.C.transpose() * theta == y);
}

TEST_CASE("retrieve_user_solution") {
  UserMaps maps;
  maps.R = Matrix::Zero(2, 5);
  maps.R(0, 0) = 1;
  maps.R(1, 1) = 1;
  maps.r = Vector::Zero(2);
  const Vector z = vec({1, 2, 3, 4, 5});
  const Vector x = retrieve_user_solution(maps, z);
  CHECK(x == vec({1, 2}));

  maps.R = Matrix::Zero(1, 5);
  maps.r = vec({5});
  CHECK(retrieve_user_solution(maps, z)(0) == 5.0);
  CHECK(retrieve_user_solution(maps, -z)(0) == 5.0);
  CHECK_THROWS_AS(retrieve_user_solution(maps, vec({1})), DimensionError);
}

TEST_CASE("retrieve_user_solution: hello world keeps beta and v, drops residual variables") {
  const Problem hello = bench::hello_world(7);
  const auto& qp = hello.qp;
  const Vector y = vec({0.6, 0.8, 0.2});
  const auto sol = oracle_solve(qp, map_user_params(hello.maps, y));
  REQUIRE(sol.feasible);
  Vector z(qp.n() + qp.m() + qp.me());
  z << sol.x, sol.lambda, sol.nu;
  const Vector xu = retrieve_user_solution(hello.maps, z);
  REQUIRE(xu.size() == 3);
  CHECK(xu(0) >= -1e-9);
  CHECK(xu(1) >= -1e-9);

  // Local optimality by perturbation: no feasible nudge lowers the objective.
  const QPInstance inst = instantiate(qp, map_user_params(hello.maps, y));
  const auto obj = [&](const Vector& u) { return 0.5 * u.dot(qp.P * u) + inst.q.dot(u); };
  const double f0 = obj(sol.x);
  for (int i = 0; i < qp.n(); ++i)
    for (double s : {1e-4, -1e-4}) {
      Vector u = sol.x;
      u(i) += s;
      if ((qp.A * u - inst.b).maxCoeff() > 0) continue;
      CHECK(obj(u) >= f0 - 1e-12);
    }
}

TEST_CASE("user box translates into Theta: sampled user vertices land in Theta") {
  const Problem hello = bench::hello_world(3);
  for (int mask = 0; mask < 8; ++mask) {
    Vector y(3);
    for (int i = 0; i < 3; ++i) y(i) = (mask >> i) & 1 ? 1.0 : 0.0;
    CHECK(hello.qp.theta_set.contains(map_user_params(hello.maps, y), 1e-12));
  }
}

TEST_CASE("problem JSON round trip, absent blocks and infinite box bounds") {
  const Problem power = bench::power_management();
  const Problem back = problem_from_json(problem_to_json(power));
  CHECK(content_hash(back.qp) == content_hash(power.qp));
  CHECK(back.maps.C == power.maps.C);
  CHECK(back.maps.vars.size() == power.maps.vars.size());

  Json doc = {{"n", 1},
              {"m", 1},
              {"p", 1},
              {"P", {{1.0}}},
              {"A", {{1.0}}},
              {"u", {0.0}},
              {"U", {{-1.0}}},
              {"v", {1.0}},
              {"V", {{0.0}}},
              {"theta_G", Json::array()},
              {"theta_h", Json::array()},
              {"theta_box_lo", {nullptr}},
              {"theta_box_hi", {5.0}}};
  const Problem p = problem_from_json(doc);
  CHECK(p.qp.me() == 0);
  CHECK(p.maps.C.isIdentity());
  CHECK(std::isinf(p.qp.theta_set.box_lo(0)));
  REQUIRE(p.qp.theta_set.rows() == 1);
  CHECK(p.qp.theta_set.h(0) == 5.0);
  CHECK(validate(p).ok());

  doc["A"] = {{1.0, 2.0}};
  CHECK_THROWS_AS(problem_from_json(doc), FormatError);
}

TEST_CASE("content hash is stable and data-sensitive") {
  const Problem a = bench::monotone_regression(4);
  const Problem b = bench::monotone_regression(4);
  const Problem c = bench::monotone_regression(5);
  CHECK(content_hash(a.qp) == content_hash(b.qp));
  CHECK(content_hash(a.qp) != content_hash(c.qp));
}

TEST_CASE("validated problems are accepted downstream") {
  for (const auto& name : bench::names()) {
    const Problem problem = bench::by_name(name, 1);
    REQUIRE(validate(problem).ok());
    const Vector center = Vector::Zero(problem.qp.p());
    CHECK_NOTHROW(instantiate(problem.qp, center));
    CHECK_NOTHROW(KktSystem(problem.qp));
  }
}
