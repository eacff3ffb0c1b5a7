#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mpqp/benchmarks.hpp"
#include "mpqp/builder.hpp"
#include "mpqp/report.hpp"
#include "mpqp/serialize.hpp"
#include "support.hpp"

using namespace mpqp;
using testing::inf_norm;
using testing::mat;
using testing::vec;

namespace {

std::set<std::string> active_sets(const ExplicitSolution& s) {
  std::set<std::string> out;
  for (const auto& r : s.regions) out.insert(r.active().to_string(s.qp().m()));
  return out;
}

Vector law_x(const CriticalRegion& r, const Vector& theta) {
  return r.law.F.topRows(r.law.n) * theta + r.law.g.head(r.law.n);
}

}  // namespace

TEST_CASE("build_naive: clamp has three regions") {
  const auto s = build_naive(bench::clamp_problem());
  REQUIRE(s.K() == 3);
  // Sorted by bit string: {} < {lower} < {upper}.
  CHECK(s.regions[0].active().empty());
  CHECK(s.regions[1].active() == ActiveSet::from_indices({1}));
  CHECK(s.regions[2].active() == ActiveSet::from_indices({0}));
  CHECK(law_x(s.regions[0], vec({0.3}))(0) == doctest::Approx(0.3));
  CHECK(law_x(s.regions[1], vec({-2}))(0) == doctest::Approx(0).epsilon(1e-15));
  CHECK(law_x(s.regions[2], vec({4}))(0) == doctest::Approx(1));
  CHECK(s.regions[1].contains(vec({-5})));
  CHECK_FALSE(s.regions[1].contains(vec({0.1})));
}

TEST_CASE("build_explore: clamp from seed 0.5") {
  BuildOptions opts;
  opts.seed = vec({0.5});
  const auto s = build_explore(bench::clamp_problem(), opts);
  CHECK(s.K() == 3);
  CHECK(active_sets(s) == active_sets(build_naive(bench::clamp_problem())));
}

TEST_CASE("power management: K = 5 for both strategies") {
  const Problem power = bench::power_management();
  const auto naive = build_naive(power);
  const auto explore = build_explore(power);
  CHECK(naive.K() == 5);
  CHECK(active_sets(naive) == active_sets(explore));
}

TEST_CASE("monotone regression: K = 16 = 2^m") {
  const auto s = build_naive(bench::monotone_regression(1));
  CHECK(s.qp().m() == 4);
  CHECK(s.K() == 16);
}

TEST_CASE("portfolio: explore stays below 2^m and never keeps w = 0") {
  const auto s = build_explore(bench::portfolio(1));
  CHECK(s.K() <= 127);
  for (const auto& r : s.regions) CHECK(r.active().size() < s.qp().m());
}

TEST_CASE("drop_redundant_rows") {
  RegionIneq dominated;
  dominated.H = mat({{1}, {1}});
  dominated.j = vec({1, 2});
  dominated.origin = {{FacetOrigin::Kind::primal, 0}, {FacetOrigin::Kind::primal, 1}};
  const auto a = drop_redundant_rows(dominated);
  REQUIRE(a.rows() == 1);
  CHECK(a.j(0) == 1.0);
  CHECK(a.origin[0].index == 0);

  RegionIneq box;
  box.H = mat({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  box.j = vec({1, 0, 1, 0});
  box.origin.resize(4);
  CHECK(drop_redundant_rows(box).rows() == 4);

  // Upper clamp region with a row that the Theta bound dominates.
  RegionIneq up;
  up.H = mat({{-1}, {1}, {1}});
  up.j = vec({-1, 5, 7});
  up.origin = {{FacetOrigin::Kind::dual, 0}, {FacetOrigin::Kind::theta, 0}, {FacetOrigin::Kind::primal, 1}};
  const auto b = drop_redundant_rows(up);
  REQUIRE(b.rows() == 2);
  CHECK(b.origin[1].kind == FacetOrigin::Kind::theta);
}

TEST_CASE("equivalence of strategies on random small QPs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int m = 3 + static_cast<int>(seed % 8);
    const int n = 2 + static_cast<int>(seed % 3);
    const int p = 1 + static_cast<int>(seed % 3);
    const Problem problem = bench::random_small_qp(seed, n, m, p);
    CAPTURE(seed);
    const auto naive = build_naive(problem);
    const auto explore = build_explore(problem);
    CHECK(active_sets(naive) == active_sets(explore));
  }
}

TEST_CASE("every region: interior ball, KKT at center, oracle agreement") {
  for (const auto& name : {"power", "monotone", "hello"}) {
    const Problem problem = bench::by_name(name, 2);
    const auto s = build_naive(problem);
    const KktSystem sys(problem.qp);
    for (const auto& r : s.regions) {
      CHECK(r.radius > 1e-9);
      CHECK((r.H * r.interior - r.j).maxCoeff() < 0);
      // Unit-norm rows.
      CHECK((r.H.rowwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);
      const Vector z = r.law.F * r.interior + r.law.g;
      Vector lambda = Vector::Zero(problem.qp.m());
      const auto idx = r.active().indices();
      for (std::size_t k = 0; k < idx.size(); ++k) lambda(idx[k]) = z(r.law.lambda_offset() + k);
      CHECK(check_kkt(problem.qp, r.interior, z.head(r.law.n), lambda, z.segment(r.law.n, r.law.me), 1e-8).ok);
      const auto oracle = oracle_solve(sys, r.interior);
      REQUIRE(oracle.feasible);
      CHECK(inf_norm(oracle.x - law_x(r, r.interior)) <= 1e-8);
    }
  }
}

TEST_CASE("coverage: sampled parameters are covered or infeasible") {
  for (const auto& name : {"power", "monotone", "portfolio", "hello"}) {
    const Problem problem = bench::by_name(name, 3);
    const auto s = build_explore(problem);
    const KktSystem sys(problem.qp);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
      const Vector theta = sample_theta(problem.qp, rng);
      const bool covered =
          std::any_of(s.regions.begin(), s.regions.end(), [&](const auto& r) { return r.contains(theta); });
      if (!covered) CHECK_FALSE(oracle_solve(sys, theta).feasible);
    }
  }
}

TEST_CASE("continuity across shared facets") {
  const Problem problem = bench::monotone_regression(4);
  const auto s = build_naive(problem);
  int checked = 0;
  for (const auto& a : s.regions)
    for (int row = 0; row < a.rows(); ++row) {
      if (a.origin[row].kind == FacetOrigin::Kind::theta) continue;
      Matrix G(a.rows() - 1, a.H.cols());
      Vector h(a.rows() - 1);
      for (int i = 0, k = 0; i < a.rows(); ++i) {
        if (i == row) continue;
        G.row(k) = a.H.row(i);
        h(k++) = a.j(i);
      }
      const Vector nrm = a.H.row(row).transpose();
      // Project onto the facet plane by moving the region's interior point.
      Vector theta = a.interior + (a.j(row) - nrm.dot(a.interior)) * nrm;
      if ((G * theta - h).maxCoeff() > 0) continue;
      for (const auto& b : s.regions) {
        if (&a == &b || !b.contains(theta, 1e-9)) continue;
        CHECK(inf_norm(law_x(a, theta) - law_x(b, theta)) <= 1e-7);
        ++checked;
      }
    }
  CHECK(checked > 0);
}

TEST_CASE("determinism: identical serialized solutions") {
  const Problem problem = bench::monotone_regression(9);
  const auto a = to_binary(build_explore(problem));
  const auto b = to_binary(build_explore(problem));
  CHECK(a == b);
  CHECK(to_binary(build_naive(problem)) == to_binary(build_naive(problem)));
}

TEST_CASE("size limits and empty solutions") {
  BuildOptions opts;
  opts.k_max = 2;
  CHECK_THROWS_AS(build_naive(bench::power_management(), opts), SizeLimitError);
  CHECK_THROWS_AS(build_explore(bench::power_management(), opts), SizeLimitError);
  try {
    build_explore(bench::power_management(), opts);
  } catch (const SizeLimitError& e) {
    CHECK(std::string(e.what()).find("warning") != std::string::npos);
  }

  BuildOptions tiny;
  tiny.byte_budget = 64;
  CHECK_THROWS_AS(build_naive(bench::clamp_problem(), tiny), SizeLimitError);

  BuildOptions low;
  low.m_naive = 3;
  CHECK_THROWS_AS(build_naive(bench::power_management(), low), SizeLimitError);

  // x <= theta and -x <= -1 on Theta = [-2, 0]: infeasible everywhere.
  Problem none = bench::clamp_problem();
  none.qp.A = mat({{1}, {-1}});
  none.qp.v = vec({0, -1});
  none.qp.V = mat({{1}, {0}});
  none.qp.theta_set = ParamPolyhedron::box(vec({-2}), vec({0}));
  CHECK_THROWS_AS(build_naive(none), EmptySolutionError);
  CHECK_THROWS_AS(build_explore(none), EmptySolutionError);
}

TEST_CASE("build log counts and coefficient totals") {
  const auto s = build_naive(bench::clamp_problem());
  CHECK(s.log.candidates == 4);
  CHECK(s.log.skipped_cardinality == 1);  // both rows active with n = 1
  std::int64_t manual = 0;
  for (const auto& r : s.regions) manual += (r.law.rows() + r.rows()) * 2;
  CHECK(coefficient_count(s) == manual);
}
