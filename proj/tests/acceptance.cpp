// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "mpqp/benchmarks.hpp"
#include "mpqp/codegen.hpp"
#include "mpqp/problem_io.hpp"
#include "mpqp/report.hpp"
#include "mpqp/serialize.hpp"
#include "support.hpp"

using namespace mpqp;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

struct Built {
  std::string label;
  Problem problem;
  ExplicitSolution solution;
  SearchTree tree;
};

Built make(const std::string& label, const Problem& problem) {
  auto s = build_naive(problem);
  auto tree = build_tree(s);
  return {label, problem, std::move(s), std::move(tree)};
}

std::vector<Vector> samples(const ParametricQP& qp, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_theta(qp, rng));
  return out;
}

Vector law_x(const CriticalRegion& r, const Vector& theta, int n) {
  return r.law.F.topRows(n) * theta + r.law.g.head(n);
}

std::vector<ActiveSet> active_sets(const ExplicitSolution& s) {
  std::vector<ActiveSet> out;
  for (const auto& r : s.regions) out.push_back(r.active());
  return out;
}

// Oracle agreement of the tree evaluator at `count` sampled parameters.
int parity_failures(const Built& b, int count, std::uint64_t seed) {
  const Evaluator ev(b.solution, &b.tree);
  const KktSystem sys(b.solution.qp());
  int bad = 0;
  for (const auto& theta : samples(b.solution.qp(), count, seed))
    if (!oracle_agrees(ev.eval(theta), oracle_solve(sys, theta))) ++bad;
  return bad;
}

// Points in the relative interior of interior facets, checked against the
// law of the region on the other side.
struct Continuity {
  int checked = 0;
  double worst = 0.0;
};

Continuity continuity(const ExplicitSolution& s, int wanted, std::uint64_t seed) {
  const int p = s.qp().p();
  const int n = s.qp().n();
  std::vector<std::pair<int, int>> facets;
  for (int k = 0; k < s.K(); ++k)
    for (int i = 0; i < s.regions[k].rows(); ++i)
      if (s.regions[k].origin[i].kind != FacetOrigin::Kind::theta) facets.emplace_back(k, i);
  std::mt19937_64 rng(seed);
  std::shuffle(facets.begin(), facets.end(), rng);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Chebyshev ball of each facet within its plane, then random points of it
  // in turn until enough have a neighbouring region.
  struct Disc {
    int k, row;
    Vector center;
    double radius;
  };
  std::vector<Disc> discs;
  for (const auto& [k, row] : facets) {
    const auto& a = s.regions[k];
    const Vector nrm = a.H.row(row).transpose();
    // max r  s.t.  H_i theta + r |H_i projected on the plane| <= j_i,  nrm'theta = j_row
    const int rows = a.rows() - 1;
    Matrix G = Matrix::Zero(rows + 1, p + 1);
    Vector h(rows + 1);
    for (int i = 0, q = 0; i < a.rows(); ++i) {
      if (i == row) continue;
      const Vector hi = a.H.row(i).transpose();
      G.row(q).head(p) = hi.transpose();
      G(q, p) = (hi - hi.dot(nrm) * nrm).norm();
      h(q++) = a.j(i);
    }
    G(rows, p) = 1.0;  // cap the radius so the LP stays bounded
    h(rows) = 1e3;
    Matrix Geq = Matrix::Zero(1, p + 1);
    Geq.row(0).head(p) = nrm.transpose();
    Vector c = Vector::Zero(p + 1);
    c(p) = -1.0;
    const auto lp = solve_lp(c, G, h, Geq, Vector::Constant(1, a.j(row)));
    if (lp.status == LpStatus::optimal && lp.x(p) > 1e-7) discs.push_back({k, row, lp.x.head(p), lp.x(p)});
  }

  Continuity out;
  for (int attempt = 0; attempt < 20 * wanted && out.checked < wanted && !discs.empty(); ++attempt) {
    const auto& d = discs[attempt % discs.size()];
    const auto& a = s.regions[d.k];
    const Vector nrm = a.H.row(d.row).transpose();
    Vector dir(p);
    for (int i = 0; i < p; ++i) dir(i) = gauss(rng);
    dir -= dir.dot(nrm) * nrm;
    if (dir.norm() > 0) dir.normalize();
    const Vector theta = d.center + 0.5 * d.radius * unit(rng) * dir;
    for (int other = 0; other < s.K(); ++other) {
      if (other == d.k || !s.regions[other].contains(theta, 1e-9)) continue;
      out.worst = std::max(out.worst, testing::inf_norm(law_x(a, theta, n) - law_x(s.regions[other], theta, n)));
      ++out.checked;
      break;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

int main() {
  // Power management.
  {
    const Problem problem = bench::power_management();
    auto t0 = Clock::now();
    const auto naive = build_naive(problem);
    const double naive_s = seconds_since(t0);
    t0 = Clock::now();
    const auto explore = build_explore(problem);
    const double explore_s = seconds_since(t0);
    Built b{"power", problem, naive, build_tree(naive)};
    const int bad = parity_failures(b, 1000, 101);
    report(naive.K() == 5 && explore.K() == 5 && naive_s < 5 && explore_s < 5 && bad == 0, "power management",
           "K naive " + std::to_string(naive.K()) + ", K explore " + std::to_string(explore.K()) + ", build " +
               fmt(naive_s) + " s / " + fmt(explore_s) + " s, parity failures " + std::to_string(bad) + "/1000");
  }

  // Monotone regression over ten seeds.
  {
    int full = 0, bad = 0;
    std::string ks;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto b = make("monotone", bench::monotone_regression(seed));
      full += b.solution.K() == 16;
      ks += std::to_string(b.solution.K()) + (seed < 10 ? "," : "");
      bad += parity_failures(b, 1000, 200 + seed);
    }
    report(full >= 9 && bad == 0, "monotone regression",
           "K = 16 for " + std::to_string(full) + "/10 seeds (K: " + ks + "), parity failures " + std::to_string(bad) +
               "/10000");
  }

  // Portfolio over ten seeds.
  {
    int full = 0, over = 0, all_zero = 0;
    std::string ks;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto s = build_naive(bench::portfolio(seed));
      full += s.K() == 127;
      over += s.K() > 127;
      for (const auto& r : s.regions) all_zero += r.active().size() == s.qp().m();
      ks += std::to_string(s.K()) + (seed < 10 ? "," : "");
    }
    report(full >= 8 && over == 0 && all_zero == 0, "portfolio",
           "K = 127 for " + std::to_string(full) + "/10 seeds (K: " + ks + "), K > 127: " + std::to_string(over) +
               ", regions with w = 0 (all bounds active): " + std::to_string(all_zero));
  }

  std::vector<Built> four;
  four.push_back(make("power", bench::power_management()));
  four.push_back(make("monotone", bench::monotone_regression(1)));
  four.push_back(make("portfolio", bench::portfolio(1)));
  four.push_back(make("mpc", bench::mpc_problem(1)));
  const Built& mpc = four[3];

  // MPC substitute properties.
  {
    const auto& s = mpc.solution;
    const int m = s.qp().m();
    const int bad = parity_failures(mpc, 1000, 301);
    int uncovered = 0;
    for (const auto& theta : samples(s.qp(), 1000, 302)) uncovered += !linear_scan(s, theta).has_value();
    const auto cont = continuity(s, 50, 303);
    report(s.K() <= (1 << m) && bad == 0 && uncovered == 0 && cont.checked == 50 && cont.worst <= 1e-7, "mpc",
           "K " + std::to_string(s.K()) + " <= 2^" + std::to_string(m) + ", parity failures " + std::to_string(bad) +
               "/1000, uncovered " + std::to_string(uncovered) + "/1000, continuity " +
               std::to_string(cont.checked) + " facet points, max jump " + fmt(cont.worst));
  }

  // Strategy equivalence.
  {
    std::vector<std::pair<std::string, Problem>> problems = {
        {"clamp", bench::clamp_problem()}, {"power", bench::power_management()}, {"hello", bench::hello_world(1)}};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      problems.emplace_back("monotone", bench::monotone_regression(seed));
      problems.emplace_back("portfolio", bench::portfolio(seed));
    }
    problems.emplace_back("mpc", bench::mpc_problem(1));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const int n = 2 + static_cast<int>(seed % 3);
      const int m = 3 + static_cast<int>(seed % 8);
      problems.emplace_back("random", bench::random_small_qp(seed, n, m, 2));
    }
    int checked = 0, differ = 0;
    std::string which;
    for (const auto& [label, problem] : problems) {
      if (problem.qp.m() > 12) continue;
      ++checked;
      if (active_sets(build_naive(problem)) != active_sets(build_explore(problem))) {
        ++differ;
        which += " " + label;
      }
    }
    report(differ == 0, "strategy equivalence",
           std::to_string(checked) + " problems, " + std::to_string(differ) + " differ" + which);
  }

  // Tree against linear scan, and the operation bound.
  {
    bool ok = true;
    std::string detail;
    for (const auto& b : four) {
      const auto& s = b.solution;
      const Evaluator with_tree(s, &b.tree);
      const Evaluator scan(s);
      const std::int64_t bound = flop_bound(s, &b.tree);
      const std::int64_t scan_bound = flop_bound(s, nullptr);
      double worst = 0.0;
      std::int64_t most = 0;
      int over = 0, mismatch = 0;
      for (const auto& theta : samples(s.qp(), 1000, 401)) {
        const auto a = locate(b.tree, s, theta);
        const auto c = linear_scan(s, theta);
        if (a.has_value() != c.has_value()) {
          ++mismatch;
        } else if (a) {
          worst = std::max(worst, testing::inf_norm(law_x(s.regions[*a], theta, s.qp().n()) -
                                                    law_x(s.regions[*c], theta, s.qp().n())));
        }
        const auto x = with_tree.eval(theta);
        const auto y = scan.eval(theta);
        if (x.status != y.status) ++mismatch;
        else if (x.status == SolveStatus::optimal) worst = std::max(worst, testing::inf_norm(x.x - y.x));
        const auto ops = with_tree.trace(theta);
        const auto scan_ops = scan.trace(theta);
        most = std::max(most, ops.arithmetic());
        over += ops.arithmetic() > bound || scan_ops.arithmetic() > scan_bound;
      }
      ok = ok && worst <= 1e-9 && over == 0 && mismatch == 0;
      detail += b.label + " max |dx| " + fmt(worst) + " ops " + std::to_string(most) + "/" + std::to_string(bound) +
                (over || mismatch ? " (violations " + std::to_string(over + mismatch) + ")" : "") + "; ";
    }
    report(ok, "tree correctness", detail);
  }

  // Division freedom.
  {
    std::int64_t divisions = 0;
    int slashes = 0, files = 0;
    for (const auto& b : four) {
      const Evaluator ev(b.solution, &b.tree);
      const Evaluator scan(b.solution);
      for (const auto& theta : samples(b.solution.qp(), 200, 501))
        divisions += ev.trace(theta).div + scan.trace(theta).div;
      for (const auto precision : {Precision::fp64, Precision::fp32})
        for (const SearchTree* t : {static_cast<const SearchTree*>(nullptr), &b.tree}) {
          CodegenOptions opts;
          opts.precision = precision;
          const auto src = generate(b.solution, t, opts);
          for (const char* f : {"cpg_workspace.h", "cpg_workspace.c", "cpg_solve.h", "cpg_solve.c"}) {
            const auto code = strip_c_comments(src.file(f));
            slashes += static_cast<int>(std::count(code.begin(), code.end(), '/'));
            ++files;
          }
        }
    }
    report(divisions == 0 && slashes == 0, "division freedom",
           "traced divisions " + std::to_string(divisions) + ", '/' in " + std::to_string(files) +
               " solve-path files: " + std::to_string(slashes));
  }

  // Determinism.
  {
    int differ = 0;
    for (const auto& b : four) {
      const auto again = make(b.label, b.problem);
      differ += to_binary(b.solution, &b.tree) != to_binary(again.solution, &again.tree);
      for (const auto precision : {Precision::fp64, Precision::fp32}) {
        CodegenOptions opts;
        opts.precision = precision;
        differ += generate(b.solution, &b.tree, opts).files != generate(again.solution, &again.tree, opts).files;
      }
    }
    const auto e1 = build_explore(bench::mpc_problem(1));
    const auto e2 = build_explore(bench::mpc_problem(1));
    differ += to_binary(e1) != to_binary(e2);
    report(differ == 0, "determinism", std::to_string(differ) + " differing artifacts over rebuilds");
  }

  // Size limit through the command line tool.
  {
    const auto dir = testing::scratch_dir("acceptance");
    save_problem(bench::power_management(), (dir / "power.json").string());
    const auto res = testing::run("MPQP_KMAX=2 '" + std::string(MPQP_CLI) + "' build '" +
                                  (dir / "power.json").string() + "' --out '" + (dir / "x.bin").string() + "' 2>&1");
    const bool no_file = !std::filesystem::exists(dir / "x.bin");
    std::filesystem::remove_all(dir);
    report(res.exit_code != 0 && res.out.find("warning") != std::string::npos && no_file, "size limit",
           "exit " + std::to_string(res.exit_code) + ", message: " + res.out.substr(0, res.out.find('\n')));
  }

  // Online speed, and speedup over the enumeration oracle.
  {
    bool fast = true, faster = true;
    std::string speed, ratio;
    for (const auto& b : four) {
      const Evaluator ev(b.solution, &b.tree);
      auto ws = ev.make_workspace();
      auto out = ev.make_result();
      const auto thetas = samples(b.solution.qp(), 1000, 601);
      // Per-call averages over batches keep clock overhead out of sub-microsecond figures.
      std::vector<double> eval_us, oracle_us;
      for (int rep = 0; rep < 21; ++rep) {
        const auto t0 = Clock::now();
        for (const auto& theta : thetas) ev.eval_into(theta, ws, out);
        eval_us.push_back(seconds_since(t0) * 1e6 / static_cast<double>(thetas.size()));
      }
      const KktSystem sys(b.solution.qp());
      for (int rep = 0; rep < 5; ++rep) {
        const auto t0 = Clock::now();
        for (int i = 0; i < 40; ++i) oracle_solve(sys, thetas[rep * 40 + i]);
        oracle_us.push_back(seconds_since(t0) * 1e6 / 40.0);
      }
      const double e = median(eval_us), o = median(oracle_us);
      fast = fast && e < 10.0;
      faster = faster && o >= 100.0 * e;
      speed += b.label + " " + fmt(e) + " us; ";
      ratio += b.label + " " + fmt(o / e) + "x; ";
    }
    report(fast, "online speed", "median eval: " + speed);
    report(faster, "oracle speedup >= 100x", ratio);
  }

  std::printf("%s\n", failures ? "acceptance: FAIL" : "acceptance: PASS");
  return failures ? 1 : 0;
}
