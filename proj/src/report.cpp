#include "mpqp/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mpqp/serialize.hpp"

namespace mpqp {

Vector sample_theta(const ParametricQP& qp, std::mt19937_64& rng) {
  const auto& set = qp.theta_set;
  const int p = qp.p();
  if (!set.has_box() || !set.box_lo.allFinite() || !set.box_hi.allFinite())
    throw std::invalid_argument("sample_theta: Theta needs a finite box");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector theta(p);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (int i = 0; i < p; ++i) theta(i) = set.box_lo(i) + (set.box_hi(i) - set.box_lo(i)) * unif(rng);
    if (set.contains(theta, 0.0)) return theta;
  }
  throw std::runtime_error("sample_theta: rejection sampling failed");
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "naive") return Strategy::naive;
  if (s == "explore") return Strategy::explore;
  throw std::invalid_argument("strategy must be naive or explore, got '" + s + "'");
}

ExplicitSolution build(const Problem& problem, Strategy strategy, const BuildOptions& options) {
  return strategy == Strategy::naive ? build_naive(problem, options) : build_explore(problem, options);
}

bool oracle_agrees(const SolveResult& eval, const OracleResult& oracle, double tol) {
  if (!oracle.feasible) return eval.status == SolveStatus::infeasible;
  if (eval.status != SolveStatus::optimal) return false;
  const double scale = 1.0 + (oracle.x.size() ? oracle.x.cwiseAbs().maxCoeff() : 0.0);
  const double diff = oracle.x.size() ? (eval.x - oracle.x).cwiseAbs().maxCoeff() : 0.0;
  return diff <= tol * scale;
}

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::duration d) { return std::chrono::duration<double, std::micro>(d).count(); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

BenchReport run_bench(const Problem& problem, const BenchOptions& options) {
  BenchReport rep;
  const auto& qp = problem.qp;
  rep.name = problem.name;
  rep.n = qp.n();
  rep.m = qp.m();
  rep.me = qp.me();
  rep.p = qp.p();

  const auto t0 = Clock::now();
  const ExplicitSolution sol = build(problem, options.strategy, options.build);
  rep.build_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  rep.K = sol.K();
  TreeOptions topt;
  topt.leaf_cap = options.leaf_cap;
  const SearchTree tree = build_tree(sol, topt);
  rep.tree_depth = tree.depth;
  rep.flop_bound = flop_bound(sol, &tree);
  rep.serialized_bytes = static_cast<std::int64_t>(to_binary(sol, &tree).size());

  std::mt19937_64 rng(options.sample_seed);
  std::vector<Vector> thetas;
  for (int s = 0; s < options.samples; ++s) thetas.push_back(sample_theta(qp, rng));
  rep.samples = options.samples;

  const Evaluator ev(sol, &tree);
  Workspace ws = ev.make_workspace();
  SolveResult res = ev.make_result();
  const KktSystem sys(qp);
  const OracleOptions oopt{1e-8, kMaxInequalities};
  std::vector<double> oracle_times;
  for (const auto& theta : thetas) {
    ev.eval_into(theta, ws, res);
    const auto o0 = Clock::now();
    const OracleResult oracle = oracle_solve(sys, theta, oopt);
    oracle_times.push_back(micros(Clock::now() - o0));
    rep.parity_pass += oracle_agrees(res, oracle) ? 1 : 0;
  }
  rep.oracle_median_us = median(oracle_times);

  // Batches of 100 calls; the per-call figure is the batch average.
  if (!thetas.empty()) {
    std::vector<double> batch;
    double total = 0.0;
    std::size_t at = 0;
    constexpr int kBatch = 100;
    const int batches = std::max(11, options.samples * 10 / kBatch);
    for (int b = 0; b < batches; ++b) {
      const auto b0 = Clock::now();
      for (int i = 0; i < kBatch; ++i) {
        ev.eval_into(thetas[at], ws, res);
        at = (at + 1) % thetas.size();
      }
      const double us = micros(Clock::now() - b0);
      total += us;
      batch.push_back(us / kBatch);
    }
    rep.eval_median_us = median(batch);
    rep.eval_mean_us = total / (static_cast<double>(batches) * kBatch);
  }
  return rep;
}

Json report_to_json(const BenchReport& r) {
  return {{"name", r.name},
          {"n", r.n},
          {"m", r.m},
          {"me", r.me},
          {"p", r.p},
          {"K", r.K},
          {"build_seconds", r.build_seconds},
          {"eval_median_us", r.eval_median_us},
          {"eval_mean_us", r.eval_mean_us},
          {"oracle_median_us", r.oracle_median_us},
          {"flop_bound", r.flop_bound},
          {"serialized_bytes", r.serialized_bytes},
          {"tree_depth", r.tree_depth},
          {"samples", r.samples},
          {"parity_pass", r.parity_pass},
          {"parity_rate", r.parity_rate()}};
}

}  // namespace mpqp
