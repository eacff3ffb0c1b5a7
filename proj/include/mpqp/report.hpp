#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "mpqp/evaluator.hpp"
#include "mpqp/problem_io.hpp"

namespace mpqp {

/// Uniform sample from Theta: uniform on the box, rejected against the
/// remaining rows. Needs finite box bounds on every coordinate.
Vector sample_theta(const ParametricQP& qp, std::mt19937_64& rng);

enum class Strategy { naive, explore };
Strategy strategy_from_string(const std::string& s);
ExplicitSolution build(const Problem& problem, Strategy strategy, const BuildOptions& options = {});

/// x_eval agrees with x_oracle to tol (1 + |x_oracle|_inf), or both report
/// an infeasible parameter.
bool oracle_agrees(const SolveResult& eval, const OracleResult& oracle, double tol = 1e-6);

struct BenchOptions {
  Strategy strategy = Strategy::naive;
  int samples = 1000;
  std::uint64_t sample_seed = 1;
  int leaf_cap = 4;
  BuildOptions build;
};

struct BenchReport {
  std::string name;
  int n = 0, m = 0, me = 0, p = 0, K = 0;
  double build_seconds = 0.0;
  double eval_median_us = 0.0;
  double eval_mean_us = 0.0;
  double oracle_median_us = 0.0;
  std::int64_t flop_bound = 0;
  std::int64_t serialized_bytes = 0;
  int tree_depth = 0;
  int samples = 0;
  int parity_pass = 0;
  double parity_rate() const { return samples ? static_cast<double>(parity_pass) / samples : 1.0; }
};

/// Builds the problem, a search tree, and times tree evaluation against the
/// enumeration oracle over `samples` parameters drawn from Theta.
BenchReport run_bench(const Problem& problem, const BenchOptions& options);

Json report_to_json(const BenchReport& report);

}  // namespace mpqp
