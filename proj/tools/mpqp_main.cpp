// mpqp: offline builder, evaluator, code generator and benchmark runner for
// explicit solutions of parametric quadratic programs.
//
// Exit codes: 0 success, 1 invalid or malformed input, 2 size limit reached.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mpqp/benchmarks.hpp"
#include "mpqp/codegen.hpp"
#include "mpqp/report.hpp"
#include "mpqp/serialize.hpp"

using namespace mpqp;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kSizeLimit = 2;

BuildOptions build_options() {
  BuildOptions opt;
  if (const char* env = std::getenv("MPQP_KMAX")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) throw std::invalid_argument("MPQP_KMAX must be a nonnegative integer");
    opt.k_max = v;
  }
  return opt;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json vec_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json log_json(const BuildLog& log) {
  return {{"candidates", log.candidates},           {"skipped_cardinality", log.skipped_cardinality},
          {"skipped_licq", log.skipped_licq},       {"empty", log.empty},
          {"lower_dimensional", log.lower_dimensional}, {"recovered_by_step", log.recovered_by_step}};
}

int cmd_validate(const std::string& file, bool json) {
  const Problem problem = load_problem(file);
  const ValidationReport report = validate(problem);
  if (json) {
    std::cout << Json{{"ok", report.ok()}, {"violations", report.violations}}.dump() << "\n";
  } else {
    for (const auto& v : report.violations) std::cout << "violation: " << v << "\n";
    if (report.ok()) std::cout << "ok\n";
  }
  return report.ok() ? kOk : kInvalid;
}

int cmd_build(const std::string& file, const std::string& strategy, const std::string& out, int leaf_cap,
              bool no_tree, bool json) {
  const Problem problem = load_problem(file);
  const ValidationReport report = validate(problem);
  if (!report.ok()) {
    for (const auto& v : report.violations) std::cerr << "violation: " << v << "\n";
    return kInvalid;
  }
  const ExplicitSolution sol = build(problem, strategy_from_string(strategy), build_options());
  std::optional<SearchTree> tree;
  if (!no_tree) {
    TreeOptions topt;
    topt.leaf_cap = leaf_cap;
    tree = build_tree(sol, topt);
  }
  if (!out.empty()) save_solution(out, sol, tree ? &*tree : nullptr);
  if (json) {
    Json doc{{"K", sol.K()}, {"log", log_json(sol.log)}, {"flop_bound", flop_bound(sol, tree ? &*tree : nullptr)}};
    if (tree) doc["tree_depth"] = tree->depth;
    std::cout << doc.dump() << "\n";
  } else {
    const auto& log = sol.log;
    std::cout << "K = " << sol.K() << "\n"
              << "candidates " << log.candidates << ", skipped (cardinality) " << log.skipped_cardinality
              << ", skipped (LICQ) " << log.skipped_licq << ", empty " << log.empty << ", lower-dimensional "
              << log.lower_dimensional << ", recovered by facet step " << log.recovered_by_step << "\n";
    if (tree) std::cout << "tree depth " << tree->depth << ", " << tree->leaves.size() << " leaves\n";
  }
  return kOk;
}

std::vector<std::vector<double>> read_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream s(line);
    std::vector<double> row;
    std::string tok;
    while (s >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(lineno) + ": '" + tok + "' is not a number");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_eval(const std::string& file, const std::vector<double>& values, const std::string& input, bool canonical,
             bool json) {
  const StoredSolution stored = load_solution(file);
  const auto& sol = stored.solution;
  const SearchTree* tree = stored.tree ? &*stored.tree : nullptr;
  std::vector<std::vector<double>> rows;
  if (!values.empty()) rows.push_back(values);
  if (!input.empty()) {
    if (input == "-") {
      auto more = read_rows(std::cin);
      rows.insert(rows.end(), more.begin(), more.end());
    } else {
      std::ifstream f(input);
      if (!f) throw std::runtime_error("cannot open '" + input + "'");
      auto more = read_rows(f);
      rows.insert(rows.end(), more.begin(), more.end());
    }
  }
  const auto want = canonical ? sol.qp().p() : static_cast<int>(sol.problem.maps.C.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (static_cast<int>(rows[i].size()) != want)
      throw FormatError("row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                        " values, expected " + std::to_string(want));

  const Evaluator ev(sol, tree);
  Json out_rows = Json::array();
  for (const auto& row : rows) {
    const Vector theta = Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size()));
    SolveResult res;
    Vector x;
    if (canonical) {
      res = ev.eval(theta);
      x = res.x;
    } else {
      res = ev.eval(map_user_params(sol.problem.maps, theta));
      if (res.status == SolveStatus::optimal) {
        Vector z(res.x.size() + res.lambda.size() + res.nu.size());
        z << res.x, res.lambda, res.nu;
        x = retrieve_user_solution(sol.problem.maps, z);
      }
    }
    const bool ok = res.status == SolveStatus::optimal;
    if (json) {
      Json r{{"status", ok ? "optimal" : "infeasible"}, {"region", res.region_index}};
      if (ok) r["x"] = vec_json(x);
      out_rows.push_back(std::move(r));
    } else {
      std::cout << (ok ? "optimal" : "infeasible") << " " << res.region_index;
      if (ok)
        for (Eigen::Index i = 0; i < x.size(); ++i) std::cout << " " << fmt(x(i));
      std::cout << "\n";
    }
  }
  if (json) std::cout << Json{{"rows", out_rows}}.dump() << "\n";
  return kOk;
}

int cmd_codegen(const std::string& file, const std::string& out_dir, const std::string& precision,
                const std::string& prefix, bool linear_scan, bool json) {
  const StoredSolution stored = load_solution(file);
  CodegenOptions opt;
  opt.precision = precision_from_string(precision);
  opt.prefix = prefix;
  const SearchTree* tree = stored.tree && !linear_scan ? &*stored.tree : nullptr;
  const GeneratedSource src = generate(stored.solution, tree, opt);
  write_sources(src, out_dir);
  if (json) {
    Json files = Json::array();
    for (const auto& [name, text] : src.files) files.push_back({{"name", name}, {"bytes", text.size()}});
    std::cout << Json{{"files", files}, {"coefficients", src.coefficients}, {"flop_bound", src.flop_bound},
                      {"precision", to_string(src.precision)}}
                     .dump()
              << "\n";
  } else {
    std::cout << src.file("manifest.txt");
  }
  return kOk;
}

int cmd_bench(const std::string& name, std::uint64_t seed, int samples, const std::string& strategy, int leaf_cap,
              const std::string& emit_problem, bool json) {
  const Problem problem = bench::by_name(name, seed);
  if (!emit_problem.empty()) save_problem(problem, emit_problem);
  BenchOptions opt;
  opt.strategy = strategy_from_string(strategy);
  opt.samples = samples;
  opt.sample_seed = seed + 1;
  opt.leaf_cap = leaf_cap;
  opt.build = build_options();
  const BenchReport r = run_bench(problem, opt);
  if (json) {
    std::cout << report_to_json(r).dump() << "\n";
  } else {
    std::printf("%s: n=%d m=%d me=%d p=%d K=%d\n", r.name.c_str(), r.n, r.m, r.me, r.p, r.K);
    std::printf("  build %.3f s, tree depth %d, serialized %lld bytes, flop bound %lld\n", r.build_seconds,
                r.tree_depth, static_cast<long long>(r.serialized_bytes), static_cast<long long>(r.flop_bound));
    std::printf("  eval median %.3f us, mean %.3f us; oracle median %.1f us\n", r.eval_median_us, r.eval_mean_us,
                r.oracle_median_us);
    std::printf("  oracle parity %d/%d\n", r.parity_pass, r.samples);
  }
  return r.parity_pass == r.samples ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit solver toolkit for parametric quadratic programs"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Print one JSON object per command");

  std::string problem_file, solution_file, out, strategy = "naive", precision = "fp64", prefix = "cpg_", input,
                                                 bench_name, emit_problem;
  std::vector<double> values;
  int leaf_cap = 4, samples = 1000;
  std::uint64_t seed = 0;
  bool no_tree = false, canonical = false, linear_scan = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check a problem file");
  validate_cmd->add_option("problem", problem_file, "Problem JSON")->required();
  validate_cmd->add_flag("--json", json);

  auto* build_cmd = app.add_subcommand("build", "Compute the explicit solution");
  build_cmd->add_option("problem", problem_file, "Problem JSON")->required();
  build_cmd->add_option("--strategy", strategy, "naive or explore")->check(CLI::IsMember({"naive", "explore"}));
  build_cmd->add_option("--out", out, "Solution file (.json for the debug format, binary otherwise)");
  build_cmd->add_option("--leaf-cap", leaf_cap, "Search tree leaf size")->check(CLI::PositiveNumber);
  build_cmd->add_flag("--no-tree", no_tree, "Skip the search tree (linear scan online)");
  build_cmd->add_flag("--json", json);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a stored solution");
  eval_cmd->add_option("solution", solution_file, "Solution file")->required();
  eval_cmd->add_option("theta", values, "Parameter values (user space unless --canonical)");
  eval_cmd->add_option("--input", input, "File of parameter rows, '-' for stdin");
  eval_cmd->add_flag("--canonical", canonical, "Parameters and output in canonical space");
  eval_cmd->add_flag("--json", json);

  auto* codegen_cmd = app.add_subcommand("codegen", "Emit C sources");
  codegen_cmd->add_option("solution", solution_file, "Solution file")->required();
  codegen_cmd->add_option("--out", out, "Output directory")->required();
  codegen_cmd->add_option("--precision", precision, "fp32 or fp64")->check(CLI::IsMember({"fp32", "fp64"}));
  codegen_cmd->add_option("--prefix", prefix, "Identifier prefix");
  codegen_cmd->add_flag("--linear-scan", linear_scan, "Ignore the stored tree");
  codegen_cmd->add_flag("--json", json);

  auto* bench_cmd = app.add_subcommand("bench", "Build and time a benchmark problem");
  bench_cmd->add_option("name", bench_name, "Benchmark name")->required()->check(CLI::IsMember(bench::names()));
  bench_cmd->add_option("--seed", seed, "Problem seed");
  bench_cmd->add_option("--samples", samples, "Parameter samples")->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--strategy", strategy, "naive or explore")->check(CLI::IsMember({"naive", "explore"}));
  bench_cmd->add_option("--leaf-cap", leaf_cap, "Search tree leaf size")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--emit-problem", emit_problem, "Also write the problem JSON here");
  bench_cmd->add_flag("--json", json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate_cmd) return cmd_validate(problem_file, json);
    if (*build_cmd) return cmd_build(problem_file, strategy, out, leaf_cap, no_tree, json);
    if (*eval_cmd) return cmd_eval(solution_file, values, input, canonical, json);
    if (*codegen_cmd) return cmd_codegen(solution_file, out, precision, prefix, linear_scan, json);
    if (*bench_cmd) return cmd_bench(bench_name, seed, samples, strategy, leaf_cap, emit_problem, json);
  } catch (const SizeLimitError& e) {
    std::cerr << e.what() << "\n";
    return kSizeLimit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
