#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "mpqp/benchmarks.hpp"
#include "mpqp/builder.hpp"
#include "mpqp/codegen.hpp"
#include "mpqp/evaluator.hpp"
#include "mpqp/report.hpp"

namespace testing {

using mpqp::Matrix;
using mpqp::Vector;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
  Matrix M(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) M(i, j++) = x;
    ++i;
  }
  return M;
}

inline double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Fresh directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("mpqp_test_" + tag + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Command {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command through popen and captures stdout.
inline Command run(const std::string& cmd) {
  Command result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return result;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct DriverRow {
  int status = -1;
  std::vector<double> values;
};

// Compiled example driver from a generated source set.
class CompiledDriver {
 public:
  CompiledDriver(const mpqp::GeneratedSource& src, const std::string& tag) : dir_(scratch_dir(tag)) {
    mpqp::write_sources(src, dir_.string());
    const auto res = run("cd '" + dir_.string() + "' && cc -std=c99 -O2 -Wall -Wextra -Werror -o example "
                         "example_main.c cpg_solve.c cpg_workspace.c 2>&1");
    ok_ = res.exit_code == 0;
    log_ = res.out;
  }
  ~CompiledDriver() { std::filesystem::remove_all(dir_); }

  bool ok() const { return ok_; }
  const std::string& log() const { return log_; }
  const std::filesystem::path& dir() const { return dir_; }

  std::vector<DriverRow> run_rows(const std::vector<Vector>& thetas) const {
    const auto input = dir_ / "input.txt";
    {
      std::ofstream out(input);
      out.precision(17);
      for (const auto& t : thetas) {
        for (Eigen::Index i = 0; i < t.size(); ++i) out << (i ? " " : "") << t(i);
        out << "\n";
      }
    }
    const auto res = run("'" + (dir_ / "example").string() + "' < '" + input.string() + "'");
    std::vector<DriverRow> rows;
    std::istringstream lines(res.out);
    std::string line;
    while (std::getline(lines, line)) {
      std::istringstream fields(line);
      DriverRow row;
      fields >> row.status;
      double x;
      while (fields >> x) row.values.push_back(x);
      rows.push_back(std::move(row));
    }
    return rows;
  }

 private:
  std::filesystem::path dir_;
  bool ok_ = false;
  std::string log_;
};

// Uniform samples of the user parameter box (falls back to canonical Theta for identity maps).
inline std::vector<Vector> sample_user(const mpqp::Problem& problem, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> out;
  const auto& maps = problem.maps;
  const bool identity = maps.C.rows() == maps.C.cols() && maps.C.isIdentity() && maps.c.isZero();
  for (int i = 0; i < count; ++i) {
    Vector theta = mpqp::sample_theta(problem.qp, rng);
    if (!identity) {
      // User parameters are a permutation/selection of canonical ones in our fixtures.
      theta = maps.C.transpose() * (theta - maps.c);
    }
    out.push_back(theta);
  }
  return out;
}

}  // namespace testing
