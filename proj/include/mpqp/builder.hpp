#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpqp/mpqp_core.hpp"

namespace mpqp {

/// One nonempty, full-dimensional critical region. Rows of H are scaled to
/// unit Euclidean norm and exclude redundant rows; Theta rows are included.
struct CriticalRegion {
  AffineLaw law;
  Matrix H;
  Vector j;
  std::vector<FacetOrigin> origin;
  Vector interior;  // Chebyshev center
  double radius = 0.0;

  const ActiveSet& active() const { return law.active; }
  int rows() const { return static_cast<int>(j.size()); }
  /// H theta <= j + slack.
  bool contains(const Vector& theta, double slack = 1e-9) const;
};

/// Counters describing what the offline phase examined and discarded.
struct BuildLog {
  std::int64_t candidates = 0;
  std::int64_t skipped_cardinality = 0;
  std::int64_t skipped_licq = 0;
  std::int64_t empty = 0;
  std::int64_t lower_dimensional = 0;
  std::int64_t recovered_by_step = 0;  // explore only: found by stepping over a facet
};

struct ExplicitSolution {
  Problem problem;
  std::vector<CriticalRegion> regions;  // sorted by active-set bit string
  BuildLog log;
  std::uint64_t problem_hash = 0;
  double regularization = 0.0;

  int K() const { return static_cast<int>(regions.size()); }
  const ParametricQP& qp() const { return problem.qp; }
};

struct BuildOptions {
  double tol_interior = 1e-9;
  double redundancy_tol = 1e-9;
  std::int64_t k_max = 100000;
  std::int64_t byte_budget = std::int64_t{256} << 20;
  int m_naive = 25;
  double kkt_tol = 1e-8;
  /// Explicit seed for build_explore; Chebyshev center of Theta when empty.
  std::optional<Vector> seed;
};

/// Number of stored coefficients: sum over regions of (rows(F) + rows(H)) (p + 1).
std::int64_t coefficient_count(const ExplicitSolution& solution);

/// Removes row i iff max h_i'theta over the remaining rows is <= j_i + tol.
/// Rows are examined in order; unbounded maxima keep the row.
RegionIneq drop_redundant_rows(const RegionIneq& region, double tol = 1e-9);

/// Builds the region of one active set (law, Theta-intersected inequalities,
/// interior ball). nullopt when LICQ fails or the region is empty or thin;
/// the reason is counted in log.
std::optional<CriticalRegion> make_region(const KktSystem& sys, const ActiveSet& active,
                                          const BuildOptions& options, BuildLog& log);

/// Examines all 2^m active sets. Throws SizeLimitError when m > m_naive or
/// limits are exceeded, EmptySolutionError when K = 0.
ExplicitSolution build_naive(const Problem& problem, const BuildOptions& options = {});

/// Breadth-first search over neighbouring regions starting from the region
/// of the seed parameter. Same errors as build_naive (no m_naive limit).
ExplicitSolution build_explore(const Problem& problem, const BuildOptions& options = {});

}  // namespace mpqp
