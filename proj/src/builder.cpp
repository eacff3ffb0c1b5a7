#include "mpqp/builder.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <unordered_set>

namespace mpqp {

bool CriticalRegion::contains(const Vector& theta, double slack) const {
  if (rows() == 0) return true;
  return (H * theta - j).maxCoeff() <= slack;
}

std::int64_t coefficient_count(const ExplicitSolution& solution) {
  const std::int64_t p = solution.qp().p();
  std::int64_t total = 0;
  for (const auto& r : solution.regions) total += (r.law.rows() + r.rows()) * (p + 1);
  return total;
}

RegionIneq drop_redundant_rows(const RegionIneq& region, double tol) {
  const int rows = region.rows();
  const Eigen::Index p = region.H.cols();
  std::vector<bool> keep(rows, true);
  for (int i = 0; i < rows; ++i) {
    std::vector<int> others;
    for (int k = 0; k < rows; ++k)
      if (k != i && keep[k]) others.push_back(k);
    if (others.empty()) continue;
    Matrix G(others.size(), p);
    Vector h(others.size());
    for (std::size_t k = 0; k < others.size(); ++k) {
      G.row(k) = region.H.row(others[k]);
      h(k) = region.j(others[k]);
    }
    const LpResult lp = solve_lp(-region.H.row(i).transpose(), G, h);
    if (lp.status == LpStatus::optimal && -lp.objective <= region.j(i) + tol) keep[i] = false;
  }

  RegionIneq out;
  const int kept = static_cast<int>(std::count(keep.begin(), keep.end(), true));
  out.H.resize(kept, p);
  out.j.resize(kept);
  int row = 0;
  for (int i = 0; i < rows; ++i) {
    if (!keep[i]) continue;
    out.H.row(row) = region.H.row(i);
    out.j(row) = region.j(i);
    out.origin.push_back(region.origin[i]);
    ++row;
  }
  return out;
}

std::optional<CriticalRegion> make_region(const KktSystem& sys, const ActiveSet& active,
                                          const BuildOptions& options, BuildLog& log) {
  const auto& qp = sys.qp();
  ++log.candidates;
  if (active.size() > qp.n() - qp.me()) {
    ++log.skipped_cardinality;
    return std::nullopt;
  }
  auto law = affine_law(sys, active);
  if (!law) {
    ++log.skipped_licq;
    return std::nullopt;
  }

  const RegionIneq raw = region_ineq(qp, *law);
  const auto& theta = qp.theta_set;
  const int total = raw.rows() + theta.rows();
  RegionIneq scaled;
  scaled.H.resize(total, qp.p());
  scaled.j.resize(total);
  int row = 0;
  for (int i = 0; i < total; ++i) {
    const bool from_theta = i >= raw.rows();
    const int src = from_theta ? i - raw.rows() : i;
    const Eigen::RowVectorXd h = from_theta ? Eigen::RowVectorXd(theta.G.row(src)) : Eigen::RowVectorXd(raw.H.row(src));
    const double rhs = from_theta ? theta.h(src) : raw.j(src);
    const double norm = h.norm();
    if (norm < 1e-11) {
      // Constant row 0 <= rhs.
      if (rhs >= -1e-9) continue;
      ++log.empty;
      return std::nullopt;
    }
    scaled.H.row(row) = h / norm;
    scaled.j(row) = rhs / norm;
    scaled.origin.push_back(from_theta ? FacetOrigin{FacetOrigin::Kind::theta, src} : raw.origin[src]);
    ++row;
  }
  scaled.H.conservativeResize(row, qp.p());
  scaled.j.conservativeResize(row);

  const auto ball = chebyshev_center(scaled.H, scaled.j);
  if (!ball) {
    ++log.empty;
    return std::nullopt;
  }
  if (ball->radius <= options.tol_interior) {
    ++log.lower_dimensional;
    return std::nullopt;
  }

  RegionIneq reduced = drop_redundant_rows(scaled, options.redundancy_tol);
  CriticalRegion region;
  region.law = std::move(*law);
  region.H = std::move(reduced.H);
  region.j = std::move(reduced.j);
  region.origin = std::move(reduced.origin);
  region.interior = ball->center;
  region.radius = ball->radius;
  return region;
}

namespace {

class RegionCollector {
 public:
  RegionCollector(const Problem& problem, const BuildOptions& options)
      : options_(options), p_(problem.qp.p()) {}

  void add(CriticalRegion region) {
    bytes_ += static_cast<std::int64_t>(sizeof(double)) * (region.law.rows() + region.rows()) * (p_ + 1);
    regions_.push_back(std::move(region));
    if (static_cast<std::int64_t>(regions_.size()) > options_.k_max) {
      throw SizeLimitError("warning: offline phase terminated, number of regions exceeds K_MAX = " +
                           std::to_string(options_.k_max));
    }
    if (bytes_ > options_.byte_budget) {
      throw SizeLimitError("warning: offline phase terminated, explicit solver data exceeds " +
                           std::to_string(options_.byte_budget) + " bytes");
    }
  }

  const std::vector<CriticalRegion>& regions() const { return regions_; }

  ExplicitSolution finish(const Problem& problem, const BuildLog& log) {
    if (regions_.empty()) throw EmptySolutionError("no feasible parameter region: K = 0");
    std::sort(regions_.begin(), regions_.end(),
              [](const CriticalRegion& a, const CriticalRegion& b) { return a.active() < b.active(); });
    ExplicitSolution out;
    out.problem = problem;
    out.regions = std::move(regions_);
    out.log = log;
    out.problem_hash = content_hash(problem.qp);
    out.regularization = regularization_epsilon(problem.qp);
    return out;
  }

 private:
  const BuildOptions& options_;
  int p_;
  std::int64_t bytes_ = 0;
  std::vector<CriticalRegion> regions_;
};

}  // namespace

ExplicitSolution build_naive(const Problem& problem, const BuildOptions& options) {
  const auto& qp = problem.qp;
  const int m = qp.m();
  if (m > options.m_naive)
    throw SizeLimitError("build_naive: m = " + std::to_string(m) + " exceeds the enumeration limit " +
                         std::to_string(options.m_naive));
  const KktSystem sys(qp);
  BuildLog log;
  RegionCollector collector(problem, options);
  const std::uint64_t count = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    if (auto region = make_region(sys, ActiveSet::from_mask(mask), options, log)) collector.add(std::move(*region));
  }
  return collector.finish(problem, log);
}

namespace {

// Point just outside facet `row` of the region, at the center of the facet.
std::optional<Vector> step_over_facet(const CriticalRegion& region, int row) {
  const Eigen::Index p = region.H.cols();
  const int rows = region.rows();
  Matrix G(rows + 1, p + 1);
  Vector h(rows + 1);
  int k = 0;
  for (int i = 0; i < rows; ++i) {
    if (i == row) continue;
    G.row(k).head(p) = region.H.row(i);
    G(k, p) = 1.0;  // rows have unit norm
    h(k) = region.j(i);
    ++k;
  }
  G.row(k).setZero();
  G(k, p) = 1.0;
  h(k++) = kRadiusCap;
  G.row(k).setZero();
  G(k, p) = -1.0;
  h(k++) = 0.0;
  Matrix Geq = Matrix::Zero(1, p + 1);
  Geq.row(0).head(p) = region.H.row(row);
  Vector heq(1);
  heq(0) = region.j(row);
  Vector cost = Vector::Zero(p + 1);
  cost(p) = -1.0;
  const LpResult lp = solve_lp(cost, G.topRows(k), h.head(k), Geq, heq);
  if (lp.status != LpStatus::optimal || lp.x(p) < 1e-8) return std::nullopt;
  const double step = std::min(1e-6, 0.5 * lp.x(p));
  return Vector(lp.x.head(p) + step * region.H.row(row).transpose());
}

}  // namespace

ExplicitSolution build_explore(const Problem& problem, const BuildOptions& options) {
  const auto& qp = problem.qp;
  const auto& theta_set = qp.theta_set;
  const KktSystem sys(qp);
  const OracleOptions oracle_opts{options.kkt_tol, kMaxInequalities};
  BuildLog log;
  RegionCollector collector(problem, options);
  std::unordered_set<ActiveSet> visited;
  std::deque<std::size_t> frontier;

  auto try_add = [&](const ActiveSet& active) {
    if (!visited.insert(active).second) return false;
    auto region = make_region(sys, active, options, log);
    if (!region) return false;
    collector.add(std::move(*region));
    frontier.push_back(collector.regions().size() - 1);
    return true;
  };
  auto covered = [&](const Vector& theta) {
    for (const auto& r : collector.regions())
      if (r.contains(theta)) return true;
    return false;
  };

  // Seed: oracle at the Chebyshev center of Theta, then at random points of
  // its inscribed ball until a full-dimensional region turns up.
  Vector center;
  double radius = 1.0;
  if (options.seed) {
    center = *options.seed;
  } else {
    const auto ball = chebyshev_center(theta_set.G, theta_set.h);
    if (!ball) throw EmptySolutionError("parameter set is empty");
    center = ball->center;
    radius = std::min(1.0, ball->radius);
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  for (int attempt = 0; attempt < 256 && collector.regions().empty(); ++attempt) {
    Vector theta = center;
    if (attempt > 0) {
      Vector dir(qp.p());
      for (auto& d : dir) d = normal(rng);
      if (dir.norm() > 0) theta += (0.9 * radius * unif(rng) / dir.norm()) * dir;
    }
    if (!theta_set.contains(theta, 0.0) && attempt > 0) continue;
    try {
      const OracleResult seed = oracle_solve(sys, theta, oracle_opts);
      if (seed.feasible) try_add(seed.active);
    } catch (const SizeLimitError&) {
      throw;
    } catch (const std::runtime_error&) {
    }
  }

  while (!frontier.empty()) {
    const std::size_t index = frontier.front();
    frontier.pop_front();
    const int rows = collector.regions()[index].rows();
    for (int row = 0; row < rows; ++row) {
      // Copy: collector storage may reallocate inside try_add.
      const FacetOrigin origin = collector.regions()[index].origin[row];
      if (origin.kind == FacetOrigin::Kind::theta) continue;
      ActiveSet neighbour = collector.regions()[index].active();
      if (origin.kind == FacetOrigin::Kind::primal) {
        neighbour.insert(origin.index);
      } else {
        neighbour.erase(origin.index);
      }
      try_add(neighbour);

      // Degenerate crossings: probe the other side of the facet directly.
      const auto outside = step_over_facet(collector.regions()[index], row);
      if (!outside || !theta_set.contains(*outside, 0.0) || covered(*outside)) continue;
      try {
        const OracleResult there = oracle_solve(sys, *outside, oracle_opts);
        if (there.feasible && try_add(there.active)) ++log.recovered_by_step;
      } catch (const SizeLimitError&) {
        throw;
      } catch (const std::runtime_error&) {
      }
    }
  }
  return collector.finish(problem, log);
}

}  // namespace mpqp
