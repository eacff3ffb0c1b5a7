#include "mpqp/pointlocate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mpqp/densela.hpp"

namespace mpqp {

Hyperplane normalize_hyperplane(const Vector& normal, double offset) {
  Hyperplane out{normal, offset};
  const double scale = normal.size() > 0 ? normal.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return out;
  out.normal /= scale;
  out.offset /= scale;
  for (Eigen::Index i = 0; i < out.normal.size(); ++i) {
    if (std::abs(out.normal(i)) <= 1e-12) continue;
    if (out.normal(i) < 0) {
      out.normal = -out.normal;
      out.offset = -out.offset;
    }
    break;
  }
  return out;
}

namespace {

constexpr double kDedupTol = 1e-9;

bool same_plane(const Hyperplane& a, const Hyperplane& b) {
  return std::abs(a.offset - b.offset) <= kDedupTol * (1.0 + std::abs(a.offset)) &&
         (a.normal - b.normal).cwiseAbs().maxCoeff() <= kDedupTol;
}

struct PlaneSet {
  std::vector<Hyperplane> planes;
  std::vector<std::vector<int>> region_planes;  // plane indices of each region's rows
};

PlaneSet collect_planes(const ExplicitSolution& solution) {
  PlaneSet out;
  out.region_planes.resize(solution.regions.size());
  for (std::size_t k = 0; k < solution.regions.size(); ++k) {
    const auto& r = solution.regions[k];
    for (int i = 0; i < r.rows(); ++i) {
      const Hyperplane h = normalize_hyperplane(r.H.row(i).transpose(), r.j(i));
      int found = -1;
      for (std::size_t c = 0; c < out.planes.size() && found < 0; ++c)
        if (same_plane(out.planes[c], h)) found = static_cast<int>(c);
      if (found < 0) {
        found = static_cast<int>(out.planes.size());
        out.planes.push_back(h);
      }
      out.region_planes[k].push_back(found);
    }
  }
  return out;
}

class TreeBuilder {
 public:
  TreeBuilder(const ExplicitSolution& solution, const TreeOptions& options)
      : solution_(solution), options_(options), planes_(collect_planes(solution)),
        p_(solution.qp().p()),
        boxes_(solution.regions.size()) {}

  SearchTree run() {
    std::vector<int> all(solution_.regions.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    Cell cell{Matrix(0, p_), Vector(0)};
    tree_.root = build(all, cell, 0);
    return std::move(tree_);
  }

 private:
  struct Cell {
    Matrix G;
    Vector h;
  };
  struct Range {
    double lo, hi;
  };

  // Bounding box of region k (2p LPs, computed once).
  const std::pair<Vector, Vector>& bounds(int k) {
    auto& slot = boxes_[k];
    if (slot) return *slot;
    const auto& r = solution_.regions[k];
    Vector lo = Vector::Constant(p_, -INFINITY), hi = Vector::Constant(p_, INFINITY);
    for (int i = 0; i < p_; ++i) {
      const LpResult a = solve_lp(Vector::Unit(p_, i), r.H, r.j);
      if (a.status == LpStatus::optimal) lo(i) = a.objective;
      const LpResult b = solve_lp(-Vector::Unit(p_, i), r.H, r.j);
      if (b.status == LpStatus::optimal) hi(i) = -b.objective;
    }
    slot.emplace(std::move(lo), std::move(hi));
    return *slot;
  }

  // Range of normal'theta over region k alone; cached per (plane, region).
  // The box bound settles most pairs; the LPs run only when it straddles.
  Range range(int plane, int k) {
    const std::int64_t key = static_cast<std::int64_t>(plane) * static_cast<std::int64_t>(boxes_.size()) + k;
    if (auto it = ranges_.find(key); it != ranges_.end()) return it->second;
    const Hyperplane& hp = planes_.planes[plane];
    const Vector& a = hp.normal;
    const auto& [blo, bhi] = bounds(k);
    Range out{0.0, 0.0};
    for (int i = 0; i < p_; ++i) {
      out.lo += a(i) >= 0 ? a(i) * blo(i) : a(i) * bhi(i);
      out.hi += a(i) >= 0 ? a(i) * bhi(i) : a(i) * blo(i);
    }
    const double tol = kMembershipSlack * (1.0 + std::abs(hp.offset));
    if (!(out.hi <= hp.offset + tol || out.lo >= hp.offset - tol)) {
      const auto& r = solution_.regions[k];
      const LpResult lo = solve_lp(a, r.H, r.j);
      const LpResult hi = solve_lp(-a, r.H, r.j);
      out = Range{lo.status == LpStatus::optimal ? lo.objective : -INFINITY,
                  hi.status == LpStatus::optimal ? -hi.objective : INFINITY};
    }
    ranges_.emplace(key, out);
    return out;
  }

  // Full-dimensional piece of region k inside cell and the given half-space.
  bool has_piece(int k, const Cell& cell, const Vector& a, double b) const {
    const auto& r = solution_.regions[k];
    // Quick accept: the region's own inscribed ball, shrunk to fit the cell.
    double radius = std::min(r.radius, (b - a.dot(r.interior)) / a.norm());
    for (Eigen::Index i = 0; i < cell.G.rows() && radius > options_.tol_interior; ++i)
      radius = std::min(radius, (cell.h(i) - cell.G.row(i).dot(r.interior)) / cell.G.row(i).norm());
    if (radius > options_.tol_interior) return true;

    const Eigen::Index rows = r.rows() + cell.G.rows() + 1;
    Matrix G(rows, p_);
    Vector h(rows);
    G << r.H, cell.G, a.transpose() / a.norm();
    h << r.j, cell.h, b / a.norm();
    const auto ball = chebyshev_center(G, h);
    return ball && ball->radius > options_.tol_interior;
  }

  // Side lists from region-only ranges: a region straddling the plane is
  // listed on both sides.
  void split(int plane, const std::vector<int>& regions, std::vector<int>& low, std::vector<int>& high) {
    const Hyperplane& hp = planes_.planes[plane];
    const double tol = kMembershipSlack * (1.0 + std::abs(hp.offset));
    low.clear();
    high.clear();
    for (int k : regions) {
      const Range rg = range(plane, k);
      if (rg.lo < hp.offset - tol || rg.hi <= hp.offset + tol) low.push_back(k);
      if (rg.hi > hp.offset + tol || rg.lo >= hp.offset - tol) high.push_back(k);
    }
  }

  // Drops straddling regions without a full-dimensional piece in the cell
  // restricted to the given side.
  void refine(int plane, const Cell& cell, std::vector<int>& low, std::vector<int>& high) {
    const Hyperplane& hp = planes_.planes[plane];
    std::vector<int> keep_low, keep_high;
    for (int k : low) {
      const bool both = std::binary_search(high.begin(), high.end(), k);
      if (!both || has_piece(k, cell, hp.normal, hp.offset)) keep_low.push_back(k);
    }
    for (int k : high) {
      const bool both = std::binary_search(low.begin(), low.end(), k);
      if (!both || has_piece(k, cell, -hp.normal, -hp.offset)) keep_high.push_back(k);
    }
    low = std::move(keep_low);
    high = std::move(keep_high);
  }

  std::int32_t make_leaf(std::vector<int> regions, int depth) {
    std::sort(regions.begin(), regions.end());
    tree_.leaves.push_back(std::move(regions));
    tree_.depth = std::max(tree_.depth, depth);
    return SearchTree::leaf_ref(static_cast<int>(tree_.leaves.size()) - 1);
  }

  std::int32_t build(const std::vector<int>& regions, const Cell& cell, int depth) {
    const auto count = regions.size();
    if (count <= static_cast<std::size_t>(options_.leaf_cap) || depth >= options_.depth_cap)
      return make_leaf(regions, depth);

    std::vector<int> candidates;
    for (int k : regions)
      candidates.insert(candidates.end(), planes_.region_planes[k].begin(), planes_.region_planes[k].end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // Rank by the region-only score, then refine the most promising few
    // against the node cell.
    std::vector<std::pair<std::size_t, int>> ranked;
    std::vector<int> low, high;
    for (int c : candidates) {
      split(c, regions, low, high);
      ranked.emplace_back(std::max(low.size(), high.size()), c);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    int best = -1;
    std::size_t best_score = count;
    std::vector<int> best_low, best_high;
    for (std::size_t i = 0; i < std::min<std::size_t>(ranked.size(), std::max(1, options_.refine_candidates)); ++i) {
      const int c = ranked[i].second;
      split(c, regions, low, high);
      refine(c, cell, low, high);
      const std::size_t score = std::max(low.size(), high.size());
      if (score < best_score) {
        best_score = score;
        best = c;
        best_low = low;
        best_high = high;
      }
    }
    if (best < 0) return make_leaf(regions, depth);

    const Hyperplane& hp = planes_.planes[best];
    const auto node = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({hp, -1, -1});

    auto child_cell = [&](double sign) {
      Cell out{Matrix(cell.G.rows() + 1, p_), Vector(cell.h.size() + 1)};
      out.G << cell.G, sign * hp.normal.transpose();
      out.h << cell.h, sign * hp.offset;
      return out;
    };
    const std::int32_t low_ref = build(best_low, child_cell(1.0), depth + 1);
    const std::int32_t high_ref = build(best_high, child_cell(-1.0), depth + 1);
    tree_.nodes[node].low = low_ref;
    tree_.nodes[node].high = high_ref;
    return node;
  }

  const ExplicitSolution& solution_;
  const TreeOptions& options_;
  PlaneSet planes_;
  int p_;
  SearchTree tree_;
  std::unordered_map<std::int64_t, Range> ranges_;
  std::vector<std::optional<std::pair<Vector, Vector>>> boxes_;
};

}  // namespace

std::vector<Hyperplane> candidate_hyperplanes(const ExplicitSolution& solution) {
  return collect_planes(solution).planes;
}

SearchTree build_tree(const ExplicitSolution& solution, const TreeOptions& options) {
  if (solution.regions.empty()) throw EmptySolutionError("build_tree: solution has no regions");
  return TreeBuilder(solution, options).run();
}

std::optional<int> locate(const SearchTree& tree, const ExplicitSolution& solution, const Vector& theta) {
  if (theta.size() != solution.qp().p()) throw DimensionError("locate: theta has wrong length");
  std::int32_t ref = tree.root;
  while (!SearchTree::is_leaf(ref)) {
    const TreeNode& node = tree.nodes[ref];
    ref = node.plane.normal.dot(theta) <= node.plane.offset ? node.low : node.high;
  }
  for (int k : tree.leaves[SearchTree::leaf_index(ref)])
    if (solution.regions[k].contains(theta, kMembershipSlack)) return k;
  return std::nullopt;
}

std::optional<int> linear_scan(const ExplicitSolution& solution, const Vector& theta) {
  if (theta.size() != solution.qp().p()) throw DimensionError("linear_scan: theta has wrong length");
  for (int k = 0; k < solution.K(); ++k)
    if (solution.regions[k].contains(theta, kMembershipSlack)) return k;
  return std::nullopt;
}

}  // namespace mpqp
