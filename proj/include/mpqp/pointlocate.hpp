#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mpqp/builder.hpp"

namespace mpqp {

/// Region membership slack shared by the builder, the tree and the evaluator.
inline constexpr double kMembershipSlack = 1e-9;

/// normal'theta <= offset is the low side. Stored normals have max-abs
/// coefficient 1 and a positive first nonzero coefficient.
struct Hyperplane {
  Vector normal;
  double offset = 0.0;
};

/// Scales a half-space row to the canonical hyperplane representation.
Hyperplane normalize_hyperplane(const Vector& normal, double offset);

/// Distinct facet hyperplanes of all regions, in first-appearance order.
std::vector<Hyperplane> candidate_hyperplanes(const ExplicitSolution& solution);

struct TreeNode {
  Hyperplane plane;
  /// Child references: >= 0 is a node index, < 0 is leaf ~child.
  std::int32_t low = -1;
  std::int32_t high = -1;
};

struct SearchTree {
  std::vector<TreeNode> nodes;
  std::vector<std::vector<int>> leaves;  // sorted candidate region indices
  int depth = 0;
  std::int32_t root = -1;

  static bool is_leaf(std::int32_t ref) { return ref < 0; }
  static int leaf_index(std::int32_t ref) { return ~ref; }
  static std::int32_t leaf_ref(int leaf) { return ~leaf; }

  /// Calls fn(leaf_index, depth) for every leaf.
  template <typename Fn>
  void for_each_leaf(Fn&& fn) const {
    visit(root, 0, fn);
  }

 private:
  template <typename Fn>
  void visit(std::int32_t ref, int d, Fn& fn) const {
    if (is_leaf(ref)) {
      fn(leaf_index(ref), d);
      return;
    }
    visit(nodes[ref].low, d + 1, fn);
    visit(nodes[ref].high, d + 1, fn);
  }
};

struct TreeOptions {
  int leaf_cap = 4;
  int depth_cap = 64;
  /// Chebyshev radius a region piece needs to count as present on a side.
  double tol_interior = 1e-9;
  /// Number of best-ranked candidates (by region-only score) that are
  /// re-scored after pruning against the node cell. 1 keeps the plain
  /// region-only choice.
  int refine_candidates = 1;
};

/// Greedy split tree: each node takes the candidate hyperplane minimizing the
/// larger child's region count (first index on ties). A region is listed on
/// every side where it keeps a full-dimensional piece inside the node cell.
SearchTree build_tree(const ExplicitSolution& solution, const TreeOptions& options = {});

/// Descends by the sign of normal'theta - offset (ties go low) and scans the
/// leaf. nullopt means theta lies in no region (infeasible parameter).
std::optional<int> locate(const SearchTree& tree, const ExplicitSolution& solution, const Vector& theta);

/// First region in sorted order with H theta <= j + slack.
std::optional<int> linear_scan(const ExplicitSolution& solution, const Vector& theta);

}  // namespace mpqp
