#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpqp/pointlocate.hpp"
#include "mpqp/problem_io.hpp"

namespace mpqp {

inline constexpr std::uint16_t kFormatVersion = 1;

struct StoredSolution {
  ExplicitSolution solution;
  std::optional<SearchTree> tree;
};

Json solution_to_json(const ExplicitSolution& solution, const SearchTree* tree = nullptr);
StoredSolution solution_from_json(const Json& doc);

/// Binary container:
///   "MPQP" | u16 version | u16 flags (bit 0: tree present)
///   header (hash, regularization, build log, problem, dimensions)
///   region table: K x (u64 offset, u64 length) from the start of the buffer
///   region records | optional "TREE" section
/// Integers and doubles are little-endian; matrices are row-major.
std::vector<std::uint8_t> to_binary(const ExplicitSolution& solution, const SearchTree* tree = nullptr);
StoredSolution from_binary(const std::vector<std::uint8_t>& bytes);

/// Writes JSON when the path ends in ".json", binary otherwise.
void save_solution(const std::string& path, const ExplicitSolution& solution, const SearchTree* tree = nullptr);
/// Detects the format from the leading magic bytes.
StoredSolution load_solution(const std::string& path);

}  // namespace mpqp
