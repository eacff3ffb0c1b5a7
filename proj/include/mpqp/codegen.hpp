#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mpqp/pointlocate.hpp"

namespace mpqp {

enum class Precision { fp32, fp64 };

const char* to_string(Precision p);
Precision precision_from_string(const std::string& s);

struct CodegenOptions {
  Precision precision = Precision::fp64;
  std::string prefix = "cpg_";
};

/// Emitted C sources plus the figures reported in the manifest.
struct GeneratedSource {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents; manifest last
  Precision precision = Precision::fp64;
  std::vector<std::string> param_names;  // sanitized, one update function each
  std::vector<std::string> var_names;    // sanitized primal result fields
  std::vector<std::string> dual_names;   // d0, d1, ...
  std::int64_t coefficients = 0;         // stored F, g, H, j entries
  std::int64_t estimate = 0;             // K (n + m) p
  std::int64_t data_bytes = 0;           // coefficient storage at the chosen precision
  std::int64_t flop_bound = 0;
  int tree_depth = -1;                   // -1: linear scan

  const std::string& file(const std::string& name) const;
};

/// C identifier for a user name: non-alphanumerics become '_', a leading
/// digit or a C keyword gets an extra '_'. Throws NameError for empty names.
std::string sanitize_identifier(const std::string& name);

/// Sanitizes a list of names, appending _2, _3, ... to later duplicates.
std::vector<std::string> sanitize_names(const std::vector<std::string>& names);

GeneratedSource generate(const ExplicitSolution& solution, const SearchTree* tree, const CodegenOptions& options = {});

std::string emit_manifest(const GeneratedSource& source);

/// Writes every file into dir (created if missing).
void write_sources(const GeneratedSource& source, const std::string& dir);

/// Source text with C comments removed; used for token scans.
std::string strip_c_comments(const std::string& text);

/// Compiler invocation recorded in the manifest.
inline constexpr const char* kCompileCommand =
    "cc -O2 -Werror -o example example_main.c cpg_solve.c cpg_workspace.c";

}  // namespace mpqp
