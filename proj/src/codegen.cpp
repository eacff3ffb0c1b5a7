#include "mpqp/codegen.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mpqp/evaluator.hpp"

namespace mpqp {

const char* to_string(Precision p) { return p == Precision::fp32 ? "fp32" : "fp64"; }

Precision precision_from_string(const std::string& s) {
  if (s == "fp32") return Precision::fp32;
  if (s == "fp64") return Precision::fp64;
  throw std::invalid_argument("precision must be fp32 or fp64, got '" + s + "'");
}

const std::string& GeneratedSource::file(const std::string& name) const {
  for (const auto& f : files)
    if (f.first == name) return f.second;
  throw std::out_of_range("no generated file named " + name);
}

namespace {

const std::set<std::string>& c_keywords() {
  static const std::set<std::string> words = {
      "auto",     "break",   "case",     "char",   "const",    "continue", "default",  "do",
      "double",   "else",    "enum",     "extern", "float",    "for",      "goto",     "if",
      "inline",   "int",     "long",     "register", "restrict", "return", "short",    "signed",
      "sizeof",   "static",  "struct",   "switch", "typedef",  "union",    "unsigned", "void",
      "volatile", "while",   "_Bool",    "_Complex", "_Imaginary"};
  return words;
}

}  // namespace

std::string sanitize_identifier(const std::string& name) {
  if (name.empty()) throw NameError("UnsupportedName: empty identifier");
  std::string out;
  for (unsigned char ch : name) out += std::isalnum(ch) ? static_cast<char>(ch) : '_';
  if (std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(out.begin(), '_');
  if (c_keywords().count(out)) out += '_';
  return out;
}

std::vector<std::string> sanitize_names(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  std::set<std::string> taken;
  for (const auto& raw : names) {
    const std::string base = sanitize_identifier(raw);
    std::string name = base;
    for (int suffix = 2; taken.count(name); ++suffix) name = base + "_" + std::to_string(suffix);
    taken.insert(name);
    out.push_back(name);
  }
  return out;
}

std::string strip_c_comments(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '"') {
      // Copy string literals verbatim so "//" inside them is not a comment.
      out += text[i++];
      while (i < text.size() && text[i] != '"') {
        if (text[i] == '\\' && i + 1 < text.size()) out += text[i++];
        out += text[i++];
      }
      if (i < text.size()) out += text[i];
    } else if (text.compare(i, 2, "/*") == 0) {
      const auto end = text.find("*/", i + 2);
      i = end == std::string::npos ? text.size() : end + 1;
      out += ' ';
    } else if (text.compare(i, 2, "//") == 0) {
      while (i < text.size() && text[i] != '\n') ++i;
      if (i < text.size()) out += '\n';
    } else {
      out += text[i];
    }
  }
  return out;
}

namespace {

// Shortest round-trip literal; always carries a '.' or exponent.
std::string lit(double v, Precision prec) {
  std::array<char, 64> buf{};
  std::to_chars_result res = prec == Precision::fp32
                                 ? std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(v))
                                 : std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  if (prec == Precision::fp32) s += 'f';
  return s;
}

class ArrayWriter {
 public:
  explicit ArrayWriter(std::string& out) : out_(out) {}

  void doubles(const std::string& type, const std::string& name, const std::vector<double>& v, Precision prec) {
    out_ += "const " + type + " " + name + "[" + std::to_string(std::max<std::size_t>(1, v.size())) + "] = {";
    if (v.empty()) out_ += lit(0.0, prec);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out_ += ",";
      out_ += (i % 6 == 0) ? "\n  " : " ";
      out_ += lit(v[i], prec);
    }
    out_ += "\n};\n";
  }

  void ints(const std::string& name, const std::vector<long long>& v) {
    out_ += "const int " + name + "[" + std::to_string(std::max<std::size_t>(1, v.size())) + "] = {";
    if (v.empty()) out_ += "0";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out_ += ",";
      out_ += (i % 12 == 0) ? "\n  " : " ";
      out_ += std::to_string(v[i]);
    }
    out_ += "\n};\n";
  }

 private:
  std::string& out_;
};

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

struct Box {
  std::vector<double> lo, hi;
  std::vector<long long> flags;  // bit 0: lower bound, bit 1: upper bound
};

Box canonical_box(const ParametricQP& qp) {
  const int p = qp.p();
  Box b{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0), std::vector<long long>(p, 0)};
  if (!qp.theta_set.has_box()) return b;
  for (int i = 0; i < p; ++i) {
    if (std::isfinite(qp.theta_set.box_lo(i))) {
      b.lo[i] = qp.theta_set.box_lo(i);
      b.flags[i] |= 1;
    }
    if (std::isfinite(qp.theta_set.box_hi(i))) {
      b.hi[i] = qp.theta_set.box_hi(i);
      b.flags[i] |= 2;
    }
  }
  return b;
}

// Box on user coordinates, derived where a canonical coordinate is exactly
// +-1 times one user coordinate. Other user coordinates are left unbounded.
Box user_box(const Problem& problem, const Box& canon) {
  const auto& C = problem.maps.C;
  const auto& c = problem.maps.c;
  const auto pu = static_cast<int>(C.cols());
  Box b{std::vector<double>(pu, 0.0), std::vector<double>(pu, 0.0), std::vector<long long>(pu, 0)};
  for (int i = 0; i < pu; ++i) {
    int row = -1, hits = 0;
    for (Eigen::Index k = 0; k < C.rows(); ++k)
      if (C(k, i) != 0.0) {
        row = static_cast<int>(k);
        ++hits;
      }
    if (hits != 1 || c(row) != 0.0) continue;
    if ((C.row(row).array() != 0.0).count() != 1) continue;
    const double a = C(row, i);
    if (a == 1.0) {
      b.lo[i] = canon.lo[row];
      b.hi[i] = canon.hi[row];
      b.flags[i] = canon.flags[row];
    } else if (a == -1.0) {
      b.lo[i] = -canon.hi[row];
      b.hi[i] = -canon.lo[row];
      b.flags[i] = ((canon.flags[row] & 1) << 1) | ((canon.flags[row] & 2) >> 1);
    }
  }
  return b;
}

std::vector<double> row_major(const Matrix& M) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  return out;
}

std::vector<double> flat(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Replaces every "$NAME" placeholder: $pre (prefix), $PRE (upper-case prefix).
std::string expand(std::string text, const std::string& pre) {
  const std::string up = upper(pre);
  for (const auto& [key, value] : {std::pair<std::string, std::string>{"$PRE", up}, {"$pre", pre}}) {
    for (std::size_t at = text.find(key); at != std::string::npos; at = text.find(key, at + value.size()))
      text.replace(at, key.size(), value);
  }
  return text;
}

struct Names {
  std::vector<std::string> params, vars, duals;
};

Names api_names(const UserMaps& maps) {
  Names out;
  std::vector<std::string> raw;
  for (const auto& b : maps.params) raw.push_back(b.name);
  out.params = sanitize_names(raw);
  raw.clear();
  for (const auto& b : maps.vars) raw.push_back(b.name);
  out.vars = sanitize_names(raw);
  for (std::size_t g = 0; g < maps.dual_groups.size(); ++g) out.duals.push_back("d" + std::to_string(g));
  return out;
}

std::string struct_fields(const std::vector<std::string>& names, const std::vector<int>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i)
    out += std::string("  cpg_float ") + (sizes[i] == 1 ? "" : "*") + names[i] + ";\n";
  if (names.empty()) out += "  int empty_;\n";
  return out;
}

std::string workspace_header(const ExplicitSolution& sol, const SearchTree* tree, const Names& names,
                             Precision prec) {
  const auto& qp = sol.qp();
  const auto& maps = sol.problem.maps;
  std::vector<int> var_sizes, dual_sizes;
  for (const auto& b : maps.vars) var_sizes.push_back(b.size);
  dual_sizes = maps.dual_groups;

  std::ostringstream s;
  s << "#ifndef $PRE" "WORKSPACE_H\n#define $PRE" "WORKSPACE_H\n\n";
  s << "typedef double cpg_float;\n";
  s << "typedef " << (prec == Precision::fp32 ? "float" : "double") << " cpg_coef;\n\n";
  s << "#define $PRE" "N " << qp.n() << "\n";
  s << "#define $PRE" "M " << qp.m() << "\n";
  s << "#define $PRE" "ME " << qp.me() << "\n";
  s << "#define $PRE" "P " << qp.p() << "\n";
  s << "#define $PRE" "P_USER " << maps.C.cols() << "\n";
  s << "#define $PRE" "N_USER " << maps.R.rows() << "\n";
  s << "#define $PRE" "NZ " << qp.n() + qp.m() + qp.me() << "\n";
  s << "#define $PRE" "K " << sol.K() << "\n";
  int max_law = 0;
  for (const auto& r : sol.regions) max_law = std::max(max_law, r.law.rows());
  s << "#define $PRE" "MAX_LAW " << std::max(1, max_law) << "\n";
  if (tree) s << "#define $PRE" "TREE_ROOT " << tree->root << "\n";
  s << "\n";
  s << "typedef struct {\n" << struct_fields(names.vars, var_sizes) << "} $PRE" "Prim_t;\n\n";
  s << "typedef struct {\n" << struct_fields(names.duals, dual_sizes) << "} $PRE" "Dual_t;\n\n";
  s << "typedef struct {\n  $PRE" "Prim_t *prim;\n  $PRE" "Dual_t *dual;\n  int status;\n  int region;\n} $PRE"
       "Result_t;\n\n";
  s << "extern $PRE" "Result_t $PRE" "Result;\n\n";
  s << "/* Parameters (user and canonical) and the stacked solution (x, lambda, nu). */\n";
  s << "extern cpg_float $pre" "theta_user[];\nextern cpg_float $pre" "theta[];\nextern cpg_float $pre"
       "z[];\nextern cpg_float $pre" "law[];\n\n";
  for (const char* name : {"F", "g", "H", "j", "C", "c", "R", "r", "Pobj", "u", "U", "node_normal", "node_offset"})
    s << "extern const cpg_coef $pre" << name << "[];\n";
  for (const char* name : {"law_start", "row_start", "act_start", "act_idx", "node_low", "node_high", "leaf_start",
                           "leaf_regions", "box", "user_box"})
    s << "extern const int $pre" << name << "[];\n";
  s << "extern const cpg_float $pre" "lo[];\nextern const cpg_float $pre" "hi[];\n";
  s << "extern const cpg_float $pre" "user_lo[];\nextern const cpg_float $pre" "user_hi[];\n";
  s << "\n#endif\n";
  return s.str();
}

std::string workspace_source(const ExplicitSolution& sol, const SearchTree* tree, const Names& names,
                             const Box& canon, const Box& ubox, Precision prec) {
  const auto& qp = sol.qp();
  const auto& maps = sol.problem.maps;
  const int p = qp.p();
  std::vector<double> F, g, H, j;
  std::vector<long long> law_start{0}, row_start{0}, act_start{0}, act_idx;
  for (const auto& r : sol.regions) {
    const auto f = row_major(r.law.F);
    F.insert(F.end(), f.begin(), f.end());
    const auto gg = flat(r.law.g);
    g.insert(g.end(), gg.begin(), gg.end());
    const auto h = row_major(r.H);
    H.insert(H.end(), h.begin(), h.end());
    for (Eigen::Index i = 0; i < r.j.size(); ++i) j.push_back(r.j(i) + kMembershipSlack);
    law_start.push_back(static_cast<long long>(g.size()));
    row_start.push_back(static_cast<long long>(j.size()));
    for (int a : r.active().indices()) act_idx.push_back(a);
    act_start.push_back(static_cast<long long>(act_idx.size()));
  }
  std::vector<double> normal, offset;
  std::vector<long long> low, high, leaf_start{0}, leaf_regions;
  if (tree) {
    for (const auto& n : tree->nodes) {
      for (int c = 0; c < p; ++c) normal.push_back(n.plane.normal(c));
      offset.push_back(n.plane.offset);
      low.push_back(n.low);
      high.push_back(n.high);
    }
    for (const auto& leaf : tree->leaves) {
      leaf_regions.insert(leaf_regions.end(), leaf.begin(), leaf.end());
      leaf_start.push_back(static_cast<long long>(leaf_regions.size()));
    }
  }

  std::string out = "#include \"cpg_workspace.h\"\n\n";
  ArrayWriter w(out);
  out += "/* Region k: law rows law_start[k]..law_start[k+1]-1 (F row-major, P columns),\n"
         "   inequality rows row_start[k]..row_start[k+1]-1, j already includes the membership slack. */\n";
  w.doubles("cpg_coef", "$pre" "F", F, prec);
  w.doubles("cpg_coef", "$pre" "g", g, prec);
  w.ints("$pre" "law_start", law_start);
  w.doubles("cpg_coef", "$pre" "H", H, prec);
  w.doubles("cpg_coef", "$pre" "j", j, prec);
  w.ints("$pre" "row_start", row_start);
  w.ints("$pre" "act_start", act_start);
  w.ints("$pre" "act_idx", act_idx);
  out += "\n/* Search tree: child >= 0 is a node, child < 0 is leaf ~child. */\n";
  w.doubles("cpg_coef", "$pre" "node_normal", normal, prec);
  w.doubles("cpg_coef", "$pre" "node_offset", offset, prec);
  w.ints("$pre" "node_low", low);
  w.ints("$pre" "node_high", high);
  w.ints("$pre" "leaf_start", leaf_start);
  w.ints("$pre" "leaf_regions", leaf_regions);
  out += "\n/* theta = C theta_user + c; user solution = R z + r. */\n";
  w.doubles("cpg_coef", "$pre" "C", row_major(maps.C), prec);
  w.doubles("cpg_coef", "$pre" "c", flat(maps.c), prec);
  w.doubles("cpg_coef", "$pre" "R", row_major(maps.R), prec);
  w.doubles("cpg_coef", "$pre" "r", flat(maps.r), prec);
  out += "\n/* Objective data. */\n";
  w.doubles("cpg_coef", "$pre" "Pobj", row_major(qp.P), prec);
  w.doubles("cpg_coef", "$pre" "u", flat(qp.u), prec);
  w.doubles("cpg_coef", "$pre" "U", row_major(qp.U), prec);
  out += "\n/* Parameter boxes; bit 0 marks a lower bound, bit 1 an upper bound. */\n";
  w.doubles("cpg_float", "$pre" "lo", canon.lo, Precision::fp64);
  w.doubles("cpg_float", "$pre" "hi", canon.hi, Precision::fp64);
  w.ints("$pre" "box", canon.flags);
  w.doubles("cpg_float", "$pre" "user_lo", ubox.lo, Precision::fp64);
  w.doubles("cpg_float", "$pre" "user_hi", ubox.hi, Precision::fp64);
  w.ints("$pre" "user_box", ubox.flags);

  auto dim = [](long long n) { return std::to_string(std::max<long long>(1, n)); };
  out += "\ncpg_float $pre" "theta_user[" + dim(maps.C.cols()) + "];\n";
  out += "cpg_float $pre" "theta[" + dim(p) + "];\n";
  out += "cpg_float $pre" "z[" + dim(qp.n() + qp.m() + qp.me()) + "];\n";
  out += "cpg_float $pre" "law[$PRE" "MAX_LAW];\n\n";

  std::string prim_init, dual_init;
  for (std::size_t i = 0; i < names.vars.size(); ++i) {
    if (maps.vars[i].size == 1) {
      prim_init += std::string(i ? ", " : "") + "0.0";
    } else {
      out += "static cpg_float $pre" "prim_" + names.vars[i] + "[" + std::to_string(maps.vars[i].size) + "];\n";
      prim_init += std::string(i ? ", " : "") + "$pre" "prim_" + names.vars[i];
    }
  }
  for (std::size_t i = 0; i < names.duals.size(); ++i) {
    if (maps.dual_groups[i] == 1) {
      dual_init += std::string(i ? ", " : "") + "0.0";
    } else {
      out += "static cpg_float $pre" "dual_" + names.duals[i] + "[" + std::to_string(maps.dual_groups[i]) + "];\n";
      dual_init += std::string(i ? ", " : "") + "$pre" "dual_" + names.duals[i];
    }
  }
  if (prim_init.empty()) prim_init = "0";
  if (dual_init.empty()) dual_init = "0";
  out += "\nstatic $PRE" "Prim_t $pre" "prim = {" + prim_init + "};\n";
  out += "static $PRE" "Dual_t $pre" "dual = {" + dual_init + "};\n";
  out += "$PRE" "Result_t $PRE" "Result = {&$pre" "prim, &$pre" "dual, 1, -1};\n";
  return out;
}

std::string solve_header(const Names& names, const UserMaps& maps) {
  std::string out = "#ifndef $PRE" "SOLVE_H\n#define $PRE" "SOLVE_H\n\n#include \"cpg_workspace.h\"\n\n";
  for (std::size_t i = 0; i < names.params.size(); ++i) {
    out += "void $pre" "update_" + names.params[i] +
           (maps.params[i].size == 1 ? "(cpg_float val);\n" : "(int idx, cpg_float val);\n");
  }
  out += "\n/* Returns 0 (optimal) or 1 (infeasible parameter; results left untouched). Not reentrant. */\n";
  out += "int $pre" "solve(void);\n";
  out += "/* Objective 0.5 x'Px + q'x at the parameter of the last successful solve. */\n";
  out += "cpg_float $pre" "objective(void);\n\n#endif\n";
  return out;
}

std::string solve_source(const ExplicitSolution& sol, const SearchTree* tree, const Names& names) {
  const auto& qp = sol.qp();
  const auto& maps = sol.problem.maps;
  const int p = qp.p();
  std::string out = "#include \"cpg_solve.h\"\n\n";

  if (!names.params.empty())
    out += "static void $pre" "set_user(int i, cpg_float val)\n{\n"
         "  if (($pre" "user_box[i] & 1) && val < $pre" "user_lo[i]) {\n"
         "    val = $pre" "user_lo[i];\n"
         "  } else if (($pre" "user_box[i] & 2) && val > $pre" "user_hi[i]) {\n"
         "    val = $pre" "user_hi[i];\n  }\n"
         "  $pre" "theta_user[i] = val;\n}\n\n";
  int at = 0;
  for (std::size_t i = 0; i < names.params.size(); ++i) {
    const int size = maps.params[i].size;
    if (size == 1) {
      out += "void $pre" "update_" + names.params[i] + "(cpg_float val)\n{\n  $pre" "set_user(" +
             std::to_string(at) + ", val);\n}\n\n";
    } else {
      out += "void $pre" "update_" + names.params[i] + "(int idx, cpg_float val)\n{\n  if (idx >= 0 && idx < " +
             std::to_string(size) + ") $pre" "set_user(" + std::to_string(at) + " + idx, val);\n}\n\n";
    }
    at += size;
  }

  out += "/* a[0] t[0] + ... + a[P-1] t[P-1], accumulated left to right in double. */\n";
  out += "static double $pre" "dot(const cpg_coef *a, const cpg_float *t)\n{\n";
  if (p == 0) {
    out += "  (void)a;\n  (void)t;\n  return 0.0;\n}\n\n";
  } else {
    out += "  double acc = (double)a[0] * t[0];\n  int i;\n"
           "  for (i = 1; i < $PRE" "P; i++) acc = acc + (double)a[i] * t[i];\n  return acc;\n}\n\n";
  }

  out += "static int $pre" "inside(int k)\n{\n  int r;\n"
         "  for (r = $pre" "row_start[k]; r < $pre" "row_start[k + 1]; r++) {\n"
         "    if (!($pre" "dot($pre" "H + r * $PRE" "P, $pre" "theta) <= (double)$pre" "j[r])) return 0;\n"
         "  }\n  return 1;\n}\n\n";

  out += "static int $pre" "locate(void)\n{\n";
  if (tree) {
    out += "  int ref = $PRE" "TREE_ROOT;\n  int leaf, c;\n"
           "  while (ref >= 0) {\n"
           "    ref = $pre" "dot($pre" "node_normal + ref * $PRE" "P, $pre" "theta) <= (double)$pre"
           "node_offset[ref] ? $pre" "node_low[ref] : $pre" "node_high[ref];\n"
           "  }\n  leaf = ~ref;\n"
           "  for (c = $pre" "leaf_start[leaf]; c < $pre" "leaf_start[leaf + 1]; c++) {\n"
           "    if ($pre" "inside($pre" "leaf_regions[c])) return $pre" "leaf_regions[c];\n"
           "  }\n  return -1;\n}\n\n";
  } else {
    out += "  int k;\n  for (k = 0; k < $PRE" "K; k++) {\n    if ($pre" "inside(k)) return k;\n  }\n"
           "  return -1;\n}\n\n";
  }

  // Primal and dual result fields, filled from R z + r and from z.
  std::string fill;
  int row = 0;
  for (std::size_t i = 0; i < names.vars.size(); ++i) {
    const int size = maps.vars[i].size;
    const std::string dst = "$PRE" "Result.prim->" + names.vars[i];
    if (size == 1) {
      fill += "  " + dst + " = $pre" "user_row(" + std::to_string(row) + ");\n";
    } else {
      fill += "  for (i = 0; i < " + std::to_string(size) + "; i++) " + dst + "[i] = $pre" "user_row(" +
              std::to_string(row) + " + i);\n";
    }
    row += size;
  }
  // Duals in constraint order: z holds (x, lambda, nu), duals start at N.
  int dual_at = qp.n();
  for (std::size_t i = 0; i < names.duals.size(); ++i) {
    const int size = maps.dual_groups[i];
    const std::string dst = "$PRE" "Result.dual->" + names.duals[i];
    if (size == 1) {
      fill += "  " + dst + " = $pre" "z[" + std::to_string(dual_at) + "];\n";
    } else {
      fill += "  for (i = 0; i < " + std::to_string(size) + "; i++) " + dst + "[i] = $pre" "z[" +
              std::to_string(dual_at) + " + i];\n";
    }
    dual_at += size;
  }

  if (row == 0) {
  } else if (qp.n() + qp.m() + qp.me() == 0) {
    out += "static double $pre" "user_row(int row)\n{\n";
    out += "  return $pre" "r[row];\n}\n\n";
  } else {
    out += "static double $pre" "user_row(int row)\n{\n";
    out += "  const cpg_coef *a = $pre" "R + row * $PRE" "NZ;\n"
           "  double acc = (double)a[0] * $pre" "z[0];\n  int i;\n"
           "  for (i = 1; i < $PRE" "NZ; i++) acc = acc + (double)a[i] * $pre" "z[i];\n"
           "  return acc + (double)$pre" "r[row];\n}\n\n";
  }

  out += "int $pre" "solve(void)\n{\n  int i, c, k, a;\n  double acc;\n  cpg_float t;\n\n";
  out += "  for (i = 0; i < $PRE" "P; i++) {\n";
  if (maps.C.cols() == 0) {
    out += "    acc = (double)$pre" "c[i];\n";
  } else {
    out += "    acc = (double)$pre" "C[i * $PRE" "P_USER] * $pre" "theta_user[0];\n"
           "    for (c = 1; c < $PRE" "P_USER; c++) acc = acc + (double)$pre" "C[i * $PRE" "P_USER + c] * $pre"
           "theta_user[c];\n"
           "    acc = acc + (double)$pre" "c[i];\n";
  }
  out += "    t = acc;\n"
         "    if (($pre" "box[i] & 1) && t < $pre" "lo[i]) {\n      t = $pre" "lo[i];\n"
         "    } else if (($pre" "box[i] & 2) && t > $pre" "hi[i]) {\n      t = $pre" "hi[i];\n    }\n"
         "    $pre" "theta[i] = t;\n  }\n\n";
  out += "  k = $pre" "locate();\n  if (k < 0) {\n    $PRE" "Result.status = 1;\n    return 1;\n  }\n\n";
  out += "  for (i = $pre" "law_start[k]; i < $pre" "law_start[k + 1]; i++) {\n"
         "    $pre" "law[i - $pre" "law_start[k]] = $pre" "dot($pre" "F + i * $PRE" "P, $pre" "theta) + (double)$pre"
         "g[i];\n  }\n";
  out += "  for (i = 0; i < $PRE" "N; i++) $pre" "z[i] = $pre" "law[i];\n"
         "  for (i = 0; i < $PRE" "M; i++) $pre" "z[$PRE" "N + i] = 0.0;\n"
         "  for (i = 0; i < $PRE" "ME; i++) $pre" "z[$PRE" "N + $PRE" "M + i] = $pre" "law[$PRE" "N + i];\n"
         "  for (a = $pre" "act_start[k]; a < $pre" "act_start[k + 1]; a++) {\n"
         "    $pre" "z[$PRE" "N + $pre" "act_idx[a]] = $pre" "law[$PRE" "N + $PRE" "ME + a - $pre" "act_start[k]];\n"
         "  }\n\n";
  out += fill;
  out += "  $PRE" "Result.status = 0;\n  $PRE" "Result.region = k;\n  (void)c;\n  (void)i;\n  return 0;\n}\n\n";

  out += "cpg_float $pre" "objective(void)\n{\n  double obj = 0.0, q, px;\n  int i, k;\n"
         "  for (i = 0; i < $PRE" "N; i++) {\n"
         "    q = (double)$pre" "u[i];\n"
         "    for (k = 0; k < $PRE" "P; k++) q = q + (double)$pre" "U[i * $PRE" "P + k] * $pre" "theta[k];\n"
         "    px = 0.0;\n"
         "    for (k = 0; k < $PRE" "N; k++) px = px + (double)$pre" "Pobj[i * $PRE" "N + k] * $pre" "z[k];\n"
         "    obj = obj + $pre" "z[i] * (0.5 * px + q);\n  }\n  return obj;\n}\n";
  return out;
}

std::string example_main(const Names& names, const UserMaps& maps) {
  const auto pu = maps.C.cols();
  std::string out =
      "#include <stdio.h>\n#include <stdlib.h>\n\n#include \"cpg_solve.h\"\n\n"
      "/* Reads one user parameter row per line, prints: status, then the primal fields. */\n"
      "int main(void)\n{\n  static char line[1 << 16];\n  double v[" +
      std::to_string(std::max<Eigen::Index>(1, pu)) +
      "];\n  char *s, *end;\n  int i, j, status;\n\n"
      "  while (fgets(line, sizeof line, stdin)) {\n    s = line;\n"
      "    for (i = 0; i < $PRE" "P_USER; i++) {\n      v[i] = strtod(s, &end);\n      if (end == s) break;\n"
      "      s = end;\n    }\n"
      "    if (i == 0 && $PRE" "P_USER > 0) {\n      while (*s == ' ' || *s == '\\t' || *s == '\\r') s++;\n"
      "      if (*s == '\\n' || *s == '\\0') continue;\n    }\n"
      "    if (i < $PRE" "P_USER) {\n      fprintf(stderr, \"expected %d values per line\\n\", $PRE" "P_USER);\n"
      "      return 1;\n    }\n";
  int at = 0;
  for (std::size_t i = 0; i < names.params.size(); ++i) {
    const int size = maps.params[i].size;
    if (size == 1) {
      out += "    $pre" "update_" + names.params[i] + "(v[" + std::to_string(at) + "]);\n";
    } else {
      out += "    for (j = 0; j < " + std::to_string(size) + "; j++) $pre" "update_" + names.params[i] + "(j, v[" +
             std::to_string(at) + " + j]);\n";
    }
    at += size;
  }
  out += "    status = $pre" "solve();\n    printf(\"%d\", status);\n";
  for (std::size_t i = 0; i < names.vars.size(); ++i) {
    const int size = maps.vars[i].size;
    const std::string src = "$PRE" "Result.prim->" + names.vars[i];
    if (size == 1) {
      out += "    printf(\" %.17g\", " + src + ");\n";
    } else {
      out += "    for (j = 0; j < " + std::to_string(size) + "; j++) printf(\" %.17g\", " + src + "[j]);\n";
    }
  }
  out += "    printf(\"\\n\");\n  }\n  (void)j;\n  (void)v;\n  return 0;\n}\n";
  return out;
}

}  // namespace

GeneratedSource generate(const ExplicitSolution& solution, const SearchTree* tree, const CodegenOptions& options) {
  if (solution.regions.empty()) throw EmptySolutionError("generate: solution has no regions");
  const std::string pre = sanitize_identifier(options.prefix.empty() ? "cpg_" : options.prefix);
  const auto& qp = solution.qp();
  const auto& maps = solution.problem.maps;
  const ValidationReport report = validate(solution.problem);
  if (!report.ok()) throw DimensionError("generate: " + report.violations.front());

  const Names names = api_names(maps);
  const Box canon = canonical_box(qp);
  const Box ubox = user_box(solution.problem, canon);

  GeneratedSource out;
  out.precision = options.precision;
  out.param_names = names.params;
  out.var_names = names.vars;
  out.dual_names = names.duals;
  out.coefficients = coefficient_count(solution);
  out.estimate = static_cast<std::int64_t>(solution.K()) * (qp.n() + qp.m()) * qp.p();
  out.data_bytes = out.coefficients * (options.precision == Precision::fp32 ? 4 : 8);
  out.flop_bound = flop_bound(solution, tree);
  out.tree_depth = tree ? tree->depth : -1;

  out.files.emplace_back("cpg_workspace.h", expand(workspace_header(solution, tree, names, options.precision), pre));
  out.files.emplace_back("cpg_workspace.c",
                         expand(workspace_source(solution, tree, names, canon, ubox, options.precision), pre));
  out.files.emplace_back("cpg_solve.h", expand(solve_header(names, maps), pre));
  out.files.emplace_back("cpg_solve.c", expand(solve_source(solution, tree, names), pre));
  out.files.emplace_back("example_main.c", expand(example_main(names, maps), pre));
  out.files.emplace_back("manifest.txt", emit_manifest(out));
  return out;
}

std::string emit_manifest(const GeneratedSource& source) {
  std::ostringstream s;
  s << "precision " << to_string(source.precision) << "\n";
  s << "files\n";
  for (const auto& [name, text] : source.files)
    if (name != "manifest.txt") s << "  " << name << " " << text.size() << " bytes\n";
  s << "coefficients " << source.coefficients << "\n";
  s << "estimate_K(n+m)p " << source.estimate << "\n";
  s << "coefficient_bytes " << source.data_bytes << "\n";
  s << "flop_bound " << source.flop_bound << "\n";
  if (source.tree_depth >= 0) {
    s << "point_location tree depth " << source.tree_depth << "\n";
  } else {
    s << "point_location linear scan\n";
  }
  s << "update_functions";
  for (const auto& n : source.param_names) s << " " << n;
  s << "\nprimal_fields";
  for (const auto& n : source.var_names) s << " " << n;
  s << "\ndual_fields";
  for (const auto& n : source.dual_names) s << " " << n;
  s << "\ncompile " << kCompileCommand << "\n";
  return s.str();
}

void write_sources(const GeneratedSource& source, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : source.files) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path.string());
  }
}

}  // namespace mpqp
