#include "mpqp/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

namespace mpqp {

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::uint64_t parse_hex64(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used, 16);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw FormatError("problem_hash must be a hex string");
  return v;
}

Json log_to_json(const BuildLog& log) {
  return {{"candidates", log.candidates},
          {"skipped_cardinality", log.skipped_cardinality},
          {"skipped_licq", log.skipped_licq},
          {"empty", log.empty},
          {"lower_dimensional", log.lower_dimensional},
          {"recovered_by_step", log.recovered_by_step}};
}

BuildLog log_from_json(const Json& j) {
  BuildLog log;
  log.candidates = j.value("candidates", std::int64_t{0});
  log.skipped_cardinality = j.value("skipped_cardinality", std::int64_t{0});
  log.skipped_licq = j.value("skipped_licq", std::int64_t{0});
  log.empty = j.value("empty", std::int64_t{0});
  log.lower_dimensional = j.value("lower_dimensional", std::int64_t{0});
  log.recovered_by_step = j.value("recovered_by_step", std::int64_t{0});
  return log;
}

FacetOrigin::Kind kind_from_int(int k) {
  if (k < 0 || k > 2) throw FormatError("facet origin kind out of range");
  return static_cast<FacetOrigin::Kind>(k);
}

void check_tree(const SearchTree& tree, int K) {
  const auto nodes = static_cast<std::int32_t>(tree.nodes.size());
  const auto leaves = static_cast<std::int32_t>(tree.leaves.size());
  auto check_ref = [&](std::int32_t ref) {
    if (ref >= 0 ? ref >= nodes : ~ref >= leaves) throw FormatError("tree child reference out of range");
  };
  check_ref(tree.root);
  for (const auto& n : tree.nodes) {
    check_ref(n.low);
    check_ref(n.high);
  }
  for (const auto& leaf : tree.leaves)
    for (int k : leaf)
      if (k < 0 || k >= K) throw FormatError("tree leaf lists an unknown region");
}

}  // namespace

Json solution_to_json(const ExplicitSolution& solution, const SearchTree* tree) {
  Json doc;
  doc["format"] = "mpqp-solution";
  doc["version"] = kFormatVersion;
  doc["problem_hash"] = hex64(solution.problem_hash);
  doc["regularization"] = solution.regularization;
  doc["log"] = log_to_json(solution.log);
  doc["problem"] = problem_to_json(solution.problem);
  Json regions = Json::array();
  for (const auto& r : solution.regions) {
    Json origin = Json::array();
    for (const auto& o : r.origin) origin.push_back({static_cast<int>(o.kind), o.index});
    regions.push_back({{"active", r.active().indices()},
                       {"F", matrix_to_json(r.law.F)},
                       {"g", vector_to_json(r.law.g)},
                       {"H", matrix_to_json(r.H)},
                       {"j", vector_to_json(r.j)},
                       {"origin", origin},
                       {"interior", vector_to_json(r.interior)},
                       {"radius", r.radius}});
  }
  doc["regions"] = std::move(regions);
  if (tree) {
    Json nodes = Json::array();
    for (const auto& n : tree->nodes)
      nodes.push_back({{"normal", vector_to_json(n.plane.normal)},
                       {"offset", n.plane.offset},
                       {"low", n.low},
                       {"high", n.high}});
    doc["tree"] = {{"nodes", nodes}, {"leaves", tree->leaves}, {"depth", tree->depth}, {"root", tree->root}};
  }
  return doc;
}

StoredSolution solution_from_json(const Json& doc) {
  try {
    if (doc.value("format", std::string()) != "mpqp-solution") throw FormatError("not an mpqp solution document");
    if (doc.at("version").get<int>() != kFormatVersion) throw FormatError("unsupported solution format version");
    StoredSolution out;
    auto& sol = out.solution;
    sol.problem = problem_from_json(doc.at("problem"));
    sol.problem_hash = parse_hex64(doc.at("problem_hash").get<std::string>());
    sol.regularization = doc.at("regularization").get<double>();
    sol.log = log_from_json(doc.at("log"));
    const auto& qp = sol.problem.qp;
    const int p = qp.p();
    const int lead = qp.n() + qp.me();
    for (const auto& jr : doc.at("regions")) {
      CriticalRegion r;
      const auto active = jr.at("active").get<std::vector<int>>();
      for (int i : active)
        if (i < 0 || i >= qp.m()) throw FormatError("active index out of range");
      r.law.active = ActiveSet::from_indices(active);
      r.law.n = qp.n();
      r.law.me = qp.me();
      const auto law_rows = static_cast<Eigen::Index>(lead + active.size());
      r.law.F = matrix_from_json(jr.at("F"), law_rows, p, "F");
      r.law.g = vector_from_json(jr.at("g"), law_rows, "g");
      const auto rows = static_cast<Eigen::Index>(jr.at("j").size());
      r.H = matrix_from_json(jr.at("H"), rows, p, "H");
      r.j = vector_from_json(jr.at("j"), rows, "j");
      for (const auto& o : jr.at("origin")) r.origin.push_back({kind_from_int(o.at(0).get<int>()), o.at(1).get<int>()});
      if (static_cast<Eigen::Index>(r.origin.size()) != rows) throw FormatError("origin list does not match H");
      r.interior = vector_from_json(jr.at("interior"), p, "interior");
      r.radius = jr.at("radius").get<double>();
      sol.regions.push_back(std::move(r));
    }
    if (doc.contains("tree")) {
      const Json& jt = doc.at("tree");
      SearchTree tree;
      for (const auto& jn : jt.at("nodes"))
        tree.nodes.push_back({{vector_from_json(jn.at("normal"), p, "normal"), jn.at("offset").get<double>()},
                              jn.at("low").get<std::int32_t>(),
                              jn.at("high").get<std::int32_t>()});
      tree.leaves = jt.at("leaves").get<std::vector<std::vector<int>>>();
      tree.depth = jt.at("depth").get<int>();
      tree.root = jt.at("root").get<std::int32_t>();
      check_tree(tree, sol.K());
      out.tree = std::move(tree);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed solution document: ") + e.what());
  }
}

namespace {

class Writer {
 public:
  std::vector<std::uint8_t> bytes;

  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void uint(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u16(std::uint16_t v) { uint(v, 2); }
  void u32(std::uint32_t v) { uint(v, 4); }
  void i32(std::int32_t v) { uint(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { uint(v, 8); }
  void i64(std::int64_t v) { uint(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void matrix(const Matrix& M) {
    u32(static_cast<std::uint32_t>(M.rows()));
    u32(static_cast<std::uint32_t>(M.cols()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) f64(M(i, j));
  }
  void vector(const Vector& x) {
    u32(static_cast<std::uint32_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) f64(x(i));
  }
  void ints(const std::vector<int>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (int x : v) i32(x);
  }
  void blocks(const std::vector<NamedBlock>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& b : v) {
      str(b.name);
      i32(b.size);
    }
  }
  void patch_u64(std::size_t at, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > b_.size() || pos + n < pos) throw FormatError("truncated solution file");
  }
  std::uint64_t uint(int width) {
    need(width);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{b_[pos + i]} << (8 * i);
    pos += width;
    return v;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() { return uint(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint32_t count(std::size_t unit) {
    const std::uint32_t n = u32();
    need(static_cast<std::size_t>(n) * unit);
    return n;
  }
  std::string str() {
    const std::uint32_t n = count(1);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos), n);
    pos += n;
    return s;
  }
  Matrix matrix() {
    const std::uint32_t rows = u32();
    const std::uint32_t cols = u32();
    need(std::size_t{rows} * cols * 8);
    Matrix M(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) M(i, j) = f64();
    return M;
  }
  Vector vector() {
    const std::uint32_t n = count(8);
    Vector x(n);
    for (std::uint32_t i = 0; i < n; ++i) x(i) = f64();
    return x;
  }
  std::vector<int> ints() {
    const std::uint32_t n = count(4);
    std::vector<int> v(n);
    for (auto& x : v) x = i32();
    return v;
  }
  std::vector<NamedBlock> blocks() {
    const std::uint32_t n = count(8);
    std::vector<NamedBlock> v;
    for (std::uint32_t i = 0; i < n; ++i) {
      NamedBlock b;
      b.name = str();
      b.size = i32();
      v.push_back(std::move(b));
    }
    return v;
  }
  std::size_t size() const { return b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
};

constexpr char kMagic[4] = {'M', 'P', 'Q', 'P'};
constexpr char kTreeTag[4] = {'T', 'R', 'E', 'E'};

void write_problem(Writer& w, const Problem& problem) {
  const auto& qp = problem.qp;
  w.str(problem.name);
  w.u8(qp.regularize ? 1 : 0);
  for (const Matrix* M : {&qp.P, &qp.A, &qp.E, &qp.U, &qp.V, &qp.W, &qp.theta_set.G}) w.matrix(*M);
  for (const Vector* x : {&qp.u, &qp.v, &qp.w, &qp.theta_set.h, &qp.theta_set.box_lo, &qp.theta_set.box_hi})
    w.vector(*x);
  const auto& maps = problem.maps;
  w.matrix(maps.C);
  w.vector(maps.c);
  w.matrix(maps.R);
  w.vector(maps.r);
  w.blocks(maps.params);
  w.blocks(maps.vars);
  w.ints(maps.dual_groups);
}

Problem read_problem(Reader& r) {
  Problem problem;
  auto& qp = problem.qp;
  problem.name = r.str();
  qp.regularize = r.u8() != 0;
  for (Matrix* M : {&qp.P, &qp.A, &qp.E, &qp.U, &qp.V, &qp.W, &qp.theta_set.G}) *M = r.matrix();
  for (Vector* x : {&qp.u, &qp.v, &qp.w, &qp.theta_set.h, &qp.theta_set.box_lo, &qp.theta_set.box_hi})
    *x = r.vector();
  auto& maps = problem.maps;
  maps.C = r.matrix();
  maps.c = r.vector();
  maps.R = r.matrix();
  maps.r = r.vector();
  maps.params = r.blocks();
  maps.vars = r.blocks();
  maps.dual_groups = r.ints();
  const ValidationReport report = validate(problem);
  if (!report.ok()) throw FormatError("embedded problem is invalid: " + report.violations.front());
  return problem;
}

}  // namespace

std::vector<std::uint8_t> to_binary(const ExplicitSolution& solution, const SearchTree* tree) {
  Writer w;
  w.raw(kMagic, 4);
  w.u16(kFormatVersion);
  w.u16(tree ? 1 : 0);
  w.u64(solution.problem_hash);
  w.f64(solution.regularization);
  const auto& log = solution.log;
  for (std::int64_t v : {log.candidates, log.skipped_cardinality, log.skipped_licq, log.empty,
                         log.lower_dimensional, log.recovered_by_step})
    w.i64(v);
  write_problem(w, solution.problem);

  const auto K = static_cast<std::uint32_t>(solution.regions.size());
  w.u32(K);
  const std::size_t table = w.bytes.size();
  w.bytes.resize(table + std::size_t{K} * 16);
  for (std::uint32_t k = 0; k < K; ++k) {
    const auto& r = solution.regions[k];
    const std::size_t start = w.bytes.size();
    w.ints(r.active().indices());
    w.matrix(r.law.F);
    w.vector(r.law.g);
    w.matrix(r.H);
    w.vector(r.j);
    w.u32(static_cast<std::uint32_t>(r.origin.size()));
    for (const auto& o : r.origin) {
      w.u8(static_cast<std::uint8_t>(o.kind));
      w.i32(o.index);
    }
    w.vector(r.interior);
    w.f64(r.radius);
    w.patch_u64(table + std::size_t{k} * 16, start);
    w.patch_u64(table + std::size_t{k} * 16 + 8, w.bytes.size() - start);
  }

  if (tree) {
    w.raw(kTreeTag, 4);
    w.u32(static_cast<std::uint32_t>(tree->nodes.size()));
    for (const auto& n : tree->nodes) {
      w.vector(n.plane.normal);
      w.f64(n.plane.offset);
      w.i32(n.low);
      w.i32(n.high);
    }
    w.u32(static_cast<std::uint32_t>(tree->leaves.size()));
    for (const auto& leaf : tree->leaves) w.ints(leaf);
    w.i32(tree->depth);
    w.i32(tree->root);
  }
  return std::move(w.bytes);
}

StoredSolution from_binary(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic: not an MPQP binary solution");
  r.pos = 4;
  if (r.u16() != kFormatVersion) throw FormatError("unsupported solution format version");
  const std::uint16_t flags = r.u16();

  StoredSolution out;
  auto& sol = out.solution;
  sol.problem_hash = r.u64();
  sol.regularization = r.f64();
  auto& log = sol.log;
  for (std::int64_t* v : {&log.candidates, &log.skipped_cardinality, &log.skipped_licq, &log.empty,
                          &log.lower_dimensional, &log.recovered_by_step})
    *v = r.i64();
  sol.problem = read_problem(r);
  const auto& qp = sol.problem.qp;

  const std::uint32_t K = r.count(16);
  const std::size_t table = r.pos;
  r.pos += std::size_t{K} * 16;
  std::size_t end = r.pos;
  for (std::uint32_t k = 0; k < K; ++k) {
    r.pos = table + std::size_t{k} * 16;
    const std::uint64_t offset = r.u64();
    const std::uint64_t length = r.u64();
    if (offset > bytes.size() || length > bytes.size() - offset) throw FormatError("region table entry out of range");
    r.pos = offset;
    CriticalRegion reg;
    const auto active = r.ints();
    for (int i : active)
      if (i < 0 || i >= qp.m()) throw FormatError("active index out of range");
    reg.law.active = ActiveSet::from_indices(active);
    reg.law.n = qp.n();
    reg.law.me = qp.me();
    reg.law.F = r.matrix();
    reg.law.g = r.vector();
    reg.H = r.matrix();
    reg.j = r.vector();
    const std::uint32_t origins = r.count(5);
    for (std::uint32_t i = 0; i < origins; ++i) {
      const auto kind = kind_from_int(r.u8());
      reg.origin.push_back({kind, r.i32()});
    }
    reg.interior = r.vector();
    reg.radius = r.f64();
    if (r.pos != offset + length) throw FormatError("region record length mismatch");
    const auto law_rows = static_cast<Eigen::Index>(qp.n() + qp.me() + active.size());
    if (reg.law.F.rows() != law_rows || reg.law.F.cols() != qp.p() || reg.law.g.size() != law_rows ||
        reg.H.cols() != qp.p() || reg.H.rows() != reg.j.size() ||
        static_cast<Eigen::Index>(reg.origin.size()) != reg.j.size() || reg.interior.size() != qp.p())
      throw FormatError("region record has inconsistent dimensions");
    sol.regions.push_back(std::move(reg));
    end = std::max<std::size_t>(end, r.pos);
  }
  r.pos = end;

  if (flags & 1u) {
    r.need(4);
    if (std::memcmp(bytes.data() + r.pos, kTreeTag, 4) != 0) throw FormatError("missing TREE section");
    r.pos += 4;
    SearchTree tree;
    const std::uint32_t nodes = r.count(8);
    for (std::uint32_t i = 0; i < nodes; ++i) {
      TreeNode n;
      n.plane.normal = r.vector();
      if (n.plane.normal.size() != qp.p()) throw FormatError("tree node normal has wrong length");
      n.plane.offset = r.f64();
      n.low = r.i32();
      n.high = r.i32();
      tree.nodes.push_back(std::move(n));
    }
    const std::uint32_t leaves = r.count(4);
    for (std::uint32_t i = 0; i < leaves; ++i) tree.leaves.push_back(r.ints());
    tree.depth = r.i32();
    tree.root = r.i32();
    check_tree(tree, sol.K());
    out.tree = std::move(tree);
  }
  if (r.pos != bytes.size()) throw FormatError("trailing bytes after solution data");
  return out;
}

void save_solution(const std::string& path, const ExplicitSolution& solution, const SearchTree* tree) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (json) {
    f << solution_to_json(solution, tree).dump(1) << '\n';
  } else {
    const auto bytes = to_binary(solution, tree);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

StoredSolution load_solution(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) return from_binary(bytes);
  Json doc;
  try {
    doc = Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("solution file is neither MPQP binary nor JSON: ") + e.what());
  }
  return solution_from_json(doc);
}

}  // namespace mpqp
