#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "mpqp/benchmarks.hpp"
#include "mpqp/report.hpp"
#include "mpqp/serialize.hpp"
#include "support.hpp"

using namespace mpqp;

namespace {

void check_same(const ExplicitSolution& a, const ExplicitSolution& b) {
  REQUIRE(a.K() == b.K());
  CHECK(a.problem_hash == b.problem_hash);
  CHECK(content_hash(a.qp()) == content_hash(b.qp()));
  CHECK(a.regularization == b.regularization);
  CHECK(a.log.candidates == b.log.candidates);
  CHECK(a.problem.name == b.problem.name);
  CHECK(a.problem.maps.C == b.problem.maps.C);
  CHECK(a.problem.maps.R == b.problem.maps.R);
  CHECK(a.problem.maps.dual_groups == b.problem.maps.dual_groups);
  for (int k = 0; k < a.K(); ++k) {
    const auto& x = a.regions[k];
    const auto& y = b.regions[k];
    CHECK(x.active() == y.active());
    CHECK(x.law.F == y.law.F);
    CHECK(x.law.g == y.law.g);
    CHECK(x.H == y.H);
    CHECK(x.j == y.j);
    CHECK(x.origin == y.origin);
    CHECK(x.interior == y.interior);
    CHECK(x.radius == y.radius);
  }
}

void check_same_tree(const SearchTree& a, const SearchTree& b) {
  CHECK(a.depth == b.depth);
  CHECK(a.root == b.root);
  CHECK(a.leaves == b.leaves);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].plane.normal == b.nodes[i].plane.normal);
    CHECK(a.nodes[i].plane.offset == b.nodes[i].plane.offset);
    CHECK(a.nodes[i].low == b.nodes[i].low);
    CHECK(a.nodes[i].high == b.nodes[i].high);
  }
}

}  // namespace

TEST_CASE("binary round trip is lossless, with and without a tree") {
  for (const auto& name : {"clamp", "power", "hello", "mpc"}) {
    const auto s = build_naive(bench::by_name(name, 2));
    const auto tree = build_tree(s);
    const auto bytes = to_binary(s, &tree);
    REQUIRE(bytes.size() > 8);
    CHECK(std::memcmp(bytes.data(), "MPQP", 4) == 0);
    CHECK(bytes[4] == kFormatVersion);
    CHECK(bytes[5] == 0);
    CHECK((bytes[6] & 1) == 1);
    const auto back = from_binary(bytes);
    check_same(s, back.solution);
    REQUIRE(back.tree);
    check_same_tree(tree, *back.tree);
    CHECK(to_binary(back.solution, &*back.tree) == bytes);

    const auto plain = from_binary(to_binary(s));
    CHECK_FALSE(plain.tree);
    check_same(s, plain.solution);
  }
}

TEST_CASE("JSON round trip is lossless") {
  const auto s = build_naive(bench::power_management());
  const auto tree = build_tree(s);
  const Json doc = solution_to_json(s, &tree);
  CHECK(doc.at("format") == "mpqp-solution");
  const auto back = solution_from_json(Json::parse(doc.dump()));
  check_same(s, back.solution);
  REQUIRE(back.tree);
  check_same_tree(tree, *back.tree);
  CHECK(to_binary(back.solution, &*back.tree) == to_binary(s, &tree));
}

TEST_CASE("save/load detect the format") {
  const auto s = build_naive(bench::clamp_problem());
  const auto dir = testing::scratch_dir("serialize");
  save_solution((dir / "a.json").string(), s);
  save_solution((dir / "a.bin").string(), s);
  CHECK(testing::read_file(dir / "a.json").front() == '{');
  CHECK(testing::read_file(dir / "a.bin").substr(0, 4) == "MPQP");
  check_same(s, load_solution((dir / "a.json").string()).solution);
  check_same(s, load_solution((dir / "a.bin").string()).solution);
  CHECK_THROWS(load_solution((dir / "missing.bin").string()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("corrupt input raises FormatError") {
  const auto s = build_naive(bench::power_management());
  const auto tree = build_tree(s);
  const auto bytes = to_binary(s, &tree);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(from_binary(bad_magic), FormatError);

  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(from_binary(bad_version), FormatError);

  // Every truncation is rejected rather than read out of bounds.
  for (std::size_t len = 0; len < bytes.size(); len += 1 + len / 7) {
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len));
    CHECK_THROWS_AS(from_binary(cut), FormatError);
  }

  // Random byte flips either parse to something valid or throw FormatError.
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    auto flipped = bytes;
    flipped[rng() % flipped.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    try {
      from_binary(flipped);
    } catch (const FormatError&) {
    }
  }

  Json doc = solution_to_json(s);
  doc["format"] = "other";
  CHECK_THROWS_AS(solution_from_json(doc), FormatError);
  doc = solution_to_json(s);
  doc["regions"][0]["F"] = Json::array();
  CHECK_THROWS_AS(solution_from_json(doc), FormatError);
}

TEST_CASE("serialization is deterministic across builds") {
  const auto a = build_explore(bench::mpc_problem(5));
  const auto b = build_explore(bench::mpc_problem(5));
  const auto ta = build_tree(a);
  const auto tb = build_tree(b);
  CHECK(to_binary(a, &ta) == to_binary(b, &tb));
  CHECK(solution_to_json(a, &ta).dump() == solution_to_json(b, &tb).dump());
}
