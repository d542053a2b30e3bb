#include <doctest.h>

#include <json.hpp>

#include "dsl.hpp"

using namespace gs;

namespace {
const char* kSample = R"(# midline configuration
free A B C
M = midpoint(A, B)
N = midpoint(A, C)
goal para M N B C
)";
}

TEST_CASE("parse then format round trips structurally") {
  ParseError err;
  auto src = parse_problem(kSample, &err);
  REQUIRE_MESSAGE(src.has_value(), err.message);
  CHECK(src->free_pts.size() == 3);
  CHECK(src->stmts.size() == 2);
  REQUIRE(src->goal.has_value());
  CHECK(src->goal->pred == Pred::Para);

  std::string text = format_problem(*src);
  auto again = parse_problem(text, &err);
  REQUIRE(again.has_value());
  CHECK(format_problem(*again) == text);
  CHECK(again->free_pts == src->free_pts);
  CHECK(again->stmts.size() == src->stmts.size());
  for (size_t i = 0; i < src->stmts.size(); ++i) {
    CHECK(again->stmts[i].out == src->stmts[i].out);
    CHECK(again->stmts[i].kind == src->stmts[i].kind);
    CHECK(again->stmts[i].args == src->stmts[i].args);
  }
  CHECK(*again->goal == *src->goal);
}

TEST_CASE("parser reports position on errors") {
  ParseError err;
  CHECK(!parse_problem("free A\nB = nosuchthing(A)\n", &err));
  CHECK(err.line == 2);
  CHECK(!parse_problem("free A B\nC = midpoint(A, X)\n", &err));
  CHECK(err.line == 2);
  CHECK(err.col > 0);
  CHECK(!parse_problem("free A B\nA = midpoint(A, B)\n", &err));  // dup
  CHECK(!parse_problem("free A B\nC = midpoint(A)\n", &err));     // arity
}

TEST_CASE("elaborate computes dependency closures") {
  ParseError err;
  auto src = parse_problem(kSample, &err);
  REQUIRE(src);
  std::string e2;
  auto seq = elaborate(*src, &e2);
  REQUIRE_MESSAGE(seq.has_value(), e2);
  Pt a = *src->names.find("A"), b = *src->names.find("B");
  Pt m = *src->names.find("M"), n = *src->names.find("N");
  CHECK(seq->closure[a] == (PtMask(1) << a));
  CHECK((seq->closure[m] & (PtMask(1) << a)) != 0);
  CHECK((seq->closure[m] & (PtMask(1) << b)) != 0);
  CHECK((seq->closure[m] & (PtMask(1) << n)) == 0);
  CHECK(seq->def_stmt[a] == -1);
  CHECK(seq->def_stmt[m] == 0);
}

TEST_CASE("every construction kind is cataloged and parseable") {
  CHECK(catalog().size() == 20);
  for (const auto& ki : catalog()) {
    CHECK(kind_by_name(ki.name) == &ki);
    CHECK(kind_info(ki.kind) == &ki);
  }
}

TEST_CASE("catalog json lists all kinds with arity and templates") {
  auto j = nlohmann::json::parse(catalog_json());
  REQUIRE(j.is_array());
  CHECK(j.size() == 20);
  for (auto& e : j) {
    CHECK(e.contains("name"));
    CHECK(e.contains("arity"));
    CHECK(e.contains("signature"));
    CHECK(e.contains("emits"));
  }
}

TEST_CASE("emitted facts reference only defined points") {
  ParseError err;
  auto src = parse_problem(
      "free A B C\nD = incenter(A, B, C)\nE = foot(D, B, C)\n", &err);
  REQUIRE(src);
  for (const auto& st : src->stmts)
    for (const Fact& f : emitted_facts(st)) {
      CHECK(well_formed(f));
      for (Pt p : f.pts)
        if (p != kNoPt) CHECK(p < src->names.size());
    }
}
