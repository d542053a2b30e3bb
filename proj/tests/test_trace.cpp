#include <doctest.h>

#include <sstream>

#include "trace.hpp"

using namespace gs;

namespace {

struct Fixture {
  ConstructionSequence seq;
  Diagram diagram;
  Database db;

  static Fixture make(const char* text, uint64_t seed = 3) {
    ParseError perr;
    auto src = parse_problem(text, &perr);
    REQUIRE_MESSAGE(src.has_value(), perr.message);
    std::string err;
    auto seq = elaborate(*src, &err);
    REQUIRE_MESSAGE(seq.has_value(), err);
    auto r = realize(*seq, seed);
    REQUIRE(r.status == RealizeStatus::Ok);
    return Fixture(std::move(*seq), std::move(r.diagram));
  }

  std::string prove() {
    saturate(db);
    REQUIRE(seq.src.goal.has_value());
    auto id = db.contains_goal(*seq.src.goal);
    REQUIRE_MESSAGE(id.has_value(), "goal not reached");
    auto t = minimize(extract_proof(db, *id));
    return format_trace(t, seq.src.names);
  }

 private:
  Fixture(ConstructionSequence s, Diagram d)
      : seq(std::move(s)), diagram(std::move(d)), db(seq, diagram) {
    db.seed();
  }
};

const char* kMidline =
    "free A B C\n"
    "M = midpoint(A, B)\n"
    "N = midpoint(A, C)\n"
    "goal para M N B C\n";

const char* kIsoceles =
    "free A B C\n"
    "O = circumcenter(A, B, C)\n"
    "goal eqangle O A B A B O\n";

const char* kInscribed =
    "free A B C\n"
    "D = on_circle(A, B, C)\n"
    "goal eqangle C A D C B D\n";

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string l;
  while (std::getline(is, l)) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("extract, format, parse round trip on the midline proof") {
  auto fx = Fixture::make(kMidline);
  std::string text = fx.prove();
  CHECK(text.find("para (BC, MN)") != std::string::npos);

  ProblemSource ext;
  std::string err;
  auto back = parse_trace(text, fx.seq.src, &ext, &err);
  REQUIRE_MESSAGE(back.has_value(), err);
  CHECK(format_trace(*back, ext.names) == text);

  auto verdict = check_proof(text, fx.seq.src);
  CHECK_MESSAGE(verdict.status == CheckStatus::Ok, verdict.message);
}

TEST_CASE("checker accepts fixture proofs end to end") {
  for (const char* p : {kMidline, kIsoceles, kInscribed}) {
    auto fx = Fixture::make(p);
    std::string text = fx.prove();
    auto verdict = check_proof(text, fx.seq.src);
    CHECK_MESSAGE(verdict.status == CheckStatus::Ok,
                  verdict.message << "\n" << text);
  }
}

TEST_CASE("level-0 goal is restated as a single construction step") {
  auto fx = Fixture::make(
      "free A B\n"
      "M = midpoint(A, B)\n"
      "goal cong A M M B\n");
  saturate(fx.db);
  auto id = fx.db.contains_goal(*fx.seq.src.goal);
  REQUIRE(id.has_value());
  auto t = extract_proof(fx.db, *id);
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].premises.size() == 1);
  CHECK(t.steps[0].premises[0].second == 0);
  auto verdict = check_proof(format_trace(t, fx.seq.src.names), fx.seq.src);
  CHECK_MESSAGE(verdict.status == CheckStatus::Ok, verdict.message);
  // An empty-body trace with an aux header still parses and checks.
  std::string text = "N = midpoint(A, M)\n";
  auto verdict2 = check_proof(text, fx.seq.src);
  CHECK_MESSAGE(verdict2.status == CheckStatus::Ok, verdict2.message);
}

TEST_CASE("checker rejects forged premise indices and false conclusions") {
  auto fx = Fixture::make(kMidline);
  std::string text = fx.prove();
  auto lines = lines_of(text);
  REQUIRE(!lines.empty());

  SUBCASE("out-of-range index") {
    std::string bad = text;
    auto pos = bad.rfind("[0]");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 3, "[99]");
    auto verdict = check_proof(bad, fx.seq.src);
    CHECK(verdict.status == CheckStatus::Invalid);
    CHECK(verdict.step > 0);
  }
  SUBCASE("numerically false conclusion") {
    // Claim the midline is parallel to AB instead of BC.
    std::string bad;
    for (auto& l : lines) {
      std::string l2 = l;
      auto pos = l2.find("] para (BC, MN) because");
      if (pos != std::string::npos) l2.replace(pos + 8, 2, "AB");
      bad += l2 + "\n";
    }
    auto verdict = check_proof(bad, fx.seq.src);
    CHECK(verdict.status == CheckStatus::Invalid);
  }
  SUBCASE("garbage is a parse failure") {
    CHECK(check_proof("not a trace", fx.seq.src).status ==
          CheckStatus::ParseFail);
    CHECK(check_proof("", fx.seq.src).status == CheckStatus::ParseFail);
  }
}

TEST_CASE("minimize drops steps off the goal path and deletion breaks proofs") {
  for (const char* p : {kMidline, kIsoceles, kInscribed}) {
    auto fx = Fixture::make(p);
    saturate(fx.db);
    auto id = fx.db.contains_goal(*fx.seq.src.goal);
    REQUIRE(id.has_value());
    auto t = minimize(extract_proof(fx.db, *id));

    // Grafting an unrelated derived step is undone by minimize.
    if (!t.steps.empty()) {
      ProofTrace padded = t;
      ProofStep stray = t.steps[0];
      padded.steps.insert(padded.steps.begin(), stray);
      for (size_t i = 1; i < padded.steps.size(); ++i)
        for (auto& [f, k] : padded.steps[i].premises)
          if (k > 0) k += 1;
      auto re = minimize(padded);
      CHECK(re.steps.size() == t.steps.size());
    }

    // Deleting any single step must make the checker reject.
    std::string text = format_trace(t, fx.seq.src.names);
    auto lines = lines_of(text);
    for (size_t del = 0; del < lines.size(); ++del) {
      if (lines[del].empty() || lines[del][0] != '[') continue;
      std::string cut;
      for (size_t i = 0; i < lines.size(); ++i)
        if (i != del) cut += lines[i] + "\n";
      auto verdict = check_proof(cut, fx.seq.src);
      CHECK_MESSAGE(verdict.status != CheckStatus::Ok,
                    "deleting line " << del << " still accepted\n"
                                     << text);
    }
  }
}
