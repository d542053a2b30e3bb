#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "generator.hpp"
#include "solver.hpp"

using namespace gs;

namespace {

ProblemSource parse_ok(const std::string& text) {
  ParseError err;
  auto src = parse_problem(text, &err);
  REQUIRE_MESSAGE(src.has_value(), err.message);
  return *src;
}

ProblemTriplet make_triplet(const std::string& text, size_t context_stmts) {
  ProblemTriplet t;
  t.ext = parse_ok(text);
  t.context_stmts = context_stmts;
  return t;
}

// Isomorphic copy: fresh names, free points re-declared in a shuffled
// order, and independent adjacent statements randomly swapped.
ProblemSource relabel(const ProblemSource& src, Rng& rng) {
  ProblemSource out;
  size_t n = src.names.size();
  for (size_t i = 0; i < n; ++i) out.names.intern("q" + std::to_string(i));
  out.free_pts = src.free_pts;
  for (size_t i = out.free_pts.size(); i > 1; --i)
    std::swap(out.free_pts[i - 1], out.free_pts[rng.next() % i]);
  out.stmts = src.stmts;
  for (int pass = 0; pass < 4; ++pass)
    for (size_t i = 0; i + 1 < out.stmts.size(); ++i) {
      Statement &a = out.stmts[i], &b = out.stmts[i + 1];
      bool dep = std::find(b.args.begin(), b.args.end(), a.out) != b.args.end();
      if (!dep && (rng.next() & 1)) std::swap(a, b);
    }
  out.goal = src.goal;
  return out;
}

std::pair<uint64_t, uint64_t> hash_of(const ProblemTriplet& t) {
  uint64_t hi = 0, lo = 0;
  canonical_hash(t, &hi, &lo);
  return {hi, lo};
}

// Reference symmetry definition: a permutation preserves the triplet
// when every statement maps to a statement and the goal maps to itself.
bool preserves(const ProblemSource& src, const std::vector<Pt>& perm) {
  std::set<std::tuple<int, std::vector<Pt>, Pt>> stmts;
  for (const Statement& st : src.stmts)
    stmts.insert({(int)st.kind, canonical_args(st.kind, st.args), st.out});
  std::set<Pt> frees(src.free_pts.begin(), src.free_pts.end());
  for (Pt p : src.free_pts)
    if (!frees.count(perm[p])) return false;
  for (const Statement& st : src.stmts) {
    std::vector<Pt> args;
    for (Pt a : st.args) args.push_back(perm[a]);
    if (!stmts.count(
            {(int)st.kind, canonical_args(st.kind, args), perm[st.out]}))
      return false;
  }
  Fact g = *src.goal;
  for (Pt& p : g.pts)
    if (p != kNoPt) p = perm[p];
  return canonical(g) == canonical(*src.goal);
}

std::set<std::vector<Pt>> brute_force_autos(const ProblemSource& src) {
  size_t n = src.names.size();
  std::vector<Pt> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = (Pt)i;
  std::set<std::vector<Pt>> out;
  std::vector<Pt> id = perm;
  std::sort(perm.begin(), perm.end());
  do {
    if (perm != id && preserves(src, perm)) out.insert(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::vector<ProblemTriplet> small_batch(uint64_t seed, long paths,
                                        std::vector<std::string>* lines) {
  GenerateConfig cfg;
  cfg.stats = default_stats();
  cfg.seed = seed;
  cfg.max_paths = paths;
  cfg.metrics_every = 0;
  std::vector<ProblemTriplet> out;
  generate(cfg, [&](const ProblemTriplet& t, const std::string& line) {
    out.push_back(t);
    if (lines) lines->push_back(line);
  });
  return out;
}

}  // namespace

TEST_CASE("default stats cover every construction kind with positive weight") {
  auto st = default_stats();
  CHECK(st.walk_min >= 1);
  CHECK(st.walk_max >= st.walk_min);
  for (const KindInfo& ki : catalog()) {
    if (ki.kind == Kind::FreePoint) continue;
    auto it = st.weights.find(ki.kind);
    REQUIRE_MESSAGE(it != st.weights.end(), ki.name);
    CHECK(it->second > 0);
  }
}

TEST_CASE("parse_stats reads weights and reports errors with line numbers") {
  std::string err;
  int line = 0;
  auto st = parse_stats("midpoint 2.5\n\n# comment\nfoot 1\n", &err, &line);
  REQUIRE_MESSAGE(st.has_value(), err);
  CHECK(st->weights.at(Kind::Midpoint) == doctest::Approx(2.5));
  CHECK(st->weights.at(Kind::Foot) == doctest::Approx(1.0));

  CHECK(!parse_stats("bogus_kind 1\n", &err, &line));
  CHECK(line == 1);
  CHECK(!parse_stats("midpoint 1\nfoot not_a_number\n", &err, &line));
  CHECK(line == 2);
  CHECK(!parse_stats("midpoint -3\n", &err, &line));
  CHECK(line == 1);
}

TEST_CASE("walk_step extends a problem with realizable statements") {
  ProblemSource src = parse_ok("free A B C\n");
  std::vector<Coords> at{{0, 0}, {1.3, 0}, {0.2, 0.9}};
  GuidingStats stats = default_stats();
  Rng rng(42);
  int grown = 0;
  for (int i = 0; i < 12; ++i) {
    auto st = walk_step(src, at, stats, rng);
    if (!st) continue;
    ++grown;
    CHECK(at.size() == src.names.size());
    for (Pt a : st->args) CHECK(a < st->out);
    CHECK(std::isfinite(at.back().x));
    CHECK(std::isfinite(at.back().y));
  }
  CHECK(grown >= 8);
  CHECK(src.stmts.size() == (size_t)grown);

  // Same seed reproduces the same walk.
  ProblemSource src2 = parse_ok("free A B C\n");
  std::vector<Coords> at2{{0, 0}, {1.3, 0}, {0.2, 0.9}};
  Rng rng2(42);
  for (int i = 0; i < 12; ++i) walk_step(src2, at2, stats, rng2);
  CHECK(format_problem(src2) == format_problem(src));
}

TEST_CASE("canonical hash is invariant under relabeling and reorder") {
  auto triplets = small_batch(11, 25, nullptr);
  REQUIRE(!triplets.empty());
  Rng rng(5);
  int cases = 0;
  for (auto& t : triplets)
    for (int rep = 0; rep < 20; ++rep) {
      ProblemTriplet r = t;
      r.ext = relabel(t.ext, rng);
      CHECK(hash_of(r) == hash_of(t));
      ++cases;
    }
  CHECK(cases >= 100);

  // Distinct problems separate.
  auto a = make_triplet(
      "free A B C\nM = midpoint(A, B)\nN = midpoint(A, C)\n"
      "goal para M N B C\n",
      2);
  auto b = make_triplet(
      "free A B C\nO = circumcenter(A, B, C)\ngoal cong O A O B\n", 1);
  CHECK(hash_of(a) != hash_of(b));
  std::set<std::pair<uint64_t, uint64_t>> seen;
  for (auto& t : triplets) seen.insert(hash_of(t));
  CHECK(seen.size() == triplets.size());
}

TEST_CASE("symmetry detector agrees with brute force on small problems") {
  auto mid = make_triplet(
      "free A B C\nM = midpoint(A, B)\nN = midpoint(A, C)\n"
      "goal para M N B C\n",
      2);
  auto autos = detect_symmetry(mid);
  auto ref = brute_force_autos(mid.ext);
  CHECK(std::set<std::vector<Pt>>(autos.begin(), autos.end()) == ref);
  REQUIRE(autos.size() == 1);
  // (B C)(M N): swapping B and C forces the midpoints to swap.
  CHECK(autos[0] == std::vector<Pt>{0, 2, 1, 4, 3});

  auto iso = make_triplet("free A B\nM = midpoint(A, B)\ngoal cong M A M B\n",
                          1);
  auto ref2 = brute_force_autos(iso.ext);
  auto autos2 = detect_symmetry(iso);
  CHECK(std::set<std::vector<Pt>>(autos2.begin(), autos2.end()) == ref2);
  CHECK(!autos2.empty());

  auto asym = make_triplet(
      "free A B C\nF = foot(A, B, C)\ngoal perp B F A\n", 1);
  CHECK(detect_symmetry(asym).empty());
  CHECK(brute_force_autos(asym.ext).empty());

  // Randomized cross-check over generated triplets.
  auto triplets = small_batch(23, 15, nullptr);
  int checked = 0;
  for (auto& t : triplets) {
    if (t.ext.names.size() > 8) continue;
    auto got = detect_symmetry(t);
    CHECK(std::set<std::vector<Pt>>(got.begin(), got.end()) ==
          brute_force_autos(t.ext));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("replay buffer evicts the lowest yield and honors epsilon") {
  ReplayBuffer buf(5);
  for (int i = 0; i < 9; ++i) {
    ReplayEntry e;
    e.sequence = parse_ok("free A B C\n");
    e.yield_score = i;
    buf.push(e);
  }
  CHECK(buf.size() == 5);
  double lo = 1e9;
  for (auto& e : buf.entries()) lo = std::min(lo, e.yield_score);
  CHECK(lo == doctest::Approx(4.0));

  Rng rng(1);
  for (int i = 0; i < 20; ++i) CHECK(!buf.sample(0.0, rng).has_value());
  int hits = 0;
  for (int i = 0; i < 50; ++i) hits += buf.sample(1.0, rng).has_value();
  CHECK(hits == 50);
  ReplayBuffer empty(3);
  CHECK(!empty.sample(1.0, rng).has_value());
}

TEST_CASE("generation is deterministic per seed") {
  std::vector<std::string> l1, l2, l3;
  auto t1 = small_batch(77, 12, &l1);
  auto t2 = small_batch(77, 12, &l2);
  auto t3 = small_batch(78, 12, &l3);
  CHECK(l1 == l2);
  CHECK(l1 != l3);
  REQUIRE(!t1.empty());
}

TEST_CASE("emitted triplets re-verify end to end") {
  auto triplets = small_batch(101, 20, nullptr);
  REQUIRE(!triplets.empty());
  for (auto& t : triplets) {
    CHECK(!t.aux_lines().empty());
    CHECK(t.trace_len >= 5);
    CHECK(t.score > 0);
    CHECK((t.hash_hi | t.hash_lo) != 0);
    CHECK(t.symmetric == !t.automorphisms.empty());

    // Context problem: context lines plus the goal line of the full
    // formatting (aux names must stay unknown to the base problem).
    std::string full_text = format_problem(t.ext);
    size_t gpos = full_text.rfind("goal ");
    REQUIRE(gpos != std::string::npos);
    std::string ctx;
    for (auto& l : t.context_lines()) ctx += l + "\n";
    ctx += full_text.substr(gpos);
    ProblemSource cp = parse_ok(ctx);

    // Context alone must not reach the goal.
    std::string err;
    auto cseq = elaborate(cp, &err);
    REQUIRE_MESSAGE(cseq.has_value(), err);
    auto cr = realize(*cseq, 12345);
    REQUIRE(cr.status == RealizeStatus::Ok);
    Database cdb(*cseq, cr.diagram);
    cdb.seed();
    saturate(cdb);
    CHECK(!cdb.contains_goal(*cp.goal));

    // The recorded trace must check against the context problem.
    auto verdict = check_proof(t.trace_text, cp);
    CHECK_MESSAGE(verdict.status == CheckStatus::Ok,
                  verdict.message << "\nstep " << verdict.step << "\n"
                                  << t.trace_text);
  }
}
