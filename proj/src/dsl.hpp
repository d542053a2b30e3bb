#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geom_types.hpp"

namespace gs {

enum class Kind : uint8_t {
  FreePoint,
  Midpoint,
  Foot,
  Reflect,
  ExtendEqual,
  Incenter,
  Excenter,
  Circumcenter,
  Orthocenter,
  IntersectLineLine,
  SecondIntersectLineCircle,
  SecondIntersectCircleCircle,
  ParallelMeet,
  PerpMeet,
  ArcMidpoint,
  Antipode,
  Parallelogram4,
  AngleBisectorMeet,
  PerpAtPointMeet,
  OnCircle,
};

struct KindInfo {
  Kind kind;
  const char* name;
  int arity;
  const char* signature;  // human-readable argument roles
};

const std::vector<KindInfo>& catalog();
const KindInfo* kind_info(Kind k);
const KindInfo* kind_by_name(std::string_view name);

// Argument positions interchangeable without changing the construction
// (e.g. midpoint {0,1}; foot {1,2} since the line AB is unordered).
const std::vector<std::vector<int>>& kind_arg_groups(Kind k);

// Sorts arguments within each interchangeable group; two statements of
// the same kind describe the same construction iff their canonical args
// are equal.
std::vector<Pt> canonical_args(Kind k, std::vector<Pt> args);

struct Statement {
  Pt out = kNoPt;
  Kind kind = Kind::FreePoint;
  std::vector<Pt> args;
  int line_no = 0;
};

struct ProblemSource {
  NameTable names;
  std::vector<Pt> free_pts;
  std::vector<Statement> stmts;  // excludes free points
  std::optional<Fact> goal;
};

struct ParseError {
  int line = 0;
  int col = 0;
  std::string message;
};

// Parses the line-oriented `.gg` construction language:
//   # comment
//   free A B C
//   D = incenter(A, B, C)
//   goal cong A D B D
std::optional<ProblemSource> parse_problem(std::string_view text,
                                           ParseError* err);

std::string format_problem(const ProblemSource& src);
std::string format_statement(const Statement& st, const NameTable& names);

// Level-0 facts a statement contributes, instantiated over its points.
std::vector<Fact> emitted_facts(const Statement& st);

using PtMask = uint64_t;

struct ConstructionSequence {
  ProblemSource src;
  // Dependency closure per point: the points it transitively needs,
  // itself included. Indexed by point id.
  std::vector<PtMask> closure;
  // Statement index defining each point, -1 for free points.
  std::vector<int> def_stmt;
};

// Validates ordering and computes dependency closures.
std::optional<ConstructionSequence> elaborate(const ProblemSource& src,
                                              std::string* err);

// Machine-readable catalog dump (JSON): name, arity, signature and the
// emitted-fact templates over placeholder points.
std::string catalog_json();

}  // namespace gs
