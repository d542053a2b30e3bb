#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "database.hpp"
#include "rules.hpp"
#include "trace.hpp"

namespace gs {

struct SearchConfig {
  int max_nodes = 2000;     // saturated states materialized, root included
  int max_depth = 3;        // aux constructions per path; 0 = DD only
  double wall_seconds = 5400.0;
  int beam_width = 64;      // children pushed per expansion batch
  double lambda = 1.0;      // value weight in priority = policy - lambda*value
  uint64_t seed = 12345;
  int per_kind_cap = 32;    // candidate actions kept per construction kind
  SaturateLimits sat;
  std::map<Kind, double> kind_priors;  // additive policy prior, default 0
};

struct SolveReport {
  bool solved = false;
  std::string trace;  // minimized, formatted, checker-verified
  int aux_count = 0;
  int trace_len = 0;
  int nodes = 0;
  double best_value = -1.0;  // lowest value estimate seen
  bool truncated = false;    // a budget tripped before exhausting the space
  bool unrealizable = false;
  std::string message;
  double seconds = 0.0;
};

// Textual view of a search state, shared with the remote wire protocol.
struct GuidanceQuery {
  std::vector<std::string> problem;    // DSL lines of the context
  std::vector<std::string> state_aux;  // aux construction lines chosen so far
  std::string goal;
  std::vector<std::string> candidates;  // empty for value queries
};

// Pluggable action scorer / steps-to-go estimator. Either call may
// decline (nullopt), in which case the built-in heuristics take over;
// guidance failures are never fatal.
class Guidance {
 public:
  virtual ~Guidance() = default;
  virtual std::optional<std::vector<double>> score_actions(
      const GuidanceQuery& q) = 0;
  virtual std::optional<double> estimate_value(const GuidanceQuery& q) = 0;
};

// endpoint "http://host:port" posts JSON to /guide; endpoint "exec:CMD"
// runs CMD as a child process speaking newline-delimited JSON on its
// standard streams. Request: {problem, state_aux, goal, candidates};
// response: {policy: [float], value: float}.
std::unique_ptr<Guidance> remote_guidance(const std::string& endpoint,
                                          double timeout_seconds = 5.0);

// Legal aux constructions over the existing points: catalog kinds with
// argument tuples, degenerate candidates excluded on the diagram,
// deduplicated by canonical args, capped per kind (goal-relevant tuples
// kept first, seeded order breaking ties).
std::vector<Statement> candidate_actions(const ConstructionSequence& seq,
                                         const Diagram& diagram,
                                         const Fact* goal, int per_kind_cap,
                                         uint64_t seed,
                                         const ToleranceConfig& tol = {});

// Goal-relevance features: +2 per argument in the goal, +1 per argument
// sharing a line or circle class with a goal point, + kind prior.
std::vector<double> heuristic_policy(Database& db, const Fact& goal,
                                     const std::vector<Statement>& cands,
                                     const std::map<Kind, double>& priors);

// Estimated remaining constructions: 0 when the goal is implied, else 1
// plus the number of goal component links not yet established.
double heuristic_value(Database& db, const Fact& goal);

SolveReport best_first_solve(const ProblemSource& problem,
                             Guidance* guidance = nullptr,
                             const SearchConfig& cfg = {});

}  // namespace gs
