#pragma once

#include <optional>
#include <string>
#include <vector>

#include "database.hpp"
#include "rules.hpp"

namespace gs {

struct ProofStep {
  Fact conclusion;
  std::string rule;  // internal bookkeeping, not printed
  // Premise fact plus the 1-based step deriving it; 0 marks a
  // construction-emitted premise.
  std::vector<std::pair<Fact, int>> premises;
};

struct ProofTrace {
  // Auxiliary constructions printed as header lines before the steps.
  std::vector<Statement> aux;
  std::vector<ProofStep> steps;
};

// Backward reachability from goal_id over stored justifications; steps
// come out in topological order ending at the goal. Statements of the
// database's sequence with index >= aux_from become the aux header.
ProofTrace extract_proof(const Database& db, FactId goal_id,
                         size_t aux_from = (size_t)-1);

// Drops steps that are not on a path to the final conclusion, renumbers.
ProofTrace minimize(const ProofTrace& t);

// Re-justifies each step against a replay of the whole prefix, which
// often needs fewer distinct steps than the justification found during
// saturation, then minimizes; iterated to a fixpoint.
ProofTrace compress_trace(ProofTrace t, const ConstructionSequence& seq,
                          const Diagram& diagram,
                          const ToleranceConfig& tol = {});

// `[n] pred (ARGS) because pred (ARGS)[k], pred (ARGS)[k]` per line,
// aux header lines first.
std::string format_trace(const ProofTrace& t, const NameTable& names);

// Parses a formatted trace against a problem. Aux construction lines may
// define new points; *extended receives the problem with them appended.
std::optional<ProofTrace> parse_trace(const std::string& text,
                                      const ProblemSource& base,
                                      ProblemSource* extended,
                                      std::string* err);

enum class CheckStatus { Ok = 0, Invalid = 1, ParseFail = 2 };

struct CheckResult {
  CheckStatus status = CheckStatus::Ok;
  int step = 0;  // 1-based step at fault when status == Invalid
  std::string message;
};

// Independent checker: every step must follow from its stated premises
// by one rule application (re-discovered, rules are not printed), [0]
// references must be construction-emitted, indices acyclic, the final
// conclusion must equal the goal, and every conclusion must hold
// numerically on fresh realizations.
CheckResult check_proof(const std::string& trace_text,
                        const ProblemSource& problem,
                        const ToleranceConfig& tol = {});

}  // namespace gs
