#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "database.hpp"
#include "dsl.hpp"
#include "numeric.hpp"
#include "rules.hpp"
#include "trace.hpp"

namespace gs {

// Construction-kind sampling weights and walk-length bounds for random
// walks. Defaults: uniform weights, lengths 5..12.
struct GuidingStats {
  std::map<Kind, double> weights;
  int walk_min = 5;
  int walk_max = 12;
};

GuidingStats default_stats();
// Parses a weights file of `kind weight` lines; on error reports the
// 1-based line number.
std::optional<GuidingStats> parse_stats(const std::string& text,
                                        std::string* err, int* err_line);

// A generated problem: context statements, a goal over context points,
// and the auxiliary constructions the proof needs beyond the context.
struct ProblemTriplet {
  ProblemSource ext;     // context then aux statements; goal set
  size_t context_stmts;  // ext.stmts[0..context_stmts) form the context
  int trace_len = 0;
  bool symmetric = false;
  // Non-identity point permutations preserving statements and goal,
  // stored as image-by-index vectors.
  std::vector<std::vector<Pt>> automorphisms;
  uint64_t hash_hi = 0, hash_lo = 0;
  double score = 0;
  std::string trace_text;  // formatted proof over ext

  std::vector<std::string> context_lines() const;
  std::vector<std::string> aux_lines() const;
};

// One random walk step: kind sampled by weight, arguments uniform over
// existing points, resampled on degeneracy. nullopt = no legal move.
std::optional<Statement> walk_step(ProblemSource& src,
                                   std::vector<Coords>& at,
                                   const GuidingStats& stats, Rng& rng,
                                   const ToleranceConfig& tol = {});

struct GoalCandidate {
  FactId id;
  Fact fact;
};

// Saturated-database facts that (a) need a point outside the dependency
// closure of their own points, (b) have minimized trace length >=
// min_trace_len, (c) survive multi-seed numeric verification.
std::vector<GoalCandidate> mine_goals(Database& db,
                                      const ConstructionSequence& seq,
                                      int min_trace_len = 5,
                                      int verify_k = 5);

// Splits a full walk into context (dependency closure of the goal
// points) and auxiliaries (proof-needed constructions outside it), and
// re-verifies the triplet by running DD on context alone (must fail) and
// context+aux (must succeed). nullopt when the aux list is empty or a
// re-check fails.
std::optional<ProblemTriplet> backward_trace(const ConstructionSequence& seq,
                                             Database& db, FactId goal_id,
                                             const SaturateLimits& lim = {},
                                             const ToleranceConfig& tol = {},
                                             ProofTrace* trace_out = nullptr);

// All non-identity point permutations of the triplet's extended problem
// that map the statement multiset and the goal to themselves. Empty
// beyond 16 points (unknown).
std::vector<std::vector<Pt>> detect_symmetry(const ProblemTriplet& t);

// Relabeling-invariant 128-bit digest: minimum serialization over free
// point orders with constructed points named by canonical placement
// order, then hashed.
void canonical_hash(const ProblemTriplet& t, uint64_t* hi, uint64_t* lo);

struct ScoreWeights {
  double w_trace = 1.0;
  double w_aux = 5.0;
  double w_rules = 2.0;
  double w_symmetric = 3.0;
};

double score_triplet(const ProblemTriplet& t, const ProofTrace& trace,
                     const ScoreWeights& w = {});

// Bounded replay buffer of promising walk states; eviction drops the
// lowest yield.
struct ReplayEntry {
  ProblemSource sequence;
  double yield_score = 0;
  int visits = 0;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t cap = 10000) : cap_(cap) {}
  void push(ReplayEntry e);
  // With probability epsilon returns a buffered sequence sampled
  // proportionally to yield; otherwise nullopt (start fresh).
  std::optional<ProblemSource> sample(double epsilon, Rng& rng);
  size_t size() const { return entries_.size(); }
  const std::vector<ReplayEntry>& entries() const { return entries_; }

 private:
  size_t cap_;
  std::vector<ReplayEntry> entries_;
};

struct GenerateConfig {
  GuidingStats stats;
  uint64_t seed = 1;
  long max_paths = -1;       // stop after this many walks (<0 = unbounded)
  long max_triplets = -1;    // stop after this many unique triplets
  double wall_seconds = -1;  // stop after this much time
  double epsilon = 0.3;
  int min_trace_len = 5;
  int verify_k = 5;
  size_t buffer_cap = 10000;
  long metrics_every = 100;  // paths between metrics lines (0 = never)
  SaturateLimits sat{20000, 16, 5.0};
  ToleranceConfig tol;
};

struct GenerateMetrics {
  long paths = 0;
  long unique_paths = 0;
  long goals_mined = 0;
  long triplets = 0;         // unique triplets emitted
  long duplicate_hits = 0;   // hash-deduplicated candidates
  long configurations = 0;   // unique (context, aux) pairs
  double configs_per_path() const {
    return paths ? (double)configurations / (double)paths : 0.0;
  }
};

// Walk -> saturate -> mine -> backward-trace -> symmetry -> dedup ->
// score. Every unique triplet is passed to `sink` as a struct plus its
// JSONL line. `metrics_line` (optional) receives periodic counter text.
GenerateMetrics generate(
    const GenerateConfig& cfg,
    const std::function<void(const ProblemTriplet&, const std::string&)>& sink,
    const std::function<void(const std::string&)>& metrics_line = nullptr);

// JSONL serialization of one triplet.
std::string triplet_json(const ProblemTriplet& t);

}  // namespace gs
