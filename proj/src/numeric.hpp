#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsl.hpp"
#include "geom_types.hpp"

namespace gs {

struct Coords {
  double x = 0, y = 0;
};

struct Diagram {
  std::vector<Coords> at;  // indexed by point id
  uint64_t seed = 0;
};

struct ToleranceConfig {
  double abs_tol = 1e-7;
  double rel_tol = 1e-9;
  double separation_min = 1e-3;
  int resample_limit = 64;
  int verify_seeds = 5;
};

enum class RealizeStatus { Ok, DegenerateAfterRetries, Unrealizable };

struct RealizeResult {
  RealizeStatus status = RealizeStatus::Ok;
  Diagram diagram;
  std::string message;
};

// Deterministic 64-bit RNG (fixed algorithm, platform independent).
class Rng {
 public:
  explicit Rng(uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  uint64_t next();
  double uniform(double lo, double hi);

 private:
  uint64_t s_;
};

// Samples free points in [-1,1]^2 and computes every construction
// analytically; resamples the whole drawing on degeneracy.
RealizeResult realize(const ConstructionSequence& seq, uint64_t seed,
                      const ToleranceConfig& tol = {});

// Computes one statement's point from already-placed points. rng is only
// consulted by kinds with sampling freedom (free_point, on_circle).
// Returns nullopt when degenerate or unrealizable.
std::optional<Coords> realize_statement(const std::vector<Coords>& at,
                                        const Statement& st, Rng* rng,
                                        const ToleranceConfig& tol);

bool holds(const Diagram& d, const Fact& f, const ToleranceConfig& tol = {});

// True iff the fact holds on k independently seeded realizations.
bool verify_fact(const ConstructionSequence& seq, const Fact& f, int k,
                 uint64_t base_seed = 12345,
                 const ToleranceConfig& tol = {});

std::string diagram_svg(const Diagram& d, const NameTable& names);

}  // namespace gs
