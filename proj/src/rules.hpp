#pragma once

#include <map>
#include <string>
#include <vector>

#include "database.hpp"

namespace gs {

struct SaturateLimits {
  int max_facts = 200000;
  int max_rounds = 64;
  double wall_seconds = 60.0;
};

struct SaturationStats {
  int rounds = 0;
  int derived = 0;
  int numeric_rejects = 0;
  bool truncated = false;
  std::map<std::string, int> rule_fires;
};

// Runs the rule catalog to a fixed point (or until a limit trips).
SaturationStats saturate(Database& db, const SaturateLimits& lim = {});

// Seeds statements [from_stmt, end) and re-saturates. The database must
// already be rebound to the extended sequence and diagram.
SaturationStats incremental_saturate(Database& db, size_t from_stmt,
                                     const SaturateLimits& lim = {});

// Names of the deduction rules, for stats and documentation.
const std::vector<std::string>& rule_names();

}  // namespace gs
