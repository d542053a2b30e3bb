#include "geosolve/geosolve.h"

#include <cstring>
#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "generator.hpp"
#include "solver.hpp"
#include "trace.hpp"

using nlohmann::json;

namespace {

char* dup_string(const std::string& s) {
  char* out = (char*)malloc(s.size() + 1);
  if (out) memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** slot, const std::string& s) {
  if (slot) *slot = dup_string(s);
}

// Parses opts_json if given; returns false (and fills err) on bad JSON.
bool parse_opts(const char* opts_json, json* out, std::string* err) {
  if (!opts_json || !*opts_json) {
    *out = json::object();
    return true;
  }
  json j = json::parse(opts_json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    *err = "options must be a JSON object";
    return false;
  }
  *out = std::move(j);
  return true;
}

}  // namespace

struct gs_problem {
  gs::ProblemSource src;
};

extern "C" {

const char* gs_version(void) { return "1.0.0"; }

void gs_string_free(char* s) { free(s); }

char* gs_catalog_json(void) { return dup_string(gs::catalog_json()); }

int gs_problem_parse(const char* text, gs_problem** out, char** err) {
  if (!text || !out) {
    put(err, "null argument");
    return GS_ERR_ARG;
  }
  gs::ParseError perr;
  auto src = gs::parse_problem(text, &perr);
  if (!src) {
    put(err, "line " + std::to_string(perr.line) + ": " + perr.message);
    return GS_ERR_PARSE;
  }
  *out = new gs_problem{std::move(*src)};
  return GS_OK;
}

void gs_problem_free(gs_problem* p) { delete p; }

char* gs_problem_format(const gs_problem* p) {
  if (!p) return nullptr;
  return dup_string(gs::format_problem(p->src));
}

int gs_solve(const char* problem_text, const char* opts_json,
             char** report_json) {
  if (!problem_text) return GS_ERR_ARG;
  std::string err;
  json opts;
  if (!parse_opts(opts_json, &opts, &err)) {
    put(report_json, json{{"solved", false}, {"message", err}}.dump());
    return GS_ERR_PARSE;
  }
  gs::ParseError perr;
  auto src = gs::parse_problem(problem_text, &perr);
  if (!src || !src->goal) {
    put(report_json,
        json{{"solved", false},
             {"message", !src ? "line " + std::to_string(perr.line) + ": " +
                                    perr.message
                              : "problem has no goal"}}
            .dump());
    return GS_ERR_PARSE;
  }
  gs::SearchConfig cfg;
  try {
    if (opts.contains("max_nodes")) cfg.max_nodes = opts["max_nodes"];
    if (opts.contains("max_depth")) cfg.max_depth = opts["max_depth"];
    if (opts.contains("wall_seconds")) cfg.wall_seconds = opts["wall_seconds"];
    if (opts.contains("beam_width")) cfg.beam_width = opts["beam_width"];
    if (opts.contains("lambda")) cfg.lambda = opts["lambda"];
    if (opts.contains("seed")) cfg.seed = (uint64_t)(int64_t)opts["seed"];
  } catch (...) {
    put(report_json,
        json{{"solved", false}, {"message", "bad option types"}}.dump());
    return GS_ERR_PARSE;
  }
  if (cfg.max_nodes <= 0 || cfg.max_depth < 0 || cfg.beam_width <= 0 ||
      cfg.wall_seconds <= 0) {
    put(report_json,
        json{{"solved", false}, {"message", "budgets must be positive"}}
            .dump());
    return GS_ERR_PARSE;
  }
  std::unique_ptr<gs::Guidance> guidance;
  std::string endpoint = opts.value("guidance", std::string());
  if (!endpoint.empty() && endpoint != "heuristic")
    guidance = gs::remote_guidance(endpoint);

  gs::SolveReport rep = gs::best_first_solve(*src, guidance.get(), cfg);
  json out{{"solved", rep.solved},      {"trace", rep.trace},
           {"aux_count", rep.aux_count}, {"trace_len", rep.trace_len},
           {"nodes", rep.nodes},         {"seconds", rep.seconds},
           {"best_value", rep.best_value}, {"truncated", rep.truncated},
           {"message", rep.message}};
  put(report_json, out.dump());
  if (rep.unrealizable) return GS_ERR_UNREALIZABLE;
  return rep.solved ? GS_OK : GS_FAIL;
}

int gs_check(const char* trace_text, const char* problem_text,
             char** result_json) {
  if (!trace_text || !problem_text) return GS_ERR_ARG;
  gs::ParseError perr;
  auto src = gs::parse_problem(problem_text, &perr);
  if (!src) {
    put(result_json,
        json{{"status", 2},
             {"step", 0},
             {"message",
              "problem line " + std::to_string(perr.line) + ": " +
                  perr.message}}
            .dump());
    return GS_ERR_PARSE;
  }
  gs::CheckResult res = gs::check_proof(trace_text, *src);
  put(result_json, json{{"status", (int)res.status},
                        {"step", res.step},
                        {"message", res.message}}
                       .dump());
  return (int)res.status;
}

int gs_score(const char* problem_text, const char* trace_text,
             char** result_json) {
  if (!problem_text || !trace_text) return GS_ERR_ARG;
  gs::ParseError perr;
  auto src = gs::parse_problem(problem_text, &perr);
  if (!src) {
    put(result_json, json{{"message", perr.message}}.dump());
    return GS_ERR_PARSE;
  }
  gs::CheckResult chk = gs::check_proof(trace_text, *src);
  if (chk.status == gs::CheckStatus::ParseFail) {
    put(result_json, json{{"message", chk.message}}.dump());
    return GS_ERR_PARSE;
  }
  if (chk.status == gs::CheckStatus::Invalid) {
    put(result_json, json{{"message", "trace rejected: " + chk.message},
                          {"step", chk.step}}
                         .dump());
    return GS_FAIL;
  }
  std::string err;
  gs::ProblemSource ext;
  auto t = gs::parse_trace(trace_text, *src, &ext, &err);
  if (!t) {
    put(result_json, json{{"message", err}}.dump());
    return GS_ERR_PARSE;
  }
  // Rules are not serialized; rediscover each step's rule the way the
  // checker does and count distinct names.
  auto seq = gs::elaborate(ext, &err);
  if (!seq) {
    put(result_json, json{{"message", err}}.dump());
    return GS_ERR_PARSE;
  }
  auto r = gs::realize(*seq, 12345);
  std::set<std::string> rules;
  if (r.status == gs::RealizeStatus::Ok) {
    gs::SaturateLimits lim;
    lim.max_facts = 20000;
    lim.max_rounds = 3;
    lim.wall_seconds = 10.0;
    for (const gs::ProofStep& s : t->steps) {
      gs::Database db(*seq, r.diagram);
      for (const auto& [pf, k] : s.premises)
        db.insert(pf, "construction", {});
      auto id = db.contains_goal(s.conclusion);
      if (!id) {
        gs::saturate(db, lim);
        id = db.contains_goal(s.conclusion);
      }
      if (id) rules.insert(db.rec(*id).rule);
    }
  }
  gs::ProblemTriplet trip;
  trip.ext = ext;
  trip.context_stmts = src->stmts.size();
  trip.symmetric = !gs::detect_symmetry(trip).empty();
  int aux = (int)(ext.stmts.size() - src->stmts.size());
  double score = 1.0 * (double)t->steps.size() + 5.0 * aux +
                 2.0 * (double)rules.size() + (trip.symmetric ? 3.0 : 0.0);
  put(result_json, json{{"score", score},
                        {"trace_len", (int)t->steps.size()},
                        {"aux_count", aux},
                        {"distinct_rules", (int)rules.size()},
                        {"symmetric", trip.symmetric}}
                       .dump());
  return GS_OK;
}

int gs_generate(const char* opts_json, const char* out_path,
                gs_metrics_cb metrics_cb, void* user, char** metrics_json) {
  if (!out_path) return GS_ERR_ARG;
  std::string err;
  json opts;
  if (!parse_opts(opts_json, &opts, &err)) {
    put(metrics_json, json{{"message", err}}.dump());
    return GS_ERR_PARSE;
  }
  gs::GenerateConfig cfg;
  cfg.stats = gs::default_stats();
  try {
    if (opts.contains("weights") &&
        !opts["weights"].get<std::string>().empty()) {
      int line = 0;
      auto st = gs::parse_stats(opts["weights"], &err, &line);
      if (!st) {
        put(metrics_json,
            json{{"message", err}, {"line", line}}.dump());
        return GS_ERR_PARSE;
      }
      int wmin = cfg.stats.walk_min, wmax = cfg.stats.walk_max;
      cfg.stats = std::move(*st);
      cfg.stats.walk_min = wmin;
      cfg.stats.walk_max = wmax;
    }
    if (opts.contains("seed")) cfg.seed = (uint64_t)(int64_t)opts["seed"];
    if (opts.contains("max_paths")) cfg.max_paths = opts["max_paths"];
    if (opts.contains("max_triplets")) cfg.max_triplets = opts["max_triplets"];
    if (opts.contains("wall_seconds")) cfg.wall_seconds = opts["wall_seconds"];
    if (opts.contains("epsilon")) cfg.epsilon = opts["epsilon"];
    if (opts.contains("walk_min")) cfg.stats.walk_min = opts["walk_min"];
    if (opts.contains("walk_max")) cfg.stats.walk_max = opts["walk_max"];
    if (opts.contains("min_trace_len"))
      cfg.min_trace_len = opts["min_trace_len"];
    if (opts.contains("metrics_every"))
      cfg.metrics_every = opts["metrics_every"];
  } catch (...) {
    put(metrics_json, json{{"message", "bad option types"}}.dump());
    return GS_ERR_PARSE;
  }
  if (cfg.epsilon < 0 || cfg.epsilon > 1 || cfg.stats.walk_min < 1 ||
      cfg.stats.walk_max < cfg.stats.walk_min ||
      (cfg.max_paths < 0 && cfg.max_triplets < 0 && cfg.wall_seconds < 0)) {
    put(metrics_json,
        json{{"message", "invalid generation config (set a stop bound)"}}
            .dump());
    return GS_ERR_PARSE;
  }
  std::ofstream out(out_path);
  if (!out) {
    put(metrics_json, json{{"message", "cannot open output"}}.dump());
    return GS_ERR_IO;
  }
  auto metrics = gs::generate(
      cfg,
      [&](const gs::ProblemTriplet&, const std::string& line) {
        out << line << '\n';
      },
      [&](const std::string& line) {
        if (metrics_cb) metrics_cb(line.c_str(), user);
      });
  out.flush();
  bool io_ok = out.good();
  json mj{{"paths", metrics.paths},
          {"unique_paths", metrics.unique_paths},
          {"goals", metrics.goals_mined},
          {"triplets", metrics.triplets},
          {"duplicates", metrics.duplicate_hits},
          {"configurations", metrics.configurations},
          {"configs_per_path", metrics.configs_per_path()}};
  put(metrics_json, mj.dump());
  return io_ok ? GS_OK : GS_ERR_IO;
}

}  // extern "C"
