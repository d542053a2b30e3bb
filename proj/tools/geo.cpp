// Command-line surface over the C library: generate, solve, check,
// bench, format, score. Exit codes are documented per subcommand and in
// the README.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geosolve/geosolve.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  gs_string_free(s);
  return out;
}

bool read_file(const std::string& path, std::string* out) {
  std::ifstream f(path);
  if (!f) return false;
  std::stringstream ss;
  ss << f.rdbuf();
  *out = ss.str();
  return true;
}

void print_metrics(const char* line, void*) {
  fprintf(stderr, "%s\n", line);
}

struct SolveFlags {
  int budget_nodes = 2000;
  int max_depth = 3;
  double time_limit = 5400.0;
  double lambda = 1.0;
  int beam = 64;
  long seed = 12345;
  std::string guidance = "heuristic";

  std::string opts_json() const {
    json j{{"max_nodes", budget_nodes}, {"max_depth", max_depth},
           {"wall_seconds", time_limit}, {"lambda", lambda},
           {"beam_width", beam},        {"seed", seed}};
    if (guidance != "heuristic") j["guidance"] = guidance;
    return j.dump();
  }
};

void add_solve_flags(CLI::App* cmd, SolveFlags* f) {
  cmd->add_option("--budget-nodes", f->budget_nodes,
                  "search nodes materialized (default 2000)");
  cmd->add_option("--max-depth", f->max_depth,
                  "aux constructions per path, 0 = DD only (default 3)");
  cmd->add_option("--time", f->time_limit,
                  "wall seconds per problem (default 5400)");
  cmd->add_option("--lambda", f->lambda,
                  "value weight in search priority (default 1.0)");
  cmd->add_option("--beam", f->beam, "children per expansion (default 64)");
  cmd->add_option("--seed", f->seed, "search RNG seed (default 12345)");
  cmd->add_option("--guidance", f->guidance,
                  "'heuristic', http://host:port, or exec:CMD");
}

int cmd_solve(const std::string& path, const SolveFlags& f,
              const std::string& out_path) {
  std::string text;
  if (!read_file(path, &text)) {
    fprintf(stderr, "cannot read %s\n", path.c_str());
    return 2;
  }
  char* report_c = nullptr;
  int rc = gs_solve(text.c_str(), f.opts_json().c_str(), &report_c);
  std::string report = take(report_c);
  json j = json::parse(report, nullptr, false);
  if (j.is_discarded()) {
    fprintf(stderr, "internal: bad report\n");
    return 2;
  }
  std::string msg = j.value("message", std::string());
  if (!msg.empty()) fprintf(stderr, "%s\n", msg.c_str());
  if (rc == GS_OK) {
    std::string trace = j.value("trace", std::string());
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      out << trace;
      if (!out) {
        fprintf(stderr, "cannot write %s\n", out_path.c_str());
        return 3;
      }
    }
    fputs(trace.c_str(), stdout);
    fprintf(stderr, "solved: aux=%d steps=%d nodes=%d seconds=%.1f\n",
            j.value("aux_count", 0), j.value("trace_len", 0),
            j.value("nodes", 0), j.value("seconds", 0.0));
  } else if (rc == GS_FAIL) {
    fprintf(stderr, "unsolved within budget: nodes=%d seconds=%.1f%s\n",
            j.value("nodes", 0), j.value("seconds", 0.0),
            j.value("truncated", false) ? " (truncated)" : "");
  }
  return rc;
}

int cmd_check(const std::string& trace_path, const std::string& prob_path) {
  std::string trace, prob;
  if (!read_file(trace_path, &trace) || !read_file(prob_path, &prob)) {
    fprintf(stderr, "cannot read input files\n");
    return 2;
  }
  char* res_c = nullptr;
  int rc = gs_check(trace.c_str(), prob.c_str(), &res_c);
  json j = json::parse(take(res_c), nullptr, false);
  if (rc == 0) {
    fprintf(stderr, "valid\n");
  } else if (!j.is_discarded()) {
    fprintf(stderr, "step %d: %s\n", j.value("step", 0),
            j.value("message", std::string("?")).c_str());
  }
  return rc;
}

int cmd_score(const std::string& prob_path, const std::string& trace_path) {
  std::string trace, prob;
  if (!read_file(prob_path, &prob) || !read_file(trace_path, &trace)) {
    fprintf(stderr, "cannot read input files\n");
    return 2;
  }
  char* res_c = nullptr;
  int rc = gs_score(prob.c_str(), trace.c_str(), &res_c);
  std::string res = take(res_c);
  if (rc == 0) {
    printf("%s\n", res.c_str());
  } else {
    json j = json::parse(res, nullptr, false);
    fprintf(stderr, "%s\n",
            j.is_discarded() ? res.c_str()
                             : j.value("message", res).c_str());
  }
  return rc;
}

int cmd_format(const std::string& path) {
  std::string text;
  if (!read_file(path, &text)) {
    fprintf(stderr, "cannot read %s\n", path.c_str());
    return 2;
  }
  gs_problem* p = nullptr;
  char* err = nullptr;
  if (gs_problem_parse(text.c_str(), &p, &err) != GS_OK) {
    fprintf(stderr, "%s\n", take(err).c_str());
    return 2;
  }
  gs_string_free(err);
  printf("%s", take(gs_problem_format(p)).c_str());
  gs_problem_free(p);
  return 0;
}

int cmd_bench(const std::string& dir, const SolveFlags& f,
              const std::string& csv_path) {
  std::vector<fs::path> problems;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.path().extension() == ".gg") problems.push_back(e.path());
  std::sort(problems.begin(), problems.end());
  if (problems.empty()) {
    fprintf(stderr, "no .gg problems in %s\n", dir.c_str());
    return 3;
  }
  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path);
    if (!csv) {
      fprintf(stderr, "cannot write %s\n", csv_path.c_str());
      return 3;
    }
  }
  std::ostream* cs = csv_path.empty() ? nullptr : &csv;
  if (cs) *cs << "# bench-csv v1\nproblem,solved,seconds,aux_count,trace_len,nodes\n";
  int solved = 0;
  std::vector<double> times;
  for (const fs::path& p : problems) {
    std::string text;
    if (!read_file(p.string(), &text)) continue;
    char* report_c = nullptr;
    int rc = gs_solve(text.c_str(), f.opts_json().c_str(), &report_c);
    json j = json::parse(take(report_c), nullptr, false);
    bool ok = rc == GS_OK;
    double sec = j.is_discarded() ? 0.0 : j.value("seconds", 0.0);
    int aux = j.is_discarded() ? 0 : j.value("aux_count", 0);
    int len = j.is_discarded() ? 0 : j.value("trace_len", 0);
    int nodes = j.is_discarded() ? 0 : j.value("nodes", 0);
    solved += ok;
    times.push_back(sec);
    printf("%-28s %s  %7.1fs  aux=%d steps=%d nodes=%d\n",
           p.filename().string().c_str(), ok ? "solved  " : "unsolved",
           sec, aux, len, nodes);
    fflush(stdout);
    if (cs)
      *cs << p.filename().string() << ',' << (ok ? 1 : 0) << ',' << sec << ','
          << aux << ',' << len << ',' << nodes << '\n';
  }
  std::sort(times.begin(), times.end());
  double median = times.empty() ? 0 : times[times.size() / 2];
  printf("%d/%zu solved, median %.1fs\n", solved, problems.size(), median);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("planar geometry engine (") + gs_version() + ")"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "propose problems to JSONL");
  long g_count = -1, g_paths = -1, g_metrics_every = 100;
  long g_seed = 1;
  int g_workers = 1, g_steps_min = 5, g_steps_max = 12, g_min_trace = 5;
  double g_eps = 0.3, g_time = -1;
  std::string g_weights, g_out = "triplets.jsonl";
  gen->add_option("--count", g_count, "stop after N unique triplets");
  gen->add_option("--paths", g_paths, "stop after N walks");
  gen->add_option("--time", g_time, "stop after N seconds");
  gen->add_option("--seed", g_seed, "RNG seed (default 1)");
  gen->add_option("--workers", g_workers, "worker count (sequential run)");
  gen->add_option("--steps-min", g_steps_min, "walk length lower bound");
  gen->add_option("--steps-max", g_steps_max, "walk length upper bound");
  gen->add_option("--weights", g_weights, "kind-weight file");
  gen->add_option("--epsilon", g_eps, "replay buffer restart probability");
  gen->add_option("--min-trace-len", g_min_trace, "goal filter (default 5)");
  gen->add_option("--out", g_out, "output JSONL path");
  gen->add_option("--metrics-every", g_metrics_every,
                  "paths between metrics lines");

  // solve
  auto* solve = app.add_subcommand("solve", "prove one problem");
  std::string s_path, s_out;
  SolveFlags s_flags;
  solve->add_option("problem", s_path, "problem .gg file")->required();
  solve->add_option("--out", s_out, "write the trace here too");
  add_solve_flags(solve, &s_flags);

  // check
  auto* check = app.add_subcommand("check", "verify a trace");
  std::string c_trace, c_prob;
  check->add_option("trace", c_trace, "trace file")->required();
  check->add_option("problem", c_prob, "problem .gg file")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "solve a directory of problems");
  std::string b_dir, b_csv;
  SolveFlags b_flags;
  bench->add_option("dir", b_dir, "directory of .gg files")->required();
  bench->add_option("--csv", b_csv, "machine-readable results");
  add_solve_flags(bench, &b_flags);

  // format
  auto* format = app.add_subcommand("format", "reprint a problem canonically");
  std::string f_path;
  format->add_option("problem", f_path, "problem .gg file")->required();

  // score
  auto* score = app.add_subcommand("score", "difficulty score of a proof");
  std::string sc_prob, sc_trace;
  score->add_option("problem", sc_prob, "problem .gg file")->required();
  score->add_option("trace", sc_trace, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    if (g_workers < 1) {
      fprintf(stderr, "--workers must be >= 1\n");
      return 2;
    }
    json opts{{"seed", g_seed},
              {"epsilon", g_eps},
              {"walk_min", g_steps_min},
              {"walk_max", g_steps_max},
              {"min_trace_len", g_min_trace},
              {"metrics_every", g_metrics_every}};
    if (g_count >= 0) opts["max_triplets"] = g_count;
    if (g_paths >= 0) opts["max_paths"] = g_paths;
    if (g_time >= 0) opts["wall_seconds"] = g_time;
    if (!g_weights.empty()) {
      std::string wtext;
      if (!read_file(g_weights, &wtext)) {
        fprintf(stderr, "cannot read %s\n", g_weights.c_str());
        return 2;
      }
      opts["weights"] = wtext;
    }
    char* metrics_c = nullptr;
    int rc = gs_generate(opts.dump().c_str(), g_out.c_str(), print_metrics,
                         nullptr, &metrics_c);
    std::string metrics = take(metrics_c);
    if (rc == GS_OK) {
      printf("%s\n", metrics.c_str());
    } else {
      json j = json::parse(metrics, nullptr, false);
      fprintf(stderr, "%s%s\n",
              j.is_discarded() ? metrics.c_str()
                               : j.value("message", metrics).c_str(),
              j.is_object() && j.contains("line")
                  ? (" (line " + std::to_string((int)j["line"]) + ")").c_str()
                  : "");
    }
    return rc == GS_ERR_IO ? 3 : rc == GS_OK ? 0 : 2;
  }
  if (solve->parsed()) return cmd_solve(s_path, s_flags, s_out);
  if (check->parsed()) return cmd_check(c_trace, c_prob);
  if (bench->parsed()) return cmd_bench(b_dir, b_flags, b_csv);
  if (format->parsed()) return cmd_format(f_path);
  if (score->parsed()) return cmd_score(sc_prob, sc_trace);
  return 2;
}
