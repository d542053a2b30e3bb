#include "solver.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <queue>
#include <set>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace gs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool separated(const Coords& c, const std::vector<Coords>& at, size_t n,
               double min_sep) {
  for (size_t i = 0; i < n; ++i) {
    double dx = c.x - at[i].x, dy = c.y - at[i].y;
    if (dx * dx + dy * dy < min_sep * min_sep) return false;
  }
  return true;
}

}  // namespace

std::vector<Statement> candidate_actions(const ConstructionSequence& seq,
                                         const Diagram& diagram,
                                         const Fact* goal, int per_kind_cap,
                                         uint64_t seed,
                                         const ToleranceConfig& tol) {
  const size_t n = seq.src.names.size();
  std::vector<bool> in_goal(n, false);
  if (goal)
    for (Pt p : goal->pts)
      if (p != kNoPt && p < n) in_goal[p] = true;

  std::vector<Statement> out;
  Rng rng(seed ? seed : 1);
  for (const KindInfo& ki : catalog()) {
    if (ki.kind == Kind::FreePoint || ki.kind == Kind::OnCircle) continue;
    const int a = ki.arity;
    double total = 1;
    for (int i = 0; i < a; ++i) total *= (double)n;
    std::vector<std::vector<Pt>> tuples;
    std::set<std::vector<Pt>> seen;
    auto push = [&](std::vector<Pt> t) {
      auto c = canonical_args(ki.kind, t);
      if (seen.insert(c).second) tuples.push_back(std::move(c));
    };
    if (total <= 40000) {
      std::vector<Pt> t(a, 0);
      for (;;) {
        push(t);
        int i = a - 1;
        while (i >= 0 && ++t[i] == (Pt)n) t[i--] = 0;
        if (i < 0) break;
      }
    } else {
      for (int s = 0; s < 40000; ++s) {
        std::vector<Pt> t(a);
        for (int i = 0; i < a; ++i) t[i] = (Pt)(rng.next() % n);
        push(t);
      }
    }
    // Goal-relevant tuples first; ties in point order.
    std::stable_sort(tuples.begin(), tuples.end(),
                     [&](const std::vector<Pt>& x, const std::vector<Pt>& y) {
                       int rx = 0, ry = 0;
                       for (Pt p : x) rx += in_goal[p];
                       for (Pt p : y) ry += in_goal[p];
                       if (rx != ry) return rx > ry;
                       return x < y;
                     });
    int kept = 0;
    for (const auto& t : tuples) {
      if (kept >= per_kind_cap) break;
      Statement st;
      st.kind = ki.kind;
      st.args = t;
      st.out = kNoPt;
      Rng r2(seed ^ (uint64_t)kept);
      auto c = realize_statement(diagram.at, st, &r2, tol);
      if (!c) continue;
      if (!std::isfinite(c->x) || !std::isfinite(c->y)) continue;
      if (std::abs(c->x) > 1e9 || std::abs(c->y) > 1e9) continue;
      if (!separated(*c, diagram.at, n, tol.separation_min)) continue;
      out.push_back(std::move(st));
      ++kept;
    }
  }
  return out;
}

std::vector<double> heuristic_policy(Database& db, const Fact& goal,
                                     const std::vector<Statement>& cands,
                                     const std::map<Kind, double>& priors) {
  const size_t n = db.point_count();
  std::vector<bool> in_goal(n, false);
  std::vector<Pt> goal_pts;
  for (Pt p : goal.pts)
    if (p != kNoPt && p < n && !in_goal[p]) {
      in_goal[p] = true;
      goal_pts.push_back(p);
    }
  // Point -> alive circles membership.
  std::vector<std::vector<int>> on_circle(n);
  for (int c : db.circles_alive())
    for (Pt p : db.circle(c).pts)
      if (p < n) on_circle[p].push_back(c);
  auto shares_class = [&](Pt a) {
    for (Pt g : goal_pts) {
      if (g == a) continue;
      if (db.peek_line(a, g)) return true;
      for (int c : on_circle[a])
        for (int c2 : on_circle[g])
          if (c == c2) return true;
    }
    return false;
  };
  // Aux points are classically built on the base configuration, so
  // tuples over free points get a bonus on top of goal relevance.
  std::vector<bool> is_free(n, false);
  for (Pt p : db.seq().src.free_pts)
    if (p < (Pt)n) is_free[p] = true;
  for (const Statement& st : db.seq().src.stmts)
    if (st.kind == Kind::FreePoint && st.out < (Pt)n) is_free[st.out] = true;
  std::vector<double> scores;
  scores.reserve(cands.size());
  for (const Statement& st : cands) {
    double s = 0;
    std::set<Pt> distinct(st.args.begin(), st.args.end());
    int free_args = 0;
    for (Pt a : distinct) {
      if (a >= n) continue;
      if (is_free[a]) ++free_args;
      if (in_goal[a])
        s += 2;
      else if (shares_class(a))
        s += 1;
    }
    // Average over args, so high-arity kinds cannot stack relevance.
    if (!distinct.empty())
      s = s / (double)distinct.size() + 3.0 * free_args / (double)distinct.size();
    auto it = priors.find(st.kind);
    if (it != priors.end()) s += it->second;
    scores.push_back(s);
  }
  return scores;
}

double heuristic_value(Database& db, const Fact& goal) {
  Fact g = canonical(goal);
  if (db.stored(g)) return 0;
  if (db.implied(g)) return 0;

  auto dir_of = [&](Pt a, Pt b) { return db.line(db.line_of(a, b)).dir; };
  auto link = [&](int d1, int d2) {
    return db.angles().base_same(d1, d2) ? 0 : 1;
  };
  auto len_link = [&](Pt a, Pt b, Pt c, Pt d) {
    return db.ratios().base_same(db.len_base(a, b), db.len_base(c, d)) ? 0 : 1;
  };
  const auto& p = g.pts;
  switch (g.pred) {
    case Pred::EqAngle: {
      int d1, d2, d3, d4;
      if (p.size() == 6) {
        d1 = dir_of(p[1], p[0]);
        d2 = dir_of(p[1], p[2]);
        d3 = dir_of(p[4], p[3]);
        d4 = dir_of(p[4], p[5]);
      } else {
        d1 = dir_of(p[0], p[1]);
        d2 = dir_of(p[2], p[3]);
        d3 = dir_of(p[4], p[5]);
        d4 = dir_of(p[6], p[7]);
      }
      int straight = link(d1, d3) + link(d2, d4);
      int crossed = link(d1, d4) + link(d2, d3);
      return 1 + std::min(straight, crossed);
    }
    case Pred::EqRatio: {
      int straight = len_link(p[0], p[1], p[4], p[5]) +
                     len_link(p[2], p[3], p[6], p[7]);
      int crossed = len_link(p[0], p[1], p[2], p[3]) +
                    len_link(p[4], p[5], p[6], p[7]);
      return 1 + std::min(straight, crossed);
    }
    case Pred::Midp:
      return 1 + len_link(p[1], p[0], p[0], p[2]) +
             (db.collinear(p[1], p[0], p[2]) ? 0 : 1);
    case Pred::SimTri:
    case Pred::Contri: {
      int miss = 0;
      for (int i = 0; i < 3; ++i) {
        Pt v = p[i], q = p[(i + 1) % 3], r = p[(i + 2) % 3];
        Pt v2 = p[3 + i], q2 = p[3 + (i + 1) % 3], r2 = p[3 + (i + 2) % 3];
        int n1 = db.angle_node_of(q, v, r);
        int n2 = db.angle_node_of(q2, v2, r2);
        if (!db.angles().same(n1, n2)) ++miss;
      }
      return 1 + miss;
    }
    default:
      return 1;
  }
}

// ---- remote guidance ----

namespace {

using nlohmann::json;

class RemoteGuidance : public Guidance {
 public:
  RemoteGuidance(std::string endpoint, double timeout)
      : endpoint_(std::move(endpoint)), timeout_(timeout) {}
  ~RemoteGuidance() override {
    if (to_child_) fclose(to_child_);
    if (from_child_) fclose(from_child_);
  }

  std::optional<std::vector<double>> score_actions(
      const GuidanceQuery& q) override {
    auto r = roundtrip(to_json(q));
    if (!r || !r->contains("policy") || !(*r)["policy"].is_array())
      return std::nullopt;
    std::vector<double> out;
    for (auto& v : (*r)["policy"]) {
      if (!v.is_number()) return std::nullopt;
      out.push_back(v.get<double>());
    }
    if (out.size() != q.candidates.size()) return std::nullopt;
    return out;
  }

  std::optional<double> estimate_value(const GuidanceQuery& q) override {
    auto r = roundtrip(to_json(q));
    if (!r || !r->contains("value") || !(*r)["value"].is_number())
      return std::nullopt;
    double v = (*r)["value"].get<double>();
    if (!std::isfinite(v) || v < 0) return std::nullopt;
    return v;
  }

 private:
  static json to_json(const GuidanceQuery& q) {
    return json{{"problem", q.problem},
                {"state_aux", q.state_aux},
                {"goal", q.goal},
                {"candidates", q.candidates}};
  }

  std::optional<json> roundtrip(const json& req) {
    if (broken_) return std::nullopt;
    std::string reply;
    if (endpoint_.rfind("exec:", 0) == 0) {
      if (!exec_roundtrip(req.dump(), &reply)) return degrade();
    } else {
      httplib::Client cli(endpoint_);
      cli.set_connection_timeout((time_t)timeout_, 0);
      cli.set_read_timeout((time_t)timeout_, 0);
      auto res = cli.Post("/guide", req.dump(), "application/json");
      if (!res || res->status != 200) return degrade();
      reply = res->body;
    }
    json parsed = json::parse(reply, nullptr, false);
    if (parsed.is_discarded()) return degrade();
    return parsed;
  }

  std::optional<json> degrade() {
    if (!warned_) {
      fprintf(stderr, "guidance endpoint unavailable, using heuristics\n");
      warned_ = true;
    }
    broken_ = true;
    return std::nullopt;
  }

  bool exec_roundtrip(const std::string& line, std::string* reply) {
    if (!to_child_ && !spawn()) return false;
    if (fprintf(to_child_, "%s\n", line.c_str()) < 0) return false;
    if (fflush(to_child_) != 0) return false;
    char buf[1 << 16];
    if (!fgets(buf, sizeof buf, from_child_)) return false;
    *reply = buf;
    return true;
  }

  bool spawn() {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) return false;
    pid_t pid = fork();
    if (pid < 0) return false;
    if (pid == 0) {
      dup2(in_pipe[0], 0);
      dup2(out_pipe[1], 1);
      close(in_pipe[0]);
      close(in_pipe[1]);
      close(out_pipe[0]);
      close(out_pipe[1]);
      execl("/bin/sh", "sh", "-c", endpoint_.c_str() + 5, (char*)nullptr);
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = fdopen(in_pipe[1], "w");
    from_child_ = fdopen(out_pipe[0], "r");
    return to_child_ && from_child_;
  }

  std::string endpoint_;
  double timeout_;
  bool broken_ = false, warned_ = false;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;
};

}  // namespace

std::unique_ptr<Guidance> remote_guidance(const std::string& endpoint,
                                          double timeout_seconds) {
  return std::make_unique<RemoteGuidance>(endpoint, timeout_seconds);
}

// ---- best-first search ----

namespace {

struct Node {
  std::shared_ptr<ConstructionSequence> seq;
  std::shared_ptr<Diagram> diagram;
  std::shared_ptr<Database> db;
  int depth = 0;
  double value = 0;
  std::vector<Statement> cands;  // sorted by policy, descending
  std::vector<double> policy;
  size_t cursor = 0;
  std::vector<std::string> aux_lines;
};

std::string fresh_name(const NameTable& names) {
  for (char c = 'Z'; c >= 'A'; --c) {
    std::string s(1, c);
    if (!names.find(s)) return s;
  }
  for (char c = 'z'; c >= 'a'; --c) {
    std::string s(1, c);
    if (!names.find(s)) return s;
  }
  for (int i = 1;; ++i) {
    std::string s = "P" + std::to_string(i);
    if (!names.find(s)) return s;
  }
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string l;
  while (std::getline(is, l))
    if (!l.empty()) out.push_back(l);
  return out;
}

}  // namespace

SolveReport best_first_solve(const ProblemSource& problem, Guidance* guidance,
                             const SearchConfig& cfg) {
  SolveReport rep;
  auto t0 = Clock::now();
  auto done = [&]() -> SolveReport& {
    rep.seconds = seconds_since(t0);
    return rep;
  };
  if (!problem.goal) {
    rep.message = "problem has no goal";
    return done();
  }
  const Fact goal = canonical(*problem.goal);
  std::string err;
  auto seq0 = elaborate(problem, &err);
  if (!seq0) {
    rep.message = err;
    return done();
  }
  ToleranceConfig tol;

  std::vector<std::string> problem_lines = split_lines(format_problem(problem));
  const size_t context_stmts = problem.stmts.size();

  std::vector<std::unique_ptr<Node>> nodes;
  auto finish = [&](Node& nd, FactId goal_id) {
    nd.db->improve_justifications();
    auto base = minimize(extract_proof(*nd.db, goal_id, context_stmts));
    auto trace = compress_trace(base, *nd.seq, *nd.diagram, tol);
    std::string text = format_trace(trace, nd.seq->src.names);
    auto verdict = check_proof(text, problem, tol);
    if (verdict.status != CheckStatus::Ok) {
      // Compression is validated step by step, but fall back to the raw
      // extraction if the full check still disagrees.
      trace = std::move(base);
      text = format_trace(trace, nd.seq->src.names);
      verdict = check_proof(text, problem, tol);
    }
    if (verdict.status != CheckStatus::Ok) {
      if (getenv("GS_DEBUG_SEARCH"))
        fprintf(stderr, "verification failure step %d: %s\n%s", verdict.step,
                verdict.message.c_str(), text.c_str());
      rep.message = "internal: produced trace failed verification: " +
                    verdict.message;
      return;
    }
    rep.solved = true;
    rep.trace = std::move(text);
    rep.aux_count = (int)trace.aux.size();
    rep.trace_len = (int)trace.steps.size();
  };

  // Root.
  {
    auto nd = std::make_unique<Node>();
    nd->seq = std::make_shared<ConstructionSequence>(std::move(*seq0));
    auto r = realize(*nd->seq, cfg.seed, tol);
    if (r.status != RealizeStatus::Ok) {
      rep.unrealizable = true;
      rep.message = "unrealizable problem: " + r.message;
      return done();
    }
    nd->diagram = std::make_shared<Diagram>(std::move(r.diagram));
    nd->db = std::make_shared<Database>(*nd->seq, *nd->diagram, tol);
    nd->db->seed();
    saturate(*nd->db, cfg.sat);
    rep.nodes = 1;
    if (auto id = nd->db->contains_goal(goal)) {
      finish(*nd, *id);
      return done();
    }
    nd->value = heuristic_value(*nd->db, goal);
    rep.best_value = nd->value;
    nodes.push_back(std::move(nd));
  }

  struct QEntry {
    double priority;
    uint64_t tick;
    int node;
    bool operator<(const QEntry& o) const {
      if (priority != o.priority) return priority < o.priority;
      return tick > o.tick;
    }
  };
  std::priority_queue<QEntry> open;
  uint64_t tick = 0;

  auto budget_ok = [&] {
    if (rep.nodes >= cfg.max_nodes) return false;
    if (seconds_since(t0) > cfg.wall_seconds) return false;
    return true;
  };

  auto guidance_query = [&](const Node& nd,
                            std::vector<std::string> cands) {
    GuidanceQuery q;
    q.problem = problem_lines;
    q.state_aux = nd.aux_lines;
    q.goal = format_fact(goal, problem.names);
    q.candidates = std::move(cands);
    return q;
  };

  // Materializes one child; returns its id or -1.
  auto materialize = [&](int parent, const Statement& st) -> int {
    Node& pn = *nodes[parent];
    auto child = std::make_unique<Node>();
    ProblemSource src = pn.seq->src;
    Statement st2 = st;
    st2.out = src.names.intern(fresh_name(src.names));
    src.stmts.push_back(st2);
    std::string e2;
    auto cs = elaborate(src, &e2);
    if (!cs) return -1;
    child->seq = std::make_shared<ConstructionSequence>(std::move(*cs));
    auto r = realize(*child->seq, cfg.seed, tol);
    if (r.status != RealizeStatus::Ok) return -1;
    child->diagram = std::make_shared<Diagram>(std::move(r.diagram));
    child->db = std::make_shared<Database>(*pn.db);
    child->db->rebind(*child->seq, *child->diagram);
    incremental_saturate(*child->db, pn.seq->src.stmts.size(), cfg.sat);
    child->depth = pn.depth + 1;
    child->aux_lines = pn.aux_lines;
    child->aux_lines.push_back(
        format_statement(st2, child->seq->src.names));
    ++rep.nodes;
    nodes.push_back(std::move(child));
    return (int)nodes.size() - 1;
  };

  // Pushes up to beam_width children of `id` from its candidate cursor.
  auto refill = [&](int id) -> std::optional<FactId> {
    int pushed = 0;
    while (pushed < cfg.beam_width) {
      if (!budget_ok()) {
        rep.truncated = true;
        return std::nullopt;
      }
      Node& nd = *nodes[id];
      if (nd.cursor >= nd.cands.size()) break;
      size_t i = nd.cursor++;
      Statement st = nd.cands[i];
      double pol = nd.policy[i];
      int cid = materialize(id, st);
      if (cid < 0) continue;
      Node& ch = *nodes[cid];
      if (auto gid = ch.db->contains_goal(goal)) return gid;
      double val = -1;
      if (guidance) {
        auto q = guidance_query(ch, {});
        if (auto v = guidance->estimate_value(q)) val = *v;
      }
      if (val < 0) val = heuristic_value(*ch.db, goal);
      ch.value = val;
      if (rep.best_value < 0 || val < rep.best_value) rep.best_value = val;
      open.push({pol - cfg.lambda * val, tick++, cid});
      ++pushed;
    }
    return std::nullopt;
  };

  auto expand = [&](int id) -> std::optional<FactId> {
    Node& nd = *nodes[id];
    if (getenv("GS_DEBUG_SEARCH")) {
      fprintf(stderr, "expand node=%d depth=%d value=%.1f aux=[", id, nd.depth,
              nd.value);
      for (auto& a : nd.aux_lines) fprintf(stderr, "%s; ", a.c_str());
      fprintf(stderr, "]\n");
    }
    if (nd.depth >= cfg.max_depth) return std::nullopt;
    nd.cands = candidate_actions(*nd.seq, *nd.diagram, &goal,
                                 cfg.per_kind_cap,
                                 cfg.seed + 0x9e3779b9u * (uint64_t)(id + 1),
                                 tol);
    nd.policy = heuristic_policy(*nd.db, goal, nd.cands, cfg.kind_priors);
    if (guidance && !nd.cands.empty()) {
      std::vector<std::string> lines;
      for (auto& st : nd.cands) {
        Statement tmp = st;
        tmp.out = kNoPt;
        std::string s = kind_info(st.kind)->name;
        s += "(";
        for (size_t i = 0; i < st.args.size(); ++i) {
          if (i) s += ", ";
          s += nd.seq->src.names.name(st.args[i]);
        }
        s += ")";
        lines.push_back(std::move(s));
      }
      auto q = guidance_query(nd, std::move(lines));
      if (auto sc = guidance->score_actions(q)) nd.policy = *sc;
    }
    std::vector<size_t> idx(nd.cands.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return nd.policy[a] > nd.policy[b];
    });
    std::vector<Statement> cs;
    std::vector<double> ps;
    for (size_t i : idx) {
      cs.push_back(nd.cands[i]);
      ps.push_back(nd.policy[i]);
    }
    nd.cands = std::move(cs);
    nd.policy = std::move(ps);
    nd.cursor = 0;
    return refill(id);
  };

  // Search. A goal hit during refill belongs to the child just made.
  auto hit = expand(0);
  if (hit) {
    finish(*nodes.back(), *hit);
    return done();
  }
  while (!rep.truncated) {
    if (open.empty()) {
      // Re-open the node whose next candidate looks best.
      int best = -1;
      double best_pol = 0;
      for (size_t i = 0; i < nodes.size(); ++i) {
        Node& nd = *nodes[i];
        if (nd.depth >= cfg.max_depth) continue;
        if (nd.cursor >= nd.cands.size()) continue;
        double pol = nd.policy[nd.cursor] - cfg.lambda * nd.value;
        if (best < 0 || pol > best_pol) {
          best = (int)i;
          best_pol = pol;
        }
      }
      if (best < 0) break;  // space exhausted
      auto gid = refill(best);
      if (gid) {
        finish(*nodes.back(), *gid);
        return done();
      }
      continue;
    }
    QEntry e = open.top();
    open.pop();
    auto gid = expand(e.node);
    if (gid) {
      finish(*nodes.back(), *gid);
      return done();
    }
  }
  if (!rep.message.empty()) return done();
  rep.message = rep.truncated ? "budget exhausted" : "search space exhausted";
  return done();
}

}  // namespace gs
