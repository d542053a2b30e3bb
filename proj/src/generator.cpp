#include "generator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gs {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t fnv64(const std::string& s, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(h);
}

std::string ascending_fresh(const NameTable& names) {
  for (char c = 'A'; c <= 'Z'; ++c) {
    std::string s(1, c);
    if (!names.find(s)) return s;
  }
  for (char c = 'a'; c <= 'z'; ++c) {
    std::string s(1, c);
    if (!names.find(s)) return s;
  }
  for (int i = 1;; ++i) {
    std::string s = "P" + std::to_string(i);
    if (!names.find(s)) return s;
  }
}

bool well_separated(const Coords& c, const std::vector<Coords>& at,
                    double min_sep) {
  for (const Coords& p : at) {
    double dx = c.x - p.x, dy = c.y - p.y;
    if (dx * dx + dy * dy < min_sep * min_sep) return false;
  }
  return true;
}

// Canonical serialization of statements (+ optional goal): minimum over
// free-point orders, constructed points named by greedy least-key
// placement. Invariant under relabeling and reordering of independent
// statements.
std::string canonical_serial(const ProblemSource& src, bool with_goal) {
  const size_t n = src.names.size();
  std::vector<Pt> frees = src.free_pts;
  std::sort(frees.begin(), frees.end());
  std::string best;
  bool have = false;
  // Beyond 6 free points factorial enumeration is wasteful; a single
  // order still dedups exact duplicates.
  int perms = 0;
  do {
    std::vector<int> newid(n, -1);
    for (size_t i = 0; i < frees.size(); ++i) newid[frees[i]] = (int)i;
    int next = (int)frees.size();
    std::vector<bool> placed(src.stmts.size(), false);
    std::string serial = "f" + std::to_string(frees.size()) + ";";
    for (size_t round = 0; round < src.stmts.size(); ++round) {
      int best_i = -1;
      std::string best_key;
      for (size_t i = 0; i < src.stmts.size(); ++i) {
        if (placed[i]) continue;
        const Statement& st = src.stmts[i];
        bool ready = true;
        std::vector<Pt> margs;
        for (Pt a : st.args) {
          if (newid[a] < 0) {
            ready = false;
            break;
          }
          margs.push_back((Pt)newid[a]);
        }
        if (!ready) continue;
        margs = canonical_args(st.kind, std::move(margs));
        std::string key = kind_info(st.kind)->name;
        key += '(';
        for (Pt a : margs) {
          key += std::to_string(a);
          key += ',';
        }
        key += ')';
        if (best_i < 0 || key < best_key) {
          best_i = (int)i;
          best_key = std::move(key);
        }
      }
      if (best_i < 0) break;  // malformed; closure guarantees progress
      placed[best_i] = true;
      newid[src.stmts[best_i].out] = next++;
      serial += best_key;
      serial += ';';
    }
    if (with_goal && src.goal) {
      Fact g = *src.goal;
      for (Pt& p : g.pts)
        if (p != kNoPt) p = (Pt)newid[p];
      g = canonical(g);
      serial += "goal:";
      serial += pred_name(g.pred);
      serial += g.inverse ? "~" : "";
      for (Pt p : g.pts) {
        serial += ',';
        serial += p == kNoPt ? std::string("-") : std::to_string(p);
      }
    }
    if (!have || serial < best) {
      best = std::move(serial);
      have = true;
    }
    if (++perms >= 720) break;
  } while (std::next_permutation(frees.begin(), frees.end()));
  return best;
}

std::string cycle_notation(const std::vector<Pt>& perm,
                           const NameTable& names) {
  std::string out;
  std::vector<bool> seen(perm.size(), false);
  for (size_t i = 0; i < perm.size(); ++i) {
    if (seen[i] || perm[i] == (Pt)i) continue;
    out += '(';
    size_t j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      if (!first) out += ' ';
      out += names.name((Pt)j);
      first = false;
      j = perm[j];
    }
    out += ')';
  }
  return out;
}

}  // namespace

GuidingStats default_stats() {
  GuidingStats s;
  for (const KindInfo& ki : catalog()) {
    if (ki.kind == Kind::FreePoint) continue;
    s.weights[ki.kind] = 1.0;
  }
  return s;
}

std::optional<GuidingStats> parse_stats(const std::string& text,
                                        std::string* err, int* err_line) {
  GuidingStats s;
  s.weights.clear();
  std::istringstream is(text);
  std::string line;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    std::istringstream ls(line);
    std::string kind;
    double w;
    if (!(ls >> kind)) continue;
    if (kind[0] == '#') continue;
    const KindInfo* ki = kind_by_name(kind);
    if (!ki || ki->kind == Kind::FreePoint || !(ls >> w) || w < 0 ||
        !std::isfinite(w)) {
      if (err) *err = "bad weights line: " + line;
      if (err_line) *err_line = ln;
      return std::nullopt;
    }
    s.weights[ki->kind] = w;
  }
  double total = 0;
  for (auto& [k, w] : s.weights) total += w;
  if (total <= 0) {
    if (err) *err = "no positive weight";
    if (err_line) *err_line = ln;
    return std::nullopt;
  }
  return s;
}

std::vector<std::string> ProblemTriplet::context_lines() const {
  std::vector<std::string> out;
  std::string frees = "free";
  for (Pt p : ext.free_pts) frees += " " + ext.names.name(p);
  out.push_back(std::move(frees));
  for (size_t i = 0; i < context_stmts; ++i)
    out.push_back(format_statement(ext.stmts[i], ext.names));
  return out;
}

std::vector<std::string> ProblemTriplet::aux_lines() const {
  std::vector<std::string> out;
  for (size_t i = context_stmts; i < ext.stmts.size(); ++i)
    out.push_back(format_statement(ext.stmts[i], ext.names));
  return out;
}

std::optional<Statement> walk_step(ProblemSource& src,
                                   std::vector<Coords>& at,
                                   const GuidingStats& stats, Rng& rng,
                                   const ToleranceConfig& tol) {
  double total = 0;
  for (auto& [k, w] : stats.weights) total += w;
  if (total <= 0) return std::nullopt;
  double pick = rng.uniform(0, total);
  Kind kind = stats.weights.begin()->first;
  for (auto& [k, w] : stats.weights) {
    kind = k;
    pick -= w;
    if (pick <= 0) break;
  }
  const KindInfo* ki = kind_info(kind);
  const size_t n = src.names.size();
  if ((int)n < ki->arity) return std::nullopt;
  for (int attempt = 0; attempt < tol.resample_limit; ++attempt) {
    Statement st;
    st.kind = kind;
    for (int i = 0; i < ki->arity; ++i) {
      Pt p;
      int guard = 0;
      do {
        p = (Pt)(rng.next() % n);
      } while (std::count(st.args.begin(), st.args.end(), p) &&
               ++guard < 16);
      st.args.push_back(p);
    }
    st.args = canonical_args(kind, std::move(st.args));
    // Skip exact duplicates of an existing construction.
    bool dup = false;
    for (const Statement& prev : src.stmts)
      if (prev.kind == st.kind && prev.args == st.args) dup = true;
    if (dup) continue;
    Rng r2(rng.next());
    auto c = realize_statement(at, st, &r2, tol);
    if (!c || !std::isfinite(c->x) || !std::isfinite(c->y)) continue;
    if (std::abs(c->x) > 1e6 || std::abs(c->y) > 1e6) continue;
    if (!well_separated(*c, at, tol.separation_min)) continue;
    st.out = src.names.intern(ascending_fresh(src.names));
    src.stmts.push_back(st);
    at.push_back(*c);
    return st;
  }
  return std::nullopt;
}

std::vector<GoalCandidate> mine_goals(Database& db,
                                      const ConstructionSequence& seq,
                                      int min_trace_len, int verify_k) {
  std::vector<GoalCandidate> out;
  const size_t nf = db.size();
  // Dependency-closure mask of every fact's proof, memoized over the
  // justification DAG (premise ids precede the fact's id).
  std::vector<PtMask> pmask(nf, 0);
  auto fact_mask = [&](const Fact& f) {
    PtMask m = 0;
    for (Pt p : f.pts)
      if (p != kNoPt && p < seq.closure.size()) m |= seq.closure[p];
    return m;
  };
  for (size_t i = 0; i < nf; ++i) {
    const FactRec& r = db.rec((FactId)i);
    PtMask m = fact_mask(r.fact);
    for (FactId pr : r.premises)
      if (pr >= 0 && (size_t)pr < i) m |= pmask[pr];
    pmask[i] = m;
  }
  for (size_t i = 0; i < nf; ++i) {
    const FactRec& r = db.rec((FactId)i);
    if (r.level == 0) continue;
    PtMask goal_m = fact_mask(r.fact);
    if ((pmask[i] & ~goal_m) == 0) continue;  // no outside point needed
    ProofTrace t = minimize(extract_proof(db, (FactId)i));
    if ((int)t.steps.size() < min_trace_len) continue;
    if (!verify_fact(seq, r.fact, verify_k, 777001, db.tol())) continue;
    out.push_back({(FactId)i, r.fact});
  }
  return out;
}

std::optional<ProblemTriplet> backward_trace(const ConstructionSequence& seq,
                                             Database& db, FactId goal_id,
                                             const SaturateLimits& lim,
                                             const ToleranceConfig& tol,
                                             ProofTrace* trace_out) {
  const ProblemSource& src = seq.src;
  const Fact goal = db.rec(goal_id).fact;
  PtMask goal_m = 0;
  for (Pt p : goal.pts)
    if (p != kNoPt && p < seq.closure.size()) goal_m |= seq.closure[p];

  ProofTrace proof = minimize(extract_proof(db, goal_id));
  PtMask used = goal_m;
  auto add_fact = [&](const Fact& f) {
    for (Pt p : f.pts)
      if (p != kNoPt && p < seq.closure.size()) used |= seq.closure[p];
  };
  for (const ProofStep& s : proof.steps) {
    add_fact(s.conclusion);
    for (auto& [pf, k] : s.premises) add_fact(pf);
  }

  // Free points must all sit inside the context; an extra free point
  // cannot be presented as an auxiliary construction.
  for (Pt p : src.free_pts)
    if ((used >> p) & 1 && !((goal_m >> p) & 1)) return std::nullopt;

  std::vector<size_t> ctx_idx, aux_idx;
  for (size_t i = 0; i < src.stmts.size(); ++i) {
    Pt o = src.stmts[i].out;
    if ((goal_m >> o) & 1)
      ctx_idx.push_back(i);
    else if ((used >> o) & 1)
      aux_idx.push_back(i);
  }
  if (aux_idx.empty()) return std::nullopt;  // VacuousAux

  ProblemTriplet t;
  t.context_stmts = ctx_idx.size();
  std::vector<int> remap(src.names.size(), -1);
  auto place = [&](Pt old) {
    if (remap[old] < 0)
      remap[old] = (int)t.ext.names.intern(src.names.name(old));
  };
  for (Pt p : src.free_pts)
    if ((goal_m >> p) & 1) {
      place(p);
      t.ext.free_pts.push_back((Pt)remap[p]);
    }
  auto push_stmt = [&](size_t i) {
    Statement st = src.stmts[i];
    for (Pt& a : st.args) a = (Pt)remap[a];
    place(st.out);
    st.out = (Pt)remap[st.out];
    t.ext.stmts.push_back(std::move(st));
  };
  for (size_t i : ctx_idx) push_stmt(i);
  for (size_t i : aux_idx) push_stmt(i);
  Fact g = goal;
  for (Pt& p : g.pts)
    if (p != kNoPt) p = (Pt)remap[p];
  t.ext.goal = g;

  // Re-check 1: context alone must not reach the goal.
  {
    ProblemSource ctx = t.ext;
    ctx.stmts.resize(t.context_stmts);
    std::string err;
    auto cs = elaborate(ctx, &err);
    if (!cs) return std::nullopt;
    auto r = realize(*cs, 12345, tol);
    if (r.status != RealizeStatus::Ok) return std::nullopt;
    Database cdb(*cs, r.diagram, tol);
    cdb.seed();
    saturate(cdb, lim);
    if (cdb.contains_goal(g)) return std::nullopt;
  }
  // Re-check 2: context plus auxiliaries must reach it.
  {
    std::string err;
    auto cs = elaborate(t.ext, &err);
    if (!cs) return std::nullopt;
    auto r = realize(*cs, 12345, tol);
    if (r.status != RealizeStatus::Ok) return std::nullopt;
    Database edb(*cs, r.diagram, tol);
    edb.seed();
    saturate(edb, lim);
    auto id = edb.contains_goal(g);
    if (!id) return std::nullopt;
    ProofTrace tr =
        minimize(extract_proof(edb, *id, t.context_stmts));
    t.trace_len = (int)tr.steps.size();
    t.trace_text = format_trace(tr, t.ext.names);
    if (trace_out) *trace_out = std::move(tr);
  }
  return t;
}

std::vector<std::vector<Pt>> detect_symmetry(const ProblemTriplet& t) {
  const ProblemSource& src = t.ext;
  const size_t n = src.names.size();
  if (n > 16) return {};
  std::vector<bool> is_free(n, false);
  for (Pt p : src.free_pts) is_free[p] = true;
  std::vector<int> kind_of(n, -1);  // defining kind per constructed point
  std::map<std::pair<int, std::vector<Pt>>, Pt> stmt_map;
  for (const Statement& st : src.stmts) {
    kind_of[st.out] = (int)st.kind;
    stmt_map[{(int)st.kind, canonical_args(st.kind, st.args)}] = st.out;
  }
  // Statements checkable once every involved point has an image.
  std::vector<int> max_pt(src.stmts.size());
  for (size_t i = 0; i < src.stmts.size(); ++i) {
    int m = src.stmts[i].out;
    for (Pt a : src.stmts[i].args) m = std::max(m, (int)a);
    max_pt[i] = m;
  }
  std::vector<std::vector<Pt>> found;
  std::vector<Pt> perm(n, kNoPt);
  std::vector<bool> taken(n, false);
  std::function<void(size_t)> rec = [&](size_t p) {
    if (found.size() >= 256) return;
    if (p == n) {
      Fact g = *src.goal;
      for (Pt& q : g.pts)
        if (q != kNoPt) q = perm[q];
      if (canonical(g) != canonical(*src.goal)) return;
      bool ident = true;
      for (size_t i = 0; i < n; ++i)
        if (perm[i] != (Pt)i) ident = false;
      if (!ident) found.push_back(perm);
      return;
    }
    for (size_t img = 0; img < n; ++img) {
      if (taken[img]) continue;
      if (is_free[p] != is_free[img]) continue;
      if (!is_free[p] && kind_of[p] != kind_of[img]) continue;
      perm[p] = (Pt)img;
      taken[img] = true;
      bool ok = true;
      for (size_t i = 0; i < src.stmts.size() && ok; ++i) {
        if (max_pt[i] != (int)p) continue;
        const Statement& st = src.stmts[i];
        std::vector<Pt> margs = st.args;
        for (Pt& a : margs) a = perm[a];
        auto it = stmt_map.find(
            {(int)st.kind, canonical_args(st.kind, std::move(margs))});
        if (it == stmt_map.end() || it->second != perm[st.out]) ok = false;
      }
      if (ok) rec(p + 1);
      taken[img] = false;
      perm[p] = kNoPt;
    }
  };
  rec(0);
  return found;
}

void canonical_hash(const ProblemTriplet& t, uint64_t* hi, uint64_t* lo) {
  std::string s = canonical_serial(t.ext, true);
  *lo = fnv64(s, 0xcbf29ce484222325ull);
  *hi = fnv64(s, 0xcbf29ce484222325ull ^ 0x9e3779b97f4a7c15ull);
}

double score_triplet(const ProblemTriplet& t, const ProofTrace& trace,
                     const ScoreWeights& w) {
  std::set<std::string> rules;
  for (const ProofStep& s : trace.steps) rules.insert(s.rule);
  double aux = (double)(t.ext.stmts.size() - t.context_stmts);
  return w.w_trace * (double)trace.steps.size() + w.w_aux * aux +
         w.w_rules * (double)rules.size() +
         w.w_symmetric * (t.symmetric ? 1.0 : 0.0);
}

void ReplayBuffer::push(ReplayEntry e) {
  if (entries_.size() < cap_) {
    entries_.push_back(std::move(e));
    return;
  }
  size_t worst = 0;
  for (size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].yield_score < entries_[worst].yield_score) worst = i;
  if (e.yield_score > entries_[worst].yield_score)
    entries_[worst] = std::move(e);
}

std::optional<ProblemSource> ReplayBuffer::sample(double epsilon, Rng& rng) {
  if (entries_.empty()) {
    rng.next();
    return std::nullopt;
  }
  if (rng.uniform(0, 1) >= epsilon) return std::nullopt;
  double total = 0;
  for (const ReplayEntry& e : entries_) total += e.yield_score;
  if (total <= 0) return entries_[rng.next() % entries_.size()].sequence;
  double pick = rng.uniform(0, total);
  for (ReplayEntry& e : entries_) {
    pick -= e.yield_score;
    if (pick <= 0) {
      ++e.visits;
      return e.sequence;
    }
  }
  return entries_.back().sequence;
}

std::string triplet_json(const ProblemTriplet& t) {
  nlohmann::ordered_json j;
  j["context"] = t.context_lines();
  j["goal"] = format_fact(*t.ext.goal, t.ext.names);
  j["aux"] = t.aux_lines();
  j["trace_len"] = t.trace_len;
  j["symmetric"] = t.symmetric;
  std::vector<std::string> autos;
  for (const auto& p : t.automorphisms)
    autos.push_back(cycle_notation(p, t.ext.names));
  j["automorphisms"] = autos;
  char buf[36];
  snprintf(buf, sizeof buf, "%016llx%016llx", (unsigned long long)t.hash_hi,
           (unsigned long long)t.hash_lo);
  j["hash"] = buf;
  j["score"] = t.score;
  return j.dump();
}

GenerateMetrics generate(
    const GenerateConfig& cfg,
    const std::function<void(const ProblemTriplet&, const std::string&)>& sink,
    const std::function<void(const std::string&)>& metrics_line) {
  GenerateMetrics m;
  Rng rng(cfg.seed);
  ReplayBuffer buffer(cfg.buffer_cap);
  std::set<std::pair<uint64_t, uint64_t>> seen_triplets, seen_paths,
      seen_configs;
  auto t0 = std::chrono::steady_clock::now();

  auto hash_src = [&](const ProblemSource& src, bool with_goal) {
    std::string s = canonical_serial(src, with_goal);
    return std::make_pair(
        fnv64(s, 0xcbf29ce484222325ull ^ 0x9e3779b97f4a7c15ull),
        fnv64(s, 0xcbf29ce484222325ull));
  };

  auto emit_metrics = [&] {
    if (!metrics_line) return;
    char buf[256];
    snprintf(buf, sizeof buf,
             "paths=%ld unique_paths=%ld goals=%ld triplets=%ld "
             "duplicates=%ld configs=%ld configs_per_path=%.4f",
             m.paths, m.unique_paths, m.goals_mined, m.triplets,
             m.duplicate_hits, m.configurations, m.configs_per_path());
    metrics_line(buf);
  };

  while (true) {
    if (cfg.max_paths >= 0 && m.paths >= cfg.max_paths) break;
    if (cfg.max_triplets >= 0 && m.triplets >= cfg.max_triplets) break;
    if (cfg.wall_seconds >= 0 && seconds_since(t0) > cfg.wall_seconds) break;

    // Start a walk: resume a buffered state with probability epsilon.
    ProblemSource src;
    std::vector<Coords> at;
    bool ready = false;
    if (auto resumed = buffer.sample(cfg.epsilon, rng)) {
      std::string err;
      if (auto cs = elaborate(*resumed, &err)) {
        auto r = realize(*cs, rng.next(), cfg.tol);
        if (r.status == RealizeStatus::Ok) {
          src = std::move(*resumed);
          at = std::move(r.diagram.at);
          ready = true;
        }
      }
    }
    if (!ready) {
      for (const char* nm : {"A", "B", "C"})
        src.free_pts.push_back(src.names.intern(nm));
      for (int guard = 0; (int)at.size() < 3 && guard < 1000; ++guard) {
        Coords c{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (well_separated(c, at, cfg.tol.separation_min * 10))
          at.push_back(c);
      }
      if (at.size() < 3) break;
    }

    int span = std::max(1, cfg.stats.walk_max - cfg.stats.walk_min + 1);
    int len = cfg.stats.walk_min + (int)(rng.next() % (uint64_t)span);
    for (int i = 0; i < len; ++i) {
      bool stepped = false;
      for (int k = 0; k < 4 && !stepped; ++k)
        stepped = walk_step(src, at, cfg.stats, rng, cfg.tol).has_value();
      if (!stepped) break;
    }
    ++m.paths;
    if (seen_paths.insert(hash_src(src, false)).second) ++m.unique_paths;
    if (src.stmts.empty()) continue;

    std::string err;
    auto seq = elaborate(src, &err);
    if (!seq) continue;
    Diagram d;
    d.at = at;
    d.seed = cfg.seed;
    Database db(*seq, d, cfg.tol);
    db.seed();
    saturate(db, cfg.sat);
    db.improve_justifications();

    long level0 = 0;
    for (size_t i = 0; i < db.size(); ++i)
      if (db.rec((FactId)i).level == 0) ++level0;
    ReplayEntry re;
    re.sequence = src;
    re.yield_score =
        (double)((long)db.size() - level0) / (double)src.stmts.size();
    buffer.push(std::move(re));

    auto goals = mine_goals(db, *seq, cfg.min_trace_len, cfg.verify_k);
    int processed = 0;
    for (const GoalCandidate& gc : goals) {
      if (processed >= 8) break;
      ++m.goals_mined;
      ProofTrace tr;
      auto t = backward_trace(*seq, db, gc.id, cfg.sat, cfg.tol, &tr);
      if (!t) continue;
      ++processed;
      canonical_hash(*t, &t->hash_hi, &t->hash_lo);
      if (!seen_triplets.insert({t->hash_hi, t->hash_lo}).second) {
        ++m.duplicate_hits;
        continue;
      }
      if (seen_configs.insert(hash_src(t->ext, false)).second)
        ++m.configurations;
      t->automorphisms = detect_symmetry(*t);
      t->symmetric = !t->automorphisms.empty();
      t->score = score_triplet(*t, tr, {});
      ++m.triplets;
      sink(*t, triplet_json(*t));
      if (cfg.max_triplets >= 0 && m.triplets >= cfg.max_triplets) break;
    }
    if (cfg.metrics_every > 0 && m.paths % cfg.metrics_every == 0)
      emit_metrics();
  }
  emit_metrics();
  return m;
}

}  // namespace gs
