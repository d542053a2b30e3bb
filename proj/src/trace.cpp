#include "trace.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gs {

ProofTrace extract_proof(const Database& db, FactId goal_id, size_t aux_from) {
  ProofTrace t;
  const auto& stmts = db.seq().src.stmts;
  for (size_t i = aux_from; i < stmts.size(); ++i) t.aux.push_back(stmts[i]);

  // Post-order DFS over justifications; level-0 facts stay leaves.
  std::unordered_map<FactId, int> step_of;  // 1-based
  std::vector<FactId> order;
  std::unordered_set<FactId> open, done;
  std::vector<std::pair<FactId, size_t>> stack{{goal_id, 0}};
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const FactRec& r = db.rec(id);
    if (r.level == 0) {
      done.insert(id);
      stack.pop_back();
      continue;
    }
    if (next == 0) {
      if (done.count(id)) {
        stack.pop_back();
        continue;
      }
      open.insert(id);
    }
    if (next < r.premises.size()) {
      FactId p = r.premises[next++];
      if (!done.count(p) && !open.count(p)) stack.emplace_back(p, 0);
    } else {
      open.erase(id);
      done.insert(id);
      order.push_back(id);
      stack.pop_back();
    }
  }
  // A construction-emitted goal has no derivation; restate it as one
  // step whose only premise is the emitted fact itself.
  if (order.empty()) {
    ProofStep s;
    s.conclusion = db.rec(goal_id).fact;
    s.rule = db.rec(goal_id).rule;
    if (db.seq().src.goal) {
      Fact g = *db.seq().src.goal;
      g.inverse = s.conclusion.inverse;
      if (canonical(g) == s.conclusion) s.conclusion = g;
    }
    s.premises.emplace_back(s.conclusion, 0);
    t.steps.push_back(std::move(s));
    return t;
  }
  for (size_t i = 0; i < order.size(); ++i) step_of[order[i]] = (int)i + 1;
  for (FactId id : order) {
    const FactRec& r = db.rec(id);
    ProofStep s;
    s.conclusion = r.fact;
    s.rule = r.rule;
    for (FactId p : r.premises) {
      const FactRec& pr = db.rec(p);
      s.premises.emplace_back(pr.fact, pr.level == 0 ? 0 : step_of.at(p));
    }
    t.steps.push_back(std::move(s));
  }
  // Print the final conclusion in the stated goal's argument order.
  if (!t.steps.empty() && db.seq().src.goal) {
    Fact g = *db.seq().src.goal;
    g.inverse = t.steps.back().conclusion.inverse;
    if (canonical(g) == t.steps.back().conclusion) t.steps.back().conclusion = g;
  }
  return t;
}

ProofTrace minimize(const ProofTrace& t) {
  if (t.steps.empty()) return t;
  int n = (int)t.steps.size();
  std::vector<bool> keep(n + 1, false);
  keep[n] = true;
  for (int i = n; i >= 1; --i) {
    if (!keep[i]) continue;
    for (auto& [f, k] : t.steps[i - 1].premises)
      if (k > 0) keep[k] = true;
  }
  std::vector<int> renum(n + 1, 0);
  ProofTrace out;
  out.aux = t.aux;
  for (int i = 1; i <= n; ++i) {
    if (!keep[i]) continue;
    renum[i] = (int)out.steps.size() + 1;
    ProofStep s = t.steps[i - 1];
    for (auto& [f, k] : s.premises)
      if (k > 0) k = renum[k];
    out.steps.push_back(std::move(s));
  }
  return out;
}

namespace {

// Mirrors the checker's per-step test: the conclusion must follow from
// exactly the stated premises within a bounded saturation.
bool step_derivable(const ConstructionSequence& seq, const Diagram& diagram,
                    const ToleranceConfig& tol, const ProofStep& s) {
  Database db(seq, diagram, tol);
  for (const auto& [pf, k] : s.premises) db.insert(pf, "construction", {});
  if (db.contains_goal(s.conclusion)) return true;
  SaturateLimits lim;
  lim.max_facts = 20000;
  lim.max_rounds = 3;
  lim.wall_seconds = 10.0;
  saturate(db, lim);
  return db.contains_goal(s.conclusion).has_value();
}

// Tries to drop interior steps by splicing their premises into every
// dependent; a deletion commits only when all dependents stay derivable
// from the widened premise lists.
ProofTrace inline_compress(ProofTrace t, const ConstructionSequence& seq,
                           const Diagram& diagram, const ToleranceConfig& tol,
                           double wall_seconds) {
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration<double>(wall_seconds);
  bool changed = true;
  while (changed) {
    changed = false;
    int n = (int)t.steps.size();
    for (int k = n - 1; k >= 1 && !changed; --k) {
      if (std::chrono::steady_clock::now() > deadline) return t;
      const ProofStep& victim = t.steps[k - 1];
      std::vector<int> deps;
      for (int d = k + 1; d <= n; ++d)
        for (const auto& [pf, r] : t.steps[d - 1].premises)
          if (r == k) {
            deps.push_back(d);
            break;
          }
      if (deps.empty()) continue;
      std::vector<ProofStep> patched;
      bool ok = true;
      for (int d : deps) {
        ProofStep s = t.steps[d - 1];
        std::vector<std::pair<Fact, int>> prem;
        for (const auto& [pf, r] : s.premises) {
          if (r == k) {
            for (const auto& vp : victim.premises) prem.push_back(vp);
          } else {
            prem.emplace_back(pf, r);
          }
        }
        std::sort(prem.begin(), prem.end(),
                  [](const auto& a, const auto& b) {
                    return a.second != b.second ? a.second < b.second
                                                : FactHash{}(a.first) <
                                                      FactHash{}(b.first);
                  });
        prem.erase(std::unique(prem.begin(), prem.end()), prem.end());
        if (prem.size() > 16) {
          ok = false;
          break;
        }
        s.premises = std::move(prem);
        if (!step_derivable(seq, diagram, tol, s)) {
          ok = false;
          break;
        }
        patched.push_back(std::move(s));
      }
      if (!ok) continue;
      for (size_t i = 0; i < deps.size(); ++i)
        t.steps[deps[i] - 1] = std::move(patched[i]);
      t = minimize(t);  // step k is now unreferenced
      changed = true;
    }
  }
  return t;
}

}  // namespace

ProofTrace compress_trace(ProofTrace t, const ConstructionSequence& seq,
                          const Diagram& diagram, const ToleranceConfig& tol) {
  auto distinct_refs = [](const std::vector<std::pair<Fact, int>>& prem) {
    std::unordered_set<int> s;
    for (auto& [f, k] : prem)
      if (k > 0) s.insert(k);
    return s.size();
  };
  for (int iter = 0; iter < 5; ++iter) {
    Database db(seq, diagram, tol);
    db.seed();
    bool changed = false;
    for (size_t j = 0; j < t.steps.size(); ++j) {
      ProofStep& s = t.steps[j];
      auto jj = db.implied(s.conclusion);
      if (jj) {
        std::vector<std::pair<Fact, int>> prem;
        bool ok = true;
        for (FactId pid : *jj) {
          const FactRec& pr = db.rec(pid);
          int k = 0;
          if (pr.level != 0) {
            // rule tag stores the 1-based step index during replay
            k = std::stoi(pr.rule);
            if (k <= 0 || k > (int)j) ok = false;
          }
          prem.emplace_back(pr.fact, k);
        }
        if (ok && !prem.empty() &&
            (distinct_refs(prem) < distinct_refs(s.premises) ||
             (distinct_refs(prem) == distinct_refs(s.premises) &&
              prem.size() < s.premises.size()))) {
          s.premises = std::move(prem);
          changed = true;
        }
      }
      db.insert(s.conclusion, std::to_string(j + 1), {});
    }
    ProofTrace m = minimize(t);
    if (m.steps.size() < t.steps.size()) changed = true;
    t = std::move(m);
    if (!changed) break;
  }
  if (t.steps.size() > 4)
    t = inline_compress(std::move(t), seq, diagram, tol, 120.0);
  return t;
}

std::string format_trace(const ProofTrace& t, const NameTable& names) {
  std::string out;
  for (const Statement& st : t.aux) {
    out += format_statement(st, names);
    out += '\n';
  }
  for (size_t i = 0; i < t.steps.size(); ++i) {
    const ProofStep& s = t.steps[i];
    out += '[' + std::to_string(i + 1) + "] " + format_fact(s.conclusion, names);
    out += " because ";
    for (size_t j = 0; j < s.premises.size(); ++j) {
      if (j) out += ", ";
      out += format_fact(s.premises[j].first, names);
      out += '[' + std::to_string(s.premises[j].second) + ']';
    }
    out += '\n';
  }
  return out;
}

namespace {

// `pred (ARGS)` starting at text[pos]; advances pos past the ')'.
std::optional<Fact> scan_fact(const std::string& text, size_t& pos,
                              const NameTable& names, std::string* err) {
  size_t open = text.find(" (", pos);
  if (open == std::string::npos) {
    if (err) *err = "expected 'pred (...)'";
    return std::nullopt;
  }
  auto pred = pred_from_name(text.substr(pos, open - pos));
  if (!pred) {
    if (err) *err = "unknown predicate '" + text.substr(pos, open - pos) + "'";
    return std::nullopt;
  }
  size_t close = text.find(')', open);
  if (close == std::string::npos) {
    if (err) *err = "missing ')'";
    return std::nullopt;
  }
  auto f = parse_fact_args(*pred, text.substr(open + 2, close - open - 2),
                           names, err);
  pos = close + 1;
  return f;
}

bool parse_aux_line(const std::string& line, NameTable& names, Statement* st,
                    std::string* err) {
  size_t eq = line.find('=');
  size_t open = line.find('(');
  size_t close = line.rfind(')');
  if (eq == std::string::npos || open == std::string::npos ||
      close == std::string::npos || open < eq || close < open) {
    *err = "bad construction line";
    return false;
  }
  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string out_name = trim(line.substr(0, eq));
  std::string kind_name = trim(line.substr(eq + 1, open - eq - 1));
  const KindInfo* ki = kind_by_name(kind_name);
  if (!ki) {
    *err = "unknown construction '" + kind_name + "'";
    return false;
  }
  st->kind = ki->kind;
  std::string args = line.substr(open + 1, close - open - 1);
  std::istringstream is(args);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    auto p = names.find(tok);
    if (!p) {
      *err = "undefined point '" + tok + "'";
      return false;
    }
    st->args.push_back(*p);
  }
  if ((int)st->args.size() != ki->arity) {
    *err = std::string("arity mismatch for ") + ki->name;
    return false;
  }
  if (out_name.empty() || names.find(out_name)) {
    *err = "bad output point '" + out_name + "'";
    return false;
  }
  st->out = names.intern(out_name);
  return true;
}

}  // namespace

std::optional<ProofTrace> parse_trace(const std::string& text,
                                      const ProblemSource& base,
                                      ProblemSource* extended,
                                      std::string* err) {
  ProblemSource ext = base;
  ProofTrace t;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  bool saw_step = false;
  auto fail = [&](const std::string& msg) {
    if (err) *err = "line " + std::to_string(line_no) + ": " + msg;
    return std::nullopt;
  };
  while (std::getline(is, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    if (line[0] != '[') {
      if (saw_step) return fail("construction line after steps");
      Statement st;
      std::string e;
      if (!parse_aux_line(line, ext.names, &st, &e)) return fail(e);
      ext.stmts.push_back(st);
      t.aux.push_back(st);
      continue;
    }
    saw_step = true;
    size_t close = line.find(']');
    if (close == std::string::npos) return fail("missing ']'");
    int n = 0;
    try {
      n = std::stoi(line.substr(1, close - 1));
    } catch (...) {
      return fail("bad step number");
    }
    size_t pos = close + 2;
    if (pos >= line.size()) return fail("missing conclusion");
    std::string e;
    auto concl = scan_fact(line, pos, ext.names, &e);
    if (!concl) return fail(e);
    ProofStep s;
    s.conclusion = canonical(*concl);
    const std::string kBecause = " because ";
    if (line.compare(pos, kBecause.size(), kBecause) != 0)
      return fail("expected 'because'");
    pos += kBecause.size();
    while (pos < line.size()) {
      auto prem = scan_fact(line, pos, ext.names, &e);
      if (!prem) return fail(e);
      if (pos >= line.size() || line[pos] != '[') return fail("missing '[k]'");
      size_t kend = line.find(']', pos);
      if (kend == std::string::npos) return fail("missing ']'");
      int k = 0;
      try {
        k = std::stoi(line.substr(pos + 1, kend - pos - 1));
      } catch (...) {
        return fail("bad premise index");
      }
      s.premises.emplace_back(canonical(*prem), k);
      pos = kend + 1;
      if (pos < line.size()) {
        if (line.compare(pos, 2, ", ") != 0) return fail("expected ', '");
        pos += 2;
      }
    }
    if (s.premises.empty()) return fail("step has no premises");
    if (n != (int)t.steps.size() + 1) {
      // Sequencing errors surface as invalid, not parse failure; keep the
      // declared numbering so the checker can point at it.
      (void)n;
    }
    t.steps.push_back(std::move(s));
  }
  if (!saw_step && t.aux.empty()) return fail("empty trace");
  if (extended) *extended = std::move(ext);
  return t;
}

CheckResult check_proof(const std::string& trace_text,
                        const ProblemSource& problem,
                        const ToleranceConfig& tol) {
  std::string err;
  ProblemSource ext;
  auto t = parse_trace(trace_text, problem, &ext, &err);
  if (!t) return {CheckStatus::ParseFail, 0, err};
  if (!problem.goal) return {CheckStatus::ParseFail, 0, "problem has no goal"};
  auto seq = elaborate(ext, &err);
  if (!seq) return {CheckStatus::ParseFail, 0, err};

  std::unordered_set<Fact, FactHash> level0;
  for (const Statement& st : ext.stmts)
    for (const Fact& f : emitted_facts(st)) level0.insert(f);

  Fact goal = canonical(*problem.goal);
  if (t->steps.empty()) {
    if (level0.count(goal)) return {};
    return {CheckStatus::Invalid, 0, "goal is not construction-emitted"};
  }

  std::vector<Diagram> diagrams;
  for (int i = 0; i < 3 && diagrams.size() < 3; ++i) {
    auto r = realize(*seq, 12345 + (uint64_t)i * 7919, tol);
    if (r.status == RealizeStatus::Ok) diagrams.push_back(std::move(r.diagram));
  }
  if (diagrams.empty())
    return {CheckStatus::Invalid, 0, "problem could not be realized"};

  // Similarity orientation is not serialized; infer it from the diagram.
  auto fix_orient = [&](Fact& f) {
    if (f.pred != Pred::SimTri && f.pred != Pred::Contri) return;
    Fact g = f;
    g.inverse = false;
    if (!holds(diagrams[0], g, tol)) g.inverse = true;
    f = canonical(g);
  };
  fix_orient(goal);
  for (ProofStep& s : t->steps) {
    fix_orient(s.conclusion);
    for (auto& [pf, k] : s.premises) fix_orient(pf);
  }

  if (canonical(t->steps.back().conclusion) != goal)
    return {CheckStatus::Invalid, (int)t->steps.size(),
            "final conclusion does not match the goal"};

  SaturateLimits lim;
  lim.max_facts = 20000;
  lim.max_rounds = 3;
  lim.wall_seconds = 10.0;

  for (size_t i = 0; i < t->steps.size(); ++i) {
    const ProofStep& s = t->steps[i];
    int n = (int)i + 1;
    for (auto& [pf, k] : s.premises) {
      if (k < 0 || k >= n)
        return {CheckStatus::Invalid, n, "premise index out of range"};
      if (k == 0) {
        if (!level0.count(canonical(pf)))
          return {CheckStatus::Invalid, n,
                  "premise [0] is not construction-emitted: " +
                      format_fact(pf, ext.names)};
      } else if (canonical(pf) != canonical(t->steps[k - 1].conclusion)) {
        return {CheckStatus::Invalid, n,
                "premise does not match step " + std::to_string(k)};
      }
    }
    for (const Diagram& d : diagrams)
      if (!holds(d, s.conclusion, tol))
        return {CheckStatus::Invalid, n,
                "conclusion refuted numerically: " +
                    format_fact(s.conclusion, ext.names)};
    // One-rule derivability from the stated premises alone.
    Database db(*seq, diagrams[0], tol);
    for (auto& [pf, k] : s.premises) db.insert(pf, "construction", {});
    if (!db.contains_goal(s.conclusion)) {
      saturate(db, lim);
      if (!db.contains_goal(s.conclusion))
        return {CheckStatus::Invalid, n,
                "no rule derives the conclusion from its premises"};
    }
  }
  return {};
}

}  // namespace gs
