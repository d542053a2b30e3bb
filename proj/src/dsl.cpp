#include "dsl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "json.hpp"

namespace gs {

const std::vector<KindInfo>& catalog() {
  static const std::vector<KindInfo> kinds = {
      {Kind::FreePoint, "free_point", 0, "-> P"},
      {Kind::Midpoint, "midpoint", 2, "(A, B) -> midpoint of AB"},
      {Kind::Foot, "foot", 3, "(P, A, B) -> foot of P on line AB"},
      {Kind::ExtendEqual, "extend_equal", 2,
       "(A, I) -> Z on ray AI with AI = IZ"},
      {Kind::Reflect, "reflect", 2, "(P, Q) -> reflection of P over Q"},
      {Kind::Incenter, "incenter", 3, "(A, B, C) -> incenter"},
      {Kind::Excenter, "excenter", 3, "(A, B, C) -> A-excenter"},
      {Kind::Circumcenter, "circumcenter", 3, "(A, B, C) -> circumcenter"},
      {Kind::Orthocenter, "orthocenter", 3, "(A, B, C) -> orthocenter"},
      {Kind::IntersectLineLine, "intersect_line_line", 4,
       "(A, B, C, D) -> AB meet CD"},
      {Kind::SecondIntersectLineCircle, "second_intersect_line_circle", 5,
       "(X, Y, A, B, C) -> second meet of line XY with circle ABC"},
      {Kind::SecondIntersectCircleCircle, "second_intersect_circle_circle", 7,
       "(X, A, B, C, D, E, F) -> second common point of circles ABC, DEF"},
      {Kind::ParallelMeet, "parallel_meet", 5,
       "(P, A, B, C, D) -> line through P parallel to AB, meet CD"},
      {Kind::PerpMeet, "perp_meet", 5,
       "(P, A, B, C, D) -> line through P perpendicular to AB, meet CD"},
      {Kind::ArcMidpoint, "arc_midpoint", 3,
       "(A, B, C) -> midpoint of arc AB of circle ABC away from C"},
      {Kind::Antipode, "antipode", 4,
       "(P, Q, R, S) -> antipode of P in circle QRS"},
      {Kind::Parallelogram4, "parallelogram4", 3,
       "(A, B, C) -> D with ABCD a parallelogram"},
      {Kind::AngleBisectorMeet, "angle_bisector_meet", 3,
       "(C, A, B) -> bisector of angle ACB meet AB"},
      {Kind::PerpAtPointMeet, "perp_at_point_meet", 4,
       "(V, W, A, B) -> P on line AB with angle PVW right"},
      {Kind::OnCircle, "on_circle", 3, "(A, B, C) -> point on circle ABC"},
  };
  return kinds;
}

const std::vector<std::vector<int>>& kind_arg_groups(Kind k) {
  static const std::vector<std::vector<std::vector<int>>> groups = [] {
    std::vector<std::vector<std::vector<int>>> g(catalog().size());
    auto set = [&](Kind k, std::vector<std::vector<int>> v) {
      g[(size_t)k] = std::move(v);
    };
    set(Kind::Midpoint, {{0, 1}});
    set(Kind::Foot, {{1, 2}});
    set(Kind::Incenter, {{0, 1, 2}});
    set(Kind::Excenter, {{1, 2}});
    set(Kind::Circumcenter, {{0, 1, 2}});
    set(Kind::Orthocenter, {{0, 1, 2}});
    set(Kind::IntersectLineLine, {{0, 1}, {2, 3}});
    set(Kind::SecondIntersectLineCircle, {{2, 3, 4}});
    set(Kind::SecondIntersectCircleCircle, {{1, 2, 3}, {4, 5, 6}});
    set(Kind::ParallelMeet, {{1, 2}, {3, 4}});
    set(Kind::PerpMeet, {{1, 2}, {3, 4}});
    set(Kind::ArcMidpoint, {{0, 1}});
    set(Kind::Antipode, {{1, 2, 3}});
    set(Kind::Parallelogram4, {{0, 2}});
    set(Kind::AngleBisectorMeet, {{1, 2}});
    set(Kind::PerpAtPointMeet, {{2, 3}});
    set(Kind::OnCircle, {{0, 1, 2}});
    return g;
  }();
  return groups[(size_t)k];
}

std::vector<Pt> canonical_args(Kind k, std::vector<Pt> args) {
  for (const auto& grp : kind_arg_groups(k)) {
    std::vector<Pt> vals;
    for (int i : grp) vals.push_back(args[i]);
    std::sort(vals.begin(), vals.end());
    for (size_t j = 0; j < grp.size(); ++j) args[grp[j]] = vals[j];
  }
  return args;
}

const KindInfo* kind_info(Kind k) {
  for (auto& ki : catalog())
    if (ki.kind == k) return &ki;
  return nullptr;
}

const KindInfo* kind_by_name(std::string_view name) {
  for (auto& ki : catalog())
    if (name == ki.name) return &ki;
  return nullptr;
}

std::vector<Fact> emitted_facts(const Statement& st) {
  const Pt z = st.out;
  const auto& a = st.args;
  auto F = [](Pred p, std::vector<Pt> pts, bool inv = false) {
    Fact f;
    f.pred = p;
    f.pts = std::move(pts);
    f.inverse = inv;
    return canonical(f);
  };
  auto circ = [&](Pt p, Pt q, Pt r, Pt s, Pt t, Pt u) {
    return F(Pred::EqCircle, {kNoPt, p, q, r, kNoPt, s, t, u});
  };
  switch (st.kind) {
    case Kind::FreePoint:
      return {};
    case Kind::Midpoint:
      return {F(Pred::Midp, {z, a[0], a[1]}),
              F(Pred::Cong, {a[0], z, z, a[1]}),
              F(Pred::EqLine, {a[0], z, z, a[1]})};
    case Kind::Foot:
      return {F(Pred::EqLine, {z, a[1], a[1], a[2]}),
              F(Pred::Perp, {a[0], z, a[1]})};
    case Kind::Reflect:
      return {F(Pred::Midp, {a[1], a[0], z}),
              F(Pred::Cong, {a[0], a[1], a[1], z}),
              F(Pred::EqLine, {a[0], a[1], a[1], z})};
    case Kind::ExtendEqual:
      return {F(Pred::Midp, {a[1], a[0], z}),
              F(Pred::Cong, {a[0], a[1], a[1], z}),
              F(Pred::EqLine, {a[0], a[1], a[1], z})};
    case Kind::Incenter:
    case Kind::Excenter:
      // Full angles are taken modulo pi, so the three bisector facts are
      // shared by the incenter and the excenters.
      return {F(Pred::EqAngle, {a[1], a[0], z, z, a[0], a[2]}),
              F(Pred::EqAngle, {a[0], a[1], z, z, a[1], a[2]}),
              F(Pred::EqAngle, {a[1], a[2], z, z, a[2], a[0]})};
    case Kind::Circumcenter:
      return {F(Pred::Cong, {z, a[0], z, a[1]}),
              F(Pred::Cong, {z, a[1], z, a[2]})};
    case Kind::Orthocenter:
      return {F(Pred::Perp, {a[0], z, a[1], a[2]}),
              F(Pred::Perp, {a[1], z, a[0], a[2]}),
              F(Pred::Perp, {a[2], z, a[0], a[1]})};
    case Kind::IntersectLineLine:
      return {F(Pred::EqLine, {z, a[0], a[0], a[1]}),
              F(Pred::EqLine, {z, a[2], a[2], a[3]})};
    case Kind::SecondIntersectLineCircle:
      return {F(Pred::EqLine, {z, a[0], a[0], a[1]}),
              circ(z, a[2], a[3], a[2], a[3], a[4])};
    case Kind::SecondIntersectCircleCircle:
      return {circ(z, a[1], a[2], a[1], a[2], a[3]),
              circ(z, a[4], a[5], a[4], a[5], a[6])};
    case Kind::ParallelMeet:
      return {F(Pred::Para, {z, a[0], a[1], a[2]}),
              F(Pred::EqLine, {z, a[3], a[3], a[4]})};
    case Kind::PerpMeet:
      return {F(Pred::Perp, {z, a[0], a[1], a[2]}),
              F(Pred::EqLine, {z, a[3], a[3], a[4]})};
    case Kind::ArcMidpoint:
      return {circ(z, a[0], a[1], a[0], a[1], a[2]),
              F(Pred::Cong, {z, a[0], z, a[1]}),
              F(Pred::EqAngle, {a[0], a[2], z, z, a[2], a[1]})};
    case Kind::Antipode: {
      // The anchor P may itself be one of the circle's defining points.
      std::vector<Pt> rim;
      for (int i = 1; i <= 3; ++i)
        if (a[i] != a[0]) rim.push_back(a[i]);
      std::vector<Fact> out{circ(z, a[0], rim[0], a[1], a[2], a[3])};
      for (Pt w : rim)
        if (w != z) out.push_back(F(Pred::Perp, {a[0], w, z}));
      return out;
    }
    case Kind::Parallelogram4:
      return {F(Pred::Para, {a[0], a[1], z, a[2]}),
              F(Pred::Para, {a[0], z, a[1], a[2]}),
              F(Pred::Cong, {a[0], a[1], z, a[2]}),
              F(Pred::Cong, {a[0], z, a[1], a[2]})};
    case Kind::AngleBisectorMeet:
      return {F(Pred::EqLine, {z, a[1], a[1], a[2]}),
              F(Pred::EqAngle, {a[1], a[0], z, z, a[0], a[2]})};
    case Kind::PerpAtPointMeet:
      return {F(Pred::EqLine, {z, a[2], a[2], a[3]}),
              F(Pred::Perp, {z, a[0], a[1]})};
    case Kind::OnCircle:
      return {circ(z, a[0], a[1], a[0], a[1], a[2])};
  }
  return {};
}

namespace {

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  if (!isalpha((unsigned char)s[0])) return false;
  for (char c : s)
    if (!isalnum((unsigned char)c) && c != '\'' && c != '_') return false;
  return true;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

}  // namespace

std::optional<ProblemSource> parse_problem(std::string_view text,
                                           ParseError* err) {
  ProblemSource src;
  auto fail = [&](int line, int col, std::string msg) {
    if (err) *err = {line, col, std::move(msg)};
    return std::nullopt;
  };
  std::vector<bool> defined;  // parallel to src.names

  auto define = [&](const std::string& name) -> std::optional<Pt> {
    if (src.names.find(name)) return std::nullopt;
    Pt p = src.names.intern(name);
    defined.resize(src.names.size(), false);
    defined[p] = true;
    return p;
  };

  std::istringstream is{std::string(text)};
  std::string raw;
  int line_no = 0;
  bool saw_goal = false;
  while (std::getline(is, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (saw_goal) return fail(line_no, 1, "statement after goal");

    if (toks[0] == "free") {
      if (toks.size() < 2) return fail(line_no, 1, "free needs point names");
      for (size_t i = 1; i < toks.size(); ++i) {
        if (!valid_name(toks[i]))
          return fail(line_no, 1, "bad point name '" + toks[i] + "'");
        auto p = define(toks[i]);
        if (!p) return fail(line_no, 1, "duplicate point '" + toks[i] + "'");
        src.free_pts.push_back(*p);
      }
      continue;
    }

    if (toks[0] == "goal") {
      if (toks.size() < 3) return fail(line_no, 1, "goal needs a predicate");
      auto pred = pred_from_name(toks[1]);
      if (!pred) return fail(line_no, 1, "unknown predicate '" + toks[1] + "'");
      std::vector<Pt> pts;
      for (size_t i = 2; i < toks.size(); ++i) {
        if (toks[i] == "None") {
          pts.push_back(kNoPt);
          continue;
        }
        auto p = src.names.find(toks[i]);
        if (!p) return fail(line_no, 1, "undefined point '" + toks[i] + "'");
        pts.push_back(*p);
      }
      std::string ferr;
      auto goal = fact_from_points(*pred, pts, &ferr);
      if (!goal) return fail(line_no, 1, ferr);
      src.goal = *goal;
      saw_goal = true;
      continue;
    }

    // X = kind(args)
    std::string joined;
    for (auto& t : toks) joined += t;
    auto eq = joined.find('=');
    auto lp = joined.find('(');
    auto rp = joined.rfind(')');
    if (eq == std::string::npos || lp == std::string::npos ||
        rp == std::string::npos || lp < eq || rp < lp)
      return fail(line_no, 1, "syntax error");
    std::string out_name = joined.substr(0, eq);
    std::string kind_name = joined.substr(eq + 1, lp - eq - 1);
    std::string arg_text = joined.substr(lp + 1, rp - lp - 1);
    if (!valid_name(out_name))
      return fail(line_no, 1, "bad point name '" + out_name + "'");
    const KindInfo* ki = kind_by_name(kind_name);
    if (!ki)
      return fail(line_no, int(eq) + 2,
                  "unknown construction '" + kind_name + "'");

    std::vector<Pt> args;
    std::string cur;
    auto flush = [&]() -> bool {
      if (cur.empty()) return true;
      auto p = src.names.find(cur);
      if (!p) return false;
      args.push_back(*p);
      cur.clear();
      return true;
    };
    bool ok = true;
    for (char c : arg_text) {
      if (c == ',') {
        if (!flush()) { ok = false; break; }
      } else {
        cur += c;
      }
    }
    if (ok) ok = flush();
    if (!ok)
      return fail(line_no, int(lp) + 2, "undefined point '" + cur + "'");
    if ((int)args.size() != ki->arity)
      return fail(line_no, int(lp) + 2,
                  "arity mismatch: " + kind_name + "/" +
                      std::to_string(ki->arity) + " got " +
                      std::to_string(args.size()) + " args");
    auto out = define(out_name);
    if (!out) return fail(line_no, 1, "duplicate point '" + out_name + "'");
    if (src.names.size() > 64) return fail(line_no, 1, "too many points");
    src.stmts.push_back({*out, ki->kind, std::move(args), line_no});
  }
  return src;
}

std::string format_statement(const Statement& st, const NameTable& names) {
  std::ostringstream os;
  os << names.name(st.out) << " = " << kind_info(st.kind)->name << "(";
  for (size_t i = 0; i < st.args.size(); ++i) {
    if (i) os << ", ";
    os << names.name(st.args[i]);
  }
  os << ")";
  return os.str();
}

std::string format_problem(const ProblemSource& src) {
  std::ostringstream os;
  if (!src.free_pts.empty()) {
    os << "free";
    for (Pt p : src.free_pts) os << " " << src.names.name(p);
    os << "\n";
  }
  for (auto& st : src.stmts) os << format_statement(st, src.names) << "\n";
  if (src.goal) {
    os << "goal " << pred_name(src.goal->pred);
    for (Pt p : src.goal->pts)
      os << " " << (p == kNoPt ? std::string("None") : src.names.name(p));
    os << "\n";
  }
  return os.str();
}

std::optional<ConstructionSequence> elaborate(const ProblemSource& src,
                                              std::string* err) {
  ConstructionSequence seq;
  seq.src = src;
  size_t n = src.names.size();
  if (n > 64) {
    if (err) *err = "too many points";
    return std::nullopt;
  }
  seq.closure.assign(n, 0);
  seq.def_stmt.assign(n, -1);
  std::vector<bool> seen(n, false);
  for (Pt p : src.free_pts) {
    seq.closure[p] = PtMask(1) << p;
    seen[p] = true;
  }
  for (size_t i = 0; i < src.stmts.size(); ++i) {
    auto& st = src.stmts[i];
    if (seen[st.out]) {
      if (err) *err = "cyclic or duplicate definition of " +
                      src.names.name(st.out);
      return std::nullopt;
    }
    PtMask m = PtMask(1) << st.out;
    for (Pt a : st.args) {
      if (!seen[a]) {
        if (err) *err = "forward reference to " + src.names.name(a);
        return std::nullopt;
      }
      m |= seq.closure[a];
    }
    seq.closure[st.out] = m;
    seq.def_stmt[st.out] = int(i);
    seen[st.out] = true;
  }
  if (src.goal) {
    for (Pt p : src.goal->pts)
      if (p != kNoPt && (p >= n || !seen[p])) {
        if (err) *err = "goal references undefined point";
        return std::nullopt;
      }
  }
  return seq;
}

std::string catalog_json() {
  nlohmann::json arr = nlohmann::json::array();
  // Template instantiation over placeholder names a, b, c, ... with
  // output z.
  for (auto& ki : catalog()) {
    NameTable nt;
    Statement st;
    st.kind = ki.kind;
    for (int i = 0; i < ki.arity; ++i)
      st.args.push_back(nt.intern(std::string(1, char('a' + i))));
    st.out = nt.intern("z");
    nlohmann::json e;
    e["name"] = ki.name;
    e["arity"] = ki.arity;
    e["signature"] = ki.signature;
    nlohmann::json facts = nlohmann::json::array();
    for (auto& f : emitted_facts(st)) facts.push_back(format_fact(f, nt));
    e["emits"] = facts;
    arr.push_back(e);
  }
  return arr.dump(2);
}

}  // namespace gs
