#include "rules.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace gs {
namespace {

struct Ctx {
  Database& db;
  const SaturateLimits& lim;
  SaturationStats& st;
  std::chrono::steady_clock::time_point t0;
  bool changed = false;

  bool budget() {
    if ((int)db.size() >= lim.max_facts) {
      st.truncated = true;
      return false;
    }
    double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (dt >= lim.wall_seconds) {
      st.truncated = true;
      return false;
    }
    return true;
  }

  bool add(Fact f, const char* rule, std::vector<FactId> prem,
           bool skip_implied = true) {
    if (!budget()) return false;
    f = canonical(f);
    if (!well_formed(f)) return false;
    std::sort(prem.begin(), prem.end());
    prem.erase(std::unique(prem.begin(), prem.end()), prem.end());
    if (db.stored(f)) {
      db.insert(f, rule, prem);
      return false;
    }
    if (skip_implied && db.implied(f)) return false;
    if (!db.check(f)) {
      st.numeric_rejects++;
      return false;
    }
    db.insert(f, rule, prem);
    st.derived++;
    st.rule_fires[rule]++;
    changed = true;
    return true;
  }
};

Fact mk(Pred p, std::vector<Pt> pts, bool inv = false) {
  Fact f;
  f.pred = p;
  f.pts = std::move(pts);
  f.inverse = inv;
  return f;
}

std::vector<FactId> cat(std::vector<FactId> a, const std::vector<FactId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// ---- numeric helpers (diagram-side filters) ----

double dist(const Diagram& d, Pt a, Pt b) {
  double dx = d.at[a].x - d.at[b].x, dy = d.at[a].y - d.at[b].y;
  return std::sqrt(dx * dx + dy * dy);
}

bool num_noncollinear(const Diagram& d, Pt a, Pt b, Pt c) {
  double ux = d.at[b].x - d.at[a].x, uy = d.at[b].y - d.at[a].y;
  double vx = d.at[c].x - d.at[a].x, vy = d.at[c].y - d.at[a].y;
  double cr = ux * vy - uy * vx;
  double s = std::sqrt((ux * ux + uy * uy) * (vx * vx + vy * vy));
  return std::abs(cr) > 1e-6 * (s + 1e-12);
}

bool num_eqlen(const Diagram& d, Pt a, Pt b, Pt c, Pt e) {
  double l1 = dist(d, a, b), l2 = dist(d, c, e);
  return std::abs(l1 - l2) <= 1e-7 * (1 + l1 + l2);
}

std::optional<std::pair<double, double>> num_circumcenter(const Diagram& d,
                                                          Pt a, Pt b, Pt c) {
  double ax = d.at[a].x, ay = d.at[a].y, bx = d.at[b].x, by = d.at[b].y,
         cx = d.at[c].x, cy = d.at[c].y;
  double dd = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  if (std::abs(dd) < 1e-12) return std::nullopt;
  double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by,
         c2 = cx * cx + cy * cy;
  double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / dd;
  double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / dd;
  return std::make_pair(ux, uy);
}

// ---- representatives ----

int line_for_dir(Database& db, int root) {
  for (int l : db.lines_alive())
    if (db.angles().base_find(db.line(l).dir) == root) return l;
  return -1;
}

// Facts tying a line's printed representative points to a direction
// class root: the memberships plus the chain identifying the directions.
void dir_tie(Database& db, int l, const std::vector<Pt>& pts, int root,
             std::vector<FactId>& why) {
  why = cat(why, db.explain_on_line(l, pts));
  why = cat(why, db.angles().base_explain(db.line(l).dir, root));
}

// Points naming one angle side for a pair of direction roots: a 3-point
// form when the representative lines meet in a named point, else the two
// segments. Appends the facts tying the named points to the roots.
std::optional<std::vector<Pt>> angle_side(Database& db, int ra, int rb,
                                          std::vector<FactId>& why) {
  int la = line_for_dir(db, ra), lb = line_for_dir(db, rb);
  if (la < 0 || lb < 0) return std::nullopt;
  const auto& pa = db.line(la).pts;
  const auto& pb = db.line(lb).pts;
  for (Pt v : pa)
    if (std::binary_search(pb.begin(), pb.end(), v)) {
      Pt p = pa[0] == v ? pa[1] : pa[0];
      Pt q = pb[0] == v ? pb[1] : pb[0];
      dir_tie(db, la, {p, v}, ra, why);
      dir_tie(db, lb, {v, q}, rb, why);
      return std::vector<Pt>{p, v, q};
    }
  dir_tie(db, la, {pa[0], pa[1]}, ra, why);
  dir_tie(db, lb, {pb[0], pb[1]}, rb, why);
  return std::vector<Pt>{pa[0], pa[1], pb[0], pb[1]};
}

std::optional<Fact> angle_fact(Database& db, int ra, int rb, int rc, int rd,
                               std::vector<FactId>& why) {
  auto s1 = angle_side(db, ra, rb, why);
  auto s2 = angle_side(db, rc, rd, why);
  if (!s1 || !s2) return std::nullopt;
  if (s1->size() == 3 && s2->size() == 3)
    return mk(Pred::EqAngle, {(*s1)[0], (*s1)[1], (*s1)[2], (*s2)[0],
                              (*s2)[1], (*s2)[2]});
  auto expand = [](const std::vector<Pt>& s) {
    if (s.size() == 4) return s;
    return std::vector<Pt>{s[1], s[0], s[1], s[2]};
  };
  std::vector<Pt> pts = expand(*s1);
  for (Pt p : expand(*s2)) pts.push_back(p);
  return mk(Pred::EqAngle, pts);
}

// ---- rules ----

void r_circle_merge(Ctx& cx) {
  auto alive = cx.db.circles_alive();
  for (size_t i = 0; i < alive.size(); ++i)
    for (size_t j = i + 1; j < alive.size(); ++j) {
      int c1 = alive[i], c2 = alive[j];
      if (!cx.db.circle(c1).alive || !cx.db.circle(c2).alive) continue;
      const auto& p1 = cx.db.circle(c1).pts;
      const auto& p2 = cx.db.circle(c2).pts;
      int shared = 0;
      for (Pt p : p2)
        if (std::binary_search(p1.begin(), p1.end(), p)) shared++;
      if (shared >= 3) {
        cx.db.merge_circles(c1, c2);
        cx.changed = true;
      }
    }
}

std::unordered_map<int, std::vector<std::pair<Pt, Pt>>> segs_by_len(
    Database& db) {
  std::unordered_map<int, std::vector<std::pair<Pt, Pt>>> out;
  const auto& segs = db.len_segs();
  for (int i = 0; i < (int)segs.size(); ++i)
    out[db.ratios().base_find(i)].push_back(segs[i]);
  return out;
}

void r_center_detect(Ctx& cx) {
  auto classes = segs_by_len(cx.db);
  const Diagram& dg = cx.db.diagram();
  for (auto& [root, segs] : classes) {
    if (!cx.budget()) return;
    // spokes: endpoint -> far points of class members at that endpoint
    std::unordered_map<Pt, std::vector<Pt>> spokes;
    for (auto& [a, b] : segs) {
      spokes[a].push_back(b);
      spokes[b].push_back(a);
    }
    for (auto& [o, rim0] : spokes) {
      std::vector<Pt> rim = rim0;
      std::sort(rim.begin(), rim.end());
      rim.erase(std::unique(rim.begin(), rim.end()), rim.end());
      rim.erase(std::remove(rim.begin(), rim.end(), o), rim.end());
      if (rim.size() < 2) continue;
      // Existing circle centered at o with this radius class?
      int target = -1;
      Pt anchor = kNoPt;
      for (int c : cx.db.circles_alive()) {
        if (cx.db.circle(c).center != o) continue;
        for (Pt a : cx.db.circle(c).pts)
          if (cx.db.ratios().base_find(cx.db.len_base(o, a)) == root) {
            target = c;
            anchor = a;
            break;
          }
        if (target >= 0) break;
      }
      if (target < 0) {
        if (rim.size() < 3) continue;
        // pick three numerically non-collinear rim points
        Pt x = rim[0], y = kNoPt, z = kNoPt;
        for (size_t i = 1; i < rim.size() && z == kNoPt; ++i) {
          if (y == kNoPt) {
            y = rim[i];
            continue;
          }
          if (num_noncollinear(dg, x, y, rim[i])) z = rim[i];
        }
        if (z == kNoPt) continue;
        if (!num_eqlen(dg, o, x, o, y) || !num_eqlen(dg, o, x, o, z)) {
          cx.st.numeric_rejects++;
          continue;
        }
        bool existed = cx.db.find_circle({x, y, z}).has_value();
        int c = cx.db.ensure_circle(x, y, z);
        std::vector<FactId> why =
            cat(cx.db.ratios().base_explain(cx.db.len_base(o, x),
                                            cx.db.len_base(o, y)),
                cx.db.ratios().base_explain(cx.db.len_base(o, x),
                                            cx.db.len_base(o, z)));
        if (existed) why = cat(why, cx.db.explain_on_circle(c, {x, y, z}));
        if (cx.db.set_center(c, o, why)) {
          cx.changed = true;
          cx.st.rule_fires["center_detect"]++;
        }
        target = c;
        anchor = x;
      }
      for (Pt w : rim) {
        if (std::binary_search(cx.db.circle(target).pts.begin(),
                               cx.db.circle(target).pts.end(), w))
          continue;
        if (!num_eqlen(dg, o, anchor, o, w)) {
          cx.st.numeric_rejects++;
          continue;
        }
        std::vector<FactId> why =
            cat(cx.db.circle(target).center_why,
                cat(cx.db.explain_on_circle(target, {anchor}),
                    cx.db.ratios().base_explain(cx.db.len_base(o, anchor),
                                                cx.db.len_base(o, w))));
        if (cx.db.add_to_circle(target, w, why)) {
          cx.changed = true;
          cx.st.rule_fires["center_detect"]++;
        }
      }
    }
  }
}

void r_center_cong(Ctx& cx) {
  for (int c : cx.db.circles_alive()) {
    Pt o = cx.db.circle(c).center;
    if (o == kNoPt) continue;
    auto pts = cx.db.circle(c).pts;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) {
        if (!cx.budget()) return;
        Pt a = pts[i], b = pts[j];
        if (a == o || b == o) continue;
        if (cx.db.ratios().base_same(cx.db.len_base(o, a),
                                     cx.db.len_base(o, b)))
          continue;
        std::vector<FactId> prem = cat(cx.db.circle(c).center_why,
                                       cx.db.explain_on_circle(c, {a, b}));
        cx.add(mk(Pred::Cong, {o, a, o, b}), "center_cong", prem, false);
      }
  }
}

void r_line_merge(Ctx& cx) {
  std::unordered_map<int, std::vector<int>> by_dir;
  for (int l : cx.db.lines_alive())
    by_dir[cx.db.angles().base_find(cx.db.line(l).dir)].push_back(l);
  for (auto& [root, ls] : by_dir)
    for (size_t i = 0; i < ls.size(); ++i)
      for (size_t j = i + 1; j < ls.size(); ++j) {
        if (!cx.budget()) return;
        int l1 = ls[i], l2 = ls[j];
        if (!cx.db.line(l1).alive || !cx.db.line(l2).alive) continue;
        const auto& p1 = cx.db.line(l1).pts;
        const auto& p2 = cx.db.line(l2).pts;
        bool share = false;
        for (Pt p : p2)
          if (std::binary_search(p1.begin(), p1.end(), p)) {
            share = true;
            break;
          }
        if (!share) continue;
        int d1 = cx.db.line(l1).dir, d2 = cx.db.line(l2).dir;
        auto [a, b] = cx.db.line_rep(l1);
        auto [c, d] = cx.db.line_rep(l2);
        std::vector<FactId> prem =
            cat(cx.db.angles().base_explain(d1, d2),
                cat(cx.db.explain_on_line(l1, {a, b}),
                    cx.db.explain_on_line(l2, {c, d})));
        cx.add(mk(Pred::EqLine, {a, b, c, d}), "line_merge", prem);
      }
}

// A real pair node sitting in the zero class forces its two base classes
// equal: parallel lines (congruent segments on the ratio side).
void r_para_detect(Ctx& cx) {
  auto& eng = cx.db.angles();
  for (int n : eng.real_nodes()) {
    if (!cx.budget()) return;
    int ra = eng.base_find(eng.info(n).a), rb = eng.base_find(eng.info(n).b);
    if (ra == rb) continue;
    if (!eng.same(n, eng.zero_node())) continue;
    int la = line_for_dir(cx.db, ra), lb = line_for_dir(cx.db, rb);
    if (la < 0 || lb < 0) continue;
    auto [a, b] = cx.db.line_rep(la);
    auto [c, d] = cx.db.line_rep(lb);
    std::vector<FactId> prem = eng.explain(n, eng.zero_node());
    dir_tie(cx.db, la, {a, b}, ra, prem);
    dir_tie(cx.db, lb, {c, d}, rb, prem);
    cx.add(mk(Pred::Para, {a, b, c, d}), "para_detect", prem);
  }
}

void r_cong_detect(Ctx& cx) {
  auto& eng = cx.db.ratios();
  for (int n : eng.real_nodes()) {
    if (!cx.budget()) return;
    int ra = eng.base_find(eng.info(n).a), rb = eng.base_find(eng.info(n).b);
    if (ra == rb) continue;
    if (!eng.same(n, eng.zero_node())) continue;
    auto [a, b] = cx.db.len_rep(ra);
    auto [c, d] = cx.db.len_rep(rb);
    if (a == kNoPt || c == kNoPt) continue;
    std::vector<FactId> prem =
        cat(eng.explain(n, eng.zero_node()),
            cat(eng.base_explain(cx.db.len_base(a, b), ra),
                eng.base_explain(cx.db.len_base(c, d), rb)));
    cx.add(mk(Pred::Cong, {a, b, c, d}), "cong_detect", prem);
  }
}

// Inscribed angles: concyclic a,b,p,q gives eqangle at the two viewers.
void r_cyclic_angle(Ctx& cx) {
  for (int c : cx.db.circles_alive()) {
    auto pts = cx.db.circle(c).pts;
    size_t n = pts.size();
    if (n < 4) continue;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        for (size_t k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          for (size_t m = k + 1; m < n; ++m) {
            if (m == i || m == j) continue;
            if (!cx.budget()) return;
            Pt a = pts[i], b = pts[j], p = pts[k], q = pts[m];
            cx.add(mk(Pred::EqAngle, {a, p, b, a, q, b}), "cyclic_angle",
                   cx.db.explain_on_circle(c, {a, b, p, q}));
          }
        }
  }
}

void r_thales(Ctx& cx) {
  for (int c : cx.db.circles_alive()) {
    Pt o = cx.db.circle(c).center;
    if (o == kNoPt) continue;
    auto pts = cx.db.circle(c).pts;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) {
        Pt p = pts[i], m = pts[j];
        if (p == o || m == o) continue;
        if (!cx.db.collinear(p, m, o)) continue;
        auto l = cx.db.peek_line(p, m);
        std::vector<FactId> base =
            cat(cx.db.circle(c).center_why,
                cat(cx.db.explain_on_circle(c, {p, m}),
                    cx.db.explain_on_line(*l, {p, m, o})));
        for (Pt w : pts) {
          if (w == p || w == m || w == o) continue;
          if (!cx.budget()) return;
          cx.add(mk(Pred::Perp, {p, w, m}), "thales",
                 cat(base, cx.db.explain_on_circle(c, {w})));
        }
      }
  }
}

// Right angle subtending a midpointed segment: the midpoint is the
// circumcenter, so the median equals half the segment.
void r_thales_conv(Ctx& cx) {
  const Diagram& dg = cx.db.diagram();
  auto midps = cx.db.by_pred(Pred::Midp);
  size_t npts = cx.db.point_count();
  for (FactId id : midps) {
    Pt m = cx.db.rec(id).fact.pts[0];
    Pt a = cx.db.rec(id).fact.pts[1];
    Pt b = cx.db.rec(id).fact.pts[2];
    for (Pt w = 0; w < (Pt)npts; ++w) {
      if (w == m || w == a || w == b) continue;
      if (!num_eqlen(dg, m, a, m, w)) continue;
      if (!num_noncollinear(dg, a, b, w)) continue;
      if (!cx.budget()) return;
      if (cx.db.ratios().base_same(cx.db.len_base(m, a),
                                   cx.db.len_base(m, w)))
        continue;
      int n = cx.db.angle_node_of(a, w, b);
      auto& eng = cx.db.angles();
      if (!eng.same(n, eng.right_node())) continue;
      cx.add(mk(Pred::Cong, {m, a, m, w}), "thales_conv",
             cat({id}, eng.explain(n, eng.right_node())), false);
    }
  }
}

void r_midp_detect(Ctx& cx) {
  const Diagram& dg = cx.db.diagram();
  for (int l : cx.db.lines_alive()) {
    auto pts = cx.db.line(l).pts;
    if (pts.size() < 3) continue;
    for (Pt m : pts)
      for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
          Pt a = pts[i], b = pts[j];
          if (a == m || b == m) continue;
          if (!cx.budget()) return;
          double mx = (dg.at[a].x + dg.at[b].x) / 2,
                 my = (dg.at[a].y + dg.at[b].y) / 2;
          if (std::abs(mx - dg.at[m].x) + std::abs(my - dg.at[m].y) >
              1e-7 * (1 + std::abs(mx) + std::abs(my)))
            continue;
          if (cx.db.stored(mk(Pred::Midp, {m, a, b}))) continue;
          if (!cx.db.ratios().base_same(cx.db.len_base(m, a),
                                        cx.db.len_base(m, b)))
            continue;
          std::vector<FactId> prem =
              cat(cx.db.explain_on_line(l, {a, m, b}),
                  cx.db.ratios().base_explain(cx.db.len_base(m, a),
                                              cx.db.len_base(m, b)));
          cx.add(mk(Pred::Midp, {m, a, b}), "midp_detect", prem, false);
        }
  }
}

void r_midp_ratio(Ctx& cx) {
  auto ids = cx.db.by_pred(Pred::Midp);
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = i + 1; j < ids.size(); ++j) {
      if (!cx.budget()) return;
      const Fact f1 = cx.db.rec(ids[i]).fact;
      const Fact f2 = cx.db.rec(ids[j]).fact;
      Pt m = f1.pts[0], a = f1.pts[1], b = f1.pts[2];
      Pt n = f2.pts[0], c = f2.pts[1], d = f2.pts[2];
      cx.add(mk(Pred::EqRatio, {a, b, a, m, c, d, c, n}), "midp_ratio",
             {ids[i], ids[j]});
    }
}

void r_midline(Ctx& cx) {
  auto ids = cx.db.by_pred(Pred::Midp);
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = 0; j < ids.size(); ++j) {
      if (i == j) continue;
      const Fact f1 = cx.db.rec(ids[i]).fact;
      const Fact f2 = cx.db.rec(ids[j]).fact;
      Pt m = f1.pts[0], n = f2.pts[0];
      if (m == n) continue;
      for (int e1 = 0; e1 < 2; ++e1)
        for (int e2 = 0; e2 < 2; ++e2) {
          Pt s = f1.pts[1 + e1];
          if (f2.pts[1 + e2] != s) continue;
          Pt u = f1.pts[2 - e1], v = f2.pts[2 - e2];
          if (u == v || u == s || v == s) continue;
          if (!cx.budget()) return;
          cx.add(mk(Pred::Para, {m, n, u, v}), "midline", {ids[i], ids[j]});
          cx.add(mk(Pred::EqRatio, {u, v, m, n, s, u, s, m}), "midline",
                 {ids[i], ids[j]});
        }
    }
}

void r_isoceles(Ctx& cx) {
  const Diagram& dg = cx.db.diagram();
  auto classes = segs_by_len(cx.db);
  for (auto& [root, segs] : classes) {
    for (size_t i = 0; i < segs.size(); ++i)
      for (size_t j = i + 1; j < segs.size(); ++j) {
        if (!cx.budget()) return;
        Pt shared = kNoPt, a = kNoPt, b = kNoPt;
        for (Pt x : {segs[i].first, segs[i].second})
          for (Pt y : {segs[j].first, segs[j].second})
            if (x == y) {
              shared = x;
              a = segs[i].first == x ? segs[i].second : segs[i].first;
              b = segs[j].first == y ? segs[j].second : segs[j].first;
            }
        if (shared == kNoPt || a == b || a == shared || b == shared) continue;
        if (!num_noncollinear(dg, shared, a, b)) continue;
        cx.add(mk(Pred::EqAngle, {shared, a, b, a, b, shared}), "isoceles",
               cx.db.ratios().base_explain(cx.db.len_base(shared, a),
                                           cx.db.len_base(shared, b)));
      }
  }
}

void r_isoceles_conv(Ctx& cx) {
  const Diagram& dg = cx.db.diagram();
  Pt n = (Pt)cx.db.point_count();
  for (Pt a = 0; a < n; ++a)
    for (Pt b = (Pt)(a + 1); b < n; ++b)
      for (Pt o = 0; o < n; ++o) {
        if (o == a || o == b) continue;
        if (!num_eqlen(dg, o, a, o, b)) continue;
        if (!num_noncollinear(dg, o, a, b)) continue;
        if (!cx.budget()) return;
        if (cx.db.ratios().base_same(cx.db.len_base(o, a),
                                     cx.db.len_base(o, b)))
          continue;
        int n1 = cx.db.angle_node_of(o, a, b);
        int n2 = cx.db.angle_node_of(a, b, o);
        if (!cx.db.angles().same(n1, n2)) continue;
        cx.add(mk(Pred::Cong, {o, a, o, b}), "isoceles_conv",
               cx.db.angles().explain(n1, n2), false);
      }
}

// Converse inscribed angle over numerically concyclic quadruples.
void r_angle_cyclic(Ctx& cx, const std::vector<std::array<Pt, 4>>& quads) {
  for (const auto& q : quads) {
    if (!cx.budget()) return;
    if (cx.db.find_circle({q[0], q[1], q[2], q[3]})) continue;
    static const int splits[3][4] = {
        {0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
    for (auto& s : splits) {
      Pt a = q[s[0]], b = q[s[1]], p = q[s[2]], r = q[s[3]];
      int n1 = cx.db.angle_node_of(a, p, b);
      int n2 = cx.db.angle_node_of(a, r, b);
      if (cx.db.angles().same(n1, n2)) {
        cx.add(mk(Pred::EqCircle, {kNoPt, a, b, p, kNoPt, a, b, r}),
               "angle_cyclic", cx.db.angles().explain(n1, n2));
        break;
      }
      int n3 = cx.db.angle_node_of(p, a, r);
      int n4 = cx.db.angle_node_of(p, b, r);
      if (cx.db.angles().same(n3, n4)) {
        cx.add(mk(Pred::EqCircle, {kNoPt, p, r, a, kNoPt, p, r, b}),
               "angle_cyclic", cx.db.angles().explain(n3, n4));
        break;
      }
    }
  }
}

// ---- similar / congruent triangle detection ----

struct SimCand {
  Pt a, b, c, d, e, f;
  bool inverse;
  bool congruent;
};

std::vector<SimCand> build_sim_cands(Database& db) {
  std::vector<SimCand> out;
  const Diagram& dg = db.diagram();
  Pt n = (Pt)db.point_count();
  if (n < 4) return out;
  struct Tri {
    Pt p[3];
  };
  std::vector<Tri> tris;
  for (Pt i = 0; i < n; ++i)
    for (Pt j = (Pt)(i + 1); j < n; ++j)
      for (Pt k = (Pt)(j + 1); k < n; ++k)
        if (num_noncollinear(dg, i, j, k)) tris.push_back({{i, j, k}});
  auto shape_key = [&](const Tri& t) {
    double s[3] = {dist(dg, t.p[0], t.p[1]), dist(dg, t.p[0], t.p[2]),
                   dist(dg, t.p[1], t.p[2])};
    std::sort(s, s + 3);
    return std::make_pair((int64_t)std::floor(s[0] / s[2] / 1e-4),
                          (int64_t)std::floor(s[1] / s[2] / 1e-4));
  };
  std::map<std::pair<int64_t, int64_t>, std::vector<int>> buckets;
  for (int t = 0; t < (int)tris.size(); ++t) buckets[shape_key(tris[t])].push_back(t);
  auto cplx = [&](Pt a, Pt b, Pt c) {
    // (c - a) / (b - a)
    double ux = dg.at[b].x - dg.at[a].x, uy = dg.at[b].y - dg.at[a].y;
    double vx = dg.at[c].x - dg.at[a].x, vy = dg.at[c].y - dg.at[a].y;
    double den = ux * ux + uy * uy;
    return std::make_pair((vx * ux + vy * uy) / den,
                          (vy * ux - vx * uy) / den);
  };
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::unordered_set<std::string> seen;
  auto consider = [&](int t, int u) {
    const Tri &T = tris[t], &U = tris[u];
    auto [z1r, z1i] = cplx(T.p[0], T.p[1], T.p[2]);
    for (auto& pm : perms) {
      Pt d = U.p[pm[0]], e = U.p[pm[1]], f = U.p[pm[2]];
      auto [z2r, z2i] = cplx(d, e, f);
      bool direct = std::abs(z1r - z2r) + std::abs(z1i - z2i) < 1e-6;
      bool inv = std::abs(z1r - z2r) + std::abs(z1i + z2i) < 1e-6;
      if (!direct && !inv) continue;
      SimCand c{T.p[0], T.p[1], T.p[2], d, e, f, inv && !direct, false};
      c.congruent = std::abs(dist(dg, c.a, c.b) - dist(dg, c.d, c.e)) <
                    1e-7 * (1 + dist(dg, c.a, c.b));
      Fact key = canonical(mk(Pred::SimTri, {c.a, c.b, c.c, c.d, c.e, c.f},
                              c.inverse));
      std::string ks;
      for (Pt p : key.pts) ks += std::to_string(p) + ",";
      ks += key.inverse ? "i" : "d";
      if (seen.insert(ks).second) out.push_back(c);
    }
  };
  for (auto& [key, list] : buckets) {
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        auto it = buckets.find({key.first + dx, key.second + dy});
        if (it == buckets.end()) continue;
        for (int t : list)
          for (int u : it->second)
            if (t < u) consider(t, u);
      }
    if (out.size() > 60000) break;
  }
  return out;
}

void r_sim(Ctx& cx, const std::vector<SimCand>& cands) {
  auto& ang = cx.db.angles();
  auto& rat = cx.db.ratios();
  for (const auto& cd : cands) {
    if (!cx.budget()) return;
    Fact conF = mk(Pred::Contri, {cd.a, cd.b, cd.c, cd.d, cd.e, cd.f},
                   cd.inverse);
    if (cx.db.stored(conF)) continue;
    Fact simF = mk(Pred::SimTri, {cd.a, cd.b, cd.c, cd.d, cd.e, cd.f},
                   cd.inverse);
    bool sim_stored = cx.db.stored(simF);
    Pt A[3] = {cd.a, cd.b, cd.c}, D[3] = {cd.d, cd.e, cd.f};
    // matched vertex angle at index v
    auto ang_ok = [&](int v) -> std::optional<std::vector<FactId>> {
      Pt x1 = A[(v + 1) % 3], y1 = A[(v + 2) % 3];
      Pt x2 = D[(v + 1) % 3], y2 = D[(v + 2) % 3];
      int n1 = cx.db.angle_node_of(x1, A[v], y1);
      int n2 = cd.inverse ? cx.db.angle_node_of(y2, D[v], x2)
                          : cx.db.angle_node_of(x2, D[v], y2);
      if (!ang.same(n1, n2)) return std::nullopt;
      return ang.explain(n1, n2);
    };
    auto len_ok = [&](Pt p1, Pt q1, Pt p2,
                      Pt q2) -> std::optional<std::vector<FactId>> {
      int b1 = cx.db.len_base(p1, q1), b2 = cx.db.len_base(p2, q2);
      if (!rat.base_same(b1, b2)) return std::nullopt;
      return rat.base_explain(b1, b2);
    };
    auto right_ok = [&](int v) -> std::optional<std::vector<FactId>> {
      Pt x1 = A[(v + 1) % 3], y1 = A[(v + 2) % 3];
      Pt x2 = D[(v + 1) % 3], y2 = D[(v + 2) % 3];
      int n1 = cx.db.angle_node_of(x1, A[v], y1);
      int n2 = cx.db.angle_node_of(x2, D[v], y2);
      int r = ang.right_node();
      if (!ang.same(n1, r) || !ang.same(n2, r)) return std::nullopt;
      return cat(ang.explain(n1, r), ang.explain(n2, r));
    };
    auto side = [&](int v, int w) {
      return std::make_pair(std::make_pair(A[v], A[w]),
                            std::make_pair(D[v], D[w]));
    };
    if (cd.congruent) {
      std::optional<std::vector<FactId>> s01 =
          len_ok(cd.a, cd.b, cd.d, cd.e);
      auto s02 = len_ok(cd.a, cd.c, cd.d, cd.f);
      auto s12 = len_ok(cd.b, cd.c, cd.e, cd.f);
      if (s01 && s02 && s12) {
        cx.add(conF, "cong_sss", cat(*s01, cat(*s02, *s12)));
        continue;
      }
      bool fired = false;
      for (int v = 0; v < 3 && !fired; ++v) {
        auto a = ang_ok(v);
        if (!a) continue;
        auto [e1, e2] = std::make_pair((v + 1) % 3, (v + 2) % 3);
        auto l1 = len_ok(A[v], A[e1], D[v], D[e1]);
        auto l2 = len_ok(A[v], A[e2], D[v], D[e2]);
        if (l1 && l2) {
          cx.add(conF, "cong_sas", cat(*a, cat(*l1, *l2)));
          fired = true;
        }
      }
      if (fired) continue;
      for (int v = 0; v < 3 && !fired; ++v) {
        auto r = right_ok(v);
        if (!r) continue;
        auto hyp = side((v + 1) % 3, (v + 2) % 3);
        auto h = len_ok(hyp.first.first, hyp.first.second, hyp.second.first,
                        hyp.second.second);
        if (!h) continue;
        for (int e : {(v + 1) % 3, (v + 2) % 3}) {
          auto l = len_ok(A[v], A[e], D[v], D[e]);
          if (l) {
            cx.add(conF, "cong_rhs", cat(*r, cat(*h, *l)));
            fired = true;
            break;
          }
        }
      }
      if (fired) continue;
    }
    if (sim_stored) continue;
    std::optional<std::vector<FactId>> angs[3] = {ang_ok(0), ang_ok(1),
                                                  ang_ok(2)};
    int nang = (angs[0] ? 1 : 0) + (angs[1] ? 1 : 0) + (angs[2] ? 1 : 0);
    if (nang >= 2) {
      std::vector<FactId> prem;
      for (int v = 0, got = 0; v < 3 && got < 2; ++v)
        if (angs[v]) {
          prem = cat(prem, *angs[v]);
          got++;
        }
      cx.add(simF, "sim_aa", prem);
      continue;
    }
    bool fired = false;
    for (int v = 0; v < 3 && !fired; ++v) {
      if (!angs[v]) continue;
      int e1 = (v + 1) % 3, e2 = (v + 2) % 3;
      if (rat.same(cx.db.ratio_node(A[v], A[e1], A[v], A[e2]),
                   cx.db.ratio_node(D[v], D[e1], D[v], D[e2]))) {
        cx.add(simF, "sim_sas",
               cat(*angs[v],
                   rat.explain(cx.db.ratio_node(A[v], A[e1], A[v], A[e2]),
                               cx.db.ratio_node(D[v], D[e1], D[v], D[e2]))));
        fired = true;
      }
    }
    if (fired) continue;
    int r1a = cx.db.ratio_node(cd.a, cd.b, cd.d, cd.e);
    int r1b = cx.db.ratio_node(cd.b, cd.c, cd.e, cd.f);
    int r1c = cx.db.ratio_node(cd.a, cd.c, cd.d, cd.f);
    if (rat.same(r1a, r1b) && rat.same(r1b, r1c))
      cx.add(simF, "sim_sss",
             cat(rat.explain(r1a, r1b), rat.explain(r1b, r1c)));
  }
}

void r_sim_to_contri(Ctx& cx) {
  auto ids = cx.db.by_pred(Pred::SimTri);
  for (FactId id : ids) {
    if (!cx.budget()) return;
    const Fact f = cx.db.rec(id).fact;
    Fact conF = mk(Pred::Contri, f.pts, f.inverse);
    if (cx.db.stored(conF)) continue;
    static const int sides[3][2] = {{0, 1}, {1, 2}, {0, 2}};
    for (auto& s : sides) {
      int b1 = cx.db.len_base(f.pts[s[0]], f.pts[s[1]]);
      int b2 = cx.db.len_base(f.pts[s[0] + 3], f.pts[s[1] + 3]);
      if (!cx.db.ratios().base_same(b1, b2)) continue;
      cx.add(conF, "sim_side",
             cat({id}, cx.db.ratios().base_explain(b1, b2)));
      break;
    }
  }
}

// ---- chain composition ----

void r_compose(Ctx& cx, bool is_angle) {
  PairRelation& eng = is_angle ? cx.db.angles() : cx.db.ratios();
  struct N {
    int n, ra, rb;
  };
  std::unordered_map<int, std::vector<N>> by_first, by_second;
  for (int n : eng.real_nodes()) {
    int ra = eng.base_find(eng.info(n).a), rb = eng.base_find(eng.info(n).b);
    if (ra == rb) continue;
    by_first[ra].push_back({n, ra, rb});
    by_second[rb].push_back({n, ra, rb});
  }
  // Compositions commute in value, so the class pair is unordered.
  // {class of p, class of q} -> first composition seen, with its order.
  std::map<std::pair<int, int>, std::array<int, 6>> reg;
  for (auto& [m, rights] : by_first) {
    auto itL = by_second.find(m);
    if (itL == by_second.end()) continue;
    for (const N& p : itL->second)    // p = (a, m)
      for (const N& q : rights) {     // q = (m, c)
        if (!cx.budget()) return;
        int kp = eng.find(p.n), kq = eng.find(q.n);
        int n = eng.node(p.ra, q.rb);
        int swapped = kp > kq;
        auto key = std::minmax(kp, kq);
        auto it = reg.find(key);
        if (it == reg.end()) {
          reg[key] = {p.n, q.n, n, p.ra, q.rb, swapped};
          continue;
        }
        auto [p0, q0, n0, ra0, rb0, swapped0] = it->second;
        if (n == n0 || eng.same(n, n0)) continue;
        int ep0 = p0, eq0 = q0;  // explain pairing follows class identity
        if (swapped != swapped0) std::swap(ep0, eq0);
        std::vector<FactId> prem =
            cat(eng.explain(p.n, ep0), eng.explain(q.n, eq0));
        // Base-class facts the compositions rely on: the merged middle
        // classes and any drift of the endpoint classes since creation.
        prem = cat(prem, eng.base_explain(eng.info(p.n).b, eng.info(q.n).a));
        prem = cat(prem, eng.base_explain(eng.info(p0).b, eng.info(q0).a));
        prem = cat(prem, eng.base_explain(eng.info(p.n).a, p.ra));
        prem = cat(prem, eng.base_explain(eng.info(q.n).b, q.rb));
        prem = cat(prem, eng.base_explain(eng.info(p0).a, ra0));
        prem = cat(prem, eng.base_explain(eng.info(q0).b, rb0));
        bool z1 = eng.base_find(p.ra) == eng.base_find(q.rb);
        bool z2 = eng.base_find(ra0) == eng.base_find(rb0);
        if (z1 && z2) continue;
        std::optional<Fact> f;
        if (is_angle) {
          if (z1 || z2) {
            int x = z1 ? ra0 : p.ra, y = z1 ? rb0 : q.rb;
            int rx = eng.base_find(x), ry = eng.base_find(y);
            int la = line_for_dir(cx.db, rx);
            int lb = line_for_dir(cx.db, ry);
            if (la < 0 || lb < 0) continue;
            auto [a, b] = cx.db.line_rep(la);
            auto [c, d] = cx.db.line_rep(lb);
            dir_tie(cx.db, la, {a, b}, rx, prem);
            dir_tie(cx.db, lb, {c, d}, ry, prem);
            f = mk(Pred::Para, {a, b, c, d});
          } else {
            f = angle_fact(cx.db, eng.base_find(p.ra), eng.base_find(q.rb),
                           eng.base_find(ra0), eng.base_find(rb0), prem);
          }
          if (f) cx.add(*f, "a_chain", prem);
        } else {
          auto len_tie = [&](int root) -> std::optional<std::pair<Pt, Pt>> {
            auto rep = cx.db.len_rep(root);
            if (rep.first == kNoPt) return std::nullopt;
            prem = cat(prem, cx.db.ratios().base_explain(
                                 cx.db.len_base(rep.first, rep.second), root));
            return rep;
          };
          if (z1 || z2) {
            int x = z1 ? ra0 : p.ra, y = z1 ? rb0 : q.rb;
            auto s1 = len_tie(eng.base_find(x));
            auto s2 = len_tie(eng.base_find(y));
            if (!s1 || !s2) continue;
            f = mk(Pred::Cong, {s1->first, s1->second, s2->first, s2->second});
          } else {
            auto s1 = len_tie(eng.base_find(q.rb));
            auto s2 = len_tie(eng.base_find(p.ra));
            auto s3 = len_tie(eng.base_find(rb0));
            auto s4 = len_tie(eng.base_find(ra0));
            if (!s1 || !s2 || !s3 || !s4) continue;
            f = mk(Pred::EqRatio,
                   {s1->first, s1->second, s2->first, s2->second, s3->first,
                    s3->second, s4->first, s4->second});
          }
          if (f) cx.add(*f, "r_chain", prem);
        }
      }
  }
}

std::vector<std::array<Pt, 4>> build_concyclic_quads(Database& db) {
  std::vector<std::array<Pt, 4>> out;
  const Diagram& dg = db.diagram();
  Pt n = (Pt)db.point_count();
  for (Pt i = 0; i < n; ++i)
    for (Pt j = (Pt)(i + 1); j < n; ++j)
      for (Pt k = (Pt)(j + 1); k < n; ++k) {
        if (!num_noncollinear(dg, i, j, k)) continue;
        auto cc = num_circumcenter(dg, i, j, k);
        if (!cc) continue;
        auto [ux, uy] = *cc;
        double r = std::hypot(dg.at[i].x - ux, dg.at[i].y - uy);
        for (Pt l = (Pt)(k + 1); l < n; ++l) {
          double rl = std::hypot(dg.at[l].x - ux, dg.at[l].y - uy);
          if (std::abs(rl - r) > 1e-7 * (1 + r)) continue;
          if (!num_noncollinear(dg, i, j, l) ||
              !num_noncollinear(dg, i, k, l) ||
              !num_noncollinear(dg, j, k, l))
            continue;
          out.push_back({i, j, k, l});
          if (out.size() >= 200000) return out;
        }
      }
  return out;
}

SaturationStats run(Database& db, const SaturateLimits& lim) {
  SaturationStats st;
  Ctx cx{db, lim, st, std::chrono::steady_clock::now()};
  auto cands = build_sim_cands(db);
  auto quads = build_concyclic_quads(db);
  while (st.rounds < lim.max_rounds) {
    cx.changed = false;
    r_circle_merge(cx);
    r_center_detect(cx);
    r_center_cong(cx);
    r_line_merge(cx);
    r_para_detect(cx);
    r_cong_detect(cx);
    r_cyclic_angle(cx);
    r_thales(cx);
    r_thales_conv(cx);
    r_midp_detect(cx);
    r_midp_ratio(cx);
    r_midline(cx);
    r_isoceles(cx);
    r_isoceles_conv(cx);
    r_angle_cyclic(cx, quads);
    r_sim(cx, cands);
    r_sim_to_contri(cx);
    r_compose(cx, true);
    r_compose(cx, false);
    st.rounds++;
    if (!cx.changed || st.truncated) break;
  }
  return st;
}

}  // namespace

SaturationStats saturate(Database& db, const SaturateLimits& lim) {
  return run(db, lim);
}

SaturationStats incremental_saturate(Database& db, size_t from_stmt,
                                     const SaturateLimits& lim) {
  db.seed_range(from_stmt, db.seq().src.stmts.size());
  return run(db, lim);
}

const std::vector<std::string>& rule_names() {
  static const std::vector<std::string> names{
      "construction", "a_chain",      "r_chain",      "line_chain",
      "circle_chain", "midp_chain",   "circle_merge", "center_detect",
      "center_cong",  "line_merge",   "para_detect",  "cong_detect",
      "cyclic_angle", "angle_cyclic", "thales",       "thales_conv",
      "midp_detect",  "midp_ratio",   "midline",      "isoceles",
      "isoceles_conv", "sim_aa",      "sim_sas",      "sim_sss",
      "sim_side",     "cong_sss",     "cong_sas",     "cong_rhs"};
  return names;
}

}  // namespace gs
