#include "database.hpp"

#include <algorithm>
#include <cassert>

namespace gs {

namespace {

void merge_into(std::vector<FactId>& dst, const std::vector<FactId>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void dedup_ids(std::vector<FactId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool has_pt(const std::vector<Pt>& v, Pt p) {
  return std::binary_search(v.begin(), v.end(), p);
}

void add_pt(std::vector<Pt>& v, Pt p) {
  auto it = std::lower_bound(v.begin(), v.end(), p);
  if (it == v.end() || *it != p) v.insert(it, p);
}

}  // namespace

Database::Database(const ConstructionSequence& seq, const Diagram& diagram,
                   ToleranceConfig tol)
    : seq_(&seq), diagram_(&diagram), tol_(tol) {
  by_pred_.resize(10);
}

void Database::seed() { seed_range(0, seq_->src.stmts.size()); }

void Database::seed_range(size_t from, size_t to) {
  for (size_t i = from; i < to && i < seq_->src.stmts.size(); ++i)
    for (const Fact& f : emitted_facts(seq_->src.stmts[i]))
      insert(f, "construction", {});
}

// ---- lines ----

int Database::line_of(Pt a, Pt b) {
  assert(a != b);
  auto it = seg2line_.find(seg_key(a, b));
  if (it != seg2line_.end()) return it->second;
  int id = (int)lines_.size();
  Line l;
  l.pts = {std::min(a, b), std::max(a, b)};
  l.dir = angles_.add_base();
  l.parent[a] = {a, {}};
  l.parent[b] = {a, {}};
  lines_.push_back(std::move(l));
  dir_seg_.push_back({a, b});
  seg2line_[seg_key(a, b)] = id;
  seg2dir_[seg_key(a, b)] = lines_[id].dir;
  return id;
}

std::optional<int> Database::peek_line(Pt a, Pt b) const {
  auto it = seg2line_.find(seg_key(a, b));
  if (it == seg2line_.end()) return std::nullopt;
  return it->second;
}

bool Database::collinear(Pt a, Pt b, Pt c) const {
  auto l = peek_line(a, b);
  return l && has_pt(lines_[*l].pts, c);
}

std::vector<FactId> Database::line_path(int l, Pt a, Pt b) const {
  if (a == b) return {};
  const Line& ln = lines_[l];
  auto chain = [&](Pt p) {
    std::vector<Pt> c{p};
    while (true) {
      Pt up = ln.parent.at(c.back()).first;
      if (up == c.back()) break;
      c.push_back(up);
    }
    return c;
  };
  std::vector<Pt> ca = chain(a), cb = chain(b);
  // Trim the common suffix up to the lowest common ancestor.
  while (ca.size() > 1 && cb.size() > 1 &&
         ca[ca.size() - 2] == cb[cb.size() - 2]) {
    ca.pop_back();
    cb.pop_back();
  }
  // One chain may end inside the other.
  auto trim_tail = [&](std::vector<Pt>& longer, const std::vector<Pt>& shorter) {
    while (longer.size() > 1 && longer.back() != shorter.back())
      longer.pop_back();
  };
  if (ca.back() != cb.back()) {
    // shouldn't happen inside one line's forest
    return {};
  }
  (void)trim_tail;
  std::vector<FactId> out;
  for (size_t i = 0; i + 1 < ca.size(); ++i)
    merge_into(out, ln.parent.at(ca[i]).second);
  for (size_t i = 0; i + 1 < cb.size(); ++i)
    merge_into(out, ln.parent.at(cb[i]).second);
  dedup_ids(out);
  return out;
}

std::vector<FactId> Database::explain_on_line(int l,
                                              const std::vector<Pt>& pts) const {
  std::vector<FactId> out;
  for (size_t i = 1; i < pts.size(); ++i)
    merge_into(out, line_path(l, pts[0], pts[i]));
  dedup_ids(out);
  return out;
}

std::pair<Pt, Pt> Database::line_rep(int l) const {
  const Line& ln = lines_[l];
  return {ln.pts[0], ln.pts[1]};
}

void Database::register_seg(Pt a, Pt b, int line) {
  uint32_t key = seg_key(a, b);
  auto it = seg2line_.find(key);
  if (it == seg2line_.end() || it->second == line) {
    seg2line_[key] = line;
    return;
  }
  // Two live lines both contain a and b: definitionally the same line.
  int other = it->second;
  std::vector<FactId> reasons = line_path(line, a, b);
  merge_into(reasons, line_path(other, a, b));
  dedup_ids(reasons);
  seg2line_[key] = line;
  merge_lines(line, other, a, a, reasons);
}

void Database::merge_lines(int keep, int absorb, Pt pa, Pt pb,
                           const std::vector<FactId>& reasons) {
  if (keep == absorb) return;
  Line& lk = lines_[keep];
  std::vector<Pt> added;
  {
    const Line& la = lines_[absorb];
    for (Pt q : la.pts) {
      if (has_pt(lk.pts, q)) continue;
      std::vector<FactId> why = line_path(absorb, q, pb);
      merge_into(why, reasons);
      dedup_ids(why);
      lk.parent[q] = {pa, std::move(why)};
      added.push_back(q);
    }
  }
  for (Pt q : added) add_pt(lk.pts, q);
  angles_.merge_base(lk.dir, lines_[absorb].dir, reasons);
  lines_[absorb].alive = false;
  // Repoint segment keys; collect collisions with third lines first so
  // the recursive merges see a consistent map.
  std::vector<std::pair<int, std::pair<Pt, Pt>>> collisions;
  for (Pt x : added)
    for (Pt y : lk.pts) {
      if (x == y) continue;
      uint32_t key = seg_key(x, y);
      auto it = seg2line_.find(key);
      if (it != seg2line_.end() && it->second != keep && it->second != absorb &&
          lines_[it->second].alive)
        collisions.push_back({it->second, {x, y}});
      seg2line_[key] = keep;
    }
  for (auto& [third, seg] : collisions) {
    if (!lines_[third].alive) continue;
    std::vector<FactId> r = line_path(keep, seg.first, seg.second);
    merge_into(r, line_path(third, seg.first, seg.second));
    dedup_ids(r);
    merge_lines(keep, third, seg.first, seg.first, r);
  }
}

// ---- circles ----

std::optional<int> Database::find_circle(const std::vector<Pt>& pts) const {
  for (int i = 0; i < (int)circles_.size(); ++i) {
    if (!circles_[i].alive) continue;
    bool all = true;
    for (Pt p : pts)
      if (!has_pt(circles_[i].pts, p)) {
        all = false;
        break;
      }
    if (all) return i;
  }
  return std::nullopt;
}

int Database::ensure_circle(Pt a, Pt b, Pt c) {
  if (auto f = find_circle({a, b, c})) return *f;
  Circle cr;
  cr.pts = {a, b, c};
  std::sort(cr.pts.begin(), cr.pts.end());
  circles_.push_back(std::move(cr));
  return (int)circles_.size() - 1;
}

bool Database::add_to_circle(int c, Pt p, std::vector<FactId> why) {
  Circle& cr = circles_[c];
  if (has_pt(cr.pts, p)) return false;
  add_pt(cr.pts, p);
  dedup_ids(why);
  cr.why[p] = std::move(why);
  return true;
}

bool Database::set_center(int c, Pt o, std::vector<FactId> why) {
  Circle& cr = circles_[c];
  if (cr.center != kNoPt) return false;
  cr.center = o;
  dedup_ids(why);
  cr.center_why = std::move(why);
  return true;
}

int Database::merge_circles(int c1, int c2) {
  if (c1 == c2) return c1;
  if (circles_[c1].pts.size() < circles_[c2].pts.size()) std::swap(c1, c2);
  Circle& keep = circles_[c1];
  Circle& absorb = circles_[c2];
  std::vector<Pt> shared;
  for (Pt p : absorb.pts)
    if (has_pt(keep.pts, p)) shared.push_back(p);
  assert(shared.size() >= 3);
  std::vector<FactId> bridge;
  for (size_t i = 0; i < 3; ++i) {
    merge_into(bridge, explain_on_circle(c1, {shared[i]}));
    merge_into(bridge, explain_on_circle(c2, {shared[i]}));
  }
  dedup_ids(bridge);
  for (Pt p : absorb.pts) {
    if (has_pt(keep.pts, p)) continue;
    std::vector<FactId> why = bridge;
    auto it = absorb.why.find(p);
    if (it != absorb.why.end()) merge_into(why, it->second);
    add_to_circle(c1, p, std::move(why));
  }
  if (keep.center == kNoPt && absorb.center != kNoPt) {
    std::vector<FactId> why = bridge;
    merge_into(why, absorb.center_why);
    set_center(c1, absorb.center, std::move(why));
  }
  absorb.alive = false;
  return c1;
}

std::vector<int> Database::lines_alive() const {
  std::vector<int> out;
  for (int i = 0; i < (int)lines_.size(); ++i)
    if (lines_[i].alive) out.push_back(i);
  return out;
}

std::vector<int> Database::circles_alive() const {
  std::vector<int> out;
  for (int i = 0; i < (int)circles_.size(); ++i)
    if (circles_[i].alive) out.push_back(i);
  return out;
}

std::vector<FactId> Database::explain_on_circle(
    int c, const std::vector<Pt>& pts) const {
  std::vector<FactId> out;
  const Circle& cr = circles_[c];
  for (Pt p : pts) {
    auto it = cr.why.find(p);
    if (it != cr.why.end()) merge_into(out, it->second);
  }
  dedup_ids(out);
  return out;
}

// ---- engines ----

int Database::angle_node(int l1, int l2) {
  return angles_.node(lines_[l1].dir, lines_[l2].dir);
}

int Database::seg_dir(Pt a, Pt b) {
  uint32_t key = seg_key(a, b);
  auto it = seg2dir_.find(key);
  if (it != seg2dir_.end()) return it->second;
  int l = line_of(a, b);
  auto it2 = seg2dir_.find(key);  // line_of registers the defining seg
  if (it2 != seg2dir_.end()) return it2->second;
  int d = angles_.add_base();
  dir_seg_.push_back({std::min(a, b), std::max(a, b)});
  angles_.merge_base(d, lines_[l].dir, explain_on_line(l, {a, b}));
  seg2dir_[key] = d;
  return d;
}

int Database::angle_node_of(Pt p, Pt v, Pt q) {
  return angles_.node(seg_dir(v, p), seg_dir(v, q));
}

int Database::len_base(Pt a, Pt b) {
  uint32_t key = seg_key(a, b);
  auto it = seg2len_.find(key);
  if (it != seg2len_.end()) return it->second;
  int id = ratios_.add_base();
  seg2len_[key] = id;
  len_seg_.push_back({std::min(a, b), std::max(a, b)});
  return id;
}

int Database::ratio_node(Pt a, Pt b, Pt c, Pt d) {
  return ratios_.node(len_base(a, b), len_base(c, d));
}

std::pair<Pt, Pt> Database::len_rep(int root) const {
  for (int i = 0; i < (int)len_seg_.size(); ++i)
    if (ratios_.base_find(i) == root) return len_seg_[i];
  return {kNoPt, kNoPt};
}

std::optional<std::pair<int, int>> Database::fact_angle_nodes(const Fact& f) {
  if (f.pred == Pred::EqAngle) {
    if (f.pts.size() == 6)
      return std::make_pair(angle_node_of(f.pts[0], f.pts[1], f.pts[2]),
                            angle_node_of(f.pts[3], f.pts[4], f.pts[5]));
    if (f.pts.size() == 8)
      return std::make_pair(
          angles_.node(seg_dir(f.pts[0], f.pts[1]), seg_dir(f.pts[2], f.pts[3])),
          angles_.node(seg_dir(f.pts[4], f.pts[5]), seg_dir(f.pts[6], f.pts[7])));
    return std::nullopt;
  }
  if (f.pred == Pred::Perp) {
    if (f.pts.size() == 3)
      return std::make_pair(angle_node_of(f.pts[0], f.pts[1], f.pts[2]),
                            angles_.right_node());
    if (f.pts.size() == 4)
      return std::make_pair(
          angles_.node(seg_dir(f.pts[0], f.pts[1]), seg_dir(f.pts[2], f.pts[3])),
          angles_.right_node());
    return std::nullopt;
  }
  if (f.pred == Pred::Para && f.pts.size() == 4)
    return std::make_pair(
        angles_.node(seg_dir(f.pts[0], f.pts[1]), seg_dir(f.pts[2], f.pts[3])),
        angles_.zero_node());
  return std::nullopt;
}

// ---- store ----

void Database::index_fact(FactId id) {
  const Fact& f = recs_[id].fact;
  const std::vector<Pt>& p = f.pts;
  switch (f.pred) {
    case Pred::Cong:
      ratios_.merge_base(len_base(p[0], p[1]), len_base(p[2], p[3]), {id});
      break;
    case Pred::EqAngle:
    case Pred::Perp: {
      auto nodes = fact_angle_nodes(f);
      if (nodes) angles_.relate(nodes->first, nodes->second, {id});
      break;
    }
    case Pred::Para:
      angles_.merge_base(seg_dir(p[0], p[1]), seg_dir(p[2], p[3]), {id});
      break;
    case Pred::EqRatio:
      // ab/cd = ef/gh: difference of log lengths.
      ratios_.relate(ratio_node(p[2], p[3], p[0], p[1]),
                     ratio_node(p[6], p[7], p[4], p[5]), {id});
      break;
    case Pred::EqLine: {
      int l1 = line_of(p[0], p[1]);
      int l2 = line_of(p[2], p[3]);
      if (l1 != l2) merge_lines(l1, l2, p[0], p[2], {id});
      break;
    }
    case Pred::Midp: {
      Pt m = p[0], a = p[1], b = p[2];
      ratios_.merge_base(len_base(m, a), len_base(m, b), {id});
      int l = line_of(a, b);
      if (!has_pt(lines_[l].pts, m)) {
        int lm = line_of(a, m);
        if (lm != l) merge_lines(l, lm, a, a, {id});
      }
      break;
    }
    case Pred::EqCircle: {
      Pt c1 = p[0], c2 = p[4];
      std::vector<Pt> t1{p[1], p[2], p[3]}, t2{p[5], p[6], p[7]};
      auto f1 = find_circle(t1);
      int h1 = f1 ? *f1 : ensure_circle(t1[0], t1[1], t1[2]);
      auto f2 = find_circle(t2);
      int h2 = f2 ? *f2 : ensure_circle(t2[0], t2[1], t2[2]);
      if (h1 != h2) {
        std::vector<FactId> bridge{id};
        merge_into(bridge, explain_on_circle(h1, t1));
        merge_into(bridge, explain_on_circle(h2, t2));
        dedup_ids(bridge);
        int big = h1, small = h2;
        if (circles_[big].pts.size() < circles_[small].pts.size())
          std::swap(big, small);
        for (Pt q : circles_[small].pts) {
          std::vector<FactId> why = bridge;
          merge_into(why, explain_on_circle(small, {q}));
          add_to_circle(big, q, std::move(why));
        }
        if (circles_[big].center == kNoPt &&
            circles_[small].center != kNoPt) {
          std::vector<FactId> why = bridge;
          merge_into(why, circles_[small].center_why);
          set_center(big, circles_[small].center, std::move(why));
        }
        circles_[small].alive = false;
        h1 = big;
      }
      if (c1 != kNoPt) set_center(h1, c1, {id});
      if (c2 != kNoPt) set_center(h1, c2, {id});
      break;
    }
    case Pred::SimTri:
    case Pred::Contri: {
      Pt a = p[0], b = p[1], c = p[2], d = p[3], e = p[4], g = p[5];
      // Vertex angles; an inverse correspondence negates them.
      auto rel = [&](Pt v1, Pt x1, Pt y1, Pt v2, Pt x2, Pt y2) {
        int n1 = angle_node_of(x1, v1, y1);
        int n2 = f.inverse ? angle_node_of(y2, v2, x2)
                           : angle_node_of(x2, v2, y2);
        angles_.relate(n1, n2, {id});
      };
      rel(a, b, c, d, e, g);
      rel(b, a, c, e, d, g);
      rel(c, a, b, g, d, e);
      ratios_.relate(ratio_node(a, b, d, e), ratio_node(b, c, e, g), {id});
      ratios_.relate(ratio_node(b, c, e, g), ratio_node(a, c, d, g), {id});
      if (f.pred == Pred::Contri) {
        ratios_.merge_base(len_base(a, b), len_base(d, e), {id});
        ratios_.merge_base(len_base(b, c), len_base(e, g), {id});
        ratios_.merge_base(len_base(a, c), len_base(d, g), {id});
      }
      break;
    }
  }
}

std::pair<FactId, bool> Database::insert(const Fact& fin,
                                         const std::string& rule,
                                         const std::vector<FactId>& premises) {
  Fact f = canonical(fin);
  int level = 0;
  if (rule != "construction") {
    level = 1;
    for (FactId pid : premises) level = std::max(level, recs_[pid].level + 1);
  }
  auto it = dedup_.find(f);
  if (it != dedup_.end()) {
    FactRec& old = recs_[it->second];
    if (level < old.level ||
        (level == old.level && premises.size() < old.premises.size())) {
      old.rule = rule;
      old.premises = premises;
      old.level = level;
    }
    return {it->second, false};
  }
  FactId id = (FactId)recs_.size();
  recs_.push_back({f, rule, premises, level});
  dedup_.emplace(f, id);
  by_pred_[(int)f.pred].push_back(id);
  index_fact(id);
  return {id, true};
}

bool Database::stored(const Fact& f) const {
  return dedup_.count(canonical(f)) > 0;
}

std::optional<FactId> Database::stored_id(const Fact& f) const {
  auto it = dedup_.find(canonical(f));
  if (it == dedup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<FactId>> Database::implied(const Fact& fin) {
  Fact f = canonical(fin);
  const std::vector<Pt>& p = f.pts;
  switch (f.pred) {
    case Pred::Cong: {
      int b1 = len_base(p[0], p[1]), b2 = len_base(p[2], p[3]);
      if (!ratios_.base_same(b1, b2)) return std::nullopt;
      return ratios_.base_explain(b1, b2);
    }
    case Pred::EqAngle:
    case Pred::Perp: {
      auto nodes = fact_angle_nodes(f);
      if (!nodes || !angles_.same(nodes->first, nodes->second))
        return std::nullopt;
      return angles_.explain(nodes->first, nodes->second);
    }
    case Pred::Para: {
      int d1 = seg_dir(p[0], p[1]), d2 = seg_dir(p[2], p[3]);
      if (!angles_.base_same(d1, d2)) return std::nullopt;
      return angles_.base_explain(d1, d2);
    }
    case Pred::EqRatio: {
      int n1 = ratio_node(p[2], p[3], p[0], p[1]);
      int n2 = ratio_node(p[6], p[7], p[4], p[5]);
      if (!ratios_.same(n1, n2)) return std::nullopt;
      return ratios_.explain(n1, n2);
    }
    case Pred::EqLine: {
      auto l = peek_line(p[0], p[1]);
      if (!l || !has_pt(lines_[*l].pts, p[2]) ||
          !has_pt(lines_[*l].pts, p[3]))
        return std::nullopt;
      return explain_on_line(*l, {p[0], p[1], p[2], p[3]});
    }
    case Pred::EqCircle: {
      std::vector<Pt> pts{p[1], p[2], p[3], p[5], p[6], p[7]};
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      auto c = find_circle(pts);
      if (!c) return std::nullopt;
      std::vector<FactId> out = explain_on_circle(*c, pts);
      for (Pt o : {p[0], p[4]}) {
        if (o == kNoPt) continue;
        if (circles_[*c].center != o) return std::nullopt;
        merge_into(out, circles_[*c].center_why);
      }
      dedup_ids(out);
      return out;
    }
    case Pred::Midp: {
      Pt m = p[0], a = p[1], b = p[2];
      if (!collinear(a, b, m)) return std::nullopt;
      int b1 = len_base(m, a), b2 = len_base(m, b);
      if (!ratios_.base_same(b1, b2)) return std::nullopt;
      std::vector<FactId> out =
          explain_on_line(*peek_line(a, b), {a, b, m});
      merge_into(out, ratios_.base_explain(b1, b2));
      dedup_ids(out);
      return out;
    }
    case Pred::SimTri:
    case Pred::Contri:
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {
const char* chain_rule_name(Pred p) {
  switch (p) {
    case Pred::EqAngle:
    case Pred::Para:
    case Pred::Perp:
      return "a_chain";
    case Pred::Cong:
    case Pred::EqRatio:
      return "r_chain";
    case Pred::EqLine:
      return "line_chain";
    case Pred::EqCircle:
      return "circle_chain";
    case Pred::Midp:
      return "midp_chain";
    default:
      return "chain";
  }
}
}  // namespace

void Database::improve_justifications() {
  for (int pass = 0; pass < 3; ++pass) {
    bool changed = false;
    for (FactId id = 0; id < (FactId)recs_.size(); ++id) {
      if (recs_[id].level == 0) continue;
      auto j = implied(recs_[id].fact);
      if (!j) continue;
      bool self = false;
      int lvl = 1;
      for (FactId p : *j) {
        if (p == id) self = true;
        lvl = std::max(lvl, recs_[p].level + 1);
      }
      if (self) continue;
      FactRec& r = recs_[id];
      // Strict level drop keeps the level function a topological witness;
      // at equal level every premise is still strictly below.
      if (lvl < r.level ||
          (lvl == r.level && j->size() < r.premises.size())) {
        r.rule = chain_rule_name(r.fact.pred);
        r.premises = *j;
        r.level = lvl;
        changed = true;
      }
    }
    if (!changed) break;
  }
}

std::optional<FactId> Database::contains_goal(const Fact& goal) {
  Fact f = canonical(goal);
  if (auto id = stored_id(f)) return id;
  auto prem = implied(f);
  if (!prem) return std::nullopt;
  const char* rule = "chain";
  switch (f.pred) {
    case Pred::EqAngle:
    case Pred::Para:
    case Pred::Perp:
      rule = "a_chain";
      break;
    case Pred::Cong:
    case Pred::EqRatio:
      rule = "r_chain";
      break;
    case Pred::EqLine:
      rule = "line_chain";
      break;
    case Pred::EqCircle:
      rule = "circle_chain";
      break;
    case Pred::Midp:
      rule = "midp_chain";
      break;
    default:
      break;
  }
  return insert(f, rule, *prem).first;
}

}  // namespace gs
