#include "geom_types.hpp"

#include <set>

#include <algorithm>
#include <array>
#include <cassert>
#include <sstream>

namespace gs {

const char* pred_name(Pred p) {
  switch (p) {
    case Pred::Cong: return "cong";
    case Pred::EqAngle: return "eqangle";
    case Pred::EqRatio: return "eqratio";
    case Pred::EqLine: return "eqline";
    case Pred::EqCircle: return "eqcircle";
    case Pred::Midp: return "midp";
    case Pred::Perp: return "perp";
    case Pred::Para: return "para";
    case Pred::SimTri: return "simtri";
    case Pred::Contri: return "contri";
  }
  return "?";
}

std::optional<Pred> pred_from_name(std::string_view s) {
  static const std::pair<std::string_view, Pred> table[] = {
      {"cong", Pred::Cong},         {"eqangle", Pred::EqAngle},
      {"eqratio", Pred::EqRatio},   {"eqline", Pred::EqLine},
      {"eqcircle", Pred::EqCircle}, {"midp", Pred::Midp},
      {"perp", Pred::Perp},         {"para", Pred::Para},
      {"simtri", Pred::SimTri},     {"contri", Pred::Contri},
  };
  for (auto& [n, p] : table)
    if (n == s) return p;
  return std::nullopt;
}

size_t FactHash::operator()(const Fact& f) const {
  size_t h = 1469598103934665603ull ^ size_t(f.pred) ^ (f.inverse ? 0x9e37u : 0);
  for (Pt p : f.pts) {
    h ^= p;
    h *= 1099511628211ull;
  }
  return h;
}

bool well_formed(const Fact& f) {
  size_t n = f.pts.size();
  const auto& p = f.pts;
  auto seg_ok = [&](size_t i) { return p[i] != p[i + 1]; };
  auto same_seg = [&](size_t i, size_t j) {
    return (p[i] == p[j] && p[i + 1] == p[j + 1]) ||
           (p[i] == p[j + 1] && p[i + 1] == p[j]);
  };
  auto tri_ok = [&](size_t i) {
    return p[i] != p[i + 1] && p[i] != p[i + 2] && p[i + 1] != p[i + 2];
  };
  for (Pt q : p)
    if (q == kNoPt && f.pred != Pred::EqCircle) return false;
  switch (f.pred) {
    case Pred::Cong:
      return n == 4 && seg_ok(0) && seg_ok(2) && !same_seg(0, 2);
    case Pred::EqAngle:
      if (n == 6)
        return p[0] != p[1] && p[2] != p[1] && p[0] != p[2] && p[3] != p[4] &&
               p[5] != p[4] && p[3] != p[5];
      return n == 8 && seg_ok(0) && seg_ok(2) && seg_ok(4) && seg_ok(6) &&
             !same_seg(0, 2) && !same_seg(4, 6);
    case Pred::EqRatio:
      return n == 8 && seg_ok(0) && seg_ok(2) && seg_ok(4) && seg_ok(6) &&
             !(same_seg(0, 4) && same_seg(2, 6)) &&
             !(same_seg(0, 2) && same_seg(4, 6));
    case Pred::EqLine:
      return n == 4 && seg_ok(0) && seg_ok(2) && !same_seg(0, 2);
    case Pred::EqCircle: {
      if (n != 8 || !tri_ok(1) || !tri_ok(5)) return false;
      for (int i : {1, 2, 3, 5, 6, 7})
        if (p[i] == kNoPt) return false;
      bool same_triple = std::multiset<Pt>{p[1], p[2], p[3]} ==
                         std::multiset<Pt>{p[5], p[6], p[7]};
      if (same_triple && p[0] == kNoPt && p[4] == kNoPt) return false;
      return true;
    }
    case Pred::Midp:
      return n == 3 && p[0] != p[1] && p[0] != p[2] && p[1] != p[2];
    case Pred::Perp:
      if (n == 3) return p[0] != p[1] && p[2] != p[1] && p[0] != p[2];
      return n == 4 && seg_ok(0) && seg_ok(2);
    case Pred::Para:
      return n == 4 && seg_ok(0) && seg_ok(2) && !same_seg(0, 2);
    case Pred::SimTri:
    case Pred::Contri:
      return n == 6 && tri_ok(0) && tri_ok(3) &&
             !(p[0] == p[3] && p[1] == p[4] && p[2] == p[5]);
  }
  return false;
}

namespace {

void sort_seg(Pt* s) {
  if (s[0] > s[1]) std::swap(s[0], s[1]);
}

// Lexicographic compare of two equal-length point vectors.
bool pt_less(const std::vector<Pt>& a, const std::vector<Pt>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<Pt> min_variant(std::vector<std::vector<Pt>> variants) {
  std::vector<Pt> best = variants[0];
  for (size_t i = 1; i < variants.size(); ++i)
    if (pt_less(variants[i], best)) best = variants[i];
  return best;
}

std::vector<Pt> two_segs_canonical(std::vector<Pt> v) {
  sort_seg(&v[0]);
  sort_seg(&v[2]);
  if (std::make_pair(v[0], v[1]) > std::make_pair(v[2], v[3])) {
    std::swap(v[0], v[2]);
    std::swap(v[1], v[3]);
  }
  return v;
}

}  // namespace

Fact canonical(const Fact& f) {
  Fact r = f;
  auto& v = r.pts;
  switch (f.pred) {
    case Pred::Cong:
    case Pred::Para:
    case Pred::EqLine:
      v = two_segs_canonical(v);
      break;
    case Pred::Midp:
      if (v[1] > v[2]) std::swap(v[1], v[2]);
      break;
    case Pred::Perp:
      if (v.size() == 3) {
        if (v[0] > v[2]) std::swap(v[0], v[2]);
      } else {
        v = two_segs_canonical(v);
      }
      break;
    case Pred::EqAngle: {
      if (v.size() == 6) {
        // Variants: swap the two angles, flip both rays.
        std::vector<Pt> a{v[0], v[1], v[2]}, b{v[3], v[4], v[5]};
        std::vector<Pt> fa{v[2], v[1], v[0]}, fb{v[5], v[4], v[3]};
        auto cat = [](const std::vector<Pt>& x, const std::vector<Pt>& y) {
          std::vector<Pt> r = x;
          r.insert(r.end(), y.begin(), y.end());
          return r;
        };
        v = min_variant({cat(a, b), cat(b, a), cat(fa, fb), cat(fb, fa)});
      } else {
        for (int i = 0; i < 8; i += 2) sort_seg(&v[i]);
        std::vector<Pt> s1{v[0], v[1]}, s2{v[2], v[3]}, s3{v[4], v[5]},
            s4{v[6], v[7]};
        auto cat4 = [](std::vector<Pt> a, const std::vector<Pt>& b,
                       const std::vector<Pt>& c, const std::vector<Pt>& d) {
          a.insert(a.end(), b.begin(), b.end());
          a.insert(a.end(), c.begin(), c.end());
          a.insert(a.end(), d.begin(), d.end());
          return a;
        };
        v = min_variant({cat4(s1, s2, s3, s4), cat4(s3, s4, s1, s2),
                         cat4(s2, s1, s4, s3), cat4(s4, s3, s2, s1)});
      }
      break;
    }
    case Pred::EqRatio: {
      for (int i = 0; i < 8; i += 2) sort_seg(&v[i]);
      // a/b = c/d transformations preserving truth.
      std::array<Pt, 8> s;
      std::copy(v.begin(), v.end(), s.begin());
      auto seg = [&](int i) { return std::vector<Pt>{s[2 * i], s[2 * i + 1]}; };
      static const int perms[8][4] = {{0, 1, 2, 3}, {2, 3, 0, 1}, {1, 0, 3, 2},
                                      {3, 2, 1, 0}, {0, 2, 1, 3}, {2, 0, 3, 1},
                                      {1, 3, 0, 2}, {3, 1, 2, 0}};
      std::vector<std::vector<Pt>> variants;
      for (auto& p : perms) {
        std::vector<Pt> x;
        for (int i : p) {
          auto sg = seg(i);
          x.insert(x.end(), sg.begin(), sg.end());
        }
        variants.push_back(std::move(x));
      }
      v = min_variant(variants);
      break;
    }
    case Pred::EqCircle: {
      auto unit = [&](int off) {
        std::vector<Pt> u(v.begin() + off, v.begin() + off + 4);
        std::sort(u.begin() + 1, u.end());
        return u;
      };
      auto a = unit(0), b = unit(4);
      // kNoPt is numerically largest, so "None" centers sort last within
      // equal triples; order units lexicographically by (triple, center).
      auto key = [](const std::vector<Pt>& u) {
        return std::vector<Pt>{u[1], u[2], u[3], u[0]};
      };
      if (pt_less(key(b), key(a))) std::swap(a, b);
      v.assign(a.begin(), a.end());
      v.insert(v.end(), b.begin(), b.end());
      break;
    }
    case Pred::SimTri:
    case Pred::Contri: {
      static const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                                      {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
      std::vector<std::vector<Pt>> variants;
      for (auto& p : perms) {
        std::vector<Pt> x{v[p[0]], v[p[1]], v[p[2]],
                          v[3 + p[0]], v[3 + p[1]], v[3 + p[2]]};
        variants.push_back(x);
        std::vector<Pt> y{x[3], x[4], x[5], x[0], x[1], x[2]};
        variants.push_back(std::move(y));
      }
      v = min_variant(variants);
      break;
    }
  }
  return r;
}

Pt NameTable::intern(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  Pt id = Pt(names_.size());
  names_.push_back(name);
  index_.emplace(name, id);
  return id;
}

std::optional<Pt> NameTable::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& NameTable::name(Pt p) const { return names_.at(p); }

bool NameTable::all_single_char() const {
  for (auto& n : names_)
    if (n.size() != 1) return false;
  return true;
}

namespace {

// Slot layout per predicate: sizes of consecutive groups. Center slots in
// eqcircle have size 1 and may hold kNoPt.
std::vector<int> slot_sizes(Pred p, size_t npts) {
  switch (p) {
    case Pred::Cong:
    case Pred::Para:
    case Pred::EqLine: return {2, 2};
    case Pred::EqAngle:
      return npts == 6 ? std::vector<int>{3, 3} : std::vector<int>{2, 2, 2, 2};
    case Pred::EqRatio: return {2, 2, 2, 2};
    case Pred::EqCircle: return {1, 3, 1, 3};
    case Pred::Midp: return {1, 2};
    case Pred::Perp:
      return npts == 3 ? std::vector<int>{3} : std::vector<int>{2, 2};
    case Pred::SimTri:
    case Pred::Contri: return {3, 3};
  }
  return {};
}

}  // namespace

std::string format_fact(const Fact& f, const NameTable& nt) {
  bool concat = true;
  for (Pt p : f.pts)
    if (p != kNoPt && nt.name(p).size() != 1) concat = false;
  std::ostringstream os;
  os << pred_name(f.pred) << " (";
  auto slots = slot_sizes(f.pred, f.pts.size());
  size_t idx = 0;
  for (size_t s = 0; s < slots.size(); ++s) {
    if (s) os << ", ";
    for (int i = 0; i < slots[s]; ++i, ++idx) {
      Pt p = f.pts[idx];
      if (p == kNoPt) {
        os << "None";
      } else {
        if (!concat && i) os << ", ";
        os << nt.name(p);
      }
    }
  }
  os << ")";
  return os.str();
}

std::optional<Fact> fact_from_points(Pred pred, const std::vector<Pt>& pts,
                                     std::string* err) {
  Fact f;
  f.pred = pred;
  f.pts = pts;
  if (pred == Pred::EqLine && pts.size() == 3) {
    f.pts = {pts[0], pts[1], pts[1], pts[2]};
  }
  if (pred == Pred::EqCircle && pts.size() == 6) {
    f.pts = {kNoPt, pts[0], pts[1], pts[2], kNoPt, pts[3], pts[4], pts[5]};
  }
  if (!well_formed(f)) {
    if (err) *err = std::string("bad arity for ") + pred_name(pred);
    return std::nullopt;
  }
  return canonical(f);
}

std::optional<Fact> parse_fact_args(Pred pred, std::string_view args,
                                    const NameTable& nt, std::string* err) {
  // Tokenize on commas.
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : args) {
    if (c == ',') {
      tokens.push_back(cur);
      cur.clear();
    } else if (!isspace((unsigned char)c)) {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(cur);

  // Expand each token into point ids. A token is either "None", a known
  // point name, or a concatenation of single-character names.
  std::vector<Pt> flat;
  for (auto& t : tokens) {
    if (t == "None") {
      flat.push_back(kNoPt);
      continue;
    }
    if (auto p = nt.find(t)) {
      flat.push_back(*p);
      continue;
    }
    bool ok = true;
    std::vector<Pt> expanded;
    for (char c : t) {
      auto p = nt.find(std::string(1, c));
      if (!p) {
        ok = false;
        break;
      }
      expanded.push_back(*p);
    }
    if (!ok) {
      if (err) *err = "unknown point in token '" + t + "'";
      return std::nullopt;
    }
    flat.insert(flat.end(), expanded.begin(), expanded.end());
  }

  std::vector<Pt> pts;
  if (pred == Pred::EqCircle) {
    if (flat.size() == 8)
      pts = flat;
    else if (flat.size() == 6)
      pts = {kNoPt, flat[0], flat[1], flat[2],
             kNoPt, flat[3], flat[4], flat[5]};
    else if (flat.size() == 7) {
      // One named center: rely on token layout (4 slots).
      if (err) *err = "ambiguous eqcircle arity";
      return std::nullopt;
    }
  } else {
    pts = flat;
  }
  return fact_from_points(pred, pts, err);
}

}  // namespace gs
