#include "numeric.hpp"

#include <cmath>
#include <sstream>

namespace gs {

namespace {

struct Vec {
  double x, y;
};
Vec operator-(Coords a, Coords b) { return {a.x - b.x, a.y - b.y}; }
Coords operator+(Coords a, Vec v) { return {a.x + v.x, a.y + v.y}; }
Vec operator*(double k, Vec v) { return {k * v.x, k * v.y}; }
double cross(Vec a, Vec b) { return a.x * b.y - a.y * b.x; }
double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }
double norm(Vec a) { return std::hypot(a.x, a.y); }
Vec unit(Vec a) {
  double n = norm(a);
  return n > 0 ? Vec{a.x / n, a.y / n} : Vec{0, 0};
}
Vec perp_of(Vec a) { return {-a.y, a.x}; }
double dist(Coords a, Coords b) { return norm(a - b); }

std::optional<Coords> line_line(Coords a, Coords b, Coords c, Coords d) {
  Vec u = b - a, v = d - c;
  double den = cross(u, v);
  double scale = norm(u) * norm(v);
  if (scale == 0 || std::fabs(den) < 1e-12 * scale) return std::nullopt;
  double t = cross(c - a, v) / den;
  return a + t * u;
}

std::optional<Coords> circumcenter_of(Coords a, Coords b, Coords c) {
  Vec ab = b - a, ac = c - a;
  double den = 2 * cross(ab, ac);
  double scale = norm(ab) * norm(ac);
  if (scale == 0 || std::fabs(den) < 1e-10 * scale) return std::nullopt;
  double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
  Vec o{(ac.y * ab2 - ab.y * ac2) / den, (ab.x * ac2 - ac.x * ab2) / den};
  return a + o;
}

// Picks between two candidate intersections: prefer the one separated from
// every listed anchor point; ties broken by lexicographically larger
// coordinates for reproducibility.
std::optional<Coords> pick_solution(std::optional<Coords> c1,
                                    std::optional<Coords> c2,
                                    const std::vector<Coords>& anchors,
                                    double sep) {
  auto clear_of = [&](const Coords& c) {
    for (auto& a : anchors)
      if (dist(c, a) < sep) return false;
    return true;
  };
  bool ok1 = c1 && clear_of(*c1), ok2 = c2 && clear_of(*c2);
  if (ok1 && ok2) {
    auto key = [](const Coords& c) { return std::make_pair(c.x, c.y); };
    return key(*c1) > key(*c2) ? c1 : c2;
  }
  if (ok1) return c1;
  if (ok2) return c2;
  return std::nullopt;
}

}  // namespace

uint64_t Rng::next() {
  // splitmix64
  s_ += 0x9e3779b97f4a7c15ull;
  uint64_t z = s_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  double u = double(next() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

std::optional<Coords> realize_statement(const std::vector<Coords>& at,
                                        const Statement& st, Rng* rng,
                                        const ToleranceConfig& tol) {
  auto P = [&](int i) { return at[st.args[i]]; };
  switch (st.kind) {
    case Kind::FreePoint:
      if (!rng) return std::nullopt;
      return Coords{rng->uniform(-1, 1), rng->uniform(-1, 1)};
    case Kind::Midpoint:
      return Coords{(P(0).x + P(1).x) / 2, (P(0).y + P(1).y) / 2};
    case Kind::Foot: {
      Vec u = P(2) - P(1);
      double n2 = dot(u, u);
      if (n2 < 1e-18) return std::nullopt;
      double t = dot(P(0) - P(1), u) / n2;
      return P(1) + t * u;
    }
    case Kind::Reflect:
      return Coords{2 * P(1).x - P(0).x, 2 * P(1).y - P(0).y};
    case Kind::ExtendEqual:
      return Coords{2 * P(1).x - P(0).x, 2 * P(1).y - P(0).y};
    case Kind::Incenter:
    case Kind::Excenter: {
      double a = dist(P(1), P(2)), b = dist(P(0), P(2)), c = dist(P(0), P(1));
      double wa = st.kind == Kind::Incenter ? a : -a;
      double den = wa + b + c;
      if (std::fabs(den) < 1e-9) return std::nullopt;
      return Coords{(wa * P(0).x + b * P(1).x + c * P(2).x) / den,
                    (wa * P(0).y + b * P(1).y + c * P(2).y) / den};
    }
    case Kind::Circumcenter:
      return circumcenter_of(P(0), P(1), P(2));
    case Kind::Orthocenter: {
      auto o = circumcenter_of(P(0), P(1), P(2));
      if (!o) return std::nullopt;
      return Coords{P(0).x + P(1).x + P(2).x - 2 * o->x,
                    P(0).y + P(1).y + P(2).y - 2 * o->y};
    }
    case Kind::IntersectLineLine:
      return line_line(P(0), P(1), P(2), P(3));
    case Kind::SecondIntersectLineCircle: {
      auto o = circumcenter_of(P(2), P(3), P(4));
      if (!o) return std::nullopt;
      double r = dist(*o, P(2));
      Vec u = unit(P(1) - P(0));
      if (norm(P(1) - P(0)) < 1e-12) return std::nullopt;
      double tm = dot(*o - P(0), u);
      Coords m = P(0) + tm * u;
      double h2 = r * r - dot(m - *o, m - *o);
      if (h2 < -tol.abs_tol) return std::nullopt;
      double h = std::sqrt(std::max(0.0, h2));
      return pick_solution(m + h * u, m + (-h) * u, {P(0)},
                           tol.separation_min);
    }
    case Kind::SecondIntersectCircleCircle: {
      auto o1 = circumcenter_of(P(1), P(2), P(3));
      auto o2 = circumcenter_of(P(4), P(5), P(6));
      if (!o1 || !o2) return std::nullopt;
      double r1 = dist(*o1, P(1)), r2 = dist(*o2, P(4));
      double d = dist(*o1, *o2);
      if (d < 1e-9) return std::nullopt;
      double a = (r1 * r1 - r2 * r2 + d * d) / (2 * d);
      double h2 = r1 * r1 - a * a;
      if (h2 < -tol.abs_tol) return std::nullopt;
      double h = std::sqrt(std::max(0.0, h2));
      Vec u = unit(*o2 - *o1);
      Coords m = *o1 + a * u;
      Vec n = perp_of(u);
      return pick_solution(m + h * n, m + (-h) * n, {P(0)},
                           tol.separation_min);
    }
    case Kind::ParallelMeet: {
      Vec u = P(2) - P(1);
      return line_line(P(0), P(0) + u, P(3), P(4));
    }
    case Kind::PerpMeet: {
      Vec u = perp_of(P(2) - P(1));
      return line_line(P(0), P(0) + u, P(3), P(4));
    }
    case Kind::ArcMidpoint: {
      auto o = circumcenter_of(P(0), P(1), P(2));
      if (!o) return std::nullopt;
      double r = dist(*o, P(0));
      Coords mid{(P(0).x + P(1).x) / 2, (P(0).y + P(1).y) / 2};
      Vec n = unit(mid - *o);
      if (norm(mid - *o) < 1e-12) {
        // Chord through center: diametral, use chord normal.
        n = unit(perp_of(P(1) - P(0)));
      }
      Coords m1 = *o + r * n, m2 = *o + (-r) * n;
      // Arc midpoint on the opposite side of chord AB from C.
      Vec ab = P(1) - P(0);
      double sc = cross(ab, P(2) - P(0));
      auto side = [&](Coords m) { return cross(ab, m - P(0)); };
      if (side(m1) * sc < 0) return m1;
      if (side(m2) * sc < 0) return m2;
      return std::nullopt;
    }
    case Kind::Antipode: {
      auto o = circumcenter_of(P(1), P(2), P(3));
      if (!o) return std::nullopt;
      double r = dist(*o, P(1));
      if (std::fabs(dist(*o, P(0)) - r) > 1e-6 * (1 + r)) return std::nullopt;
      return Coords{2 * o->x - P(0).x, 2 * o->y - P(0).y};
    }
    case Kind::Parallelogram4:
      return Coords{P(0).x + P(2).x - P(1).x, P(0).y + P(2).y - P(1).y};
    case Kind::AngleBisectorMeet: {
      double ca = dist(P(0), P(1)), cb = dist(P(0), P(2));
      double den = ca + cb;
      if (den < 1e-12) return std::nullopt;
      return Coords{(cb * P(1).x + ca * P(2).x) / den,
                    (cb * P(1).y + ca * P(2).y) / den};
    }
    case Kind::PerpAtPointMeet: {
      Vec u = perp_of(P(1) - P(0));
      return line_line(P(0), P(0) + u, P(2), P(3));
    }
    case Kind::OnCircle: {
      if (!rng) return std::nullopt;
      auto o = circumcenter_of(P(0), P(1), P(2));
      if (!o) return std::nullopt;
      double r = dist(*o, P(0));
      double th = rng->uniform(0, 2 * M_PI);
      return Coords{o->x + r * std::cos(th), o->y + r * std::sin(th)};
    }
  }
  return std::nullopt;
}

RealizeResult realize(const ConstructionSequence& seq, uint64_t seed,
                      const ToleranceConfig& tol) {
  RealizeResult res;
  size_t n = seq.src.names.size();
  std::string last_err = "degenerate";
  for (int attempt = 0; attempt < tol.resample_limit; ++attempt) {
    Rng rng(seed * 0x9e3779b97f4a7c15ull + uint64_t(attempt) + 1);
    std::vector<Coords> at(n);
    std::vector<bool> placed(n, false);
    bool ok = true;
    auto sep_ok = [&](Pt p) {
      for (size_t q = 0; q < n; ++q)
        if (placed[q] && q != p && dist(at[p], at[q]) < tol.separation_min)
          return false;
      return true;
    };
    for (Pt p : seq.src.free_pts) {
      at[p] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      placed[p] = true;
      if (!sep_ok(p)) {
        ok = false;
        last_err = "coincident free points";
        break;
      }
    }
    for (size_t i = 0; ok && i < seq.src.stmts.size(); ++i) {
      auto& st = seq.src.stmts[i];
      auto c = realize_statement(at, st, &rng, tol);
      if (!c || !std::isfinite(c->x) || !std::isfinite(c->y) ||
          std::fabs(c->x) > 1e9 || std::fabs(c->y) > 1e9) {
        ok = false;
        last_err = "unrealizable or degenerate construction " +
                   std::string(kind_info(st.kind)->name);
        break;
      }
      at[st.out] = *c;
      placed[st.out] = true;
      if (!sep_ok(st.out)) {
        ok = false;
        last_err = "coincident points at " +
                   std::string(kind_info(st.kind)->name);
        break;
      }
    }
    if (ok) {
      res.status = RealizeStatus::Ok;
      res.diagram.at = std::move(at);
      res.diagram.seed = seed;
      return res;
    }
  }
  res.status = RealizeStatus::DegenerateAfterRetries;
  res.message = last_err;
  return res;
}

namespace {

// Tangent comparison of two line pairs, cross-multiplied, on unit vectors.
bool same_angle(Vec u1, Vec v1, Vec u2, Vec v2, double tol) {
  u1 = unit(u1), v1 = unit(v1), u2 = unit(u2), v2 = unit(v2);
  double t1 = cross(u1, v1), d1 = dot(u1, v1);
  double t2 = cross(u2, v2), d2 = dot(u2, v2);
  return std::fabs(t1 * d2 - t2 * d1) <= tol;
}

}  // namespace

bool holds(const Diagram& d, const Fact& f, const ToleranceConfig& tol) {
  auto& at = d.at;
  auto C = [&](int i) { return at[f.pts[i]]; };
  double eps = tol.abs_tol;
  switch (f.pred) {
    case Pred::Cong: {
      double a = dist(C(0), C(1)), b = dist(C(2), C(3));
      return std::fabs(a - b) <= eps * (1 + a + b);
    }
    case Pred::Midp: {
      Coords m{(C(1).x + C(2).x) / 2, (C(1).y + C(2).y) / 2};
      return dist(C(0), m) <= eps * (1 + dist(C(1), C(2)));
    }
    case Pred::EqLine: {
      Vec u = unit(C(1) - C(0));
      if (norm(C(1) - C(0)) < 1e-12) return false;
      for (int i = 2; i < 4; ++i) {
        Vec w = C(i) - C(0);
        if (std::fabs(cross(u, w)) > eps * (1 + norm(w))) return false;
      }
      return true;
    }
    case Pred::Para: {
      Vec u = C(1) - C(0), v = C(3) - C(2);
      if (norm(u) < 1e-12 || norm(v) < 1e-12) return false;
      return std::fabs(cross(unit(u), unit(v))) <= eps;
    }
    case Pred::Perp: {
      Vec u, v;
      if (f.pts.size() == 3) {
        u = C(0) - C(1);
        v = C(2) - C(1);
      } else {
        u = C(1) - C(0);
        v = C(3) - C(2);
      }
      if (norm(u) < 1e-12 || norm(v) < 1e-12) return false;
      return std::fabs(dot(unit(u), unit(v))) <= eps;
    }
    case Pred::EqAngle: {
      Vec u1, v1, u2, v2;
      if (f.pts.size() == 6) {
        u1 = C(0) - C(1), v1 = C(2) - C(1);
        u2 = C(3) - C(4), v2 = C(5) - C(4);
      } else {
        u1 = C(1) - C(0), v1 = C(3) - C(2);
        u2 = C(5) - C(4), v2 = C(7) - C(6);
      }
      if (norm(u1) < 1e-12 || norm(v1) < 1e-12 || norm(u2) < 1e-12 ||
          norm(v2) < 1e-12)
        return false;
      return same_angle(u1, v1, u2, v2, eps);
    }
    case Pred::EqRatio: {
      double a = dist(C(0), C(1)), b = dist(C(2), C(3));
      double c = dist(C(4), C(5)), e = dist(C(6), C(7));
      // a/b = c/e cross-multiplied.
      return std::fabs(a * e - c * b) <= eps * (1 + a * e + c * b);
    }
    case Pred::EqCircle: {
      // pts: c1 a b c  c2 d e f
      Coords tri[3] = {at[f.pts[1]], at[f.pts[2]], at[f.pts[3]]};
      auto o = circumcenter_of(tri[0], tri[1], tri[2]);
      if (!o) return false;
      double r = dist(*o, tri[0]);
      for (int i : {5, 6, 7})
        if (std::fabs(dist(*o, at[f.pts[i]]) - r) > eps * (1 + r))
          return false;
      for (int i : {0, 4})
        if (f.pts[i] != kNoPt && dist(*o, at[f.pts[i]]) > eps * (1 + r))
          return false;
      return true;
    }
    case Pred::SimTri:
    case Pred::Contri: {
      // Complex-ratio test: direct iff (C-A)/(B-A) == (F-D)/(E-D),
      // inverse iff it equals the conjugate.
      Vec ab = C(1) - C(0), ac = C(2) - C(0);
      Vec de = C(4) - C(3), df = C(5) - C(3);
      double n1 = dot(ab, ab), n2 = dot(de, de);
      if (n1 < 1e-18 || n2 < 1e-18) return false;
      // z1 = ac/ab, z2 = df/de (complex division)
      double z1r = (ac.x * ab.x + ac.y * ab.y) / n1;
      double z1i = (ac.y * ab.x - ac.x * ab.y) / n1;
      double z2r = (df.x * de.x + df.y * de.y) / n2;
      double z2i = (df.y * de.x - df.x * de.y) / n2;
      double scale = 1 + std::fabs(z1r) + std::fabs(z1i);
      bool sim;
      if (!f.inverse)
        sim = std::fabs(z1r - z2r) <= eps * scale &&
              std::fabs(z1i - z2i) <= eps * scale;
      else
        sim = std::fabs(z1r - z2r) <= eps * scale &&
              std::fabs(z1i + z2i) <= eps * scale;
      if (!sim) return false;
      if (f.pred == Pred::Contri) {
        double a = std::sqrt(n1), b = std::sqrt(n2);
        if (std::fabs(a - b) > eps * (1 + a + b)) return false;
      }
      return true;
    }
  }
  return false;
}

bool verify_fact(const ConstructionSequence& seq, const Fact& f, int k,
                 uint64_t base_seed, const ToleranceConfig& tol) {
  for (int i = 0; i < k; ++i) {
    auto r = realize(seq, base_seed + uint64_t(i) * 7919, tol);
    if (r.status != RealizeStatus::Ok) return false;
    if (!holds(r.diagram, f, tol)) return false;
  }
  return true;
}

std::string diagram_svg(const Diagram& d, const NameTable& names) {
  double minx = 1e30, miny = 1e30, maxx = -1e30, maxy = -1e30;
  for (auto& c : d.at) {
    minx = std::min(minx, c.x), maxx = std::max(maxx, c.x);
    miny = std::min(miny, c.y), maxy = std::max(maxy, c.y);
  }
  double w = std::max(1e-6, maxx - minx), h = std::max(1e-6, maxy - miny);
  double s = 500 / std::max(w, h);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" "
        "height=\"560\" viewBox=\"0 0 560 560\">\n";
  for (size_t i = 0; i < d.at.size(); ++i) {
    double x = 30 + (d.at[i].x - minx) * s;
    double y = 530 - (d.at[i].y - miny) * s;
    os << "  <circle cx=\"" << x << "\" cy=\"" << y
       << "\" r=\"3\" fill=\"black\"/>\n";
    os << "  <text x=\"" << x + 5 << "\" y=\"" << y - 5 << "\">"
       << names.name(Pt(i)) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gs
