#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gs {

using Pt = uint16_t;
inline constexpr Pt kNoPt = 0xffff;
using FactId = int32_t;

// The nine predicate families. Contri is listed separately from SimTri
// because the trace grammar distinguishes them.
enum class Pred : uint8_t {
  Cong,
  EqAngle,
  EqRatio,
  EqLine,
  EqCircle,
  Midp,
  Perp,
  Para,
  SimTri,
  Contri,
};

const char* pred_name(Pred p);
std::optional<Pred> pred_from_name(std::string_view s);

// Argument layouts (pts):
//   cong      a b c d            segments (a,b) (c,d)
//   eqangle   p v q  p' v' q'    angle at v between lines vp,vq (6 points)
//             a b c d e f g h    line pairs (ab,cd) (ef,gh)     (8 points)
//   eqratio   a b c d e f g h    ab/cd = ef/gh
//   eqline    a b c d            segments on one line
//   eqcircle  c1 a b c  c2 d e f centers may be kNoPt ("None")
//   midp      m a b
//   perp      a v b              right angle at v (3 points)
//             a b c d            ab perpendicular to cd (4 points)
//   para      a b c d
//   simtri    a b c d e f        correspondence a-d b-e c-f, inverse flag
//   contri    same as simtri
struct Fact {
  Pred pred{};
  std::vector<Pt> pts;
  bool inverse = false;
  bool operator==(const Fact&) const = default;
};

struct FactHash {
  size_t operator()(const Fact& f) const;
};

bool well_formed(const Fact& f);

// Normal form: within unordered slots points sorted, slot lists sorted,
// symmetry group of the predicate applied, lexicographically least chosen.
// Idempotent.
Fact canonical(const Fact& f);

// Segment helper: ordered pair key.
inline uint32_t seg_key(Pt a, Pt b) {
  if (a > b) std::swap(a, b);
  return (uint32_t(a) << 16) | b;
}

class NameTable {
 public:
  Pt intern(const std::string& name);
  std::optional<Pt> find(const std::string& name) const;
  const std::string& name(Pt p) const;
  size_t size() const { return names_.size(); }
  bool all_single_char() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Pt> index_;
};

// Trace grammar serialization: `pred (SLOT, SLOT, ...)` with slot points
// concatenated when every point name is a single character, otherwise one
// name per comma-separated token.
std::string format_fact(const Fact& f, const NameTable& nt);

// Parses the text between the parentheses of a serialized fact.
std::optional<Fact> parse_fact_args(Pred pred, std::string_view args,
                                    const NameTable& nt, std::string* err);

// Builds a fact from a flat point list (the `goal` statement form).
std::optional<Fact> fact_from_points(Pred pred, const std::vector<Pt>& pts,
                                     std::string* err);

}  // namespace gs
