#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsl.hpp"
#include "geom_types.hpp"
#include "numeric.hpp"
#include "pair_relation.hpp"

namespace gs {

struct FactRec {
  Fact fact;
  std::string rule;  // "construction" for level-0 facts
  std::vector<FactId> premises;
  int level = 0;
};

// Forward-chaining fact store with semantic indexes: collinearity
// (lines), concyclicity (circles with optional centers), a direction
// relation engine for full angles and a length relation engine for
// ratios. Every index merge carries the fact ids justifying it, so any
// implied relation can be explained by a premise list.
class Database {
 public:
  Database(const ConstructionSequence& seq, const Diagram& diagram,
           ToleranceConfig tol = {});
  Database(const Database&) = default;
  Database& operator=(const Database&) = default;

  // Copies keep pointers into the sequence and diagram they were built
  // from; search nodes that extend the construction must rebind.
  void rebind(const ConstructionSequence& seq, const Diagram& diagram) {
    seq_ = &seq;
    diagram_ = &diagram;
  }

  // Seeds level-0 facts for every statement in the sequence.
  void seed();
  // Seeds only statements [from, to), for incremental extension.
  void seed_range(size_t from, size_t to);

  // Inserts a fact (canonicalized). Returns {id, novel}. An existing
  // fact keeps its old justification unless the new one has lower
  // level, or equal level with fewer premises.
  std::pair<FactId, bool> insert(const Fact& f, const std::string& rule,
                                 const std::vector<FactId>& premises);

  bool stored(const Fact& f) const;
  std::optional<FactId> stored_id(const Fact& f) const;
  // Semantic implication from the indexes (ignores the literal store);
  // on success yields the premise facts explaining it.
  std::optional<std::vector<FactId>> implied(const Fact& f);
  // Stored id if present, else materializes an implied fact as a chain
  // step; nullopt when neither.
  std::optional<FactId> contains_goal(const Fact& goal);
  // Re-derives justifications from the saturated indexes, keeping the
  // replacement only when it lowers a fact's level (or shrinks the
  // premise list at the same level). Shortens extracted proofs.
  void improve_justifications();

  const FactRec& rec(FactId id) const { return recs_[id]; }
  size_t size() const { return recs_.size(); }
  const std::vector<FactId>& by_pred(Pred p) const { return by_pred_[(int)p]; }

  const ConstructionSequence& seq() const { return *seq_; }
  const Diagram& diagram() const { return *diagram_; }
  const ToleranceConfig& tol() const { return tol_; }
  const NameTable& names() const { return seq_->src.names; }
  size_t point_count() const { return seq_->src.names.size(); }
  bool check(const Fact& f) const { return holds(*diagram_, f, tol_); }

  // ---- lines ----
  struct Line {
    std::vector<Pt> pts;  // sorted
    int dir = -1;         // base id in the angle engine
    bool alive = true;
    // Proof forest over the member points.
    std::unordered_map<Pt, std::pair<Pt, std::vector<FactId>>> parent;
  };
  // Line through a and b, created on demand.
  int line_of(Pt a, Pt b);
  // Existing line through a and b, without creating one.
  std::optional<int> peek_line(Pt a, Pt b) const;
  const Line& line(int id) const { return lines_[id]; }
  size_t line_count() const { return lines_.size(); }
  bool collinear(Pt a, Pt b, Pt c) const;
  // Facts placing all of pts on line l together.
  std::vector<FactId> explain_on_line(int l, const std::vector<Pt>& pts) const;
  // Two points of l spanning the queried direction (for printing).
  std::pair<Pt, Pt> line_rep(int l) const;

  // ---- circles ----
  struct Circle {
    std::vector<Pt> pts;  // sorted
    bool alive = true;
    std::unordered_map<Pt, std::vector<FactId>> why;  // empty for base pts
    Pt center = kNoPt;
    std::vector<FactId> center_why;
  };
  // Circle already containing all of pts (>= 3), if any.
  std::optional<int> find_circle(const std::vector<Pt>& pts) const;
  // Circle through a base triple, created on demand (triple must be
  // numerically non-collinear; caller's responsibility).
  int ensure_circle(Pt a, Pt b, Pt c);
  bool add_to_circle(int c, Pt p, std::vector<FactId> why);
  bool set_center(int c, Pt o, std::vector<FactId> why);
  // Structural merge of circles sharing >= 3 points. Returns survivor.
  int merge_circles(int c1, int c2);
  const Circle& circle(int id) const { return circles_[id]; }
  size_t circle_count() const { return circles_.size(); }
  std::vector<int> circles_alive() const;
  std::vector<FactId> explain_on_circle(int c,
                                        const std::vector<Pt>& pts) const;

  // ---- angle and ratio engines ----
  PairRelation& angles() { return angles_; }
  PairRelation& ratios() { return ratios_; }
  // Angle engine node for the ordered pair of line directions.
  int angle_node(int l1, int l2);
  // Angle node for the pair (line(p,v), line(v,q)) of a 3-point angle.
  int angle_node_of(Pt p, Pt v, Pt q);
  // Direction base for a segment; merged into its line's direction with
  // the membership facts as reasons, so explanations stay complete.
  int seg_dir(Pt a, Pt b);
  int len_base(Pt a, Pt b);
  int ratio_node(Pt a, Pt b, Pt c, Pt d);  // len(cd) - len(ab)
  // Representative segment currently spanning a length class root.
  std::pair<Pt, Pt> len_rep(int root) const;
  // Segment that created each length base, indexed by base id.
  const std::vector<std::pair<Pt, Pt>>& len_segs() const { return len_seg_; }
  std::vector<int> lines_alive() const;

  // The two angle-engine nodes named by an eqangle/para/perp fact's two
  // sides; nullopt for malformed input.
  std::optional<std::pair<int, int>> fact_angle_nodes(const Fact& f);

 private:
  void index_fact(FactId id);
  void merge_lines(int keep, int absorb, Pt pa, Pt pb,
                   const std::vector<FactId>& reasons);
  void register_seg(Pt a, Pt b, int line);
  std::vector<FactId> line_path(int l, Pt a, Pt b) const;

  const ConstructionSequence* seq_;
  const Diagram* diagram_;
  ToleranceConfig tol_;

  std::vector<FactRec> recs_;
  std::unordered_map<Fact, FactId, FactHash> dedup_;
  std::vector<std::vector<FactId>> by_pred_;

  std::vector<Line> lines_;
  std::unordered_map<uint32_t, int> seg2line_;
  std::unordered_map<uint32_t, int> seg2dir_;
  std::vector<Circle> circles_;
  std::unordered_map<uint32_t, int> seg2len_;

  PairRelation angles_{true};
  PairRelation ratios_{false};
  std::vector<std::pair<Pt, Pt>> len_seg_;  // len base id -> defining seg
  std::vector<std::pair<Pt, Pt>> dir_seg_;  // dir base id -> defining seg
};

}  // namespace gs
