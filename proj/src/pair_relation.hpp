#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "geom_types.hpp"

namespace gs {

// Union-find that can explain any equivalence by the list of fact ids
// whose merges connect the two elements (proof forest).
class ExplainUF {
 public:
  int add();
  int find(int x) const;
  bool same(int x, int y) const { return find(x) == find(y); }
  bool unite(int x, int y, const std::vector<FactId>& reasons);
  // Facts on the forest path x..y; x and y must be in one class.
  std::vector<FactId> explain(int x, int y) const;
  size_t size() const { return parent_.size(); }

 private:
  mutable std::vector<int> parent_;
  std::vector<int> rank_;
  struct Edge {
    int to;
    std::vector<FactId> reasons;
  };
  std::vector<std::vector<Edge>> forest_;
};

// Relation engine over ordered pairs of base elements. A pair (a, b)
// stands for the difference b - a in an abelian group (line directions
// modulo pi for angles, log segment lengths for ratios). Two pairs are
// related when their differences are known equal. Closure maintained:
//   reversal   (a,b)~(c,d)  =>  (b,a)~(d,c)
//   exchange   (a,b)~(c,d)  =>  (a,c)~(b,d)     (along merge edges)
// The zero class holds pairs with difference 0 (parallel / congruent);
// the right class, when enabled, holds right angles.
class PairRelation {
 public:
  explicit PairRelation(bool with_right);

  int add_base();
  int base_find(int b) const { return base_.find(b); }
  bool base_same(int a, int b) const { return base_.same(a, b); }
  std::vector<FactId> base_explain(int a, int b) const {
    return base_.explain(a, b);
  }
  // Declares two base elements equal (parallel lines / congruent segments).
  void merge_base(int a, int b, const std::vector<FactId>& reasons);

  // Node handles. zero_node() is the identity class; pairs over one base
  // class collapse into it.
  int node(int a, int b);
  int zero_node() const { return zero_; }
  int right_node() const { return right_; }
  bool same(int n1, int n2) const { return uf_.same(n1, n2); }
  int find(int n) const { return uf_.find(n); }
  std::vector<FactId> explain(int n1, int n2) const {
    return uf_.explain(n1, n2);
  }
  void relate(int n1, int n2, const std::vector<FactId>& reasons);

  struct NodeInfo {
    int a = -1, b = -1;  // base class ids at creation; -1 for special nodes
  };
  const NodeInfo& info(int n) const { return info_[n]; }
  // All real pair nodes (excludes zero/right).
  std::vector<int> real_nodes() const;
  size_t node_count() const { return info_.size(); }

 private:
  int get_node(int ra, int rb);  // roots expected

  ExplainUF base_;
  ExplainUF uf_;
  int zero_ = -1, right_ = -1;
  std::vector<NodeInfo> info_;
  std::unordered_map<uint64_t, int> index_;
  std::vector<std::vector<int>> by_base_;  // base root -> nodes mentioning it
};

}  // namespace gs
