#include "pair_relation.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <tuple>

namespace gs {

int ExplainUF::add() {
  int id = (int)parent_.size();
  parent_.push_back(id);
  rank_.push_back(0);
  forest_.emplace_back();
  return id;
}

int ExplainUF::find(int x) const {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool ExplainUF::unite(int x, int y, const std::vector<FactId>& reasons) {
  int rx = find(x), ry = find(y);
  if (rx == ry) return false;
  if (rank_[rx] < rank_[ry]) std::swap(rx, ry);
  if (rank_[rx] == rank_[ry]) rank_[rx]++;
  parent_[ry] = rx;
  forest_[x].push_back({y, reasons});
  forest_[y].push_back({x, reasons});
  return true;
}

std::vector<FactId> ExplainUF::explain(int x, int y) const {
  if (x == y) return {};
  // BFS in the forest; the path between two nodes of a tree is unique.
  std::vector<int> prev(parent_.size(), -1);
  std::vector<const std::vector<FactId>*> via(parent_.size(), nullptr);
  std::deque<int> q{x};
  prev[x] = x;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    if (u == y) break;
    for (const auto& e : forest_[u]) {
      if (prev[e.to] < 0) {
        prev[e.to] = u;
        via[e.to] = &e.reasons;
        q.push_back(e.to);
      }
    }
  }
  std::vector<FactId> out;
  if (prev[y] < 0) return out;  // not connected; callers check same() first
  for (int u = y; u != x; u = prev[u])
    out.insert(out.end(), via[u]->begin(), via[u]->end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PairRelation::PairRelation(bool with_right) {
  zero_ = uf_.add();
  info_.push_back({});
  if (with_right) {
    right_ = uf_.add();
    info_.push_back({});
  }
}

int PairRelation::add_base() {
  int b = base_.add();
  by_base_.emplace_back();
  return b;
}

static uint64_t pair_key(int a, int b) {
  return ((uint64_t)(uint32_t)a << 32) | (uint32_t)b;
}

int PairRelation::get_node(int ra, int rb) {
  if (ra == rb) return zero_;
  auto it = index_.find(pair_key(ra, rb));
  if (it != index_.end()) return it->second;
  int n = uf_.add();
  info_.push_back({ra, rb});
  index_.emplace(pair_key(ra, rb), n);
  by_base_[ra].push_back(n);
  by_base_[rb].push_back(n);
  return n;
}

int PairRelation::node(int a, int b) {
  int ra = base_.find(a), rb = base_.find(b);
  int canon = get_node(ra, rb);
  if (a == ra && b == rb) return canon;
  // A pair over non-root elements gets its own node, bridged to the
  // canonical node by the base merges that identify the elements with
  // their roots. Explanations between nodes then carry those facts.
  auto it = index_.find(pair_key(a, b));
  if (it != index_.end()) return it->second;
  int n = uf_.add();
  info_.push_back({a, b});
  index_.emplace(pair_key(a, b), n);
  by_base_[ra].push_back(n);
  by_base_[rb].push_back(n);
  std::vector<FactId> bridge = base_.explain(a, ra);
  auto eb = base_.explain(b, rb);
  bridge.insert(bridge.end(), eb.begin(), eb.end());
  relate(n, canon, bridge);
  return n;
}

void PairRelation::relate(int n1, int n2, const std::vector<FactId>& reasons) {
  // Worklist so the reversal and exchange consequences cascade.
  std::deque<std::tuple<int, int, std::vector<FactId>>> work;
  work.emplace_back(n1, n2, reasons);
  while (!work.empty()) {
    auto [p, q, rs] = work.front();
    work.pop_front();
    if (!uf_.unite(p, q, rs)) continue;
    // by value: node creation below may reallocate info_
    const NodeInfo ip = info_[p], iq = info_[q];
    bool preal = ip.a >= 0, qreal = iq.a >= 0;
    // Consequences are stated over current base roots; tie the stored
    // elements to their roots so each forest edge stands on its own.
    std::vector<FactId> crs = rs;
    auto tie = [&](int x) {
      auto e = base_.explain(x, base_.find(x));
      crs.insert(crs.end(), e.begin(), e.end());
    };
    if (preal) tie(ip.a), tie(ip.b);
    if (qreal) tie(iq.a), tie(iq.b);
    if (preal || qreal) {
      int rp = preal ? get_node(base_.find(ip.b), base_.find(ip.a)) : p;
      int rq = qreal ? get_node(base_.find(iq.b), base_.find(iq.a)) : q;
      if (rp != p || rq != q) work.emplace_back(rp, rq, crs);
    }
    if (preal && qreal) {
      int xa = get_node(base_.find(ip.a), base_.find(iq.a));
      int xb = get_node(base_.find(ip.b), base_.find(iq.b));
      if (xa != xb) work.emplace_back(xa, xb, crs);
    }
  }
}

void PairRelation::merge_base(int a, int b, const std::vector<FactId>& reasons) {
  int ra = base_.find(a), rb = base_.find(b);
  if (ra == rb) return;
  // Unite on the elements themselves: the reasons justify a ~ b, and
  // the forest edge must sit between them for explanations to be exact.
  base_.unite(a, b, reasons);
  int root = base_.find(ra);
  int dead = root == ra ? rb : ra;
  // Rewire pairs built over the absorbed class onto the surviving root.
  // Each old node stays a valid handle; it gets united with the node
  // under the new key, justified by the base facts now tying its
  // elements to the roots.
  std::vector<int> moved = by_base_[dead];
  for (int n : moved) {
    const NodeInfo& in = info_[n];
    int na = base_.find(in.a), nb = base_.find(in.b);
    std::vector<FactId> why = base_.explain(in.a, na);
    auto eb = base_.explain(in.b, nb);
    why.insert(why.end(), eb.begin(), eb.end());
    relate(n, get_node(na, nb), why);
  }
  for (int n : moved) by_base_[root].push_back(n);
  std::sort(by_base_[root].begin(), by_base_[root].end());
  by_base_[root].erase(
      std::unique(by_base_[root].begin(), by_base_[root].end()),
      by_base_[root].end());
}

std::vector<int> PairRelation::real_nodes() const {
  std::vector<int> out;
  for (int n = 0; n < (int)info_.size(); ++n)
    if (info_[n].a >= 0) out.push_back(n);
  return out;
}

}  // namespace gs
