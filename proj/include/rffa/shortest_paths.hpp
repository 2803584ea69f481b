#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rffa/network.hpp"

namespace rffa {

namespace detail {
inline bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}
}  // namespace detail

/// Least-cost distances to a set of destinations over real arcs, plus one
/// canonical successor per (node, destination) on a shortest path.
class DistanceTable {
 public:
  DistanceTable() = default;

  std::span<const NodeId> destinations() const { return destinations_; }

  bool has_destination(NodeId j) const { return column(j) != kNoSlot; }

  /// Cost of a least-cost path from -> to; infinity when unreachable.
  double dist(NodeId from, NodeId to) const {
    return dist_[require(to) * node_count_ + from];
  }

  /// Lowest-id neighbor k of `from` with c(from,k) + dist(k,to) = dist(from,to),
  /// restricted to nodes settled earlier so successor chains never cycle.
  NodeId next_hop(NodeId from, NodeId to) const {
    return next_[require(to) * node_count_ + from];
  }

  /// Node sequence of the canonical shortest path; empty when unreachable.
  std::vector<NodeId> canonical_path(NodeId from, NodeId to) const {
    std::vector<NodeId> path;
    if (!std::isfinite(dist(from, to))) return path;
    path.push_back(from);
    for (NodeId cur = from; cur != to;) {
      cur = next_hop(cur, to);
      path.push_back(cur);
    }
    return path;
  }

  std::size_t node_count() const { return node_count_; }

 private:
  friend DistanceTable all_pairs_shortest(const Network&, std::span<const NodeId>);
  static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

  std::size_t column(NodeId j) const {
    auto it = std::lower_bound(destinations_.begin(), destinations_.end(), j);
    if (it == destinations_.end() || *it != j) return kNoSlot;
    return static_cast<std::size_t>(it - destinations_.begin());
  }
  std::size_t require(NodeId j) const {
    std::size_t c = column(j);
    if (c == kNoSlot) {
      throw std::out_of_range("node " + std::to_string(j) +
                              " is not a destination of this distance table");
    }
    return c;
  }

  std::size_t node_count_ = 0;
  std::vector<NodeId> destinations_;
  std::vector<double> dist_;
  std::vector<NodeId> next_;
};

/// One reverse Dijkstra per requested destination. Virtual arcs are ignored.
inline DistanceTable all_pairs_shortest(const Network& net,
                                        std::span<const NodeId> destinations) {
  DistanceTable table;
  const std::size_t n = net.node_count();
  table.node_count_ = n;
  table.destinations_.assign(destinations.begin(), destinations.end());
  std::sort(table.destinations_.begin(), table.destinations_.end());
  table.destinations_.erase(
      std::unique(table.destinations_.begin(), table.destinations_.end()),
      table.destinations_.end());
  table.dist_.assign(table.destinations_.size() * n, kInfinity);
  table.next_.assign(table.destinations_.size() * n, kNoNode);

  using Entry = std::pair<double, NodeId>;
  std::vector<std::size_t> rank(n);
  std::vector<char> settled(n);
  for (std::size_t col = 0; col < table.destinations_.size(); ++col) {
    const NodeId j = table.destinations_[col];
    double* dist = table.dist_.data() + col * n;
    NodeId* next = table.next_.data() + col * n;
    std::fill(settled.begin(), settled.end(), 0);
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[j] = 0.0;
    heap.emplace(0.0, j);
    std::size_t order = 0;
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (settled[u]) continue;
      settled[u] = 1;
      rank[u] = order++;
      for (const Link& l : net.in_links(u)) {
        const Arc& a = net.arc(l.arc);
        if (a.is_virtual) continue;
        double cand = d + a.cost;
        if (cand < dist[l.neighbor]) {
          dist[l.neighbor] = cand;
          heap.emplace(cand, l.neighbor);
        }
      }
    }
    for (NodeId i = 0; i < n; ++i) {
      if (i == j || !settled[i]) continue;
      for (const Link& l : net.out_links(i)) {  // ascending neighbor id
        const Arc& a = net.arc(l.arc);
        if (a.is_virtual || !settled[l.neighbor] || rank[l.neighbor] >= rank[i]) continue;
        if (detail::nearly_equal(a.cost + dist[l.neighbor], dist[i])) {
          next[i] = l.neighbor;
          break;
        }
      }
    }
  }
  return table;
}

}  // namespace rffa
