#pragma once

// Admissible first front stations per (node, destination), filtered by the
// relative detour ratio with the common tail toward the destination removed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rffa/network.hpp"
#include "rffa/shortest_paths.hpp"
#include "rffa/virtual_extension.hpp"

namespace rffa {

/// (rho_k - common) / (rho - common); nullopt when rho equals the common tail.
inline std::optional<double> relative_detour(double rho, double rho_k, double common) {
  double denom = rho - common;
  if (denom <= 1e-9 * std::max(1.0, rho)) return std::nullopt;
  return (rho_k - common) / denom;
}

/// Detour ratio of leaving i toward j through neighbor k. The common tail is
/// the shared suffix of the canonical shortest path i->j and the path
/// i->k->(canonical k->j). Undefined when k cannot reach j, when the path via
/// k passes back through i, or when the whole shortest path is shared.
inline std::optional<double> detour_ratio(const Network& net, const DistanceTable& dist,
                                          NodeId i, NodeId j, NodeId k) {
  auto arc = net.find_arc(i, k);
  if (!arc || net.arc(*arc).is_virtual) return std::nullopt;
  const double rho = dist.dist(i, j);
  const double tail = dist.dist(k, j);
  if (!std::isfinite(rho) || !std::isfinite(tail)) return std::nullopt;
  const double rho_k = net.arc(*arc).cost + tail;

  std::vector<NodeId> direct = dist.canonical_path(i, j);
  std::vector<NodeId> via = dist.canonical_path(k, j);
  if (std::find(via.begin(), via.end(), i) != via.end()) return std::nullopt;
  via.insert(via.begin(), i);

  // Walk both node sequences backward from j while they agree.
  std::size_t a = direct.size() - 1;
  std::size_t b = via.size() - 1;
  while (a > 0 && b > 0 && direct[a - 1] == via[b - 1]) {
    --a;
    --b;
  }
  const double common = dist.dist(direct[a], j);

  if (detail::nearly_equal(rho_k, rho)) return 1.0;
  return relative_detour(rho, rho_k, common);
}

struct Candidate {
  NodeId next = kNoNode;
  ArcId arc = kNoArc;
  bool is_virtual = false;
  // NaN for virtual successors.
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

struct CandidateOptions {
  double epsilon = 1.4;
  bool prune = true;
};

/// Candidate successor lists over the (possibly extended) network, stored per
/// pair index `slot * node_count + node`.
class CandidateTable {
 public:
  std::size_t node_count() const { return node_count_; }
  std::size_t slot_count() const { return slot_count_; }
  double epsilon() const { return epsilon_; }

  std::size_t pair_index(NodeId node, std::size_t slot) const {
    return slot * node_count_ + node;
  }

  std::span<const Candidate> at(std::size_t pair) const {
    return {entries_.data() + offsets_[pair], entries_.data() + offsets_[pair + 1]};
  }
  std::span<const Candidate> at(NodeId node, std::size_t slot) const {
    return at(pair_index(node, slot));
  }

  /// Index of the canonical shortest-path successor in at(pair), or of the
  /// first virtual successor when the pair has no real route.
  std::uint32_t preferred(std::size_t pair) const { return preferred_[pair]; }

  /// Pairs with at least one candidate, ascending.
  const std::vector<std::size_t>& pairs() const { return pairs_; }
  /// Pairs offering a real choice (two or more candidates).
  const std::vector<std::size_t>& movable_pairs() const { return movable_; }
  /// Pairs whose ratio filter would have emptied the list.
  const std::vector<std::size_t>& fallback_pairs() const { return fallback_; }

  /// |Omega|: number of distinct single-pair moves from any assignment.
  std::size_t neighborhood_size() const { return neighborhood_; }

  /// Product of list sizes, saturating at the double range.
  double assignment_count() const {
    double product = 1.0;
    for (std::size_t p : movable_) product *= static_cast<double>(at(p).size());
    return product;
  }

  std::size_t real_entry_count() const {
    std::size_t total = 0;
    for (const Candidate& c : entries_) total += c.is_virtual ? 0 : 1;
    return total;
  }

 private:
  friend CandidateTable build_candidates(const ExtendedNetwork&, const DistanceTable&,
                                         const CandidateOptions&);
  std::size_t node_count_ = 0;
  std::size_t slot_count_ = 0;
  double epsilon_ = 1.4;
  std::vector<std::size_t> offsets_;
  std::vector<Candidate> entries_;
  std::vector<std::size_t> pairs_, movable_, fallback_;
  std::vector<std::uint32_t> preferred_;
  std::size_t neighborhood_ = 0;
};

/// Builds candidate lists for every (node, demand destination) pair whose
/// node can reach the destination, then appends virtual successors. With
/// pruning off every real neighbor that reaches the destination is admitted.
/// Throws InputError when a demand is left without any successor.
inline CandidateTable build_candidates(const ExtendedNetwork& ext, const DistanceTable& dist,
                                       const CandidateOptions& options = {}) {
  if (!(options.epsilon >= 1.0)) throw InputError("detour threshold epsilon must be >= 1");
  const Network& net = ext.network();
  const std::size_t n = net.node_count();
  const auto dests = net.destinations();

  CandidateTable table;
  table.node_count_ = n;
  table.slot_count_ = dests.size();
  table.epsilon_ = options.epsilon;

  std::vector<std::vector<Candidate>> virtual_at(dests.size() * n);
  for (const VirtualRoute& r : ext.routes()) {
    std::size_t slot = *net.destination_slot(r.destination);
    virtual_at[slot * n + r.origin].push_back({net.arc(r.entry_arc).to, r.entry_arc, true});
    if (r.via != kNoNode) {
      virtual_at[slot * n + r.via].push_back({r.destination, r.exit_arc, true});
    }
  }

  table.offsets_.assign(dests.size() * n + 1, 0);
  table.preferred_.assign(dests.size() * n, 0);
  std::vector<Candidate> kept;
  for (std::size_t slot = 0; slot < dests.size(); ++slot) {
    const NodeId j = dests[slot];
    for (NodeId i = 0; i < n; ++i) {
      const std::size_t pair = slot * n + i;
      table.offsets_[pair] = table.entries_.size();
      if (i == j) continue;
      kept.clear();
      if (std::isfinite(dist.dist(i, j))) {
        Candidate best{};
        double best_ratio = std::numeric_limits<double>::infinity();
        for (const Link& l : net.out_links(i)) {
          if (net.arc(l.arc).is_virtual || !std::isfinite(dist.dist(l.neighbor, j))) continue;
          auto ratio = detour_ratio(net, dist, i, j, l.neighbor);
          Candidate c{l.neighbor, l.arc, false, ratio.value_or(std::numeric_limits<double>::quiet_NaN())};
          if (!options.prune) {
            kept.push_back(c);
            continue;
          }
          if (!ratio) continue;
          if (*ratio <= options.epsilon + 1e-9) kept.push_back(c);
          if (*ratio < best_ratio) {
            best_ratio = *ratio;
            best = c;
          }
        }
        if (kept.empty() && best.next != kNoNode) {
          kept.push_back(best);
          table.fallback_.push_back(pair);
        }
      }
      for (const Candidate& v : virtual_at[pair]) kept.push_back(v);
      if (kept.empty()) {
        if (net.origin_volume(slot, i) > 0.0) {
          throw InputError("demand " + net.label(i) + "->" + net.label(j) +
                           " has no route and abandonment is disabled");
        }
        continue;
      }
      if (std::isfinite(dist.dist(i, j))) {
        const NodeId hop = dist.next_hop(i, j);
        for (std::uint32_t c = 0; c < kept.size(); ++c) {
          if (!kept[c].is_virtual && kept[c].next == hop) table.preferred_[pair] = c;
        }
      }
      table.entries_.insert(table.entries_.end(), kept.begin(), kept.end());
      table.pairs_.push_back(pair);
      if (kept.size() >= 2) table.movable_.push_back(pair);
      table.neighborhood_ += kept.size() - 1;
    }
  }
  table.offsets_.back() = table.entries_.size();
  return table;
}

/// Variable and constraint counts of the binary model, raw and after pruning.
struct SizeReport {
  std::size_t nodes = 0;
  double mean_out_degree = 0.0;
  double raw_variables = 0.0;
  double conservation_rows = 0.0;
  double tree_rows = 0.0;
  double capacity_rows = 0.0;
  std::size_t pruned_variables = 0;
};

inline SizeReport problem_size(const Network& base, const CandidateTable& candidates) {
  SizeReport r;
  const double n = static_cast<double>(base.node_count());
  r.nodes = base.node_count();
  r.mean_out_degree = n > 0 ? static_cast<double>(base.real_arc_count()) / n : 0.0;
  r.raw_variables = n * (n - 1.0) * r.mean_out_degree;
  r.conservation_rows = n * (n - 1.0);
  r.tree_rows = n * (n - 1.0);
  r.capacity_rows = n * r.mean_out_degree;
  r.pruned_variables = candidates.real_entry_count();
  return r;
}

}  // namespace rffa
