#pragma once

// Successor encoding of a solution, recursive flow propagation, constraint
// checks, the penalized energy, and per-demand path tracing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rffa/candidates.hpp"
#include "rffa/network.hpp"

namespace rffa {

/// One chosen successor per candidate pair. succ(i,j)=k stands for x_ij^k = 1;
/// exactly one k per pair is representable, so "sum_k x_ij^k = 1" always holds.
class SuccessorAssignment {
 public:
  SuccessorAssignment() = default;

  /// Every pair starts at its first candidate.
  explicit SuccessorAssignment(const CandidateTable& table)
      : node_count_(table.node_count()),
        slot_count_(table.slot_count()),
        next_(node_count_ * slot_count_, kNoNode),
        arc_(node_count_ * slot_count_, kNoArc),
        choice_(node_count_ * slot_count_, 0) {
    for (std::size_t p : table.pairs()) set(p, table.at(p).front(), 0);
  }

  std::size_t node_count() const { return node_count_; }
  std::size_t slot_count() const { return slot_count_; }

  NodeId next(std::size_t pair) const { return next_[pair]; }
  ArcId arc(std::size_t pair) const { return arc_[pair]; }
  std::uint32_t choice(std::size_t pair) const { return choice_[pair]; }

  NodeId next(NodeId node, std::size_t slot) const { return next_[slot * node_count_ + node]; }

  void set(std::size_t pair, const Candidate& c, std::uint32_t choice_index) {
    next_[pair] = c.next;
    arc_[pair] = c.arc;
    choice_[pair] = choice_index;
  }

  /// Selects candidate `choice_index` of `pair` from `table`.
  void choose(const CandidateTable& table, std::size_t pair, std::uint32_t choice_index) {
    set(pair, table.at(pair)[choice_index], choice_index);
  }

  /// Selects the candidate whose successor is `next`; false when absent.
  bool choose_node(const CandidateTable& table, std::size_t pair, NodeId next) {
    auto cands = table.at(pair);
    for (std::uint32_t c = 0; c < cands.size(); ++c) {
      if (cands[c].next == next) {
        set(pair, cands[c], c);
        return true;
      }
    }
    return false;
  }

  friend bool operator==(const SuccessorAssignment&, const SuccessorAssignment&) = default;

 private:
  std::size_t node_count_ = 0;
  std::size_t slot_count_ = 0;
  std::vector<NodeId> next_;
  std::vector<ArcId> arc_;
  std::vector<std::uint32_t> choice_;
};

/// Flow volumes derived from an assignment.
struct FlowField {
  std::size_t node_count = 0;
  std::size_t slot_count = 0;
  std::size_t arc_count = 0;
  // f_ij, indexed slot * node_count + i. At the destination itself this
  // holds the total volume arriving there.
  std::vector<double> node_flow;
  // Aggregate load per arc.
  std::vector<double> arc_load;
  // Destination-specific flow per arc, indexed slot * arc_count + arc.
  std::vector<double> dest_arc_flow;

  double node(NodeId i, std::size_t slot) const { return node_flow[slot * node_count + i]; }
  double dest_arc(std::size_t slot, ArcId a) const { return dest_arc_flow[slot * arc_count + a]; }

  void reset(std::size_t nodes, std::size_t slots, std::size_t arcs) {
    node_count = nodes;
    slot_count = slots;
    arc_count = arcs;
    node_flow.assign(nodes * slots, 0.0);
    arc_load.assign(arcs, 0.0);
    dest_arc_flow.assign(arcs * slots, 0.0);
  }
};

struct CycleError {
  NodeId destination = kNoNode;
  std::vector<NodeId> cycle;
};

class CycleException : public std::runtime_error {
 public:
  explicit CycleException(CycleError e)
      : std::runtime_error(describe(e)), error_(std::move(e)) {}
  const CycleError& error() const { return error_; }

 private:
  static std::string describe(const CycleError& e) {
    std::string s = "successor cycle toward destination " + std::to_string(e.destination) + ":";
    for (NodeId v : e.cycle) s += " " + std::to_string(v);
    return s;
  }
  CycleError error_;
};

/// Computes f_ij = N_ij + sum of f_sj over s with succ(s,j) = i, for every
/// destination, in topological order of the successor graph. Fails when a
/// cycle carries positive flow; zero-flow cycles are harmless and allowed.
inline std::optional<CycleError> propagate_into(const Network& net,
                                                const SuccessorAssignment& assignment,
                                                FlowField& out) {
  const std::size_t n = net.node_count();
  const std::size_t slots = net.destination_count();
  const std::size_t m = net.arc_count();
  if (assignment.node_count() != n || assignment.slot_count() != slots) {
    throw std::invalid_argument("assignment does not match network dimensions");
  }
  out.reset(n, slots, m);

  std::vector<std::uint32_t> indegree(n);
  std::vector<NodeId> queue;
  queue.reserve(n);
  for (std::size_t slot = 0; slot < slots; ++slot) {
    const std::size_t base = slot * n;
    double* flow = out.node_flow.data() + base;
    double* dest_arc = out.dest_arc_flow.data() + slot * m;
    std::fill(indegree.begin(), indegree.end(), 0);
    for (NodeId i = 0; i < n; ++i) {
      flow[i] = net.origin_volume(slot, i);
      NodeId k = assignment.next(base + i);
      if (k != kNoNode) ++indegree[k];
    }
    queue.clear();
    for (NodeId i = 0; i < n; ++i) {
      if (indegree[i] == 0) queue.push_back(i);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId u = queue[head];
      const NodeId k = assignment.next(base + u);
      if (k == kNoNode) continue;
      const ArcId a = assignment.arc(base + u);
      flow[k] += flow[u];
      dest_arc[a] += flow[u];
      out.arc_load[a] += flow[u];
      if (--indegree[k] == 0) queue.push_back(k);
    }
    if (queue.size() == n) continue;
    // Remaining nodes lie on successor cycles.
    for (NodeId i = 0; i < n; ++i) {
      if (indegree[i] == 0 || flow[i] <= 0.0) continue;
      CycleError err{net.destinations()[slot], {}};
      NodeId cur = i;
      do {
        err.cycle.push_back(cur);
        cur = assignment.next(base + cur);
      } while (cur != i);
      std::sort(err.cycle.begin(), err.cycle.end());
      return err;
    }
  }
  return std::nullopt;
}

/// Throwing form of propagate_into.
inline FlowField propagate(const Network& net, const SuccessorAssignment& assignment) {
  FlowField flow;
  if (auto err = propagate_into(net, assignment, flow)) throw CycleException(std::move(*err));
  return flow;
}

struct ConservationViolation {
  NodeId node = 0;
  NodeId destination = 0;
  double demand = 0.0;
  // Outflow minus inflow over destination arc flows (should equal demand).
  double net_outflow = 0.0;
  // Stored f_ij minus (demand + inflow) (should be zero).
  double node_residual = 0.0;
};

/// Row-by-row check of outflow - inflow = N_ij and f_ij = N_ij + inflow.
/// Abandonment needs no separate term: on an extended network the flow into
/// a virtual corridor is part of the outflow.
inline std::vector<ConservationViolation> check_conservation(const Network& net,
                                                             const FlowField& flow) {
  std::vector<ConservationViolation> out;
  const std::size_t n = net.node_count();
  for (std::size_t slot = 0; slot < net.destination_count(); ++slot) {
    const NodeId j = net.destinations()[slot];
    for (NodeId i = 0; i < n; ++i) {
      if (i == j) continue;
      double outflow = 0.0, inflow = 0.0;
      for (const Link& l : net.out_links(i)) outflow += flow.dest_arc(slot, l.arc);
      for (const Link& l : net.in_links(i)) inflow += flow.dest_arc(slot, l.arc);
      const double demand = net.origin_volume(slot, i);
      const double f = flow.node(i, slot);
      const double tol = 1e-9 * std::max({1.0, demand, std::abs(f)});
      const double row = outflow - inflow;
      const double residual = f - (demand + inflow);
      if (std::abs(row - demand) > tol || std::abs(residual) > tol) {
        out.push_back({i, j, demand, row, residual});
      }
    }
  }
  return out;
}

enum class TreeViolationKind {
  kSplit,       // more than one positive outgoing arc for a destination
  kMismatch,    // positive flow on an arc other than the chosen successor
  kCycle,       // positive arcs form a cycle
  kDeadEnd,     // positive flow stops short of the destination
};

struct TreeViolation {
  TreeViolationKind kind;
  NodeId node = 0;
  NodeId destination = 0;
};

/// Confirms that, per destination, each node has at most one positive
/// outgoing arc (sum_k I(f_ij^k) <= 1), that it matches the assignment, and
/// that positive arcs form an in-tree rooted at the destination.
inline std::vector<TreeViolation> check_tree_shape(const Network& net,
                                                   const SuccessorAssignment& assignment,
                                                   const FlowField& flow,
                                                   double positive = 1e-9) {
  std::vector<TreeViolation> out;
  const std::size_t n = net.node_count();
  std::vector<NodeId> pos_next(n);
  std::vector<char> state(n);  // 0 unvisited, 1 on stack, 2 reaches root
  std::vector<NodeId> stack;
  for (std::size_t slot = 0; slot < net.destination_count(); ++slot) {
    const NodeId j = net.destinations()[slot];
    std::vector<char> split(n, 0);
    for (NodeId i = 0; i < n; ++i) {
      pos_next[i] = kNoNode;
      if (i == j) continue;
      int positive_arcs = 0;
      for (const Link& l : net.out_links(i)) {
        if (flow.dest_arc(slot, l.arc) > positive) {
          ++positive_arcs;
          pos_next[i] = l.neighbor;
          if (assignment.arc(slot * n + i) != l.arc) {
            out.push_back({TreeViolationKind::kMismatch, i, j});
          }
        }
      }
      if (positive_arcs > 1) {
        out.push_back({TreeViolationKind::kSplit, i, j});
        split[i] = 1;
      } else if (positive_arcs == 0 && flow.node(i, slot) > positive) {
        out.push_back({TreeViolationKind::kDeadEnd, i, j});
      }
    }
    std::fill(state.begin(), state.end(), 0);
    state[j] = 2;
    for (NodeId start = 0; start < n; ++start) {
      if (state[start] != 0 || pos_next[start] == kNoNode || split[start]) continue;
      stack.clear();
      NodeId cur = start;
      bool cyclic = false;
      while (state[cur] == 0 && pos_next[cur] != kNoNode && !split[cur]) {
        state[cur] = 1;
        stack.push_back(cur);
        cur = pos_next[cur];
      }
      if (state[cur] == 1) {
        cyclic = true;
        out.push_back({TreeViolationKind::kCycle, cur, j});
      }
      // Chains ending at a split node were reported already; others end at
      // the root or at a dead end reported above.
      for (NodeId v : stack) state[v] = cyclic ? 3 : 2;
    }
  }
  return out;
}

struct EnergyBreakdown {
  double transport_cost = 0.0;
  double abandonment_cost = 0.0;
  double penalty = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

/// Z(X) = transport + abandonment + lambda * H(X), where H sums the overload
/// max{0, load - capacity} over real arcs. Virtual arcs are uncapacitated and
/// their cost is the abandonment loss.
inline EnergyBreakdown energy(const Network& net, const FlowField& flow, double lambda) {
  EnergyBreakdown e;
  e.lambda = lambda;
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    const double load = flow.arc_load[a];
    if (arc.is_virtual) {
      e.abandonment_cost += arc.cost * load;
    } else {
      e.transport_cost += arc.cost * load;
      e.penalty += std::max(0.0, load - arc.capacity);
    }
  }
  e.total = e.transport_cost + e.abandonment_cost + lambda * e.penalty;
  return e;
}

struct PathTrace {
  std::size_t demand = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  double volume = 0.0;
  // Real nodes visited; for abandoned shipments this stops where the
  // virtual corridor is entered.
  std::vector<NodeId> nodes;
  double length = 0.0;
  bool abandoned = false;
};

/// Follows succ(., j) from each demand's origin.
inline std::vector<PathTrace> extract_paths(const Network& net,
                                            const SuccessorAssignment& assignment) {
  std::vector<PathTrace> out;
  const std::size_t n = net.node_count();
  out.reserve(net.demands().size());
  for (std::size_t d = 0; d < net.demands().size(); ++d) {
    const Demand& dem = net.demands()[d];
    const std::size_t slot = *net.destination_slot(dem.destination);
    PathTrace t{d, dem.origin, dem.destination, dem.volume, {dem.origin}, 0.0, false};
    NodeId cur = dem.origin;
    for (std::size_t steps = 0; cur != dem.destination; ++steps) {
      const std::size_t pair = slot * n + cur;
      const ArcId a = assignment.arc(pair);
      if (a == kNoArc || steps > n) {
        throw std::logic_error("demand " + net.label(dem.origin) + "->" +
                               net.label(dem.destination) + " has no complete path");
      }
      if (net.arc(a).is_virtual) {
        t.abandoned = true;
        break;
      }
      t.length += net.arc(a).cost;
      cur = assignment.next(pair);
      t.nodes.push_back(cur);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace rffa
