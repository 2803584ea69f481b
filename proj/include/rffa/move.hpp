#pragma once

// Incremental energy of a single successor change. Rerouting node i toward
// destination j moves the fixed quantity q = f_ij off the old successor
// chain and onto the new one; only the segments before the two chains
// re-merge change.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rffa/candidates.hpp"
#include "rffa/flow.hpp"
#include "rffa/network.hpp"

namespace rffa {

/// Set the successor of `pair` to candidate `choice`.
struct Move {
  std::size_t pair = 0;
  std::uint32_t choice = 0;
};

/// Edits that commit a move without re-propagating.
struct UpdatePlan {
  Move move;
  std::size_t slot = 0;
  double quantity = 0.0;
  std::vector<NodeId> drained_nodes;  // old-only segment, excluding i and the merge node
  std::vector<NodeId> filled_nodes;   // new-only segment, likewise
  std::vector<ArcId> drained_arcs;
  std::vector<ArcId> filled_arcs;
};

struct MoveEvaluation {
  bool creates_cycle = false;
  double delta = 0.0;
  double delta_transport = 0.0;
  double delta_abandonment = 0.0;
  double delta_penalty = 0.0;
  UpdatePlan plan;
};

/// Reusable scratch space for move evaluation over one network.
class MoveEvaluator {
 public:
  MoveEvaluator(const Network& net, const CandidateTable& table)
      : net_(&net), table_(&table), mark_(net.node_count(), 0) {}

  /// True when choosing `move` would close a successor cycle, i.e. the chain
  /// from the new successor does not reach the destination without passing
  /// through the moved node. Assumes the current successor graph is acyclic
  /// along that chain; a walk longer than the node count counts as a cycle.
  bool creates_cycle(const SuccessorAssignment& assignment, Move move) const {
    const std::size_t n = net_->node_count();
    const std::size_t slot = move.pair / n;
    const NodeId i = static_cast<NodeId>(move.pair % n);
    const NodeId j = net_->destinations()[slot];
    NodeId cur = table_->at(move.pair)[move.choice].next;
    for (std::size_t steps = 0; cur != j; ++steps) {
      if (cur == i || steps > n) return true;
      cur = assignment.next(slot * n + cur);
      if (cur == kNoNode) return true;
    }
    return false;
  }

  const MoveEvaluation& evaluate(const SuccessorAssignment& assignment, const FlowField& flow,
                                 Move move, double lambda) {
    const std::size_t n = net_->node_count();
    MoveEvaluation& ev = last_;
    UpdatePlan& plan = ev.plan;
    ev.creates_cycle = false;
    ev.delta = ev.delta_transport = ev.delta_abandonment = ev.delta_penalty = 0.0;
    plan.move = move;
    plan.slot = move.pair / n;
    plan.drained_nodes.clear();
    plan.filled_nodes.clear();
    plan.drained_arcs.clear();
    plan.filled_arcs.clear();

    const std::size_t slot = plan.slot;
    const std::size_t base = slot * n;
    const NodeId j = net_->destinations()[slot];
    const Candidate& target = table_->at(move.pair)[move.choice];
    plan.quantity = flow.node_flow[move.pair];

    if (creates_cycle(assignment, move)) {
      ev.creates_cycle = true;
      return ev;
    }
    const double q = plan.quantity;
    if (q == 0.0) return ev;

    if (++stamp_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      stamp_ = 1;
    }
    // Old chain, i excluded, up to and including j.
    for (NodeId cur = assignment.next(move.pair);; cur = assignment.next(base + cur)) {
      mark_[cur] = stamp_;
      if (cur == j) break;
    }
    // New chain until it meets the old one.
    plan.filled_arcs.push_back(target.arc);
    NodeId merge = target.next;
    while (mark_[merge] != stamp_) {
      plan.filled_nodes.push_back(merge);
      plan.filled_arcs.push_back(assignment.arc(base + merge));
      merge = assignment.next(base + merge);
    }
    plan.drained_arcs.push_back(assignment.arc(move.pair));
    for (NodeId cur = assignment.next(move.pair); cur != merge; cur = assignment.next(base + cur)) {
      plan.drained_nodes.push_back(cur);
      plan.drained_arcs.push_back(assignment.arc(base + cur));
    }

    auto account = [&](ArcId a, double change) {
      const Arc& arc = net_->arc(a);
      if (arc.is_virtual) {
        ev.delta_abandonment += arc.cost * change;
      } else {
        ev.delta_transport += arc.cost * change;
        const double before = flow.arc_load[a];
        ev.delta_penalty += std::max(0.0, before + change - arc.capacity) -
                            std::max(0.0, before - arc.capacity);
      }
    };
    for (ArcId a : plan.drained_arcs) account(a, -q);
    for (ArcId a : plan.filled_arcs) account(a, q);
    ev.delta = ev.delta_transport + ev.delta_abandonment + lambda * ev.delta_penalty;
    return ev;
  }

  const MoveEvaluation& last() const { return last_; }

 private:
  const Network* net_;
  const CandidateTable* table_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  MoveEvaluation last_;
};

/// Applies an evaluated plan to the assignment and flow field.
inline void commit_move(const CandidateTable& table, const UpdatePlan& plan,
                        SuccessorAssignment& assignment, FlowField& flow) {
  const double q = plan.quantity;
  if (q != 0.0) {
    const std::size_t base = plan.slot * flow.node_count;
    double* dest_arc = flow.dest_arc_flow.data() + plan.slot * flow.arc_count;
    for (NodeId v : plan.drained_nodes) flow.node_flow[base + v] -= q;
    for (NodeId v : plan.filled_nodes) flow.node_flow[base + v] += q;
    for (ArcId a : plan.drained_arcs) {
      flow.arc_load[a] -= q;
      dest_arc[a] -= q;
    }
    for (ArcId a : plan.filled_arcs) {
      flow.arc_load[a] += q;
      dest_arc[a] += q;
    }
  }
  assignment.choose(table, plan.move.pair, plan.move.choice);
}

/// Energy change of a single move, with the plan that commits it.
inline MoveEvaluation delta_energy(const Network& net, const CandidateTable& table,
                                   const SuccessorAssignment& assignment, const FlowField& flow,
                                   Move move, double lambda) {
  MoveEvaluator evaluator(net, table);
  return evaluator.evaluate(assignment, flow, move, lambda);
}

}  // namespace rffa
