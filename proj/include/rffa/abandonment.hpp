#pragma once

#include <cstddef>
#include <vector>

#include "rffa/flow.hpp"
#include "rffa/virtual_extension.hpp"

namespace rffa {

struct AbandonmentEntry {
  std::size_t demand = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  double volume = 0.0;
  double price = 0.0;
  // U_ij: destination-j flow entering the corridor that serves (i, j).
  double corridor_flow = 0.0;
  // Set when corridor_flow exceeds volume: the corridor also drains
  // shipments transferred in from upstream origins.
  bool drains_upstream = false;
  // Volume of this demand abandoned anywhere along its path.
  double attributed = 0.0;
};

struct AbandonmentReport {
  std::vector<AbandonmentEntry> entries;  // one per demand, demand order
  double total_cost = 0.0;                // sum of price * corridor_flow
  double total_volume = 0.0;              // sum of corridor_flow
};

/// Reads U_ij off the virtual corridors. Under tree routing a corridor takes
/// the whole f_ij, so excess over N_ij is attributed back to the upstream
/// demands whose paths end in it, in proportion to their volumes (which
/// abandons each of them in full).
inline AbandonmentReport read_abandonment(const ExtendedNetwork& ext,
                                          const SuccessorAssignment& assignment,
                                          const FlowField& flow) {
  const Network& net = ext.network();
  AbandonmentReport report;
  report.entries.resize(net.demands().size());
  for (std::size_t d = 0; d < net.demands().size(); ++d) {
    const Demand& dem = net.demands()[d];
    AbandonmentEntry& e = report.entries[d];
    e.demand = d;
    e.origin = dem.origin;
    e.destination = dem.destination;
    e.volume = dem.volume;
    e.price = net.shadow_price(dem);
  }
  for (const VirtualRoute& r : ext.routes()) {
    AbandonmentEntry& e = report.entries[r.demand];
    e.corridor_flow = flow.arc_load[r.entry_arc];
    e.drains_upstream = e.corridor_flow > e.volume * (1.0 + 1e-9);
    report.total_cost += r.price * e.corridor_flow;
    report.total_volume += e.corridor_flow;
  }
  for (const PathTrace& t : extract_paths(net, assignment)) {
    if (t.abandoned) report.entries[t.demand].attributed = t.volume;
  }
  return report;
}

}  // namespace rffa
