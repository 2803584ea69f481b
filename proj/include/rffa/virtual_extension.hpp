#pragma once

// Extended network with uncapacitated virtual corridors, one per demand,
// priced at the demand's shadow price. Flow entering a corridor is
// abandoned demand.

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rffa/network.hpp"

namespace rffa {

/// Virtual corridor serving one demand. Either a single arc origin->dest,
/// or origin->via->dest when a real arc already joins the pair.
struct VirtualRoute {
  std::size_t demand = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  ArcId entry_arc = kNoArc;
  NodeId via = kNoNode;
  ArcId exit_arc = kNoArc;
  double price = 0.0;
};

class ExtendedNetwork {
 public:
  const Network& network() const { return graph_; }
  const std::vector<VirtualRoute>& routes() const { return routes_; }
  std::size_t base_node_count() const { return base_nodes_; }
  std::size_t base_arc_count() const { return base_arcs_; }
  bool has_virtual() const { return !routes_.empty(); }

  bool is_virtual_node(NodeId id) const { return id >= base_nodes_; }

  /// Route whose entry arc is `arc`, if any.
  const VirtualRoute* route_entered_by(ArcId arc) const {
    auto it = by_entry_.find(arc);
    return it == by_entry_.end() ? nullptr : &routes_[it->second];
  }

 private:
  friend ExtendedNetwork extend(const Network&);
  friend ExtendedNetwork without_virtual(const Network&);

  Network graph_;
  std::vector<VirtualRoute> routes_;
  std::unordered_map<ArcId, std::size_t> by_entry_;
  std::size_t base_nodes_ = 0;
  std::size_t base_arcs_ = 0;
};

/// Wraps a network with no virtual elements (abandonment disabled).
inline ExtendedNetwork without_virtual(const Network& base) {
  ExtendedNetwork ext;
  ext.graph_ = base;
  ext.base_nodes_ = base.node_count();
  ext.base_arcs_ = base.arc_count();
  return ext;
}

inline ExtendedNetwork extend(const Network& base) {
  ExtendedNetwork ext;
  ext.base_nodes_ = base.node_count();
  ext.base_arcs_ = base.arc_count();

  std::vector<Node> nodes = base.nodes();
  std::vector<Arc> arcs = base.arcs();
  std::vector<VirtualRoute> routes;
  routes.reserve(base.demands().size());

  auto unique_label = [&](std::string wanted) {
    while (base.find_label(wanted)) wanted += "'";
    return wanted;
  };

  for (std::size_t d = 0; d < base.demands().size(); ++d) {
    const Demand& dem = base.demands()[d];
    VirtualRoute r;
    r.demand = d;
    r.origin = dem.origin;
    r.destination = dem.destination;
    r.price = base.shadow_price(dem);
    if (!base.find_arc(dem.origin, dem.destination)) {
      r.entry_arc = static_cast<ArcId>(arcs.size());
      arcs.push_back({dem.origin, dem.destination, r.price, kInfinity, true});
    } else {
      r.via = static_cast<NodeId>(nodes.size());
      nodes.push_back({r.via, unique_label("virtual(" + base.label(dem.origin) + "," +
                                           base.label(dem.destination) + ")")});
      r.entry_arc = static_cast<ArcId>(arcs.size());
      arcs.push_back({dem.origin, r.via, r.price / 2.0, kInfinity, true});
      r.exit_arc = static_cast<ArcId>(arcs.size());
      arcs.push_back({r.via, dem.destination, r.price / 2.0, kInfinity, true});
    }
    routes.push_back(r);
  }

  ext.graph_ = build_network(std::move(nodes), std::move(arcs), base.demands());
  ext.routes_ = std::move(routes);
  for (std::size_t r = 0; r < ext.routes_.size(); ++r) {
    ext.by_entry_.emplace(ext.routes_[r].entry_arc, r);
  }
  return ext;
}

}  // namespace rffa
