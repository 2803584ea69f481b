#pragma once

// Immutable rail network: stations, directed arcs with cost and capacity,
// and the O-D demand matrix indexed by destination.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rffa {

using NodeId = std::uint32_t;
using ArcId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr ArcId kNoArc = std::numeric_limits<ArcId>::max();
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Raised for malformed instances: bad endpoints, duplicates, negative values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Node {
  NodeId id = 0;
  std::string label;
};

struct Arc {
  NodeId from = 0;
  NodeId to = 0;
  double cost = 0.0;
  double capacity = kInfinity;
  bool is_virtual = false;
};

struct Demand {
  NodeId origin = 0;
  NodeId destination = 0;
  double volume = 0.0;
  // Loss per abandoned unit; unset means "use the network default".
  std::optional<double> shadow_price;
};

/// One entry of an adjacency list.
struct Link {
  NodeId neighbor = 0;
  ArcId arc = 0;
};

class Network;
Network build_network(std::vector<Node> nodes, std::vector<Arc> arcs,
                      std::vector<Demand> demands);

class Network {
 public:
  Network() = default;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<Demand>& demands() const { return demands_; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const Arc& arc(ArcId id) const { return arcs_[id]; }
  const std::string& label(NodeId id) const { return nodes_.at(id).label; }

  /// Outgoing links of `node`, sorted by neighbor id.
  std::span<const Link> out_links(NodeId node) const {
    return {out_links_.data() + out_offsets_[node],
            out_links_.data() + out_offsets_[node + 1]};
  }
  std::span<const Link> in_links(NodeId node) const {
    return {in_links_.data() + in_offsets_[node],
            in_links_.data() + in_offsets_[node + 1]};
  }

  std::optional<ArcId> find_arc(NodeId from, NodeId to) const {
    auto it = arc_index_.find(pair_key(from, to));
    if (it == arc_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find_demand(NodeId origin,
                                         NodeId destination) const {
    auto it = demand_index_.find(pair_key(origin, destination));
    if (it == demand_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<NodeId> find_label(const std::string& label) const {
    auto it = label_index_.find(label);
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Distinct demand destinations in ascending id order. Per-destination
  /// data elsewhere is stored by position ("slot") in this list.
  std::span<const NodeId> destinations() const { return destinations_; }
  std::size_t destination_count() const { return destinations_.size(); }

  std::optional<std::size_t> destination_slot(NodeId node) const {
    auto it = std::lower_bound(destinations_.begin(), destinations_.end(), node);
    if (it == destinations_.end() || *it != node) return std::nullopt;
    return static_cast<std::size_t>(it - destinations_.begin());
  }

  /// N_ij for the destination in `slot`; zero when no such demand exists.
  double origin_volume(std::size_t slot, NodeId origin) const {
    return slot_volume_[slot * nodes_.size() + origin];
  }

  /// Sum of costs over real arcs. Default loss per abandoned unit.
  double total_real_cost() const { return total_real_cost_; }

  double shadow_price(const Demand& d) const {
    return d.shadow_price.value_or(total_real_cost_);
  }

  std::size_t real_arc_count() const { return real_arc_count_; }

 private:
  friend Network build_network(std::vector<Node>, std::vector<Arc>,
                               std::vector<Demand>);

  static std::uint64_t pair_key(NodeId a, NodeId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<Demand> demands_;
  std::vector<std::size_t> out_offsets_, in_offsets_;
  std::vector<Link> out_links_, in_links_;
  std::unordered_map<std::uint64_t, ArcId> arc_index_;
  std::unordered_map<std::uint64_t, std::size_t> demand_index_;
  std::unordered_map<std::string, NodeId> label_index_;
  std::vector<NodeId> destinations_;
  std::vector<double> slot_volume_;
  double total_real_cost_ = 0.0;
  std::size_t real_arc_count_ = 0;
};

namespace detail {

inline std::string arc_name(const std::vector<Node>& nodes, const Arc& a) {
  auto name = [&](NodeId id) {
    if (id < nodes.size() && !nodes[id].label.empty()) return nodes[id].label;
    return std::to_string(id);
  };
  return name(a.from) + "->" + name(a.to);
}

inline void build_csr(std::size_t n, const std::vector<Arc>& arcs, bool outgoing,
                      std::vector<std::size_t>& offsets,
                      std::vector<Link>& links) {
  offsets.assign(n + 1, 0);
  for (const Arc& a : arcs) ++offsets[(outgoing ? a.from : a.to) + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  links.resize(arcs.size());
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (ArcId id = 0; id < arcs.size(); ++id) {
    const Arc& a = arcs[id];
    NodeId key = outgoing ? a.from : a.to;
    links[fill[key]++] = Link{outgoing ? a.to : a.from, id};
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(links.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
              links.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]),
              [](const Link& x, const Link& y) { return x.neighbor < y.neighbor; });
  }
}

}  // namespace detail

/// Validates and indexes an instance. Node ids must be 0..n-1 in order;
/// empty labels are replaced by the decimal id. Demands with zero volume
/// are dropped.
inline Network build_network(std::vector<Node> nodes, std::vector<Arc> arcs,
                             std::vector<Demand> demands) {
  Network net;
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].id != i) {
      throw InputError("node at position " + std::to_string(i) + " has id " +
                       std::to_string(nodes[i].id) + "; ids must be dense");
    }
    if (nodes[i].label.empty()) nodes[i].label = std::to_string(i);
    if (!net.label_index_.emplace(nodes[i].label, static_cast<NodeId>(i)).second) {
      throw InputError("duplicate node label '" + nodes[i].label + "'");
    }
  }

  for (ArcId id = 0; id < arcs.size(); ++id) {
    const Arc& a = arcs[id];
    if (a.from >= n || a.to >= n) {
      throw InputError("arc " + detail::arc_name(nodes, a) +
                       " references a node that does not exist");
    }
    if (a.from == a.to) {
      throw InputError("arc " + detail::arc_name(nodes, a) + " is a self-loop");
    }
    if (!(a.cost >= 0.0) || !std::isfinite(a.cost)) {
      throw InputError("arc " + detail::arc_name(nodes, a) +
                       " must have a finite non-negative cost");
    }
    if (!(a.capacity >= 0.0)) {
      throw InputError("arc " + detail::arc_name(nodes, a) +
                       " has a negative capacity");
    }
    if (!net.arc_index_.emplace(Network::pair_key(a.from, a.to), id).second) {
      throw InputError("duplicate arc " + detail::arc_name(nodes, a));
    }
    if (!a.is_virtual) {
      net.total_real_cost_ += a.cost;
      ++net.real_arc_count_;
    }
  }

  std::vector<Demand> kept;
  kept.reserve(demands.size());
  for (const Demand& d : demands) {
    Arc as_arc{d.origin, d.destination, 0.0, 0.0, false};
    if (d.origin >= n || d.destination >= n) {
      throw InputError("demand " + detail::arc_name(nodes, as_arc) +
                       " references a node that does not exist");
    }
    if (d.origin == d.destination) {
      throw InputError("demand " + detail::arc_name(nodes, as_arc) +
                       " has identical origin and destination");
    }
    if (!(d.volume >= 0.0) || !std::isfinite(d.volume)) {
      throw InputError("demand " + detail::arc_name(nodes, as_arc) +
                       " must have a finite non-negative volume");
    }
    if (d.shadow_price && (!(*d.shadow_price >= 0.0) || !std::isfinite(*d.shadow_price))) {
      throw InputError("demand " + detail::arc_name(nodes, as_arc) +
                       " has an invalid shadow price");
    }
    if (d.volume == 0.0) continue;
    if (!net.demand_index_.emplace(Network::pair_key(d.origin, d.destination), kept.size()).second) {
      throw InputError("duplicate demand " + detail::arc_name(nodes, as_arc));
    }
    kept.push_back(d);
  }

  for (const Demand& d : kept) net.destinations_.push_back(d.destination);
  std::sort(net.destinations_.begin(), net.destinations_.end());
  net.destinations_.erase(std::unique(net.destinations_.begin(), net.destinations_.end()),
                          net.destinations_.end());

  net.slot_volume_.assign(net.destinations_.size() * n, 0.0);
  net.nodes_ = std::move(nodes);
  net.arcs_ = std::move(arcs);
  net.demands_ = std::move(kept);
  for (const Demand& d : net.demands_) {
    std::size_t slot = *net.destination_slot(d.destination);
    net.slot_volume_[slot * n + d.origin] = d.volume;
  }

  detail::build_csr(n, net.arcs_, true, net.out_offsets_, net.out_links_);
  detail::build_csr(n, net.arcs_, false, net.in_offsets_, net.in_links_);
  return net;
}

}  // namespace rffa
