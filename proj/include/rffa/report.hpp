#pragma once

// Solve report: everything here is recomputed from (instance, assignment),
// so regenerating it from a stored assignment reproduces it exactly.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rffa/abandonment.hpp"
#include "rffa/flow.hpp"
#include "rffa/io.hpp"
#include "rffa/virtual_extension.hpp"

namespace rffa {

struct ArcUsage {
  ArcId arc = 0;
  double load = 0.0;
  double capacity = kInfinity;
  // load / capacity; NaN for unlimited arcs.
  double utilization = std::numeric_limits<double>::quiet_NaN();
};

struct TreeEdge {
  ArcId arc = 0;
  NodeId from = 0;
  NodeId to = 0;
  double flow = 0.0;
  bool is_virtual = false;
};

struct DestinationTree {
  NodeId destination = 0;
  std::vector<TreeEdge> edges;
};

struct SolveReport {
  EnergyBreakdown objective;
  std::vector<PathTrace> paths;
  std::vector<ArcUsage> arcs;  // real arcs only
  std::vector<DestinationTree> trees;
  AbandonmentReport abandonment;
  double total_transport_cost = 0.0;
  double mean_shipment_distance = 0.0;
  double routed_volume = 0.0;
  double abandoned_volume = 0.0;
};

inline SolveReport build_report(const ExtendedNetwork& ext, const SuccessorAssignment& assignment,
                                double lambda) {
  const Network& net = ext.network();
  SolveReport r;
  const FlowField flow = propagate(net, assignment);
  r.objective = energy(net, flow, lambda);
  r.total_transport_cost = r.objective.transport_cost;
  r.paths = extract_paths(net, assignment);
  r.abandonment = read_abandonment(ext, assignment, flow);

  double weighted = 0.0;
  for (const PathTrace& t : r.paths) {
    if (t.abandoned) {
      r.abandoned_volume += t.volume;
    } else {
      r.routed_volume += t.volume;
      weighted += t.volume * t.length;
    }
  }
  r.mean_shipment_distance = r.routed_volume > 0.0 ? weighted / r.routed_volume : 0.0;

  for (ArcId a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    if (arc.is_virtual) continue;
    ArcUsage u{a, flow.arc_load[a], arc.capacity};
    if (std::isfinite(arc.capacity)) {
      u.utilization = arc.capacity > 0.0 ? u.load / arc.capacity
                                         : (u.load > 0.0 ? kInfinity : 0.0);
    }
    r.arcs.push_back(u);
  }

  for (std::size_t slot = 0; slot < net.destination_count(); ++slot) {
    DestinationTree tree{net.destinations()[slot], {}};
    for (ArcId a = 0; a < net.arc_count(); ++a) {
      const double f = flow.dest_arc(slot, a);
      if (f > 0.0) {
        const Arc& arc = net.arc(a);
        tree.edges.push_back({a, arc.from, arc.to, f, arc.is_virtual});
      }
    }
    r.trees.push_back(std::move(tree));
  }
  return r;
}

namespace detail {
inline nlohmann::ordered_json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}
}  // namespace detail

inline nlohmann::ordered_json report_json(const ExtendedNetwork& ext, const SolveReport& r) {
  using json = nlohmann::ordered_json;
  const Network& net = ext.network();
  json j;
  j["objective"] = {{"transport_cost", r.objective.transport_cost},
                    {"abandonment_cost", r.objective.abandonment_cost},
                    {"penalty", r.objective.penalty},
                    {"lambda", r.objective.lambda},
                    {"total", r.objective.total}};
  j["totals"] = {{"total_transport_cost", r.total_transport_cost},
                 {"mean_shipment_distance", r.mean_shipment_distance},
                 {"routed_volume", r.routed_volume},
                 {"abandoned_volume", r.abandoned_volume}};
  json paths = json::array();
  for (const PathTrace& t : r.paths) {
    json nodes = json::array();
    for (NodeId v : t.nodes) nodes.push_back(net.label(v));
    paths.push_back({{"origin", net.label(t.origin)},
                     {"destination", net.label(t.destination)},
                     {"volume", t.volume},
                     {"nodes", nodes},
                     {"length", t.length},
                     {"abandoned", t.abandoned}});
  }
  j["paths"] = paths;
  json arcs = json::array();
  for (const ArcUsage& u : r.arcs) {
    const Arc& a = net.arc(u.arc);
    arcs.push_back({{"from", net.label(a.from)},
                    {"to", net.label(a.to)},
                    {"load", u.load},
                    {"capacity", detail::finite_or_null(u.capacity)},
                    {"utilization", detail::finite_or_null(u.utilization)}});
  }
  j["arcs"] = arcs;
  json trees = json::array();
  for (const DestinationTree& t : r.trees) {
    json edges = json::array();
    for (const TreeEdge& e : t.edges) {
      edges.push_back({{"from", net.label(e.from)},
                       {"to", net.label(e.to)},
                       {"flow", e.flow},
                       {"virtual", e.is_virtual}});
    }
    trees.push_back({{"destination", net.label(t.destination)}, {"edges", edges}});
  }
  j["trees"] = trees;
  json ab = json::array();
  for (const AbandonmentEntry& e : r.abandonment.entries) {
    if (e.corridor_flow <= 0.0 && e.attributed <= 0.0) continue;
    ab.push_back({{"origin", net.label(e.origin)},
                  {"destination", net.label(e.destination)},
                  {"volume", e.volume},
                  {"shadow_price", e.price},
                  {"corridor_flow", e.corridor_flow},
                  {"drains_upstream", e.drains_upstream},
                  {"attributed", e.attributed}});
  }
  j["abandonment"] = {{"total_cost", r.abandonment.total_cost},
                      {"total_volume", r.abandonment.total_volume},
                      {"entries", ab}};
  return j;
}

/// DOT digraph of one destination's positive-flow arcs, edges labelled by
/// flow and the root drawn as a double circle. A node that receives no flow
/// yields a graph holding only the root.
inline std::string tree_dot(const ExtendedNetwork& ext, const SolveReport& r, NodeId destination) {
  const Network& net = ext.network();
  std::ostringstream out;
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') q += '\\';
      q += c;
    }
    return q + "\"";
  };
  out << "digraph " << quote("tree " + net.label(destination)) << " {\n";
  out << "  " << quote(net.label(destination)) << " [shape=doublecircle, style=bold];\n";
  for (const DestinationTree& t : r.trees) {
    if (t.destination != destination) continue;
    for (const TreeEdge& e : t.edges) {
      out << "  " << quote(net.label(e.from)) << " -> " << quote(net.label(e.to))
          << " [label=" << quote(detail::format_number(e.flow)) << (e.is_virtual ? ", style=dashed" : "")
          << "];\n";
    }
  }
  out << "}\n";
  return out.str();
}

/// destination,from,to,flow for every positive-flow arc of every destination.
inline std::string trees_csv(const ExtendedNetwork& ext, const SolveReport& r) {
  const Network& net = ext.network();
  std::ostringstream out;
  out << "destination,from,to,flow\n";
  for (const DestinationTree& t : r.trees) {
    for (const TreeEdge& e : t.edges) {
      out << detail::csv_field(net.label(t.destination)) << ',' << detail::csv_field(net.label(e.from)) << ','
          << detail::csv_field(net.label(e.to)) << ','
          << detail::format_number(e.flow) << '\n';
    }
  }
  return out.str();
}

inline std::string arcs_csv(const ExtendedNetwork& ext, const SolveReport& r) {
  const Network& net = ext.network();
  std::ostringstream out;
  out << "from,to,load,capacity,utilization\n";
  for (const ArcUsage& u : r.arcs) {
    const Arc& a = net.arc(u.arc);
    out << detail::csv_field(net.label(a.from)) << ',' << detail::csv_field(net.label(a.to)) << ','
        << detail::format_number(u.load) << ',';
    if (std::isfinite(u.capacity)) out << detail::format_number(u.capacity);
    out << ',';
    if (std::isfinite(u.utilization)) out << detail::format_number(u.utilization);
    out << '\n';
  }
  return out.str();
}

/// Writes tree_<label>.dot for each requested destination label plus
/// trees.csv covering all destinations. Returns the files written.
inline std::vector<std::filesystem::path> emit_trees(const ExtendedNetwork& ext,
                                                     const SolveReport& r,
                                                     const std::vector<std::string>& labels,
                                                     const std::filesystem::path& dir) {
  const Network& net = ext.network();
  std::vector<NodeId> wanted;
  for (const std::string& label : labels) {
    auto id = net.find_label(label);
    if (!id || ext.is_virtual_node(*id)) throw InputError("unknown destination '" + label + "'");
    wanted.push_back(*id);
  }
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (NodeId d : wanted) {
    std::string file = "tree_" + net.label(d) + ".dot";
    for (char& c : file) {
      if (c == '/' || c == '\\' || c == ' ') c = '_';
    }
    written.push_back(dir / file);
    std::ofstream(written.back()) << tree_dot(ext, r, d);
  }
  written.push_back(dir / "trees.csv");
  std::ofstream(written.back()) << trees_csv(ext, r);
  return written;
}

}  // namespace rffa
