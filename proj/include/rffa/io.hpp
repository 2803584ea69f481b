#pragma once

// Text formats for instances and assignments.
//
// Network file (comma separated, '#' starts a comment line):
//
//   NODES
//   id,label
//   0,Beijing
//   ARCS
//   from,to,cost,capacity
//   Beijing,Tianjin,137,60      <- blank capacity means unlimited
//
// Demands file:
//
//   origin,destination,volume,shadow_price   <- shadow_price optional/blank
//
// Arcs and demands reference nodes by label. Node ids in the file only need
// to be unique; internal ids follow row order.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rffa/candidates.hpp"
#include "rffa/flow.hpp"
#include "rffa/network.hpp"
#include "rffa/virtual_extension.hpp"

namespace rffa {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false, was_quoted = false;
  auto flush = [&] {
    out.push_back(was_quoted ? cell : std::string(trim(cell)));
    cell.clear();
    was_quoted = false;
  };
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c != '"') {
        cell += c;
      } else if (k + 1 < line.size() && line[k + 1] == '"') {
        cell += '"';
        ++k;
      } else {
        quoted = false;
      }
    } else if (c == '"' && trim(cell).empty()) {
      cell.clear();
      quoted = was_quoted = true;
    } else if (c == ',') {
      flush();
    } else if (!was_quoted) {
      cell += c;
    }
  }
  flush();
  return out;
}

// Quotes a field that would otherwise split or lose its delimiters.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos && s == trim(s)) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

// Reads a text source line by line, tracking position for error messages.
class LineReader {
 public:
  LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  // Next non-blank, non-comment line.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      line = std::string(t);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(name_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  double number(const std::string& field, const std::string& text) const {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
        !std::isfinite(value)) {
      fail("field '" + field + "': expected a number, got '" + text + "'");
    }
    return value;
  }

  void expect_header(const std::vector<std::string>& columns, std::size_t required) {
    std::string line;
    if (!next(line)) fail("missing column header");
    auto cells = split_csv(line);
    bool ok = cells.size() >= required && cells.size() <= columns.size();
    for (std::size_t c = 0; ok && c < cells.size(); ++c) ok = lower(cells[c]) == columns[c];
    if (!ok) {
      std::string want;
      for (const auto& c : columns) want += (want.empty() ? "" : ",") + c;
      fail("expected column header '" + want + "', got '" + line + "'");
    }
  }

 private:
  std::istream& in_;
  std::string name_;
  std::size_t line_no_ = 0;
};

inline NodeId resolve(const LineReader& reader, const std::unordered_map<std::string, NodeId>& ids,
                      const std::string& field, const std::string& label) {
  auto it = ids.find(label);
  if (it == ids.end()) reader.fail("field '" + field + "': unknown node '" + label + "'");
  return it->second;
}

}  // namespace detail

struct RawNetwork {
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
};

inline RawNetwork parse_network(std::istream& in, const std::string& name = "network") {
  detail::LineReader reader(in, name);
  RawNetwork raw;
  std::unordered_map<std::string, NodeId> ids;
  std::unordered_set<std::string> file_ids;
  std::string line;
  if (!reader.next(line) || detail::lower(line) != "nodes") reader.fail("expected section 'NODES'");
  reader.expect_header({"id", "label"}, 1);
  bool in_arcs = false;
  while (reader.next(line)) {
    if (!in_arcs && detail::lower(line) == "arcs") {
      in_arcs = true;
      reader.expect_header({"from", "to", "cost", "capacity"}, 3);
      continue;
    }
    auto cells = detail::split_csv(line);
    if (!in_arcs) {
      if (cells.size() > 2) reader.fail("expected 'id,label'");
      if (cells[0].empty()) reader.fail("field 'id': empty");
      if (!file_ids.insert(cells[0]).second) reader.fail("field 'id': duplicate id '" + cells[0] + "'");
      std::string label = cells.size() > 1 && !cells[1].empty() ? cells[1] : cells[0];
      const NodeId id = static_cast<NodeId>(raw.nodes.size());
      if (!ids.emplace(label, id).second) reader.fail("field 'label': duplicate label '" + label + "'");
      raw.nodes.push_back({id, label});
      continue;
    }
    if (cells.size() < 3 || cells.size() > 4) reader.fail("expected 'from,to,cost,capacity'");
    Arc arc;
    arc.from = detail::resolve(reader, ids, "from", cells[0]);
    arc.to = detail::resolve(reader, ids, "to", cells[1]);
    arc.cost = reader.number("cost", cells[2]);
    arc.capacity = cells.size() == 4 && !cells[3].empty() ? reader.number("capacity", cells[3])
                                                           : kInfinity;
    if (arc.cost < 0.0) reader.fail("field 'cost': must be non-negative");
    if (arc.capacity < 0.0) reader.fail("field 'capacity': must be non-negative");
    raw.arcs.push_back(arc);
  }
  if (!in_arcs) reader.fail("missing section 'ARCS'");
  return raw;
}

inline std::vector<Demand> parse_demands(std::istream& in, const RawNetwork& raw,
                                         const std::string& name = "demands") {
  detail::LineReader reader(in, name);
  std::unordered_map<std::string, NodeId> ids;
  for (const Node& n : raw.nodes) ids.emplace(n.label, n.id);
  reader.expect_header({"origin", "destination", "volume", "shadow_price"}, 3);
  std::vector<Demand> out;
  std::string line;
  while (reader.next(line)) {
    auto cells = detail::split_csv(line);
    if (cells.size() < 3 || cells.size() > 4) {
      reader.fail("expected 'origin,destination,volume[,shadow_price]'");
    }
    Demand d;
    d.origin = detail::resolve(reader, ids, "origin", cells[0]);
    d.destination = detail::resolve(reader, ids, "destination", cells[1]);
    d.volume = reader.number("volume", cells[2]);
    if (d.volume < 0.0) reader.fail("field 'volume': must be non-negative");
    if (cells.size() == 4 && !cells[3].empty()) {
      d.shadow_price = reader.number("shadow_price", cells[3]);
      if (*d.shadow_price < 0.0) reader.fail("field 'shadow_price': must be non-negative");
    }
    if (d.origin == d.destination) reader.fail("origin and destination coincide");
    out.push_back(d);
  }
  return out;
}

/// Reads both files and validates them through build_network.
inline Network load_instance(const std::string& network_path, const std::string& demands_path) {
  std::ifstream net_in(network_path);
  if (!net_in) throw InputError("cannot open network file '" + network_path + "'");
  std::ifstream dem_in(demands_path);
  if (!dem_in) throw InputError("cannot open demands file '" + demands_path + "'");
  RawNetwork raw = parse_network(net_in, network_path);
  std::vector<Demand> demands = parse_demands(dem_in, raw, demands_path);
  return build_network(std::move(raw.nodes), std::move(raw.arcs), std::move(demands));
}

inline void write_network(std::ostream& out, const Network& net) {
  out << "NODES\nid,label\n";
  for (const Node& n : net.nodes()) out << n.id << ',' << detail::csv_field(n.label) << '\n';
  out << "ARCS\nfrom,to,cost,capacity\n";
  for (const Arc& a : net.arcs()) {
    if (a.is_virtual) continue;
    out << detail::csv_field(net.label(a.from)) << ',' << detail::csv_field(net.label(a.to)) << ',' << detail::format_number(a.cost)
        << ',';
    if (std::isfinite(a.capacity)) out << detail::format_number(a.capacity);
    out << '\n';
  }
}

inline void write_demands(std::ostream& out, const Network& net) {
  out << "origin,destination,volume,shadow_price\n";
  for (const Demand& d : net.demands()) {
    out << detail::csv_field(net.label(d.origin)) << ',' << detail::csv_field(net.label(d.destination)) << ','
        << detail::format_number(d.volume) << ',';
    if (d.shadow_price) out << detail::format_number(*d.shadow_price);
    out << '\n';
  }
}

/// One row per candidate pair: destination,node,next (labels).
inline void write_assignment(std::ostream& out, const Network& net, const CandidateTable& table,
                             const SuccessorAssignment& a) {
  out << "destination,node,next\n";
  const std::size_t n = net.node_count();
  for (std::size_t p : table.pairs()) {
    const NodeId j = net.destinations()[p / n];
    out << detail::csv_field(net.label(j)) << ',' << detail::csv_field(net.label(static_cast<NodeId>(p % n)))
        << ',' << detail::csv_field(net.label(a.next(p))) << '\n';
  }
}

/// Reads an assignment written by write_assignment. Pairs absent from the
/// file keep their first candidate.
inline SuccessorAssignment read_assignment(std::istream& in, const Network& net,
                                           const CandidateTable& table,
                                           const std::string& name = "assignment") {
  detail::LineReader reader(in, name);
  reader.expect_header({"destination", "node", "next"}, 3);
  SuccessorAssignment a(table);
  std::string line;
  auto lookup = [&](const std::string& field, const std::string& label) {
    auto id = net.find_label(label);
    if (!id) reader.fail("field '" + field + "': unknown node '" + label + "'");
    return *id;
  };
  while (reader.next(line)) {
    auto cells = detail::split_csv(line);
    if (cells.size() != 3) reader.fail("expected 'destination,node,next'");
    const NodeId j = lookup("destination", cells[0]);
    const NodeId i = lookup("node", cells[1]);
    const NodeId k = lookup("next", cells[2]);
    auto slot = net.destination_slot(j);
    if (!slot) reader.fail("field 'destination': '" + cells[0] + "' has no demand");
    if (!a.choose_node(table, table.pair_index(i, *slot), k)) {
      reader.fail("field 'next': '" + cells[2] + "' is not a candidate for (" + cells[1] + ", " +
                  cells[0] + ")");
    }
  }
  return a;
}

}  // namespace rffa
