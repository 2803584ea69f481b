#pragma once

#include "rffa/candidates.hpp"
#include "rffa/network.hpp"
#include "rffa/shortest_paths.hpp"
#include "rffa/virtual_extension.hpp"

namespace rffa {

/// Everything the solvers read: the (optionally extended) network, shortest
/// distances over its real arcs, and the candidate table.
struct Problem {
  ExtendedNetwork ext;
  DistanceTable dist;
  CandidateTable candidates;

  const Network& network() const { return ext.network(); }
};

struct ProblemOptions {
  CandidateOptions candidates;
  bool virtual_arcs = true;
};

inline Problem prepare(const Network& base, const ProblemOptions& options = {}) {
  Problem p;
  p.ext = options.virtual_arcs ? extend(base) : without_virtual(base);
  p.dist = all_pairs_shortest(p.ext.network(), p.ext.network().destinations());
  p.candidates = build_candidates(p.ext, p.dist, options.candidates);
  return p;
}

}  // namespace rffa
