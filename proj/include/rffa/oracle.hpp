#pragma once

// Exhaustive enumeration of successor assignments over a candidate table.
// Certifies the optimum of small instances.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rffa/candidates.hpp"
#include "rffa/flow.hpp"

namespace rffa {

class OracleCapExceeded : public std::runtime_error {
 public:
  explicit OracleCapExceeded(double product)
      : std::runtime_error("oracle refused: " + std::to_string(product) +
                           " assignments exceed the enumeration cap"),
        product_(product) {}
  double product() const { return product_; }

 private:
  double product_;
};

struct OracleOptions {
  double lambda = 600.0;
  double cap = 1e7;
  // Ties within this relative tolerance count as optimal.
  double tie_tolerance = 1e-9;
  // Argmin assignments kept verbatim; the count covers all of them.
  std::size_t max_stored = 64;
};

struct OracleResult {
  double optimum = std::numeric_limits<double>::infinity();
  EnergyBreakdown optimum_energy;
  std::vector<SuccessorAssignment> optimal;
  std::size_t optimal_count = 0;
  std::size_t enumerated = 0;
  std::size_t infeasible = 0;
};

/// Evaluates Z(X) for every assignment in lexicographic order of the movable
/// pairs (the last pair varies fastest). Assignments whose successor graph
/// carries flow around a cycle are counted as infeasible and skipped.
inline OracleResult enumerate(const Network& net, const CandidateTable& table,
                              const OracleOptions& options = {}) {
  const double product = table.assignment_count();
  if (product > options.cap) throw OracleCapExceeded(product);

  OracleResult result;
  SuccessorAssignment a(table);
  const auto& movable = table.movable_pairs();
  std::vector<std::uint32_t> digit(movable.size(), 0);
  FlowField flow;

  for (;;) {
    ++result.enumerated;
    if (propagate_into(net, a, flow)) {
      ++result.infeasible;
    } else {
      EnergyBreakdown e = energy(net, flow, options.lambda);
      const bool first = result.optimal_count == 0;
      const double tol = first ? 0.0 : options.tie_tolerance * std::max(1.0, std::abs(result.optimum));
      if (first || e.total < result.optimum - tol) {
        result.optimum = e.total;
        result.optimum_energy = e;
        result.optimal.clear();
        result.optimal_count = 0;
      }
      if (std::abs(e.total - result.optimum) <= options.tie_tolerance * std::max(1.0, std::abs(result.optimum))) {
        ++result.optimal_count;
        if (result.optimal.size() < options.max_stored) result.optimal.push_back(a);
      }
    }
    // Odometer step.
    std::size_t pos = movable.size();
    while (pos > 0) {
      --pos;
      const std::size_t pair = movable[pos];
      if (++digit[pos] < table.at(pair).size()) {
        a.choose(table, pair, digit[pos]);
        break;
      }
      digit[pos] = 0;
      a.choose(table, pair, 0);
      if (pos == 0) return result;
    }
    if (movable.empty()) return result;
  }
}

}  // namespace rffa
