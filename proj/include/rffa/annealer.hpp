#pragma once

// Simulated annealing over successor assignments: random initial solution,
// single-pair neighbor moves, Metropolis acceptance, Markov chains whose
// length scales with the neighborhood size, and statistical cooling that
// switches to geometric cooling after a fixed number of chains.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rffa/candidates.hpp"
#include "rffa/flow.hpp"
#include "rffa/move.hpp"
#include "rffa/virtual_extension.hpp"

namespace rffa {

enum class Evaluation {
  kIncremental,  // delta_energy on the changed chain segments
  kFull,         // re-propagate and re-evaluate after every move
};

struct SAParams {
  double lambda = 600.0;
  double epsilon = 1.4;
  double chain_factor = 4.0;  // K
  double delta = 0.1;
  double alpha = 0.95;
  int switch_iter = 30;
  double t0_accept = 0.9;
  // Stop temperature; zero or negative selects it from the calibration walk.
  double t_min = 0.0;
  int stall_chains = 3;
  std::uint64_t seed = 1;
  Evaluation evaluation = Evaluation::kIncremental;
  // Keep one entry per generated move in SATrace::decisions.
  bool record_decisions = false;

  void validate() const {
    if (!(chain_factor >= 3.0 && chain_factor <= 6.0)) {
      throw std::invalid_argument("chain multiplier K must lie in [3, 6]");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(epsilon >= 1.0)) throw std::invalid_argument("epsilon must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (!(t0_accept > 0.0 && t0_accept < 1.0)) {
      throw std::invalid_argument("t0-accept must lie in (0, 1)");
    }
    if (switch_iter < 0) throw std::invalid_argument("switch-iter must be >= 0");
    if (stall_chains < 1) throw std::invalid_argument("stall-chains must be >= 1");
  }
};

struct ChainRecord {
  double temperature = 0.0;
  std::size_t generated = 0;
  std::size_t accepted = 0;
  double best_energy = 0.0;
  double current_energy = 0.0;
  double sigma = 0.0;
};

enum class Decision : std::uint8_t { kRejected = 0, kAccepted = 1, kCycle = 2 };

struct SATrace {
  double initial_temperature = 0.0;
  double final_temperature = 0.0;
  double stop_temperature = 0.0;
  double initial_energy = 0.0;
  std::size_t neighborhood = 0;
  std::vector<ChainRecord> chains;
  std::vector<Decision> decisions;
};

struct AnnealResult {
  SuccessorAssignment assignment;
  FlowField flow;
  EnergyBreakdown energy;
  SATrace trace;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
  return mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(restart)));
}

namespace detail {

// Nodes of slot `slot` that lie on successor cycles.
inline std::vector<NodeId> cycle_nodes(const Network& net, const SuccessorAssignment& a,
                                       std::size_t slot) {
  const std::size_t n = net.node_count();
  const std::size_t base = slot * n;
  std::vector<std::uint8_t> state(n, 0);  // 0 new, 1 on path, 2 done
  std::vector<NodeId> path, out;
  for (NodeId s = 0; s < n; ++s) {
    if (state[s]) continue;
    path.clear();
    NodeId cur = s;
    while (cur != kNoNode && state[cur] == 0) {
      state[cur] = 1;
      path.push_back(cur);
      cur = a.next(base + cur);
    }
    if (cur != kNoNode && state[cur] == 1) {
      for (auto it = std::find(path.begin(), path.end(), cur); it != path.end(); ++it) {
        out.push_back(*it);
      }
    }
    for (NodeId v : path) state[v] = 2;
  }
  return out;
}

inline std::uint32_t draw(Rng& rng, std::size_t count) {
  return static_cast<std::uint32_t>(
      std::uniform_int_distribution<std::size_t>(0, count - 1)(rng));
}

}  // namespace detail

/// Uniform successor per pair, then cycles are re-drawn; a destination still
/// cyclic after a few rounds falls back to its shortest-path successors.
/// Unlike propagation, zero-flow cycles are removed too, so every successor
/// chain of the result reaches its destination.
inline SuccessorAssignment initial_solution(const Network& net, const CandidateTable& table,
                                            Rng& rng, int max_rounds = 32) {
  SuccessorAssignment a(table);
  for (std::size_t p : table.pairs()) a.choose(table, p, detail::draw(rng, table.at(p).size()));
  const std::size_t n = net.node_count();
  for (std::size_t slot = 0; slot < table.slot_count(); ++slot) {
    bool acyclic = false;
    for (int round = 0; round < max_rounds && !acyclic; ++round) {
      auto cyc = detail::cycle_nodes(net, a, slot);
      acyclic = cyc.empty();
      for (NodeId v : cyc) {
        const std::size_t p = slot * n + v;
        a.choose(table, p, detail::draw(rng, table.at(p).size()));
      }
    }
    if (!acyclic && !detail::cycle_nodes(net, a, slot).empty()) {
      for (NodeId v = 0; v < n; ++v) {
        const std::size_t p = slot * n + v;
        if (!table.at(p).empty()) a.choose(table, p, table.preferred(p));
      }
    }
  }
  return a;
}

/// A uniformly chosen pair with a real choice, switched to a uniformly chosen
/// different candidate. Requires table.movable_pairs() to be non-empty.
inline Move neighbor(const SuccessorAssignment& current, const CandidateTable& table, Rng& rng) {
  const auto& movable = table.movable_pairs();
  const std::size_t pair = movable[detail::draw(rng, movable.size())];
  const std::size_t size = table.at(pair).size();
  std::uint32_t choice = detail::draw(rng, size - 1);
  if (choice >= current.choice(pair)) ++choice;
  return {pair, choice};
}

namespace detail {

// Current state of one annealing chain, with the evaluation strategy behind
// a single try/commit interface.
class ChainState {
 public:
  ChainState(const Network& net, const CandidateTable& table, const SAParams& params,
             SuccessorAssignment start)
      : net_(net), table_(table), params_(params), evaluator_(net, table),
        assignment_(std::move(start)), flow_(propagate(net, assignment_)),
        energy_(rffa::energy(net, flow_, params.lambda)) {}

  // Returns false for cycle-creating moves; otherwise fills `delta`.
  bool evaluate(Move move, double& delta) {
    if (params_.evaluation == Evaluation::kIncremental) {
      const MoveEvaluation& ev = evaluator_.evaluate(assignment_, flow_, move, params_.lambda);
      if (ev.creates_cycle) return false;
      delta = ev.delta;
      return true;
    }
    if (evaluator_.creates_cycle(assignment_, move)) return false;
    const std::uint32_t old_choice = assignment_.choice(move.pair);
    assignment_.choose(table_, move.pair, move.choice);
    propagate_into(net_, assignment_, scratch_flow_);
    scratch_energy_ = rffa::energy(net_, scratch_flow_, params_.lambda);
    assignment_.choose(table_, move.pair, old_choice);
    pending_ = move;
    delta = scratch_energy_.total - energy_.total;
    return true;
  }

  // Commits the most recently evaluated move.
  void commit() {
    if (params_.evaluation == Evaluation::kIncremental) {
      const MoveEvaluation& ev = evaluator_.last();
      commit_move(table_, ev.plan, assignment_, flow_);
      energy_.transport_cost += ev.delta_transport;
      energy_.abandonment_cost += ev.delta_abandonment;
      energy_.penalty += ev.delta_penalty;
      energy_.total += ev.delta;
      return;
    }
    assignment_.choose(table_, pending_.pair, pending_.choice);
    std::swap(flow_, scratch_flow_);
    energy_ = scratch_energy_;
  }

  const SuccessorAssignment& assignment() const { return assignment_; }
  double total() const { return energy_.total; }

 private:
  const Network& net_;
  const CandidateTable& table_;
  const SAParams& params_;
  MoveEvaluator evaluator_;
  SuccessorAssignment assignment_;
  FlowField flow_;
  EnergyBreakdown energy_;
  FlowField scratch_flow_;
  EnergyBreakdown scratch_energy_;
  Move pending_;
};

// Deltas this close to zero are rounding noise and count as flat, so that
// incremental and full evaluation classify moves the same way.
inline double flat_delta(double total) { return 1e-12 * std::max(1.0, std::abs(total)); }

struct Calibration {
  double initial_temperature = 1.0;
  double smallest_increase = 0.0;
};

// Random walk accepting every legal move; picks T0 so that the expected
// acceptance of the sampled moves is about `t0_accept`.
inline Calibration calibrate(const Network& net, const CandidateTable& table,
                             const SAParams& params, const SuccessorAssignment& start, Rng& rng) {
  ChainState walk(net, table, params, start);
  const std::size_t samples =
      std::clamp<std::size_t>(table.neighborhood_size(), 100, 5000);
  std::size_t downhill = 0, uphill = 0;
  double uphill_sum = 0.0;
  double smallest = kInfinity;
  for (std::size_t attempt = 0; attempt < 4 * samples && downhill + uphill < samples; ++attempt) {
    Move mv = neighbor(walk.assignment(), table, rng);
    double delta = 0.0;
    if (!walk.evaluate(mv, delta)) continue;
    if (delta > flat_delta(walk.total())) {
      ++uphill;
      uphill_sum += delta;
      smallest = std::min(smallest, delta);
    } else {
      ++downhill;
    }
    walk.commit();
  }
  Calibration cal;
  if (uphill == 0) return cal;
  const double mean_up = uphill_sum / static_cast<double>(uphill);
  const double chi = params.t0_accept;
  const double m1 = static_cast<double>(downhill);
  const double m2 = static_cast<double>(uphill);
  const double denom = m2 * chi - m1 * (1.0 - chi);
  cal.initial_temperature = denom > 0.0 ? mean_up / std::log(m2 / denom)
                                        : -mean_up / std::log(chi);
  cal.smallest_increase = smallest;
  return cal;
}

inline double sample_sigma(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

/// Next temperature after chain `m` (1-based). Chains up to `switch_iter`
/// use the statistical decrement T / (1 + T ln(1 + delta) / (3 sigma));
/// later chains, or chains with sigma = 0, use alpha * T.
inline double next_temperature(double t, int m, double sigma, const SAParams& params) {
  if (m <= params.switch_iter && sigma > 0.0) {
    return t / (1.0 + t * std::log1p(params.delta) / (3.0 * sigma));
  }
  return params.alpha * t;
}

/// One annealing run from a random initial solution.
inline AnnealResult anneal(const ExtendedNetwork& ext, const CandidateTable& table,
                           const SAParams& params) {
  params.validate();
  const auto started = std::chrono::steady_clock::now();
  const Network& net = ext.network();
  Rng rng(params.seed);
  AnnealResult result;
  result.seed = params.seed;

  SuccessorAssignment start = initial_solution(net, table, rng);
  SATrace& trace = result.trace;
  trace.neighborhood = table.neighborhood_size();

  if (table.movable_pairs().empty()) {
    result.assignment = std::move(start);
    result.flow = propagate(net, result.assignment);
    result.energy = energy(net, result.flow, params.lambda);
    trace.initial_energy = result.energy.total;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
  }

  const detail::Calibration cal = detail::calibrate(net, table, params, start, rng);
  double t = cal.initial_temperature;
  double t_stop = params.t_min;
  if (!(t_stop > 0.0)) {
    // Final chains accept the smallest observed increase with odds ~1e-4.
    t_stop = cal.smallest_increase > 0.0 ? cal.smallest_increase / std::log(1e4) : t * 1e-4;
    t_stop = std::max(t_stop, t * 1e-6);
  }
  trace.initial_temperature = t;
  trace.stop_temperature = t_stop;

  detail::ChainState state(net, table, params, std::move(start));
  trace.initial_energy = state.total();
  double best = state.total();
  SuccessorAssignment best_assignment = state.assignment();
  bool best_unsaved = false;

  const double omega = static_cast<double>(table.neighborhood_size());
  const double generated_cap = 2.0 * params.chain_factor * omega;
  const double accepted_cap = params.chain_factor * omega;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> accepted_energies;
  int stalled = 0;

  for (int m = 1;; ++m) {
    std::size_t generated = 0, accepted = 0;
    accepted_energies.clear();
    while (static_cast<double>(generated) <= generated_cap &&
           static_cast<double>(accepted) <= accepted_cap) {
      Move mv = neighbor(state.assignment(), table, rng);
      ++generated;
      double delta = 0.0;
      if (!state.evaluate(mv, delta)) {
        if (params.record_decisions) trace.decisions.push_back(Decision::kCycle);
        continue;
      }
      // One draw per evaluated move keeps both evaluation modes on the same stream.
      const double u = unit(rng);
      const double flat = detail::flat_delta(state.total());
      const bool accept = delta <= flat || u < std::exp(-delta / t);
      if (params.record_decisions) {
        trace.decisions.push_back(accept ? Decision::kAccepted : Decision::kRejected);
      }
      if (!accept) continue;
      if (delta > flat && best_unsaved) {
        best_assignment = state.assignment();
        best_unsaved = false;
      }
      state.commit();
      ++accepted;
      accepted_energies.push_back(state.total());
      if (state.total() < best - flat) {
        best = state.total();
        best_unsaved = true;
      }
    }
    ChainRecord rec;
    rec.temperature = t;
    rec.generated = generated;
    rec.accepted = accepted;
    rec.best_energy = best;
    rec.current_energy = state.total();
    rec.sigma = detail::sample_sigma(accepted_energies);
    trace.chains.push_back(rec);

    stalled = accepted == 0 ? stalled + 1 : 0;
    t = next_temperature(t, m, rec.sigma, params);
    if (t <= t_stop || stalled >= params.stall_chains) break;
  }
  if (best_unsaved) best_assignment = state.assignment();
  trace.final_temperature = t;

  result.assignment = std::move(best_assignment);
  result.flow = propagate(net, result.assignment);
  result.energy = energy(net, result.flow, params.lambda);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

/// Independent runs with seeds derived from params.seed, run concurrently.
/// The lowest total energy wins; ties go to the lowest restart index.
inline AnnealResult anneal_restarts(const ExtendedNetwork& ext, const CandidateTable& table,
                                    const SAParams& params, std::size_t restarts,
                                    std::size_t* winner = nullptr) {
  restarts = std::max<std::size_t>(restarts, 1);
  std::vector<std::future<AnnealResult>> runs;
  runs.reserve(restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    SAParams child = params;
    child.seed = restart_seed(params.seed, r);
    runs.push_back(std::async(std::launch::async,
                              [&ext, &table, child] { return anneal(ext, table, child); }));
  }
  std::vector<AnnealResult> results;
  results.reserve(restarts);
  for (auto& f : runs) results.push_back(f.get());
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (results[r].energy.total < results[best].energy.total) best = r;
  }
  if (winner) *winner = best;
  return std::move(results[best]);
}

}  // namespace rffa
