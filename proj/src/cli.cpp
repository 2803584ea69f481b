#include "rffa/cli.hpp"

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rffa/io.hpp"
#include "rffa/oracle.hpp"
#include "rffa/problem.hpp"
#include "rffa/report.hpp"

namespace rffa::cli {
namespace detail {

void add_instance_options(CLI::App* cmd, InstanceArgs& a) {
  cmd->add_option("--network", a.network, "Network file (NODES/ARCS sections)")->required();
  cmd->add_option("--demands", a.demands, "Demands file (origin,destination,volume[,shadow_price])")
      ->required();
  cmd->add_option("--epsilon", a.epsilon, "Detour ratio threshold")->capture_default_str();
  cmd->add_option("--lambda", a.lambda, "Capacity penalty weight")->capture_default_str();
  cmd->add_flag("--no-virtual", a.no_virtual, "Disable abandonment through virtual arcs");
  cmd->add_flag("--no-prune", a.no_prune, "Admit every neighbor that reaches the destination");
}

Problem load_problem(const InstanceArgs& a, Network& base) {
  base = load_instance(a.network, a.demands);
  ProblemOptions opts;
  opts.candidates.epsilon = a.epsilon;
  opts.candidates.prune = !a.no_prune;
  opts.virtual_arcs = !a.no_virtual;
  return prepare(base, opts);
}

nlohmann::ordered_json oracle_json(const OracleResult& r) {
  return {{"optimum", r.optimum},
          {"transport_cost", r.optimum_energy.transport_cost},
          {"abandonment_cost", r.optimum_energy.abandonment_cost},
          {"penalty", r.optimum_energy.penalty},
          {"optimal_count", r.optimal_count},
          {"enumerated", r.enumerated},
          {"infeasible", r.infeasible}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

// report.json, arcs.csv, assignment.csv and tree files for one assignment.
SolveReport write_report(const Problem& p, const SuccessorAssignment& a, double lambda,
                                const std::vector<std::string>& trees,
                                const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  SolveReport report = build_report(p.ext, a, lambda);
  write_file(out / "report.json", report_json(p.ext, report).dump(2) + "\n");
  write_file(out / "arcs.csv", arcs_csv(p.ext, report));
  std::ostringstream assignment;
  write_assignment(assignment, p.network(), p.candidates, a);
  write_file(out / "assignment.csv", assignment.str());
  emit_trees(p.ext, report, trees, out);
  return report;
}

std::string trace_log(const SATrace& trace) {
  std::ostringstream out;
  out << "# T0=" << rffa::detail::format_number(trace.initial_temperature)
      << " Tstop=" << rffa::detail::format_number(trace.stop_temperature)
      << " omega=" << trace.neighborhood << '\n';
  for (std::size_t m = 0; m < trace.chains.size(); ++m) {
    const ChainRecord& c = trace.chains[m];
    out << "chain=" << (m + 1) << " T=" << rffa::detail::format_number(c.temperature)
        << " generated=" << c.generated << " accepted=" << c.accepted
        << " best=" << rffa::detail::format_number(c.best_energy)
        << " current=" << rffa::detail::format_number(c.current_energy)
        << " sigma=" << rffa::detail::format_number(c.sigma) << '\n';
  }
  return out.str();
}

}  // namespace detail

/// Full pipeline: prune, extend, anneal, report. Returns the exit code.
int solve_command(const SolveArgs& args, std::ostream& log) {
  Network base;
  Problem p = detail::load_problem(args.instance, base);
  SAParams params = args.params;
  params.lambda = args.instance.lambda;
  params.epsilon = args.instance.epsilon;
  if (args.oracle && p.candidates.assignment_count() > args.oracle_cap) {
    throw OracleCapExceeded(p.candidates.assignment_count());
  }

  std::size_t winner = 0;
  AnnealResult best = anneal_restarts(p.ext, p.candidates, params, args.restarts, &winner);

  const std::filesystem::path out(args.out);
  SolveReport report = detail::write_report(p, best.assignment, params.lambda, args.trees, out);

  nlohmann::ordered_json solver = {
      {"seed", params.seed},
      {"restarts", args.restarts},
      {"winning_restart", winner},
      {"winning_seed", best.seed},
      {"chains", best.trace.chains.size()},
      {"initial_temperature", best.trace.initial_temperature},
      {"final_temperature", best.trace.final_temperature},
      {"stop_temperature", best.trace.stop_temperature},
      {"neighborhood", best.trace.neighborhood},
      {"initial_energy", best.trace.initial_energy},
      {"wall_seconds", best.wall_seconds}};
  if (args.oracle) {
    OracleOptions oo;
    oo.lambda = params.lambda;
    oo.cap = args.oracle_cap;
    OracleResult exact = enumerate(p.network(), p.candidates, oo);
    solver["oracle"] = detail::oracle_json(exact);
    log << "oracle optimum " << exact.optimum << " over " << exact.enumerated << " assignments\n";
  }
  detail::write_file(out / "solver.json", solver.dump(2) + "\n");
  if (args.verbose) detail::write_file(out / "trace.log", detail::trace_log(best.trace));

  log << "total energy " << report.objective.total << " (transport "
      << report.objective.transport_cost << ", abandonment " << report.objective.abandonment_cost
      << ", overload " << report.objective.penalty << ")\n"
      << "mean shipment distance " << report.mean_shipment_distance << "\n"
      << "report written to " << out.string() << "\n";
  return report.objective.penalty > 0.0 ? kExitOverloaded : kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Rail freight flow assignment with tree-shaped paths"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Anneal an instance and write the report");
  detail::add_instance_options(solve_cmd, solve.instance);
  SAParams& sp = solve.params;
  solve_cmd->add_option("--K", sp.chain_factor, "Markov chain multiplier in [3,6]")->capture_default_str();
  solve_cmd->add_option("--delta", sp.delta, "Statistical cooling parameter")->capture_default_str();
  solve_cmd->add_option("--alpha", sp.alpha, "Geometric cooling factor")->capture_default_str();
  solve_cmd->add_option("--switch-iter", sp.switch_iter, "Chains using statistical cooling")
      ->capture_default_str();
  solve_cmd->add_option("--t0-accept", sp.t0_accept, "Target initial acceptance ratio")
      ->capture_default_str();
  solve_cmd->add_option("--t-min", sp.t_min, "Stop temperature (default: from calibration)");
  solve_cmd->add_option("--stall-chains", sp.stall_chains, "Stop after this many idle chains")
      ->capture_default_str();
  solve_cmd->add_option("--seed", sp.seed, "Random seed")->capture_default_str();
  solve_cmd->add_option("--restarts", solve.restarts, "Independent annealing runs")
      ->capture_default_str();
  solve_cmd->add_flag("--oracle", solve.oracle, "Also enumerate the exact optimum");
  solve_cmd->add_option("--oracle-cap", solve.oracle_cap, "Maximum assignments to enumerate")
      ->capture_default_str();
  solve_cmd->add_option("--trees", solve.trees, "Destinations to draw as DOT trees")->delimiter(',');
  solve_cmd->add_option("--out", solve.out, "Output directory")->capture_default_str();
  solve_cmd->add_flag("--verbose", solve.verbose, "Write the annealing trace log");

  InstanceArgs oracle_args;
  double oracle_cap = 1e7;
  std::string oracle_out;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Enumerate the exact optimum");
  detail::add_instance_options(oracle_cmd, oracle_args);
  oracle_cmd->add_option("--oracle-cap", oracle_cap, "Maximum assignments to enumerate")
      ->capture_default_str();
  oracle_cmd->add_option("--out", oracle_out, "Directory for report of the optimum");

  InstanceArgs size_args;
  CLI::App* size_cmd = app.add_subcommand("size", "Print model size before and after pruning");
  detail::add_instance_options(size_cmd, size_args);

  InstanceArgs report_args;
  std::string assignment_path;
  std::vector<std::string> report_trees;
  std::string report_out = "rffa_out";
  CLI::App* report_cmd = app.add_subcommand("report", "Rebuild the report from a stored assignment");
  detail::add_instance_options(report_cmd, report_args);
  report_cmd->add_option("--assignment", assignment_path, "assignment.csv from a solve")->required();
  report_cmd->add_option("--trees", report_trees, "Destinations to draw")->delimiter(',');
  report_cmd->add_option("--out", report_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, log, err) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve_cmd) return solve_command(solve, log);

    if (*oracle_cmd) {
      Network base;
      Problem p = detail::load_problem(oracle_args, base);
      OracleOptions oo;
      oo.lambda = oracle_args.lambda;
      oo.cap = oracle_cap;
      OracleResult exact = enumerate(p.network(), p.candidates, oo);
      log << detail::oracle_json(exact).dump(2) << "\n";
      if (!oracle_out.empty() && !exact.optimal.empty()) {
        detail::write_report(p, exact.optimal.front(), oo.lambda, {}, oracle_out);
      }
      return exact.optimum_energy.penalty > 0.0 ? kExitOverloaded : kExitOk;
    }

    if (*size_cmd) {
      Network base;
      Problem p = detail::load_problem(size_args, base);
      SizeReport s = problem_size(base, p.candidates);
      nlohmann::ordered_json j = {{"nodes", s.nodes},
                                  {"mean_out_degree", s.mean_out_degree},
                                  {"raw_variables", s.raw_variables},
                                  {"conservation_rows", s.conservation_rows},
                                  {"tree_rows", s.tree_rows},
                                  {"capacity_rows", s.capacity_rows},
                                  {"pruned_variables", s.pruned_variables},
                                  {"neighborhood", p.candidates.neighborhood_size()}};
      log << j.dump(2) << "\n";
      return kExitOk;
    }

    if (*report_cmd) {
      Network base;
      Problem p = detail::load_problem(report_args, base);
      std::ifstream in(assignment_path);
      if (!in) throw InputError("cannot open assignment file '" + assignment_path + "'");
      SuccessorAssignment a = read_assignment(in, p.network(), p.candidates, assignment_path);
      SolveReport r = detail::write_report(p, a, report_args.lambda, report_trees, report_out);
      return r.objective.penalty > 0.0 ? kExitOverloaded : kExitOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const OracleCapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CycleException& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace rffa::cli
