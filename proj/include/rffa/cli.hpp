#pragma once

// Command-line front end: solve, oracle, size and report subcommands.
// Exit codes: 0 success, 1 input error, 2 best solution still overloads
// some arc.

#include <cstddef>
#include <iostream>
#include <string>
#include <vector>

#include "rffa/annealer.hpp"

namespace rffa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitOverloaded = 2;

struct InstanceArgs {
  std::string network;
  std::string demands;
  double epsilon = 1.4;
  double lambda = 600.0;
  bool no_virtual = false;
  bool no_prune = false;
};

struct SolveArgs {
  InstanceArgs instance;
  SAParams params;
  std::size_t restarts = 1;
  bool oracle = false;
  double oracle_cap = 1e7;
  std::vector<std::string> trees;
  std::string out = "rffa_out";
  bool verbose = false;
};

/// Anneals one instance and writes the report directory.
int solve_command(const SolveArgs& args, std::ostream& log = std::cout);

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int run(int argc, const char* const* argv, std::ostream& log = std::cout,
        std::ostream& err = std::cerr);

}  // namespace rffa::cli
