#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ultrafield::cli {

enum ExitCode : int { kSuccess = 0, kVerificationFailed = 1, kInputError = 2 };

struct RunConfig {
  std::string command;     // validate, spectrum, ..., or "verify"
  std::string check;       // verify target: eigen|kernel|ortho|markov|equation
  std::string input;       // tree-spec path; empty when --gen is used
  std::string generate;    // "p:depth:measure"
  double t_root = 1.0;     // symbol for generated trees: T(depth) = t_root * t_ratio^depth
  double t_ratio = 1.0;
  std::uint64_t seed = 0;
  double eigen_tol = 1e-9;
  double kernel_tol = 1e-10;
  double ortho_tol = 1e-10;
  double equation_tol = 1e-9;
  double sigma_band = 5.0;
  std::size_t count = 1;
  std::size_t trials = 1000;
  std::string pairs = "all";
  std::string out;         // empty: standard output
  bool quiet = false;
  // convergence
  int branching = 2;
  double measure_ratio = 2.0;
  double symbol_ratio = 0.25;
  int levels = 40;
};

/// Runs one command. `args` excludes the program name. Reports go to `out`
/// (or --out), diagnostics to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ultrafield::cli
