#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sagd/problem.hpp"
#include "sagd/solver.hpp"

namespace sagd::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kInvalidInput = 2,
  kNotConverged = 3,
};

/// Entry point shared by the `sagd` binary and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "1,2,3" → {1, 2, 3}.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// "a:b" (inclusive range) or "a,b,c".
std::vector<Index> parse_tau_list(const std::string& text);

double median(std::vector<double> values);

/// One run per seed, executed concurrently; results come back in seed order.
std::vector<RunResult> run_seeds(const Dataset& data, const LossSpec& loss,
                                 const SolverConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                 const std::optional<Eigen::VectorXd>& x_star);

}  // namespace sagd::cli
