#pragma once

// Command-line front end. Every subcommand produces one table, written as CSV
// or JSON with its full parameter set embedded.

#include "silt/core.hpp"
#include "silt/expectations.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace silt::cli {

enum ExitCode : int {
    kOk = 0,
    kValidationFailed = 1,
    kPrecondition = 2,
    kConvergence = 3,
    kOverflow = 4,
};

struct MonteCarloConfig {
    std::size_t n_paths = 10'000;
    int steps = 0;  // 0: dt = eps / 10
    std::uint64_t seed = 1;
};

struct RunConfig {
    std::string command;
    ModelParams params;
    RegularizationSpec reg;
    MonteCarloConfig mc;
    std::string output;  // empty: stdout
    std::string format = "csv";

    std::vector<double> lambdas;
    int nmax = 12;
    double g = 1.0;
    std::vector<double> thresholds{1.0};
    std::optional<double> alpha;
    std::optional<double> K;
    std::string kind = "phi";
    std::vector<int> index;  // multi-index; empty means (n, 0, ..., 0)
    int order = 1;
    double u = 0.25;
    double v = 0.5;
    int samples = 20;
    double tol = 1e-7;
    std::string estimator = "gaussian";
    double bin_width = 0.01;
    bool timing = true;
};

/// Executes `config`; diagnostics go to `err`. Returns an ExitCode.
int run(const RunConfig& config, std::ostream& err);

/// Parses argv into a RunConfig and runs it.
int main_entry(int argc, char** argv);

}  // namespace silt::cli
