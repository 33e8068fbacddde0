#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace renewal::cli {

/// Everything a single invocation needs; filled by the argument parser or
/// constructed directly by tests.
struct RunConfig {
    std::string command;  // mesh | eig | simulate | continue | hopf-curve |
                          // floquet | converge | bench

    // model selection
    std::string model_kind;                   // --model
    std::string model_file;                   // --model-file (JSON)
    std::map<std::string, double> overrides;  // --set key=value

    // discretization
    int M = 20;
    int nq = 0;        // 0 = auto
    double tau = 2.0;  // mesh command only

    // continuation
    std::string param;  // active parameter
    double from = 0.0;
    double to = 0.0;
    int points = 50;
    std::string param2;
    std::vector<double> grid;
    double start_b = 1.0;

    // convergence study
    std::vector<int> M_list;
    int ref_M = 40;

    // time integration
    double t_end = 0.0;  // 0 = 200 * tau
    std::string x0 = "equilibrium+eps";
    double eps = 1e-2;
    double rtol = 1e-8;
    double atol = 1e-10;
    double transient_fraction = 0.8;

    // bench
    int evals = 200;

    // output
    std::string out;  // empty = stdout
    std::uint64_t seed = 0;
    bool reproducible = false;
    bool pretty = false;
};

/// Parse argv into a config. Throws std::invalid_argument on bad arguments;
/// sets help_requested instead when --help was asked for.
RunConfig parse_args(const std::vector<std::string>& args, bool& help_requested);

/// Execute one command. Returns 0 on success, 2 on domain/configuration
/// errors, 3 on numeric failures; diagnostics go to stderr.
int run(const RunConfig& config);

}  // namespace renewal::cli
