#pragma once

#include <optional>
#include <string>

#include "pnpafem/adapt.hpp"

namespace pnpafem {

/// Options of the `pnp-afem run` command.
struct BenchOptions {
    int example = 1;                  // 1, 2 or 3
    std::optional<double> epsilon;    // example 3 only (default 0.1 there)
    int max_dofs = 100000;
    std::optional<double> theta;      // default 0.5 (max) / 0.3 (dorfler)
    MarkingStrategy marking = MarkingStrategy::maximum;
    SolverMode solver = SolverMode::two_grid;
    std::optional<std::string> out_csv;
    std::optional<std::string> vtk_dir;
    unsigned seed = 0;  // recorded for reproducibility of scripted sweeps
    int initial_subdivision = 4;
};

struct BenchResult {
    LoopResult loop;
    std::optional<double> eta_slope;  // log-log fit over the last 5 levels
    int exit_code = 0;                // 0 ok, 1 solver failure
};

/// Builds the requested example, runs the adaptive loop, writes the CSV and
/// optional per-level VTK files, and fits the eta-vs-N slope. A solver
/// failure still flushes the partial CSV and sets exit_code 1.
/// Throws std::invalid_argument for inconsistent options (exit code 2 at the
/// CLI level).
BenchResult run_benchmark(const BenchOptions& options);

}  // namespace pnpafem
