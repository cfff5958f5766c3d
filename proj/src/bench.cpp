#include "pnpafem/bench.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "pnpafem/io.hpp"
#include "pnpafem/log.hpp"
#include "pnpafem/problems.hpp"

namespace pnpafem {

BenchResult run_benchmark(const BenchOptions& options) {
    if (options.example < 1 || options.example > 3)
        throw std::invalid_argument("run: example must be 1, 2 or 3");
    if (options.epsilon && options.example != 3)
        throw std::invalid_argument("run: --epsilon applies to example 3 only");
    if (options.max_dofs < 1) throw std::invalid_argument("run: max-dofs must be positive");

    ProblemSpec spec;
    double epsilon = 1.0;
    switch (options.example) {
        case 1: spec = example1(); break;
        case 2: spec = example2(); break;
        default:
            epsilon = options.epsilon.value_or(0.1);
            spec = example3(epsilon);
            break;
    }

    LoopOptions loop_opts;
    loop_opts.max_dofs = options.max_dofs;
    loop_opts.marking = options.marking;
    loop_opts.theta = options.theta.value_or(
        options.marking == MarkingStrategy::maximum ? 0.5 : 0.3);
    loop_opts.solver = options.solver;
    loop_opts.initial_subdivision = options.initial_subdivision;
    if (options.example == 3) {
        // Boundary-layer runs: plain alternation diverges once the drift
        // coupling is strong, so damp the Gummel update, start from a mesh
        // that can see the layer, and re-enter the nonlinear iteration on
        // levels where one correction pass leaves a large weak residual.
        loop_opts.gummel.relaxation = 0.5;
        loop_opts.gummel.max_iter = 500;
        loop_opts.initial_subdivision =
            std::max(options.initial_subdivision,
                     static_cast<int>(std::ceil(0.8 / std::sqrt(epsilon) - 1e-9)));
        loop_opts.regummel_residual_threshold = 1e-6;
    }

    if (options.vtk_dir) {
        std::filesystem::create_directories(*options.vtk_dir);
        loop_opts.on_level = [dir = *options.vtk_dir](int level, const MeshPtr& mesh,
                                                      const PNPState& state,
                                                      const EstimatorBreakdown&) {
            std::ostringstream name;
            name << dir << "/level_" << std::setfill('0') << std::setw(3) << level << ".vtk";
            export_vtk(*mesh, state, name.str());
        };
    }

    log_info("run: example " + std::to_string(options.example) + ", seed " +
             std::to_string(options.seed));

    BenchResult result;
    result.loop = adaptive_loop(spec, loop_opts);
    result.loop.history.meta.example_id = std::to_string(options.example);

    if (options.out_csv) write_history_csv(result.loop.history, *options.out_csv);

    std::vector<double> ns, etas;
    for (const auto& row : result.loop.history.rows) {
        ns.push_back(row.n_dofs);
        etas.push_back(row.eta);
    }
    result.eta_slope = fit_loglog_slope(ns, etas);
    result.exit_code = result.loop.error ? 1 : 0;
    return result;
}

}  // namespace pnpafem
