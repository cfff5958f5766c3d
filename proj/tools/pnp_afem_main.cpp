#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "pnpafem/bench.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Adaptive finite element solver for the steady-state "
                 "Poisson-Nernst-Planck system"};
    app.require_subcommand(1);

    pnpafem::BenchOptions opts;
    double epsilon = 0.0;
    double theta = 0.0;
    std::string marking = "max";
    std::string solver = "two-grid";
    std::string out_csv;
    std::string vtk_dir;

    auto* run = app.add_subcommand("run", "Run the adaptive benchmark for one example");
    run->add_option("--example", opts.example, "Example problem id (1, 2 or 3)")
        ->required()
        ->check(CLI::Range(1, 3));
    auto* eps_opt =
        run->add_option("--epsilon", epsilon, "Singular perturbation parameter (example 3 only)")
            ->check(CLI::Range(1e-12, 1.0));
    run->add_option("--max-dofs", opts.max_dofs, "Stop once the vertex count reaches this")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    auto* theta_opt = run->add_option("--theta", theta, "Marking parameter");
    run->add_option("--marking", marking, "Marking strategy")
        ->check(CLI::IsMember({"max", "dorfler"}))
        ->capture_default_str();
    run->add_option("--solver", solver, "Per-level solver")
        ->check(CLI::IsMember({"two-grid", "full-gummel"}))
        ->capture_default_str();
    run->add_option("--out", out_csv, "CSV output path");
    run->add_option("--vtk-dir", vtk_dir, "Directory for per-level VTK files");
    run->add_option("--seed", opts.seed, "Seed recorded for scripted sweeps")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (eps_opt->count() > 0) opts.epsilon = epsilon;
    if (theta_opt->count() > 0) opts.theta = theta;
    opts.marking = marking == "max" ? pnpafem::MarkingStrategy::maximum
                                    : pnpafem::MarkingStrategy::dorfler;
    opts.solver = solver == "two-grid" ? pnpafem::SolverMode::two_grid
                                       : pnpafem::SolverMode::full_gummel;
    if (!out_csv.empty()) opts.out_csv = out_csv;
    if (!vtk_dir.empty()) opts.vtk_dir = vtk_dir;

    try {
        const auto result = pnpafem::run_benchmark(opts);
        const auto& rows = result.loop.history.rows;
        std::cout << "levels: " << rows.size();
        if (!rows.empty())
            std::cout << ", final N: " << rows.back().n_dofs << ", final eta: " << rows.back().eta;
        std::cout << '\n';
        if (result.eta_slope)
            std::cout << "eta slope vs N (last 5 levels): " << *result.eta_slope << '\n';
        else
            std::cout << "eta slope vs N (last 5 levels): n/a\n";
        if (result.loop.error) std::cerr << "solver failure: " << *result.loop.error << '\n';
        return result.exit_code;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
