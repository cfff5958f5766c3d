#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnpafem/estimator.hpp"
#include "pnpafem/pnp.hpp"

namespace pnpafem {

enum class MarkingStrategy { maximum, dorfler };
enum class SolverMode { two_grid, full_gummel };

struct LoopOptions {
    int max_dofs = 100000;
    double theta = 0.5;  // 0.3 is the customary bulk fraction for dorfler
    MarkingStrategy marking = MarkingStrategy::maximum;
    SolverMode solver = SolverMode::two_grid;
    int initial_subdivision = 4;
    GummelOptions gummel{};
    EstimatorOptions estimator{};
    /// When set, a two-grid level whose weak residual max-abs exceeds this
    /// threshold re-enters Gummel iteration (robustness guard for small
    /// epsilon). Disabled by default: one correction pass per level.
    std::optional<double> regummel_residual_threshold{};
    int max_levels = 500;
    /// Observer called after each level's SOLVE+ESTIMATE.
    std::function<void(int level, const MeshPtr&, const PNPState&, const EstimatorBreakdown&)>
        on_level{};
};

struct LoopRow {
    int level = 0;
    int n_dofs = 0;
    double eta = 0.0;
    double osc = 0.0;
    std::optional<double> err_l2, err_h1, err_eps;
    int gummel_iters = 0;
    double cond_lhs = 0.0;
    double cond_rhs = 0.0;
};

struct RunMeta {
    std::string example_id;
    double epsilon = 1.0;
    double theta = 0.5;
    std::string marking;
    std::string solver;
    int max_dofs = 0;
    double wall_seconds = 0.0;
};

struct LoopHistory {
    std::vector<LoopRow> rows;
    RunMeta meta;
};

/// Outcome of an adaptive run. `error` carries a description when a solver
/// failure aborted the loop; the history holds the levels completed so far.
struct LoopResult {
    LoopHistory history;
    std::optional<std::string> error;
    MeshPtr final_mesh;
    std::optional<PNPState> final_state;
};

/// SOLVE -> ESTIMATE -> MARK -> REFINE cycle: full Gummel solve on the
/// coarsest mesh, then one two-grid correction per refined level (or a full
/// solve in full_gummel mode), until n_dofs >= max_dofs or marking selects
/// nothing.
LoopResult adaptive_loop(const ProblemSpec& spec, const LoopOptions& options = {});

/// Least-squares slope of log(value) against log(n) over the last `window`
/// rows; nullopt when fewer rows are available or values are not positive.
std::optional<double> fit_loglog_slope(std::span<const double> n, std::span<const double> value,
                                       int window = 5);

}  // namespace pnpafem
