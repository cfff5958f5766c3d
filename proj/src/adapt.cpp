#include "pnpafem/adapt.hpp"

#include <chrono>
#include <cmath>

#include "pnpafem/log.hpp"

namespace pnpafem {

namespace {

LoopRow make_row(int level, const MeshPtr& mesh, const PNPState& state,
                 const EstimatorBreakdown& breakdown, const ProblemSpec& spec, int gummel_iters) {
    LoopRow row;
    row.level = level;
    row.n_dofs = mesh->vertex_count();
    row.eta = breakdown.eta_global;
    row.osc = breakdown.osc_global;
    row.gummel_iters = gummel_iters;
    const auto report =
        check_uniqueness_condition(state, spec.epsilon, default_poincare_constant(*mesh));
    row.cond_lhs = report.lhs;
    row.cond_rhs = report.rhs;
    if (spec.exact) {
        const auto& ex = *spec.exact;
        const auto ep = error_norms(state.p, ex[0], 4, spec.epsilon);
        const auto en = error_norms(state.n, ex[1], 4, spec.epsilon);
        const auto epsi = error_norms(state.psi, ex[2], 4, spec.epsilon);
        row.err_l2 = std::sqrt(ep.l2 * ep.l2 + en.l2 * en.l2 + epsi.l2 * epsi.l2);
        row.err_h1 = std::sqrt(ep.h1_semi * ep.h1_semi + en.h1_semi * en.h1_semi +
                               epsi.h1_semi * epsi.h1_semi);
        row.err_eps = std::sqrt(ep.eps * ep.eps + en.eps * en.eps + epsi.eps * epsi.eps);
    }
    return row;
}

}  // namespace

LoopResult adaptive_loop(const ProblemSpec& spec, const LoopOptions& options) {
    spec.validate();
    const auto t_start = std::chrono::steady_clock::now();

    LoopResult result;
    result.history.meta.epsilon = spec.epsilon;
    result.history.meta.theta = options.theta;
    result.history.meta.max_dofs = options.max_dofs;
    result.history.meta.marking =
        options.marking == MarkingStrategy::maximum ? "max" : "dorfler";
    result.history.meta.solver =
        options.solver == SolverMode::two_grid ? "two-grid" : "full-gummel";

    MeshPtr mesh = domain_mesh(spec.domain, options.initial_subdivision);
    std::optional<PNPState> state;
    int level_iters = 0;

    try {
        auto coarse = gummel_solve(mesh, spec, boundary_initial_guess(mesh, spec), options.gummel);
        state = std::move(coarse.state);
        level_iters = coarse.iterations;

        for (int level = 0; level < options.max_levels; ++level) {
            const auto breakdown = estimate(*state, spec, options.estimator);
            result.history.rows.push_back(
                make_row(level, mesh, *state, breakdown, spec, level_iters));
            if (options.on_level) options.on_level(level, mesh, *state, breakdown);
            log_info("level " + std::to_string(level) + ": N=" + std::to_string(mesh->vertex_count()) +
                     " eta=" + std::to_string(breakdown.eta_global));

            if (mesh->vertex_count() >= options.max_dofs) break;

            const auto marked = options.marking == MarkingStrategy::maximum
                                    ? mark_maximum(breakdown, options.theta)
                                    : mark_dorfler(breakdown, options.theta);
            if (marked.empty()) break;

            const auto refinement = bisect(mesh, marked);
            mesh = refinement.fine;

            if (options.solver == SolverMode::full_gummel) {
                PNPState guess{FEFunction(mesh, prolong(refinement, state->p.values())),
                               FEFunction(mesh, prolong(refinement, state->n.values())),
                               FEFunction(mesh, prolong(refinement, state->psi.values()))};
                auto solved = gummel_solve(mesh, spec, guess, options.gummel);
                state = std::move(solved.state);
                level_iters = solved.iterations;
            } else {
                try {
                    state = two_grid_step(*state, refinement, spec, options.gummel.linear_rel_tol);
                    level_iters = 1;
                } catch (const SolveFailure& f) {
                    // Prolonged layer oscillations can drive a Nernst-Planck
                    // system close to singular; redo the level with a damped
                    // nonlinear solve instead of one correction pass.
                    log_info(std::string("level solve: one-pass correction failed (") + f.what() +
                             "), re-solving with damped Gummel iteration");
                    PNPState guess{FEFunction(mesh, prolong(refinement, state->p.values())),
                                   FEFunction(mesh, prolong(refinement, state->n.values())),
                                   FEFunction(mesh, prolong(refinement, state->psi.values()))};
                    GummelOptions damped = options.gummel;
                    damped.relaxation = std::min(options.gummel.relaxation, 0.5);
                    auto solved = gummel_solve(mesh, spec, guess, damped);
                    state = std::move(solved.state);
                    level_iters = solved.iterations;
                }
                if (options.regummel_residual_threshold &&
                    weak_residual(*state, spec).max_abs() > *options.regummel_residual_threshold) {
                    auto solved = gummel_solve(mesh, spec, *state, options.gummel);
                    state = std::move(solved.state);
                    level_iters += solved.iterations;
                }
            }
        }
    } catch (const std::exception& e) {
        result.error = e.what();
        log_error(std::string("adaptive_loop: aborted: ") + e.what());
    }

    result.final_mesh = mesh;
    result.final_state = std::move(state);
    result.history.meta.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

std::optional<double> fit_loglog_slope(std::span<const double> n, std::span<const double> value,
                                       int window) {
    if (n.size() != value.size()) return std::nullopt;
    if (static_cast<int>(n.size()) < window || window < 2) return std::nullopt;
    const std::size_t begin = n.size() - static_cast<std::size_t>(window);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = begin; i < n.size(); ++i) {
        if (!(n[i] > 0.0) || !(value[i] > 0.0)) return std::nullopt;
        const double x = std::log(n[i]);
        const double y = std::log(value[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(window);
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return (m * sxy - sx * sy) / denom;
}

}  // namespace pnpafem
