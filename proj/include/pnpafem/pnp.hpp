#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnpafem/fe.hpp"
#include "pnpafem/mesh.hpp"
#include "pnpafem/sparse.hpp"

namespace pnpafem {

/**
 * Problem data for the dimensionless steady-state system
 *
 *   -lap(p) - div(p grad(psi)) = f1
 *   -lap(n) + div(n grad(psi)) = f2
 *   -epsilon lap(psi) - p + n  = f3
 *
 * on one of the built-in domains with Dirichlet boundary data for all three
 * components. `exact` (when present) enables error studies.
 */
struct ProblemSpec {
    double epsilon = 1.0;
    ScalarField f1, f2, f3;
    ScalarField dirichlet_p, dirichlet_n, dirichlet_psi;
    std::optional<std::array<ExactScalar, 3>> exact;  // p, n, psi
    DomainKind domain = DomainKind::unit_square;

    void validate() const;
};

/// Concentrations and potential over one shared mesh.
struct PNPState {
    FEFunction p;
    FEFunction n;
    FEFunction psi;

    const MeshPtr& mesh() const { return p.mesh(); }
    static PNPState zero(const MeshPtr& mesh);
    void validate() const;  // shared mesh, finite values
};

/// Evaluation of the uniqueness condition
///   ||grad psi||_inf + sqrt(2) C_p eps^{-1} max(||p||_inf, ||n||_inf)
///     < sqrt(2) / (1 + C_p^2)
/// with discrete sup-norms (vertex max for p, n; elementwise max for the
/// gradient).
struct ConditionReport {
    double grad_psi_inf = 0.0;
    double max_conc_inf = 0.0;
    double c_p = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
};

/// Heuristic Poincare constant diam(Omega)/pi from the coordinate bounding
/// box; exact for convex domains, used as a labelled heuristic otherwise.
double default_poincare_constant(const Mesh& mesh);

ConditionReport check_uniqueness_condition(const PNPState& state, double epsilon, double c_p);

struct GummelOptions {
    double tol = 1e-5;       // L2 stopping test on consecutive psi iterates
    int max_iter = 100;
    double relaxation = 1.0;  // psi update damping; 1 = plain alternation
    double linear_rel_tol = 1e-10;
};

struct GummelResult {
    PNPState state;
    int iterations = 0;
    std::vector<double> increments;  // ||psi_k - psi_{k-1}||_L2 history
};

/// Raised when the Gummel iteration fails to meet its tolerance.
class GummelFailure : public std::runtime_error {
public:
    GummelFailure(std::string what, double last_increment)
        : std::runtime_error(std::move(what)), last_increment(last_increment) {}
    double last_increment;
};

/// Nodal interpolant of the Dirichlet data, extended by zero at interior
/// vertices; the standard initial guess for the coarsest solve.
PNPState boundary_initial_guess(const MeshPtr& mesh, const ProblemSpec& spec);

/// Decoupled fixed-point solve: each pass solves the Poisson equation for
/// psi given (p, n), then the two Nernst-Planck equations for (p, n) given
/// psi, until consecutive psi iterates differ by less than tol in L2.
GummelResult gummel_solve(const MeshPtr& mesh, const ProblemSpec& spec, const PNPState& initial,
                          const GummelOptions& options = {});

/// One coarse-to-fine correction: prolongs p and n, solves the fine Poisson
/// equation for psi with them as data, then the two fine Nernst-Planck
/// equations with that psi fixed. No further iteration.
PNPState two_grid_step(const PNPState& coarse_state, const Refinement& refinement,
                       const ProblemSpec& spec, double linear_rel_tol = 1e-10);

/// Vertex-indexed weak residual <F(u_h), phi_i> per equation; entries at
/// Dirichlet vertices are zero (hat functions there are not test functions).
struct WeakResidual {
    std::array<std::vector<double>, 3> r;
    double max_abs() const;
};

WeakResidual weak_residual(const PNPState& state, const ProblemSpec& spec);

/// 3x3 block operator of the linearized system at `state` (no boundary
/// elimination); block (i,j) acts on component j of a direction and tests
/// against equation i.
SparseMatrix assemble_linearized_operator(const PNPState& state, const ProblemSpec& spec);

/// Applies the linearized operator to a direction and masks Dirichlet rows,
/// matching the layout of weak_residual.
WeakResidual apply_linearized(const PNPState& state, const ProblemSpec& spec,
                              const PNPState& direction);

struct LinearizedSolution {
    FEFunction phi1;
    FEFunction phi2;
    FEFunction phi3;
    ConditionReport condition;  // at the linearization point; a failed
                                // condition is reported, not fatal
};

/// Monolithic solve of the linearized system DF(state) phi = R with
/// homogeneous Dirichlet data, to relative tolerance 1e-10.
LinearizedSolution solve_linearized(const PNPState& state,
                                    const std::array<ScalarField, 3>& load,
                                    const ProblemSpec& spec);

}  // namespace pnpafem
