#include "pnpafem/pnp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pnpafem/log.hpp"

namespace pnpafem {

void ProblemSpec::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("ProblemSpec: epsilon must lie in (0,1]");
    if (!f1 || !f2 || !f3) throw std::invalid_argument("ProblemSpec: missing source function");
    if (!dirichlet_p || !dirichlet_n || !dirichlet_psi)
        throw std::invalid_argument("ProblemSpec: missing Dirichlet data");
}

PNPState PNPState::zero(const MeshPtr& mesh) {
    return {FEFunction::zero(mesh), FEFunction::zero(mesh), FEFunction::zero(mesh)};
}

void PNPState::validate() const {
    if (p.mesh() != n.mesh() || p.mesh() != psi.mesh())
        throw std::invalid_argument("PNPState: components live on different meshes");
    for (const auto* f : {&p, &n, &psi})
        for (double v : f->values())
            if (!std::isfinite(v)) throw std::invalid_argument("PNPState: non-finite dof value");
}

double default_poincare_constant(const Mesh& mesh) {
    return mesh.bbox_diameter() / std::numbers::pi;
}

ConditionReport check_uniqueness_condition(const PNPState& state, double epsilon, double c_p) {
    if (c_p <= 0.0) throw std::invalid_argument("check_uniqueness_condition: c_p must be > 0");
    ConditionReport rep;
    rep.c_p = c_p;
    const Mesh& mesh = *state.mesh();
    for (int t = 0; t < mesh.triangle_count(); ++t)
        rep.grad_psi_inf = std::max(rep.grad_psi_inf, norm(state.psi.gradient_on(t)));
    rep.max_conc_inf = std::max(state.p.max_abs(), state.n.max_abs());
    rep.lhs = rep.grad_psi_inf + std::numbers::sqrt2 * c_p / epsilon * rep.max_conc_inf;
    rep.rhs = std::numbers::sqrt2 / (1.0 + c_p * c_p);
    rep.satisfied = rep.lhs < rep.rhs;
    return rep;
}

namespace {

std::vector<double> mass_times(const SparseMatrix& mass, const std::vector<double>& p,
                               const std::vector<double>& n) {
    std::vector<double> d(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) d[i] = p[i] - n[i];
    return mass.multiply(d);
}

std::vector<double> solve_tagged(const SparseMatrix& A, const std::vector<double>& b,
                                 double rel_tol, const char* tag) {
    try {
        SolveOptions opts;
        opts.rel_tol = rel_tol;
        return solve(A, b, opts);
    } catch (const SolveFailure& f) {
        throw SolveFailure(std::string(tag) + ": " + f.what(), f.achieved_rel_residual);
    }
}

// Poisson step: epsilon * K psi = M (p - n) + load(f3), Dirichlet psi data.
FEFunction poisson_step(const MeshPtr& mesh, const ProblemSpec& spec, const SparseMatrix& mass,
                        const std::vector<double>& p, const std::vector<double>& n,
                        double rel_tol) {
    SparseMatrix A = assemble_diffusion(*mesh, spec.epsilon);
    std::vector<double> rhs = assemble_load(*mesh, spec.f3);
    const auto coupling = mass_times(mass, p, n);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += coupling[i];
    apply_dirichlet(A, rhs, mesh->vertex_is_dirichlet(), dirichlet_values(*mesh, spec.dirichlet_psi));
    return FEFunction(mesh, solve_tagged(A, rhs, rel_tol, "poisson"));
}

// Nernst-Planck step for one species: (K + sign * drift(psi)) c = load(f).
FEFunction np_step(const MeshPtr& mesh, const FEFunction& psi, int sign, const ScalarField& f,
                   const ScalarField& dirichlet, double rel_tol, const char* tag) {
    SparseMatrix A = assemble_diffusion(*mesh, 1.0);
    {
        const SparseMatrix D = assemble_drift(*mesh, psi, sign);
        // Patterns coincide (same element stencil), so add values in place.
        auto& av = A.values();
        const auto& dv = D.values();
        for (std::size_t k = 0; k < av.size(); ++k) av[k] += dv[k];
    }
    std::vector<double> rhs = assemble_load(*mesh, f);
    apply_dirichlet(A, rhs, mesh->vertex_is_dirichlet(), dirichlet_values(*mesh, dirichlet));
    return FEFunction(mesh, solve_tagged(A, rhs, rel_tol, tag));
}

double l2_distance(const FEFunction& a, const FEFunction& b, const SparseMatrix& mass) {
    std::vector<double> d(a.values().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.values()[i] - b.values()[i];
    const auto md = mass.multiply(d);
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * md[i];
    return std::sqrt(std::max(0.0, s));
}

}  // namespace

PNPState boundary_initial_guess(const MeshPtr& mesh, const ProblemSpec& spec) {
    auto lift = [&](const ScalarField& g) { return FEFunction(mesh, dirichlet_values(*mesh, g)); };
    return {lift(spec.dirichlet_p), lift(spec.dirichlet_n), lift(spec.dirichlet_psi)};
}

GummelResult gummel_solve(const MeshPtr& mesh, const ProblemSpec& spec, const PNPState& initial,
                          const GummelOptions& options) {
    spec.validate();
    if (options.tol <= 0.0) throw std::invalid_argument("gummel_solve: tol must be > 0");
    if (initial.mesh() != mesh)
        throw std::invalid_argument("gummel_solve: initial state not defined on this mesh");

    const SparseMatrix mass = assemble_mass(*mesh);
    GummelResult res{initial, 0, {}};
    FEFunction psi_prev = initial.psi;

    for (int it = 1; it <= options.max_iter; ++it) {
        const FEFunction psi_new =
            poisson_step(mesh, spec, mass, res.state.p.values(), res.state.n.values(),
                         options.linear_rel_tol);
        // A transient potential can make a Nernst-Planck system nearly
        // singular; damp the psi update harder and retry the pass.
        double relaxation = options.relaxation;
        FEFunction psi = psi_new;
        std::optional<std::pair<FEFunction, FEFunction>> concentrations;
        for (int attempt = 0; !concentrations; ++attempt) {
            if (relaxation != 1.0) {
                for (std::size_t i = 0; i < psi.values().size(); ++i)
                    psi.values()[i] = psi_prev.values()[i] +
                                      relaxation * (psi_new.values()[i] - psi_prev.values()[i]);
            }
            try {
                FEFunction p = np_step(mesh, psi, +1, spec.f1, spec.dirichlet_p,
                                       options.linear_rel_tol, "nernst-planck(p)");
                FEFunction n = np_step(mesh, psi, -1, spec.f2, spec.dirichlet_n,
                                       options.linear_rel_tol, "nernst-planck(n)");
                concentrations = {std::move(p), std::move(n)};
            } catch (const SolveFailure& f) {
                if (attempt >= 6) throw;
                relaxation *= 0.5;
                log_info("gummel iteration " + std::to_string(it) +
                         ": concentration solve failed (" + f.what() +
                         "), retrying with relaxation " + std::to_string(relaxation));
            }
        }

        const double increment = l2_distance(psi, psi_prev, mass);
        res.increments.push_back(increment);
        res.iterations = it;
        res.state = PNPState{std::move(concentrations->first), std::move(concentrations->second),
                             psi};
        log_debug("gummel iteration " + std::to_string(it) + ": |psi increment|_L2 = " +
                  std::to_string(increment));
        if (increment < options.tol) return res;
        psi_prev = std::move(psi);
    }
    throw GummelFailure("gummel_solve: no convergence in " + std::to_string(options.max_iter) +
                            " iterations, last increment " +
                            std::to_string(res.increments.back()),
                        res.increments.back());
}

PNPState two_grid_step(const PNPState& coarse_state, const Refinement& refinement,
                       const ProblemSpec& spec, double linear_rel_tol) {
    if (coarse_state.mesh() != refinement.coarse)
        throw std::invalid_argument("two_grid_step: state mesh is not the refinement's coarse mesh");
    const MeshPtr& fine = refinement.fine;
    std::vector<double> p0 = prolong(refinement, coarse_state.p.values());
    std::vector<double> n0 = prolong(refinement, coarse_state.n.values());

    const SparseMatrix mass = assemble_mass(*fine);
    FEFunction psi = poisson_step(fine, spec, mass, p0, n0, linear_rel_tol);
    FEFunction p =
        np_step(fine, psi, +1, spec.f1, spec.dirichlet_p, linear_rel_tol, "nernst-planck(p)");
    FEFunction n =
        np_step(fine, psi, -1, spec.f2, spec.dirichlet_n, linear_rel_tol, "nernst-planck(n)");
    return {std::move(p), std::move(n), std::move(psi)};
}

double WeakResidual::max_abs() const {
    double m = 0.0;
    for (const auto& comp : r)
        for (double v : comp) m = std::max(m, std::abs(v));
    return m;
}

WeakResidual weak_residual(const PNPState& state, const ProblemSpec& spec) {
    state.validate();
    const MeshPtr& mesh = state.mesh();
    const SparseMatrix K = assemble_diffusion(*mesh, 1.0);
    const SparseMatrix Keps = assemble_diffusion(*mesh, spec.epsilon);
    const SparseMatrix B = assemble_drift(*mesh, state.psi, +1);
    const SparseMatrix M = assemble_mass(*mesh);

    WeakResidual res;
    res.r[0] = K.multiply(state.p.values());
    {
        const auto drift = B.multiply(state.p.values());
        const auto load = assemble_load(*mesh, spec.f1);
        for (std::size_t i = 0; i < res.r[0].size(); ++i) res.r[0][i] += drift[i] - load[i];
    }
    res.r[1] = K.multiply(state.n.values());
    {
        const auto drift = B.multiply(state.n.values());
        const auto load = assemble_load(*mesh, spec.f2);
        for (std::size_t i = 0; i < res.r[1].size(); ++i) res.r[1][i] += -drift[i] - load[i];
    }
    res.r[2] = Keps.multiply(state.psi.values());
    {
        const auto coupling = mass_times(M, state.p.values(), state.n.values());
        const auto load = assemble_load(*mesh, spec.f3);
        for (std::size_t i = 0; i < res.r[2].size(); ++i) res.r[2][i] += -coupling[i] - load[i];
    }
    for (auto& comp : res.r)
        for (int i = 0; i < mesh->vertex_count(); ++i)
            if (mesh->vertex_is_dirichlet()[i]) comp[i] = 0.0;
    return res;
}

SparseMatrix assemble_linearized_operator(const PNPState& state, const ProblemSpec& spec) {
    state.validate();
    const Mesh& mesh = *state.mesh();
    const int n = mesh.vertex_count();

    const SparseMatrix K = assemble_diffusion(mesh, 1.0);
    const SparseMatrix Keps = assemble_diffusion(mesh, spec.epsilon);
    const SparseMatrix B = assemble_drift(mesh, state.psi, +1);
    const SparseMatrix M = assemble_mass(mesh);
    const SparseMatrix Cp = assemble_weighted_diffusion(mesh, state.p);
    const SparseMatrix Cn = assemble_weighted_diffusion(mesh, state.n);

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(K.nonzeros()) * 8);
    auto add_block = [&trips](const SparseMatrix& A, int bi, int bj, double scale, int n) {
        const auto& off = A.row_offsets();
        for (int r = 0; r < A.rows(); ++r)
            for (int k = off[r]; k < off[r + 1]; ++k)
                trips.push_back({bi * n + r, bj * n + A.column_indices()[k],
                                 scale * A.values()[k]});
    };
    // Row 1: grad(phi1).grad(v1) + phi1 grad(psi).grad(v1) + p grad(phi3).grad(v1)
    add_block(K, 0, 0, 1.0, n);
    add_block(B, 0, 0, 1.0, n);
    add_block(Cp, 0, 2, 1.0, n);
    // Row 2: grad(phi2).grad(v2) - phi2 grad(psi).grad(v2) - n grad(phi3).grad(v2)
    add_block(K, 1, 1, 1.0, n);
    add_block(B, 1, 1, -1.0, n);
    add_block(Cn, 1, 2, -1.0, n);
    // Row 3: epsilon grad(phi3).grad(v3) - phi1 v3 + phi2 v3
    add_block(Keps, 2, 2, 1.0, n);
    add_block(M, 2, 0, -1.0, n);
    add_block(M, 2, 1, 1.0, n);
    return SparseMatrix::from_triplets(3 * n, 3 * n, trips);
}

WeakResidual apply_linearized(const PNPState& state, const ProblemSpec& spec,
                              const PNPState& direction) {
    if (direction.mesh() != state.mesh())
        throw std::invalid_argument("apply_linearized: direction on a different mesh");
    const Mesh& mesh = *state.mesh();
    const int n = mesh.vertex_count();
    const SparseMatrix DF = assemble_linearized_operator(state, spec);
    std::vector<double> x(3 * n);
    for (int i = 0; i < n; ++i) {
        x[i] = direction.p.values()[i];
        x[n + i] = direction.n.values()[i];
        x[2 * n + i] = direction.psi.values()[i];
    }
    const auto y = DF.multiply(x);
    WeakResidual res;
    for (int c = 0; c < 3; ++c) {
        res.r[c].assign(y.begin() + c * n, y.begin() + (c + 1) * n);
        for (int i = 0; i < n; ++i)
            if (mesh.vertex_is_dirichlet()[i]) res.r[c][i] = 0.0;
    }
    return res;
}

LinearizedSolution solve_linearized(const PNPState& state, const std::array<ScalarField, 3>& load,
                                    const ProblemSpec& spec) {
    state.validate();
    const MeshPtr& mesh = state.mesh();
    const Mesh& m = *mesh;
    const int n = m.vertex_count();

    ConditionReport condition =
        check_uniqueness_condition(state, spec.epsilon, default_poincare_constant(m));
    if (!condition.satisfied)
        log_info("solve_linearized: uniqueness condition not satisfied at linearization point "
                 "(lhs " +
                 std::to_string(condition.lhs) + " >= rhs " + std::to_string(condition.rhs) + ")");

    SparseMatrix A = assemble_linearized_operator(state, spec);
    std::vector<double> rhs(3 * n);
    std::vector<std::uint8_t> constrained(3 * n, 0);
    const std::vector<double> zeros(3 * n, 0.0);
    for (int c = 0; c < 3; ++c) {
        const auto b = assemble_load(m, load[c]);
        for (int i = 0; i < n; ++i) {
            rhs[c * n + i] = b[i];
            constrained[c * n + i] = m.vertex_is_dirichlet()[i];
        }
    }
    apply_dirichlet(A, rhs, constrained, zeros);

    const auto x = solve_tagged(A, rhs, 1e-10, "linearized system");
    auto component = [&](int c) {
        return FEFunction(mesh, std::vector<double>(x.begin() + c * n, x.begin() + (c + 1) * n));
    };
    return {component(0), component(1), component(2), condition};
}

}  // namespace pnpafem
