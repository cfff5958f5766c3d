// Acceptance suite: runs the benchmark problems at desk scale and checks
// every headline property of the solver, estimator and adaptive loop. One
// PASS/FAIL line is printed per criterion; the exit code is the number of
// failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <vector>

#include "pnpafem/bench.hpp"
#include "pnpafem/estimator.hpp"
#include "pnpafem/io.hpp"
#include "pnpafem/problems.hpp"
#include "support/oracles.hpp"

using namespace pnpafem;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, what.c_str());
    if (!ok) ++failures;
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

struct Series {
    std::vector<double> n, eta, err_l2, err_h1, err_eps;
};

Series series_of(const LoopHistory& history) {
    Series s;
    for (const auto& row : history.rows) {
        s.n.push_back(row.n_dofs);
        s.eta.push_back(row.eta);
        if (row.err_l2) {
            s.err_l2.push_back(*row.err_l2);
            s.err_h1.push_back(*row.err_h1);
            s.err_eps.push_back(*row.err_eps);
        }
    }
    return s;
}

// min and max of eta / err_eps over levels with more than 1000 dofs
std::optional<std::pair<double, double>> effectivity_band(const LoopHistory& history) {
    double lo = 1e300, hi = 0.0;
    for (const auto& row : history.rows) {
        if (row.n_dofs <= 1000 || !row.err_eps || *row.err_eps <= 0.0) continue;
        const double ratio = row.eta / *row.err_eps;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    if (hi == 0.0) return std::nullopt;
    return std::make_pair(lo, hi);
}

bool in_range(std::optional<double> v, double lo, double hi) { return v && *v >= lo && *v <= hi; }

std::vector<int> all_elements(const Mesh& m) {
    std::vector<int> ids(m.triangle_count());
    for (int t = 0; t < m.triangle_count(); ++t) ids[t] = t;
    return ids;
}

PNPState random_interior_state(const MeshPtr& mesh, unsigned seed, double amplitude) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    auto fill = [&] {
        std::vector<double> v(mesh->vertex_count());
        for (int i = 0; i < mesh->vertex_count(); ++i)
            v[i] = mesh->vertex_is_dirichlet()[i] ? 0.0 : u(rng);
        return FEFunction(mesh, std::move(v));
    };
    return {fill(), fill(), fill()};
}

// --- criteria 1 & 2: example 1 convergence and effectivity -----------------

LoopHistory criterion_1(BenchResult& out) {
    BenchOptions opts;
    opts.example = 1;
    opts.max_dofs = 20000;
    out = run_benchmark(opts);
    const auto s = series_of(out.loop.history);
    const auto sh1 = fit_loglog_slope(s.n, s.err_h1);
    const auto seta = fit_loglog_slope(s.n, s.eta);
    const auto sl2 = fit_loglog_slope(s.n, s.err_l2);
    const bool ok = !out.loop.error && in_range(sh1, -0.6, -0.4) && in_range(seta, -0.6, -0.4) &&
                    in_range(sl2, -1.15, -0.85);
    report(1, ok,
           fmt("example 1 slopes over last 5 levels: err_H1 %.3f (want [-0.6,-0.4]), "
               "eta %.3f (want [-0.6,-0.4]), err_L2 %.3f (want [-1.15,-0.85])",
               sh1.value_or(0.0), seta.value_or(0.0), sl2.value_or(0.0)));
    return out.loop.history;
}

std::optional<std::pair<double, double>> criterion_2(const LoopHistory& ex1_history) {
    const auto band = effectivity_band(ex1_history);
    const bool ok = band && band->second / band->first < 5.0;
    report(2, ok,
           band ? fmt("example 1 effectivity eta/err_eps over N>1e3 in [%.2f, %.2f], "
                      "max/min %.2f (want < 5)",
                      band->first, band->second, band->second / band->first)
                : std::string("example 1 effectivity: no levels with N > 1e3"));
    return band;
}

// --- criterion 3: example 2 corner adaptivity -------------------------------

void criterion_3() {
    BenchOptions opts;
    opts.example = 2;
    opts.max_dofs = 10000;
    const auto res = run_benchmark(opts);
    const auto s = series_of(res.loop.history);
    const auto seta = fit_loglog_slope(s.n, s.eta);

    const Mesh& mesh = *res.loop.final_mesh;
    std::vector<double> diameters;
    double corner_min = 1e300;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        diameters.push_back(g.diameter);
        if (std::hypot(g.centroid.x, g.centroid.y) < 0.05)
            corner_min = std::min(corner_min, g.diameter);
    }
    std::sort(diameters.begin(), diameters.end());
    const double median = diameters[diameters.size() / 2];

    const bool ok = !res.loop.error && corner_min <= median / 8.0 && in_range(seta, -0.6, -0.4);
    report(3, ok,
           fmt("example 2 at N=%d: corner h_min %.2e vs median %.2e (ratio %.4f, want <= 0.125), "
               "eta slope %.3f (want [-0.6,-0.4])",
               res.loop.final_mesh->vertex_count(), corner_min, median, corner_min / median,
               seta.value_or(0.0)));
}

// --- criterion 4: example 3 boundary layers and eps-robustness --------------

void criterion_4(const std::optional<std::pair<double, double>>& band_eps1) {
    bool ok = true;
    std::string detail;

    std::vector<std::pair<double, double>> bands;  // per-eps effectivity bands
    if (band_eps1) bands.push_back(*band_eps1);

    for (double eps : {0.1, 0.01}) {
        BenchOptions opts;
        opts.example = 3;
        opts.epsilon = eps;
        opts.max_dofs = 5000;
        const auto res = run_benchmark(opts);
        if (res.loop.error) {
            ok = false;
            detail += fmt("eps=%.2g run failed (%s); ", eps, res.loop.error->c_str());
            continue;
        }
        const auto s = series_of(res.loop.history);
        const auto seps = fit_loglog_slope(s.n, s.err_eps);
        if (!in_range(seps, -0.65, -0.35)) ok = false;
        detail += fmt("eps=%.2g err_eps slope %.3f (want [-0.65,-0.35]); ", eps,
                      seps.value_or(0.0));
        if (const auto band = effectivity_band(res.loop.history))
            bands.push_back(*band);
        else
            ok = false;

        if (eps == 0.01) {
            // Vertex concentration in the layer strip at N ~ 5e3. The strip
            // {x < 3 sqrt(eps) or y < 3 sqrt(eps)} must hold more than twice
            // one strip's share of vertices (a uniform mesh carries ~0.51).
            const double width = 3.0 * std::sqrt(eps);
            const Mesh& mesh = *res.loop.final_mesh;
            int inside = 0;
            for (const auto& v : mesh.vertices())
                if (v.x < width || v.y < width) ++inside;
            const double fraction = static_cast<double>(inside) / mesh.vertex_count();
            if (!(fraction > 2.0 * width)) ok = false;
            detail += fmt("strip fraction at N=%d: %.3f (want > %.2f); ", mesh.vertex_count(),
                          fraction, 2.0 * width);
        }
    }

    if (bands.size() == 3) {
        double lo = 1e300, hi = 0.0;
        for (const auto& [bl, bh] : bands) {
            lo = std::min(lo, bh / bl);
            hi = std::max(hi, bh / bl);
        }
        if (!(hi / lo < 10.0)) ok = false;
        detail += fmt("per-eps effectivity stability bands %.2f/%.2f/%.2f, spread %.2f (want < 10)",
                      bands[0].second / bands[0].first, bands[1].second / bands[1].first,
                      bands[2].second / bands[2].first, hi / lo);
    } else {
        ok = false;
        detail += "missing effectivity bands";
    }
    report(4, ok, "example 3: " + detail);
}

// --- criterion 5: oracle equivalences ---------------------------------------

void criterion_5() {
    bool ok = true;
    std::string detail;

    // assembly vs dense brute force on small irregular meshes
    double worst = 0.0;
    for (unsigned seed : {101u, 202u}) {
        for (auto kind : {DomainKind::unit_square, DomainKind::l_shape}) {
            auto mesh = oracle::random_refined_mesh(kind, 4, seed);
            auto psi = FEFunction::interpolate(
                mesh, [](double x, double y) { return 0.4 * x * x - 0.3 * y + 0.2 * x * y; });
            auto w = FEFunction::interpolate(
                mesh, [](double x, double y) { return 1.0 + 0.4 * std::cos(x - y); });
            worst = std::max(worst,
                             oracle::max_abs_diff(oracle::to_dense(assemble_diffusion(*mesh, 1.0)),
                                                  oracle::dense_diffusion(*mesh, 1.0)));
            worst = std::max(worst, oracle::max_abs_diff(oracle::to_dense(assemble_mass(*mesh)),
                                                         oracle::dense_mass(*mesh)));
            worst = std::max(
                worst, oracle::max_abs_diff(oracle::to_dense(assemble_drift(*mesh, psi, +1)),
                                            oracle::dense_drift(*mesh, psi.values(), +1)));
            worst = std::max(
                worst,
                oracle::max_abs_diff(oracle::to_dense(assemble_weighted_diffusion(*mesh, w)),
                                     oracle::dense_weighted_diffusion(*mesh, w.values())));
            auto f = [](double x, double y) { return std::sin(2 * x) - y; };
            const auto b = assemble_load(*mesh, f);
            const auto bo = oracle::dense_load(*mesh, f);
            for (std::size_t i = 0; i < b.size(); ++i)
                worst = std::max(worst, std::abs(b[i] - bo[i]));
        }
    }
    if (!(worst < 1e-12)) ok = false;
    detail += fmt("dense-assembly max deviation %.2e (want < 1e-12); ", worst);

    // weak residual of tightly converged Gummel states
    double worst_residual = 0.0;
    GummelOptions tight;
    tight.tol = 1e-11;
    tight.max_iter = 400;
    {
        auto mesh = domain_mesh(DomainKind::l_shape, 2);
        for (const auto& spec : {example1(), example2()}) {
            const auto res = gummel_solve(mesh, spec, boundary_initial_guess(mesh, spec), tight);
            worst_residual = std::max(worst_residual, weak_residual(res.state, spec).max_abs());
        }
    }
    {
        const auto spec = example3(0.1);
        auto mesh = domain_mesh(DomainKind::unit_square, 8);
        GummelOptions damped = tight;
        damped.relaxation = 0.5;
        const auto res = gummel_solve(mesh, spec, boundary_initial_guess(mesh, spec), damped);
        worst_residual = std::max(worst_residual, weak_residual(res.state, spec).max_abs());
    }
    if (!(worst_residual <= 1e-8)) ok = false;
    detail += fmt("converged weak residual max %.2e (want <= 1e-8); ", worst_residual);

    // zero-state linearized solve vs sequential Poisson solves
    {
        const auto spec = example2();
        auto mesh = domain_mesh(DomainKind::l_shape, 2);
        const std::array<ScalarField, 3> load{[](double x, double) { return x; },
                                              [](double, double y) { return y - 0.5; },
                                              [](double x, double y) { return x + y; }};
        const auto sol = solve_linearized(PNPState::zero(mesh), load, spec);

        SolveOptions exact;
        exact.rel_tol = 1e-13;
        auto poisson = [&](const ScalarField& f, double coeff, const std::vector<double>* extra) {
            auto a = assemble_diffusion(*mesh, coeff);
            auto rhs = assemble_load(*mesh, f);
            if (extra)
                for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += (*extra)[i];
            const std::vector<double> zero(mesh->vertex_count(), 0.0);
            apply_dirichlet(a, rhs, mesh->vertex_is_dirichlet(), zero);
            return solve(a, rhs, exact);
        };
        const auto phi1 = poisson(load[0], 1.0, nullptr);
        const auto phi2 = poisson(load[1], 1.0, nullptr);
        std::vector<double> diff(phi1.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = phi1[i] - phi2[i];
        const auto coupling = assemble_mass(*mesh).multiply(diff);
        const auto phi3 = poisson(load[2], spec.epsilon, &coupling);

        double dev = 0.0;
        for (int i = 0; i < mesh->vertex_count(); ++i) {
            dev = std::max(dev, std::abs(sol.phi1.values()[i] - phi1[i]));
            dev = std::max(dev, std::abs(sol.phi2.values()[i] - phi2[i]));
            dev = std::max(dev, std::abs(sol.phi3.values()[i] - phi3[i]));
        }
        if (!(dev < 1e-9)) ok = false;
        detail += fmt("zero-state linearized vs sequential max dev %.2e (want < 1e-9); ", dev);
    }

    // linearization consistency: Taylor remainder slope
    {
        const auto spec = example2();
        auto mesh = domain_mesh(DomainKind::l_shape, 2);
        const auto state = random_interior_state(mesh, 41, 0.5);
        const auto direction = random_interior_state(mesh, 43, 1.0);
        const auto base = weak_residual(state, spec);
        const auto df = apply_linearized(state, spec, direction);
        double remainders[2] = {0.0, 0.0};
        const double steps[2] = {1e-4, 1e-5};
        for (int k = 0; k < 2; ++k) {
            auto shifted = state;
            for (int i = 0; i < mesh->vertex_count(); ++i) {
                shifted.p.values()[i] += steps[k] * direction.p.values()[i];
                shifted.n.values()[i] += steps[k] * direction.n.values()[i];
                shifted.psi.values()[i] += steps[k] * direction.psi.values()[i];
            }
            const auto pert = weak_residual(shifted, spec);
            for (int c = 0; c < 3; ++c)
                for (int i = 0; i < mesh->vertex_count(); ++i)
                    remainders[k] = std::max(
                        remainders[k],
                        std::abs(pert.r[c][i] - base.r[c][i] - steps[k] * df.r[c][i]));
        }
        const double slope = std::log(remainders[0] / remainders[1]) / std::log(10.0);
        if (!(slope >= 1.9)) ok = false;
        detail += fmt("linearization remainder slope %.3f (want >= 1.9)", slope);
    }

    report(5, ok, "oracle equivalence: " + detail);
}

// --- criterion 6: estimator unit identities ---------------------------------

void criterion_6() {
    bool ok = true;
    std::string detail;
    auto make_spec = [](ScalarField f1, ScalarField f2, ScalarField f3, double eps) {
        ProblemSpec spec;
        spec.epsilon = eps;
        spec.domain = DomainKind::unit_square;
        spec.f1 = std::move(f1);
        spec.f2 = std::move(f2);
        spec.f3 = std::move(f3);
        auto zero = [](double, double) { return 0.0; };
        spec.dirichlet_p = spec.dirichlet_n = spec.dirichlet_psi = zero;
        return spec;
    };
    auto one = [](double, double) { return 1.0; };
    auto zero = [](double, double) { return 0.0; };

    {
        auto mesh = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
        const auto b = estimate(PNPState::zero(mesh), make_spec(one, one, one, 1.0));
        const auto g = mesh->geometry(0);
        const double want = 3.0 * g.diameter * g.diameter * g.area;
        const double dev = std::abs(b.eta_elem[0] * b.eta_elem[0] - want);
        if (!(dev < 1e-12 && b.osc_global == 0.0)) ok = false;
        detail += fmt("constant-data eta_T^2 dev %.2e (want < 1e-12); ", dev);
    }
    {
        auto mesh = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
        const auto b = estimate(PNPState::zero(mesh),
                                make_spec(zero, zero, [](double x, double) { return x; }, 1.0));
        const double h = std::sqrt(2.0);
        const double dev = std::abs(b.osc_elem[0] * b.osc_elem[0] - h * h / 36.0);
        if (!(dev < 1e-12)) ok = false;
        detail += fmt("f3=x oscillation dev %.2e (want < 1e-12, ||x-1/3||^2 = 1/36); ", dev);
    }
    {
        auto mesh = domain_mesh(DomainKind::unit_square, 3);
        std::mt19937 rng(55);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        auto fill = [&] {
            std::vector<double> v(mesh->vertex_count());
            for (auto& x : v) x = u(rng);
            return FEFunction(mesh, std::move(v));
        };
        const PNPState state{fill(), fill(), fill()};
        auto spec_a = make_spec(one, [](double x, double y) { return x - y; },
                                [](double x, double y) { return std::sin(x * y); }, 0.8);
        auto spec_b = spec_a;
        spec_b.epsilon = 0.2;
        const auto a = estimate(state, spec_a);
        const auto b = estimate(state, spec_b);
        double dev = 0.0;
        for (std::size_t t = 0; t < a.eta_elem.size(); ++t) {
            dev = std::max(dev, std::abs(b.eta_elem[t] - 2.0 * a.eta_elem[t]));
            dev = std::max(dev, std::abs(b.osc_elem[t] - 2.0 * a.osc_elem[t]));
        }
        for (std::size_t e = 0; e < a.eta_edge.size(); ++e)
            dev = std::max(dev, std::abs(b.eta_edge[e] - 2.0 * a.eta_edge[e]));
        if (!(dev < 1e-12)) ok = false;
        detail += fmt("eps -> eps/4 doubling max dev %.2e (want < 1e-12)", dev);
    }
    report(6, ok, "estimator identities: " + detail);
}

// --- criterion 7: mesh invariants -------------------------------------------

void criterion_7() {
    bool ok = true;
    std::string detail;
    {
        auto mesh = domain_mesh(DomainKind::l_shape, 1);
        std::mt19937 rng(2024);
        double worst_area = 0.0;
        bool conforming = true;
        for (int round = 0; round < 100; ++round) {
            std::vector<int> marked;
            const double p = std::min(1.0, 8.0 / mesh->triangle_count());
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (int t = 0; t < mesh->triangle_count(); ++t)
                if (u(rng) < p) marked.push_back(t);
            if (marked.empty()) marked.push_back(static_cast<int>(rng() % mesh->triangle_count()));
            mesh = bisect(mesh, marked).fine;
            try {
                validate_mesh(*mesh);
            } catch (const std::exception&) {
                conforming = false;
                break;
            }
            worst_area = std::max(worst_area, std::abs(mesh->total_area() - 3.0) / 3.0);
        }
        if (!conforming || !(worst_area < 1e-12)) ok = false;
        detail += fmt("100 random bisection rounds: conforming %s, worst area drift %.2e "
                      "(want < 1e-12); ",
                      conforming ? "yes" : "NO", worst_area);
    }
    {
        double worst_ratio = 1e300;
        for (auto kind : {DomainKind::unit_square, DomainKind::l_shape}) {
            auto mesh = domain_mesh(kind, 1);
            const double angle0 = mesh->min_angle();
            for (int pass = 0; pass < 12; ++pass) mesh = bisect(mesh, all_elements(*mesh)).fine;
            worst_ratio = std::min(worst_ratio, mesh->min_angle() / angle0);
        }
        if (!(worst_ratio >= 0.5)) ok = false;
        detail += fmt("min-angle ratio after 12 uniform passes %.3f (want >= 0.5)", worst_ratio);
    }
    report(7, ok, "mesh invariants: " + detail);
}

}  // namespace

int main() {
    BenchResult ex1;
    const auto ex1_history = criterion_1(ex1);
    const auto band1 = criterion_2(ex1_history);
    criterion_3();
    criterion_4(band1);
    criterion_5();
    criterion_6();
    criterion_7();
    std::printf("%s: %d of 7 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
    return failures;
}
