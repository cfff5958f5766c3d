#include "pnpafem/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pnpafem/quadrature.hpp"

namespace pnpafem {

EstimatorBreakdown estimate(const PNPState& state, const ProblemSpec& spec,
                            const EstimatorOptions& options) {
    state.validate();
    spec.validate();
    const Mesh& mesh = *state.mesh();
    const double inv_eps = 1.0 / spec.epsilon;
    const auto& mean_rule = triangle_rule(2);  // consistent with load assembly
    const auto& osc_rule = triangle_rule(4);

    EstimatorBreakdown out;
    out.eta_elem.assign(mesh.triangle_count(), 0.0);
    out.osc_elem.assign(mesh.triangle_count(), 0.0);
    out.eta_edge.assign(mesh.edge_count(), 0.0);

    std::vector<std::array<double, 3>> f_mean(mesh.triangle_count());

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        const auto& tri = mesh.triangles()[t];
        const Vec2 p0 = mesh.vertices()[tri[0]];
        const Vec2 p1 = mesh.vertices()[tri[1]];
        const Vec2 p2 = mesh.vertices()[tri[2]];

        std::array<double, 3> mean{0.0, 0.0, 0.0};
        for (const auto& q : mean_rule.points) {
            const Vec2 x = q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2;
            mean[0] += q.weight * spec.f1(x.x, x.y);
            mean[1] += q.weight * spec.f2(x.x, x.y);
            mean[2] += q.weight * spec.f3(x.x, x.y);
        }
        f_mean[t] = mean;

        const Vec2 grad_p = state.p.gradient_on(t, g);
        const Vec2 grad_n = state.n.gradient_on(t, g);
        const Vec2 grad_psi = state.psi.gradient_on(t, g);

        // For P1 data div(p grad psi) = grad p . grad psi, constant on T, and
        // the third residual n - p - f_T is linear; its square integrates
        // exactly with the degree-2 rule.
        const double r1 = dot(grad_p, grad_psi) + mean[0];
        const double r2 = dot(grad_n, grad_psi) - mean[1];
        double r3_sq = 0.0;
        for (const auto& q : mean_rule.points) {
            const double diff =
                state.n.value_on(t, q.bary) - state.p.value_on(t, q.bary) - mean[2];
            r3_sq += q.weight * g.area * diff * diff;
        }
        const double elem_sq =
            g.diameter * g.diameter * inv_eps * ((r1 * r1 + r2 * r2) * g.area + r3_sq);
        out.eta_elem[t] = std::sqrt(elem_sq);

        double osc_sq = 0.0;
        for (const auto& q : osc_rule.points) {
            const Vec2 x = q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2;
            const double d1 = spec.f1(x.x, x.y) - mean[0];
            const double d2 = spec.f2(x.x, x.y) - mean[1];
            const double d3 = spec.f3(x.x, x.y) - mean[2];
            osc_sq += q.weight * g.area * (d1 * d1 + d2 * d2 + d3 * d3);
        }
        out.osc_elem[t] = std::sqrt(g.diameter * g.diameter * inv_eps * osc_sq);
    }

    // Edge jumps. Jump quantities of gradients are constant along an edge;
    // the concentration factors p_h, n_h vary linearly, so a two-point Gauss
    // rule integrates the squared jumps exactly.
    const double psi_jump_scale = options.scale_psi_jump_by_epsilon ? spec.epsilon : 1.0;
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const auto& et = mesh.edge_triangles()[e];
        if (et[1] < 0) continue;  // boundary edges contribute zero
        const auto [va, vb] = mesh.edges()[e];
        const Vec2 a = mesh.vertices()[va];
        const Vec2 b = mesh.vertices()[vb];
        const double len = norm(b - a);

        const auto gT = mesh.geometry(et[0]);
        // Outward normal of E in the first incident triangle.
        Vec2 n_e{};
        {
            const auto& tri = mesh.triangles()[et[0]];
            for (int k = 0; k < 3; ++k) {
                const int u = tri[(k + 1) % 3], v = tri[(k + 2) % 3];
                if ((u == va && v == vb) || (u == vb && v == va)) n_e = gT.unit_normals[k];
            }
        }
        const Vec2 jump_grad_p = state.p.gradient_on(et[0]) - state.p.gradient_on(et[1]);
        const Vec2 jump_grad_n = state.n.gradient_on(et[0]) - state.n.gradient_on(et[1]);
        const Vec2 jump_grad_psi = state.psi.gradient_on(et[0]) - state.psi.gradient_on(et[1]);
        const double jp = dot(jump_grad_p, n_e);
        const double jn = dot(jump_grad_n, n_e);
        const double jpsi = dot(jump_grad_psi, n_e);

        const double pa = state.p.values()[va], pb = state.p.values()[vb];
        const double na = state.n.values()[va], nb = state.n.values()[vb];

        double edge_sq = 0.0;
        for (const auto& [s, w] : edge_gauss2()) {
            const double pval = pa + s * (pb - pa);
            const double nval = na + s * (nb - na);
            const double j1 = jp + pval * jpsi;
            const double j2 = jn - nval * jpsi;
            const double j3 = psi_jump_scale * jpsi;
            edge_sq += w * len * (j1 * j1 + j2 * j2 + j3 * j3);
        }
        out.eta_edge[e] = std::sqrt(len * inv_eps * edge_sq);
    }

    double eta_sq = 0.0, osc_sq = 0.0;
    for (double v : out.eta_elem) eta_sq += v * v;
    for (double v : out.eta_edge) eta_sq += v * v;
    for (double v : out.osc_elem) osc_sq += v * v;
    out.eta_global = std::sqrt(eta_sq);
    out.osc_global = std::sqrt(osc_sq);

    // Edge-to-element split for marking: half of each interior edge term to
    // both incident elements, preserving the global sum.
    out.element_indicator.assign(mesh.triangle_count(), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        double ind_sq = out.eta_elem[t] * out.eta_elem[t];
        for (int k = 0; k < 3; ++k) {
            const int e = mesh.triangle_edges()[t][k];
            ind_sq += 0.5 * out.eta_edge[e] * out.eta_edge[e];
        }
        out.element_indicator[t] = std::sqrt(ind_sq);
    }
    return out;
}

std::vector<int> mark_maximum(const EstimatorBreakdown& breakdown, double theta) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("mark_maximum: theta must lie in (0,1]");
    const auto& ind = breakdown.element_indicator;
    const double top = ind.empty() ? 0.0 : *std::max_element(ind.begin(), ind.end());
    std::vector<int> marked;
    if (top == 0.0) return marked;
    for (int t = 0; t < static_cast<int>(ind.size()); ++t)
        if (ind[t] >= theta * top) marked.push_back(t);
    return marked;
}

std::vector<int> mark_dorfler(const EstimatorBreakdown& breakdown, double theta) {
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("mark_dorfler: theta must lie in (0,1)");
    const auto& ind = breakdown.element_indicator;
    std::vector<int> order(ind.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ind[a] > ind[b]; });

    const double target = theta * theta * breakdown.eta_global * breakdown.eta_global;
    std::vector<int> marked;
    double acc = 0.0;
    std::size_t i = 0;
    for (; i < order.size() && acc < target; ++i) {
        if (ind[order[i]] == 0.0) break;
        marked.push_back(order[i]);
        acc += ind[order[i]] * ind[order[i]];
    }
    // Include every element tied with the last one taken.
    if (!marked.empty()) {
        const double cutoff = ind[marked.back()];
        for (; i < order.size() && ind[order[i]] == cutoff; ++i) marked.push_back(order[i]);
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

}  // namespace pnpafem
