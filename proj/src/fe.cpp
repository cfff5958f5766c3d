#include "pnpafem/fe.hpp"

#include <cmath>
#include <stdexcept>

#include "pnpafem/quadrature.hpp"

namespace pnpafem {

FEFunction::FEFunction(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_) throw std::invalid_argument("FEFunction: null mesh");
    if (static_cast<int>(values_.size()) != mesh_->vertex_count())
        throw std::invalid_argument("FEFunction: value count does not match vertex count");
}

FEFunction FEFunction::zero(MeshPtr mesh) {
    const int n = mesh->vertex_count();
    return FEFunction(std::move(mesh), std::vector<double>(n, 0.0));
}

FEFunction FEFunction::interpolate(MeshPtr mesh, const ScalarField& f) {
    std::vector<double> v(mesh->vertex_count());
    for (int i = 0; i < mesh->vertex_count(); ++i) {
        const Vec2 p = mesh->vertices()[i];
        v[i] = f(p.x, p.y);
    }
    return FEFunction(std::move(mesh), std::move(v));
}

double FEFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

Vec2 FEFunction::gradient_on(int triangle) const {
    return gradient_on(triangle, mesh_->geometry(triangle));
}

Vec2 FEFunction::gradient_on(int triangle, const ElementGeometry& geom) const {
    const auto& tri = mesh_->triangles()[triangle];
    Vec2 g{0.0, 0.0};
    for (int k = 0; k < 3; ++k) g = g + values_[tri[k]] * geom.basis_gradients[k];
    return g;
}

double FEFunction::value_on(int triangle, const std::array<double, 3>& bary) const {
    const auto& tri = mesh_->triangles()[triangle];
    return bary[0] * values_[tri[0]] + bary[1] * values_[tri[1]] + bary[2] * values_[tri[2]];
}

SparseMatrix assemble_diffusion(const Mesh& mesh, double coefficient) {
    if (coefficient <= 0.0) throw std::invalid_argument("assemble_diffusion: coefficient <= 0");
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        const auto& tri = mesh.triangles()[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.push_back({tri[i], tri[j],
                                 coefficient * g.area *
                                     dot(g.basis_gradients[i], g.basis_gradients[j])});
    }
    return SparseMatrix::from_triplets(mesh.vertex_count(), mesh.vertex_count(), trips);
}

SparseMatrix assemble_weighted_diffusion(const Mesh& mesh, const FEFunction& w) {
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    const auto& wv = w.values();
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        const auto& tri = mesh.triangles()[t];
        const double wbar = (wv[tri[0]] + wv[tri[1]] + wv[tri[2]]) / 3.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.push_back({tri[i], tri[j],
                                 wbar * g.area * dot(g.basis_gradients[i], g.basis_gradients[j])});
    }
    return SparseMatrix::from_triplets(mesh.vertex_count(), mesh.vertex_count(), trips);
}

SparseMatrix assemble_drift(const Mesh& mesh, const FEFunction& psi, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("assemble_drift: sign must be +-1");
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        const auto& tri = mesh.triangles()[t];
        const Vec2 grad_psi = psi.gradient_on(t, g);
        // integral over T of phi_j equals |T|/3, so row i is constant.
        for (int i = 0; i < 3; ++i) {
            const double row = sign * dot(grad_psi, g.basis_gradients[i]) * g.area / 3.0;
            for (int j = 0; j < 3; ++j) trips.push_back({tri[i], tri[j], row});
        }
    }
    return SparseMatrix::from_triplets(mesh.vertex_count(), mesh.vertex_count(), trips);
}

SparseMatrix assemble_mass(const Mesh& mesh) {
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        const auto& tri = mesh.triangles()[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.push_back({tri[i], tri[j], g.area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0)});
    }
    return SparseMatrix::from_triplets(mesh.vertex_count(), mesh.vertex_count(), trips);
}

std::vector<double> assemble_load(const Mesh& mesh, const ScalarField& f, int quad_degree) {
    if (quad_degree != 2 && quad_degree != 4)
        throw std::invalid_argument("assemble_load: quad_degree must be 2 or 4");
    const auto& rule = triangle_rule(quad_degree);
    std::vector<double> b(mesh.vertex_count(), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        const auto& tri = mesh.triangles()[t];
        const Vec2 p0 = mesh.vertices()[tri[0]];
        const Vec2 p1 = mesh.vertices()[tri[1]];
        const Vec2 p2 = mesh.vertices()[tri[2]];
        for (const auto& q : rule.points) {
            const Vec2 x = q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2;
            const double fv = f(x.x, x.y);
            if (!std::isfinite(fv))
                throw std::runtime_error("assemble_load: non-finite source value on element " +
                                         std::to_string(t));
            const double w = q.weight * g.area * fv;
            for (int i = 0; i < 3; ++i) b[tri[i]] += w * q.bary[i];
        }
    }
    return b;
}

void apply_dirichlet(SparseMatrix& matrix, std::vector<double>& rhs,
                     std::span<const std::uint8_t> constrained, std::span<const double> values) {
    const int n = matrix.rows();
    if (static_cast<int>(constrained.size()) != n || static_cast<int>(values.size()) != n ||
        static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("apply_dirichlet: size mismatch");
    for (int i = 0; i < n; ++i) {
        if (constrained[i] && !std::isfinite(values[i]))
            throw std::invalid_argument("apply_dirichlet: missing boundary value at vertex " +
                                        std::to_string(i));
    }
    // Move known columns to the rhs, then overwrite constrained rows.
    const auto& offsets = matrix.row_offsets();
    const auto& cols = matrix.column_indices();
    auto& vals = matrix.values();
    for (int r = 0; r < n; ++r) {
        if (constrained[r]) continue;
        for (int k = offsets[r]; k < offsets[r + 1]; ++k) {
            const int c = cols[k];
            if (constrained[c] && vals[k] != 0.0) {
                rhs[r] -= vals[k] * values[c];
                vals[k] = 0.0;
            }
        }
    }
    for (int r = 0; r < n; ++r) {
        if (!constrained[r]) continue;
        matrix.set_unit_row(r);
        rhs[r] = values[r];
    }
}

std::vector<double> dirichlet_values(const Mesh& mesh, const ScalarField& g) {
    std::vector<double> v(mesh.vertex_count(), 0.0);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        if (mesh.vertex_is_dirichlet()[i]) {
            const Vec2 p = mesh.vertices()[i];
            v[i] = g(p.x, p.y);
        }
    }
    return v;
}

namespace {

// Exact integral of the square of a P1 function on one element.
double l2_squared_on(const std::array<double, 3>& u, double area) {
    return area / 6.0 *
           (u[0] * u[0] + u[1] * u[1] + u[2] * u[2] + u[0] * u[1] + u[1] * u[2] + u[2] * u[0]);
}

}  // namespace

double eps_norm(const FEFunction& u, double epsilon) {
    if (epsilon <= 0.0 || epsilon > 1.0)
        throw std::invalid_argument("eps_norm: epsilon must lie in (0,1]");
    const Mesh& mesh = *u.mesh();
    double l2sq = 0.0, h1sq = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        const auto& tri = mesh.triangles()[t];
        l2sq += l2_squared_on({u.values()[tri[0]], u.values()[tri[1]], u.values()[tri[2]]}, g.area);
        const Vec2 grad = u.gradient_on(t, g);
        h1sq += g.area * dot(grad, grad);
    }
    return std::sqrt(l2sq + epsilon * h1sq);
}

double eps_norm(const FEFunction& u1, const FEFunction& u2, const FEFunction& u3, double epsilon) {
    const double a = eps_norm(u1, epsilon);
    const double b = eps_norm(u2, epsilon);
    const double c = eps_norm(u3, epsilon);
    return std::sqrt(a * a + b * b + c * c);
}

ErrorNorms error_norms(const FEFunction& u_h, const ExactScalar& exact, int quad_degree,
                       double epsilon) {
    const auto& rule = triangle_rule(quad_degree);
    const Mesh& mesh = *u_h.mesh();
    double l2sq = 0.0, h1sq = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = mesh.geometry(t);
        const auto& tri = mesh.triangles()[t];
        const Vec2 p0 = mesh.vertices()[tri[0]];
        const Vec2 p1 = mesh.vertices()[tri[1]];
        const Vec2 p2 = mesh.vertices()[tri[2]];
        const Vec2 grad_h = u_h.gradient_on(t, g);
        for (const auto& q : rule.points) {
            const Vec2 x = q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2;
            const double e = u_h.value_on(t, q.bary) - exact.value(x.x, x.y);
            const Vec2 ge = grad_h - exact.gradient(x.x, x.y);
            l2sq += q.weight * g.area * e * e;
            h1sq += q.weight * g.area * dot(ge, ge);
        }
    }
    ErrorNorms n;
    n.l2 = std::sqrt(l2sq);
    n.h1_semi = std::sqrt(h1sq);
    n.eps = std::sqrt(l2sq + epsilon * h1sq);
    return n;
}

}  // namespace pnpafem
