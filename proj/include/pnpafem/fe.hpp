#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pnpafem/mesh.hpp"
#include "pnpafem/sparse.hpp"

namespace pnpafem {

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<Vec2(double, double)>;

/// A scalar field together with its gradient, used for manufactured
/// solutions and error studies.
struct ExactScalar {
    ScalarField value;
    VectorField gradient;
};

/// Continuous piecewise-linear function given by one value per mesh vertex.
class FEFunction {
public:
    FEFunction(MeshPtr mesh, std::vector<double> values);
    static FEFunction zero(MeshPtr mesh);
    static FEFunction interpolate(MeshPtr mesh, const ScalarField& f);

    const MeshPtr& mesh() const { return mesh_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double max_abs() const;
    /// Constant gradient on one triangle.
    Vec2 gradient_on(int triangle) const;
    Vec2 gradient_on(int triangle, const ElementGeometry& geom) const;
    /// Value at barycentric coordinates of one triangle.
    double value_on(int triangle, const std::array<double, 3>& bary) const;

private:
    MeshPtr mesh_;
    std::vector<double> values_;
};

/// coefficient * integral of grad(phi_j) . grad(phi_i); symmetric positive
/// semidefinite and exact (piecewise-constant integrand).
SparseMatrix assemble_diffusion(const Mesh& mesh, double coefficient);

/// Integral of w * grad(phi_j) . grad(phi_i) for a P1 weight w; exact via
/// the elementwise mean of w.
SparseMatrix assemble_weighted_diffusion(const Mesh& mesh, const FEFunction& w);

/// sign * integral of phi_j * (grad(psi) . grad(phi_i)); exact for P1 psi.
SparseMatrix assemble_drift(const Mesh& mesh, const FEFunction& psi, int sign);

/// Integral of phi_j * phi_i (consistent P1 mass matrix, exact).
SparseMatrix assemble_mass(const Mesh& mesh);

/// Integral of f * phi_i per vertex, with the degree-2 or degree-4 rule.
/// Throws std::runtime_error naming the element if f evaluates non-finite.
std::vector<double> assemble_load(const Mesh& mesh, const ScalarField& f, int quad_degree = 2);

/// Row elimination of Dirichlet dofs: constrained rows become unit rows with
/// rhs set to the boundary value, and known columns are moved to the rhs.
/// `constrained` and `values` are vertex-indexed; a constrained vertex with a
/// non-finite value is reported as a missing boundary value. Idempotent.
void apply_dirichlet(SparseMatrix& matrix, std::vector<double>& rhs,
                     std::span<const std::uint8_t> constrained, std::span<const double> values);

/// Nodal values of g at Dirichlet vertices (zero elsewhere).
std::vector<double> dirichlet_values(const Mesh& mesh, const ScalarField& g);

/// (||u||_L2^2 + epsilon * |u|_H1^2)^(1/2), exact for P1 functions.
double eps_norm(const FEFunction& u, double epsilon);
/// Triple version: square-sum over the three components.
double eps_norm(const FEFunction& u1, const FEFunction& u2, const FEFunction& u3, double epsilon);

struct ErrorNorms {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double eps = 0.0;
};

/// Quadrature approximation of ||u_h - u|| in the L2, H1-seminorm and
/// eps-norm, with the degree-4 rule by default.
ErrorNorms error_norms(const FEFunction& u_h, const ExactScalar& exact, int quad_degree = 4,
                       double epsilon = 1.0);

}  // namespace pnpafem
