#pragma once

#include <array>
#include <span>
#include <vector>

namespace pnpafem {

/// Symmetric quadrature rule on the reference triangle in barycentric
/// coordinates; weights sum to 1 and are applied relative to element area.
struct QuadratureRule {
    struct Point {
        std::array<double, 3> bary;
        double weight;
    };
    int degree = 0;
    std::vector<Point> points;
};

/// Rules exact for polynomials up to the requested degree; supported
/// degrees are 2 (3 points), 4 (6 points) and 5 (7 points).
const QuadratureRule& triangle_rule(int degree);

/// Gauss points on [0,1], exact up to degree 3 (two points). Used for the
/// edge jump integrals of the estimator.
std::span<const std::array<double, 2>> edge_gauss2();

}  // namespace pnpafem
