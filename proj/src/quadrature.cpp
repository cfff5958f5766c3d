#include "pnpafem/quadrature.hpp"

#include <stdexcept>

namespace pnpafem {

namespace {

QuadratureRule make_degree2() {
    // Edge-midpoint rule.
    QuadratureRule r;
    r.degree = 2;
    r.points = {
        {{0.5, 0.5, 0.0}, 1.0 / 3.0},
        {{0.0, 0.5, 0.5}, 1.0 / 3.0},
        {{0.5, 0.0, 0.5}, 1.0 / 3.0},
    };
    return r;
}

void push_orbit3(QuadratureRule& r, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({{b, a, a}, w});
    r.points.push_back({{a, b, a}, w});
    r.points.push_back({{a, a, b}, w});
}

QuadratureRule make_degree4() {
    // Dunavant 6-point rule.
    QuadratureRule r;
    r.degree = 4;
    push_orbit3(r, 0.44594849091596488632, 0.22338158967801146570);
    push_orbit3(r, 0.09157621350977074346, 0.10995174365532186764);
    return r;
}

QuadratureRule make_degree5() {
    // Dunavant 7-point rule (centroid plus two orbits).
    QuadratureRule r;
    r.degree = 5;
    r.points.push_back({{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 0.225});
    push_orbit3(r, 0.47014206410511508977, 0.13239415278850618074);
    push_orbit3(r, 0.10128650732345633880, 0.12593918054482715260);
    return r;
}

}  // namespace

const QuadratureRule& triangle_rule(int degree) {
    static const QuadratureRule d2 = make_degree2();
    static const QuadratureRule d4 = make_degree4();
    static const QuadratureRule d5 = make_degree5();
    switch (degree) {
        case 2: return d2;
        case 4: return d4;
        case 5: return d5;
        default: throw std::invalid_argument("triangle_rule: unsupported degree");
    }
}

std::span<const std::array<double, 2>> edge_gauss2() {
    // Positions on [0,1] with unit total weight.
    static const std::array<std::array<double, 2>, 2> pts = {{
        {0.5 - 0.5 / 1.7320508075688772935, 0.5},
        {0.5 + 0.5 / 1.7320508075688772935, 0.5},
    }};
    return pts;
}

}  // namespace pnpafem
