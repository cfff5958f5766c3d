#include "pnpafem/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pnpafem {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double pi2 = pi * pi;
}  // namespace

ProblemSpec example1() {
    ProblemSpec spec;
    spec.epsilon = 1.0;
    spec.domain = DomainKind::l_shape;

    auto p = [](double x, double y) { return std::sin(2 * pi * x) * std::sin(2 * pi * y); };
    auto n = [](double x, double y) { return std::sin(3 * pi * x) * std::sin(3 * pi * y); };
    auto psi = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };

    auto grad_p = [](double x, double y) {
        return Vec2{2 * pi * std::cos(2 * pi * x) * std::sin(2 * pi * y),
                    2 * pi * std::sin(2 * pi * x) * std::cos(2 * pi * y)};
    };
    auto grad_n = [](double x, double y) {
        return Vec2{3 * pi * std::cos(3 * pi * x) * std::sin(3 * pi * y),
                    3 * pi * std::sin(3 * pi * x) * std::cos(3 * pi * y)};
    };
    auto grad_psi = [](double x, double y) {
        return Vec2{pi * std::cos(pi * x) * std::sin(pi * y),
                    pi * std::sin(pi * x) * std::cos(pi * y)};
    };

    // f1 = -lap(p) - grad(p).grad(psi) - p lap(psi), expanded in closed form.
    spec.f1 = [p, grad_p, grad_psi, psi](double x, double y) {
        return 8 * pi2 * p(x, y) - dot(grad_p(x, y), grad_psi(x, y)) +
               2 * pi2 * p(x, y) * psi(x, y);
    };
    // f2 = -lap(n) + grad(n).grad(psi) + n lap(psi).
    spec.f2 = [n, grad_n, grad_psi, psi](double x, double y) {
        return 18 * pi2 * n(x, y) + dot(grad_n(x, y), grad_psi(x, y)) -
               2 * pi2 * n(x, y) * psi(x, y);
    };
    // f3 = -lap(psi) - p + n.
    spec.f3 = [p, n, psi](double x, double y) {
        return 2 * pi2 * psi(x, y) - p(x, y) + n(x, y);
    };

    spec.dirichlet_p = [](double, double) { return 0.0; };
    spec.dirichlet_n = [](double, double) { return 0.0; };
    spec.dirichlet_psi = [](double, double) { return 0.0; };
    spec.exact = {{{p, grad_p}, {n, grad_n}, {psi, grad_psi}}};
    return spec;
}

ProblemSpec example2() {
    ProblemSpec spec;
    spec.epsilon = 1.0;
    spec.domain = DomainKind::l_shape;
    spec.f1 = [](double, double) { return 1.0; };
    spec.f2 = [](double, double) { return 1.0; };
    spec.f3 = [](double, double) { return 1.0; };
    spec.dirichlet_p = [](double, double) { return 0.0; };
    spec.dirichlet_n = [](double, double) { return 0.0; };
    spec.dirichlet_psi = [](double, double) { return 0.0; };
    return spec;
}

ProblemSpec example3(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("example3: epsilon must lie in (0,1)");
    ProblemSpec spec;
    spec.epsilon = epsilon;
    spec.domain = DomainKind::unit_square;
    const double s = 1.0 / std::sqrt(epsilon);

    auto p = [s](double x, double y) { return std::exp(-s * x) + std::exp(-s * y); };
    auto n = [s](double x, double y) { return std::exp(-2 * s * x) + std::exp(-2 * s * y); };
    auto psi = [s](double x, double y) { return std::exp(-3 * s * x) + std::exp(-3 * s * y); };

    auto grad_p = [s](double x, double y) {
        return Vec2{-s * std::exp(-s * x), -s * std::exp(-s * y)};
    };
    auto grad_n = [s](double x, double y) {
        return Vec2{-2 * s * std::exp(-2 * s * x), -2 * s * std::exp(-2 * s * y)};
    };
    auto grad_psi = [s](double x, double y) {
        return Vec2{-3 * s * std::exp(-3 * s * x), -3 * s * std::exp(-3 * s * y)};
    };

    // With lap(p) = s^2 p, lap(n) = 4 s^2 n, lap(psi) = 9 s^2 psi and
    // eps * s^2 = 1 the sources reduce to closed exponential forms.
    spec.f1 = [s](double x, double y) {
        const double e1x = std::exp(-s * x), e1y = std::exp(-s * y);
        const double e3x = std::exp(-3 * s * x), e3y = std::exp(-3 * s * y);
        const double e4x = std::exp(-4 * s * x), e4y = std::exp(-4 * s * y);
        return -s * s * ((e1x + e1y) + 3 * (e4x + e4y) + 9 * (e1x + e1y) * (e3x + e3y));
    };
    spec.f2 = [s](double x, double y) {
        const double e2x = std::exp(-2 * s * x), e2y = std::exp(-2 * s * y);
        const double e3x = std::exp(-3 * s * x), e3y = std::exp(-3 * s * y);
        const double e5x = std::exp(-5 * s * x), e5y = std::exp(-5 * s * y);
        return s * s * (-4 * (e2x + e2y) + 6 * (e5x + e5y) + 9 * (e2x + e2y) * (e3x + e3y));
    };
    spec.f3 = [p, n, psi](double x, double y) {
        return -9.0 * psi(x, y) - p(x, y) + n(x, y);
    };

    spec.dirichlet_p = p;
    spec.dirichlet_n = n;
    spec.dirichlet_psi = psi;
    spec.exact = {{{p, grad_p}, {n, grad_n}, {psi, grad_psi}}};
    return spec;
}

}  // namespace pnpafem
