#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pnpafem/fe.hpp"
#include "pnpafem/problems.hpp"
#include "support/oracles.hpp"

using namespace pnpafem;

namespace {

// Strong-form residuals rebuilt with nested central differences; validates
// the hand-expanded sources against the stated exact solutions.
struct ResidualOracle {
    const ProblemSpec& spec;
    double h = 1e-5;

    double r1(double x, double y) const {
        const auto& ex = *spec.exact;
        return -oracle::fd_laplacian(ex[0].value, x, y, h) -
               oracle::fd_div_c_grad(ex[0].value, ex[2].value, x, y, h) - spec.f1(x, y);
    }
    double r2(double x, double y) const {
        const auto& ex = *spec.exact;
        return -oracle::fd_laplacian(ex[1].value, x, y, h) +
               oracle::fd_div_c_grad(ex[1].value, ex[2].value, x, y, h) - spec.f2(x, y);
    }
    double r3(double x, double y) const {
        const auto& ex = *spec.exact;
        return -spec.epsilon * oracle::fd_laplacian(ex[2].value, x, y, h) - ex[0].value(x, y) +
               ex[1].value(x, y) - spec.f3(x, y);
    }
};

std::vector<Vec2> interior_points_lshape(int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    std::vector<Vec2> pts;
    while (static_cast<int>(pts.size()) < count) {
        const Vec2 p{u(rng), u(rng)};
        if (p.x > 0.05 && p.y < -0.05) continue;  // removed quadrant
        if (std::abs(p.x) < 0.05 || std::abs(p.y) < 0.05) continue;  // stay off the axes
        pts.push_back(p);
    }
    return pts;
}

std::vector<Vec2> interior_points_square(int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<Vec2> pts;
    for (int i = 0; i < count; ++i) pts.push_back({u(rng), u(rng)});
    return pts;
}

}  // namespace

TEST_CASE("example 1: point values and boundary traces") {
    const auto spec = example1();
    CHECK(spec.epsilon == 1.0);
    CHECK(spec.domain == DomainKind::l_shape);
    CHECK(spec.f3(0.5, 0.5) ==
          doctest::Approx(2 * std::numbers::pi * std::numbers::pi + 1.0).epsilon(1e-12));

    // cross-check the psi part of f3 by finite differences
    const auto& ex = *spec.exact;
    const double lap_psi = oracle::fd_laplacian(ex[2].value, 0.5, 0.5, 1e-5);
    CHECK(spec.f3(0.5, 0.5) ==
          doctest::Approx(-lap_psi - ex[0].value(0.5, 0.5) + ex[1].value(0.5, 0.5))
              .epsilon(1e-6));

    // exact solution vanishes on all six boundary segments
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto check_zero = [&](double x, double y) {
        for (const auto& comp : ex) CHECK(std::abs(comp.value(x, y)) < 1e-12);
    };
    for (int i = 0; i < 100; ++i) {
        const double t = u01(rng);
        check_zero(-1.0 + t, -1.0);
        check_zero(-1.0, -1.0 + 2 * t);
        check_zero(-1.0 + 2 * t, 1.0);
        check_zero(1.0, t);
        check_zero(t, 0.0);
        check_zero(0.0, -t);
    }
}

TEST_CASE("example 1: finite-difference residual oracle") {
    const auto spec = example1();
    const ResidualOracle res{spec};
    for (const auto& p : interior_points_lshape(50, 21)) {
        CHECK(std::abs(res.r1(p.x, p.y)) < 1e-4);
        CHECK(std::abs(res.r2(p.x, p.y)) < 1e-4);
        CHECK(std::abs(res.r3(p.x, p.y)) < 1e-4);
    }
}

TEST_CASE("example 2: unit sources, zero boundary") {
    const auto spec = example2();
    CHECK(spec.domain == DomainKind::l_shape);
    CHECK_FALSE(spec.exact.has_value());
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double x = u(rng), y = u(rng);
        CHECK(spec.f1(x, y) == 1.0);
        CHECK(spec.f2(x, y) == 1.0);
        CHECK(spec.f3(x, y) == 1.0);
        CHECK(spec.dirichlet_p(x, y) == 0.0);
        CHECK(spec.dirichlet_n(x, y) == 0.0);
        CHECK(spec.dirichlet_psi(x, y) == 0.0);
    }
}

TEST_CASE("example 3: point values, traces, gradients") {
    const auto spec = example3(0.01);
    const auto& ex = *spec.exact;
    CHECK(ex[0].value(0.0, 0.5) == doctest::Approx(1.0 + std::exp(-5.0)).epsilon(1e-12));
    CHECK(ex[2].value(1.0, 1.0) == doctest::Approx(2.0 * std::exp(-30.0)).epsilon(1e-12));

    // Dirichlet data reproduces the exact trace at boundary vertices exactly
    auto mesh = domain_mesh(DomainKind::unit_square, 5);
    const auto bp = dirichlet_values(*mesh, spec.dirichlet_p);
    for (int i = 0; i < mesh->vertex_count(); ++i) {
        if (!mesh->vertex_is_dirichlet()[i]) continue;
        const Vec2 v = mesh->vertices()[i];
        CHECK(bp[i] == ex[0].value(v.x, v.y));
    }

    // stated gradients agree with finite differences of the values
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < 20; ++i) {
        const double x = u(rng), y = u(rng);
        for (const auto& comp : ex) {
            const Vec2 g = comp.gradient(x, y);
            CHECK(g.x == doctest::Approx(oracle::fd_dx(comp.value, x, y, 1e-6)).epsilon(1e-6));
            CHECK(g.y == doctest::Approx(oracle::fd_dy(comp.value, x, y, 1e-6)).epsilon(1e-6));
        }
    }

    CHECK_THROWS_AS(example3(1.0), std::invalid_argument);
    CHECK_THROWS_AS(example3(0.0), std::invalid_argument);
}

TEST_CASE("example 3: finite-difference residual oracle, relative") {
    for (double eps : {0.1, 0.01}) {
        const auto spec = example3(eps);
        const ResidualOracle res{spec};
        for (const auto& p : interior_points_square(50, 77)) {
            const double s1 = std::max(1.0, std::abs(spec.f1(p.x, p.y)));
            const double s2 = std::max(1.0, std::abs(spec.f2(p.x, p.y)));
            const double s3 = std::max(1.0, std::abs(spec.f3(p.x, p.y)));
            CHECK(std::abs(res.r1(p.x, p.y)) / s1 < 1e-4);
            CHECK(std::abs(res.r2(p.x, p.y)) / s2 < 1e-4);
            CHECK(std::abs(res.r3(p.x, p.y)) / s3 < 1e-4);
        }
    }
}
