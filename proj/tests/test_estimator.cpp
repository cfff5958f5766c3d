#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pnpafem/estimator.hpp"
#include "pnpafem/problems.hpp"

using namespace pnpafem;

namespace {

ProblemSpec constant_spec(double f1, double f2, double f3, double epsilon = 1.0) {
    ProblemSpec spec;
    spec.epsilon = epsilon;
    spec.domain = DomainKind::unit_square;
    spec.f1 = [f1](double, double) { return f1; };
    spec.f2 = [f2](double, double) { return f2; };
    spec.f3 = [f3](double, double) { return f3; };
    spec.dirichlet_p = [](double, double) { return 0.0; };
    spec.dirichlet_n = [](double, double) { return 0.0; };
    spec.dirichlet_psi = [](double, double) { return 0.0; };
    return spec;
}

EstimatorBreakdown fake_breakdown(std::vector<double> indicators) {
    EstimatorBreakdown b;
    b.element_indicator = std::move(indicators);
    double s = 0.0;
    for (double v : b.element_indicator) s += v * v;
    b.eta_global = std::sqrt(s);
    return b;
}

}  // namespace

TEST_CASE("constant data on a single triangle") {
    auto mesh = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    const auto spec = constant_spec(1.0, 1.0, 1.0);
    const auto b = estimate(PNPState::zero(mesh), spec);

    const auto g = mesh->geometry(0);
    const double expected_sq = 3.0 * g.diameter * g.diameter * g.area;
    CHECK(b.eta_elem[0] * b.eta_elem[0] == doctest::Approx(expected_sq).epsilon(1e-12));
    for (double e : b.eta_edge) CHECK(e == 0.0);
    CHECK(b.osc_global == doctest::Approx(0.0));
    CHECK(b.eta_global == doctest::Approx(std::sqrt(expected_sq)).epsilon(1e-12));
}

TEST_CASE("vanishing data gives a zero estimator") {
    auto mesh = domain_mesh(DomainKind::unit_square, 2);
    const auto spec = constant_spec(0.0, 0.0, 0.0);
    const auto b = estimate(PNPState::zero(mesh), spec);
    CHECK(b.eta_global == 0.0);
    CHECK(b.osc_global == 0.0);
    CHECK(mark_maximum(b).empty());
}

TEST_CASE("oscillation of f3 = x on the reference triangle") {
    auto mesh = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    auto spec = constant_spec(0.0, 0.0, 0.0);
    spec.f3 = [](double x, double) { return x; };
    const auto b = estimate(PNPState::zero(mesh), spec);

    const double h = std::sqrt(2.0);
    CHECK(b.osc_elem[0] == doctest::Approx(h / 6.0).epsilon(1e-12));           // ||x - 1/3|| = 1/6
    CHECK(b.eta_elem[0] == doctest::Approx(std::sqrt(h * h / 18.0)).epsilon(1e-12));
    CHECK(b.osc_global == doctest::Approx(h / 6.0).epsilon(1e-12));
}

TEST_CASE("split consistency and indicator sum") {
    auto spec = example1();
    auto mesh = domain_mesh(DomainKind::l_shape, 2);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto fill = [&] {
        std::vector<double> v(mesh->vertex_count());
        for (auto& x : v) x = u(rng);
        return FEFunction(mesh, std::move(v));
    };
    const PNPState state{fill(), fill(), fill()};
    const auto b = estimate(state, spec);

    double elem_sq = 0.0, edge_sq = 0.0, ind_sq = 0.0;
    for (double v : b.eta_elem) elem_sq += v * v;
    for (double v : b.eta_edge) edge_sq += v * v;
    for (double v : b.element_indicator) ind_sq += v * v;
    CHECK(b.eta_global * b.eta_global ==
          doctest::Approx(elem_sq + edge_sq).epsilon(1e-12));
    CHECK(ind_sq == doctest::Approx(b.eta_global * b.eta_global).epsilon(1e-12));

    // boundary edges contribute nothing
    for (int e = 0; e < mesh->edge_count(); ++e)
        if (mesh->edge_triangles()[e][1] < 0) CHECK(b.eta_edge[e] == 0.0);
}

TEST_CASE("every term scales exactly as one over sqrt(epsilon)") {
    auto mesh = domain_mesh(DomainKind::unit_square, 3);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto fill = [&] {
        std::vector<double> v(mesh->vertex_count());
        for (auto& x : v) x = u(rng);
        return FEFunction(mesh, std::move(v));
    };
    const PNPState state{fill(), fill(), fill()};

    auto spec_a = constant_spec(0.7, -0.3, 1.9, 0.8);
    spec_a.f3 = [](double x, double y) { return std::sin(x) + y; };
    auto spec_b = spec_a;
    spec_b.epsilon = spec_a.epsilon / 4.0;

    const auto a = estimate(state, spec_a);
    const auto b = estimate(state, spec_b);
    REQUIRE(a.eta_elem.size() == b.eta_elem.size());
    for (std::size_t t = 0; t < a.eta_elem.size(); ++t) {
        CHECK(b.eta_elem[t] == doctest::Approx(2.0 * a.eta_elem[t]).epsilon(1e-12));
        CHECK(b.osc_elem[t] == doctest::Approx(2.0 * a.osc_elem[t]).epsilon(1e-12));
    }
    for (std::size_t e = 0; e < a.eta_edge.size(); ++e)
        CHECK(b.eta_edge[e] == doctest::Approx(2.0 * a.eta_edge[e]).epsilon(1e-12));
    CHECK(b.eta_global == doctest::Approx(2.0 * a.eta_global).epsilon(1e-12));
}

TEST_CASE("maximum marking") {
    const auto b = fake_breakdown({4.0, 3.0, 1.0});
    CHECK(mark_maximum(b, 0.5) == std::vector<int>{0, 1});
    CHECK(mark_maximum(b, 1.0) == std::vector<int>{0});
    CHECK(mark_maximum(fake_breakdown({0.0, 0.0})).empty());
    CHECK_THROWS_AS(mark_maximum(b, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mark_maximum(b, 1.5), std::invalid_argument);

    SUBCASE("monotone in theta") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> ind(50);
        for (auto& v : ind) v = u(rng);
        const auto bk = fake_breakdown(ind);
        for (double lo : {0.2, 0.4, 0.6}) {
            const auto big = mark_maximum(bk, lo);
            const auto small = mark_maximum(bk, lo + 0.3);
            CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
        }
    }
}

TEST_CASE("dorfler marking") {
    const auto b = fake_breakdown({4.0, 3.0, 1.0});  // eta^2 = 26
    // 16 >= theta^2 * 26 for theta = 0.75
    CHECK(mark_dorfler(b, 0.75) == std::vector<int>{0});
    CHECK(mark_dorfler(b, 0.999) == std::vector<int>{0, 1, 2});
    CHECK_THROWS_AS(mark_dorfler(b, 1.0), std::invalid_argument);

    SUBCASE("ties at the cutoff are all included") {
        const auto tied = fake_breakdown({3.0, 3.0, 1.0});  // eta^2 = 19
        CHECK(mark_dorfler(tied, 0.65) == std::vector<int>{0, 1});  // target 8.03 < 9
    }
    SUBCASE("zero-indicator elements are never marked") {
        const auto z = fake_breakdown({2.0, 0.0, 1.0});
        const auto marked = mark_dorfler(z, 0.99);
        CHECK(marked == std::vector<int>{0, 2});
    }
}
