#include "lnc/lattice.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>
#include <sstream>

using namespace lnc;

namespace {

ScalarField random_field(const Lattice& lat, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(static_cast<Eigen::Index>(lat.sites()));
    for (auto& z : v) z = cplx(g(rng), g(rng));
    return {lat, v};
}

SpinorField random_spinor(const Lattice& lat, int comps, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(static_cast<Eigen::Index>(lat.sites()) * comps);
    for (auto& z : v) z = cplx(g(rng), g(rng));
    return {lat, comps, v};
}

}  // namespace

TEST_CASE("lattice geometry and row-major ordering", "[lattice]") {
    const Lattice lat({{0.0, 1.0, 4}, {-1.0, 1.0, 8}}, Boundary::periodic);
    CHECK(lat.sites() == 32);
    CHECK(lat.spacing(0) == 0.25);
    CHECK(lat.spacing(1) == 0.25);
    CHECK(lat.stride(0) == 8);
    CHECK(lat.stride(1) == 1);
    const std::vector<int> idx{2, 5};
    const auto s = lat.site(idx);
    CHECK(s == 21);
    CHECK(lat.coords(s) == std::vector<double>{0.5, 0.25});
    CHECK(lat.neighbor(lat.site(std::vector<int>{3, 7}), 1, 1) == lat.site(std::vector<int>{3, 0}));

    const Lattice clamped({{0.0, 1.0, 5}}, Boundary::clamped);
    CHECK(clamped.spacing(0) == 0.25);
    CHECK(clamped.coordinate(0, 4) == 1.0);

    CHECK_THROWS_AS(Lattice({{0.0, 1.0, 3}}, Boundary::periodic), std::invalid_argument);
    CHECK_THROWS_AS(Lattice({{1.0, 1.0, 8}}, Boundary::periodic), std::invalid_argument);
}

TEST_CASE("gradient of linear, quadratic and constant fields", "[lattice]") {
    const Lattice lat({{-1.0, 1.0, 33}, {-1.0, 1.0, 9}}, Boundary::clamped);
    SECTION("linear is exact, including the clamped edges") {
        const auto f = ScalarField::coordinate(lat, 0);
        const auto g = gradient(f, 0);
        for (std::size_t s = 0; s < lat.sites(); ++s) CHECK(std::abs(g[s] - 1.0) <= 1e-12);
    }
    SECTION("t^2 has O(h^2) interior error") {
        // Central differences are exact for quadratics; the one-sided edge stencil too.
        const auto f = ScalarField::sample(lat, [](std::span<const double> x) { return cplx(x[0] * x[0]); });
        const auto g = gradient(f, 0);
        for (std::size_t s = 0; s < lat.sites(); ++s) CHECK(std::abs(g[s] - 2.0 * lat.coords(s)[0]) <= 1e-12);
    }
    SECTION("sin converges at second order") {
        double prev = 0.0;
        for (int n : {32, 64, 128}) {
            const Lattice p({{0.0, 2 * std::numbers::pi, n}, {0.0, 1.0, 4}}, Boundary::periodic);
            const auto f = ScalarField::sample(p, [](std::span<const double> x) { return cplx(std::sin(x[0])); });
            const auto g = gradient(f, 0);
            double err = 0.0;
            for (std::size_t s = 0; s < p.sites(); ++s) err = std::max(err, std::abs(g[s] - std::cos(p.coords(s)[0])));
            const double h = p.spacing(0);
            CHECK(err <= h * h / 6.0 * 1.0001);  // leading term of sin(h)/h - 1
            if (prev > 0.0) CHECK(prev / err == Catch::Approx(4.0).epsilon(0.01));
            prev = err;
        }
    }
    SECTION("constant") {
        const auto g = gradient(ScalarField::constant(lat, 3.5), 1);
        CHECK(g.values().cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS(gradient(ScalarField::constant(lat, 1.0), 2), std::out_of_range);
}

TEST_CASE("gradient is linear", "[lattice]") {
    std::mt19937_64 rng(5);
    const auto lat = Lattice::cube(2, -1.0, 1.0, 12, Boundary::periodic);
    const auto f = random_field(lat, rng);
    const auto g = random_field(lat, rng);
    const cplx a(0.3, -1.2), b(2.0, 0.5);
    for (int axis : {0, 1}) {
        const auto lhs = gradient(a * f + b * g, axis);
        const auto rhs = a * gradient(f, axis) + b * gradient(g, axis);
        CHECK((lhs.values() - rhs.values()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("periodic summation by parts and zero-mean gradients", "[lattice]") {
    std::mt19937_64 rng(9);
    const Lattice lat({{0.0, 3.0, 10}, {-2.0, 2.0, 14}}, Boundary::periodic);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = random_field(lat, rng);
        const auto g = random_field(lat, rng);
        for (int axis : {0, 1}) {
            const cplx sbp = inner_product(gradient(f, axis), g) + inner_product(f, gradient(g, axis));
            CHECK(std::abs(sbp) <= 1e-12);
            CHECK(std::abs(integrate(gradient(f, axis))) <= 1e-12);
        }
    }
}

TEST_CASE("lattice quadrature", "[lattice]") {
    SECTION("constant integrates to the box volume") {
        const Lattice p({{-1.0, 2.0, 8}, {0.0, 0.5, 6}}, Boundary::periodic);
        const Lattice c({{-1.0, 2.0, 8}, {0.0, 0.5, 6}}, Boundary::clamped);
        CHECK(std::abs(integrate(ScalarField::constant(p, 1.0)) - 1.5) <= 1e-12);
        CHECK(std::abs(integrate(ScalarField::constant(c, 1.0)) - 1.5) <= 1e-12);
    }
    SECTION("Gaussian on [-8,8]^2 at 128^2 integrates to pi") {
        auto gauss = [](std::span<const double> x) { return cplx(std::exp(-x[0] * x[0] - x[1] * x[1])); };
        for (auto b : {Boundary::periodic, Boundary::clamped}) {
            const auto lat = Lattice::cube(2, -8.0, 8.0, 128, b);
            CHECK(std::abs(integrate(ScalarField::sample(lat, gauss)) - std::numbers::pi) <= 1e-6);
        }
    }
    SECTION("odd function on a symmetric periodic box") {
        // -L and L are identified, so sample the grid symmetrically: [-L, L) with even N
        // is symmetric about 0 up to the seam point, where sin(x)*cos(t) is zero at x = -L = -pi.
        const auto lat = Lattice::cube(2, -std::numbers::pi, std::numbers::pi, 16, Boundary::periodic);
        const auto f = ScalarField::sample(lat, [](std::span<const double> x) { return cplx(std::sin(x[1]) * std::cos(x[0])); });
        CHECK(std::abs(integrate(f)) <= 1e-12);
    }
}

TEST_CASE("spinor inner product", "[lattice]") {
    std::mt19937_64 rng(21);
    const Lattice lat({{-2.0, 2.0, 8}, {-1.0, 1.0, 6}}, Boundary::periodic);
    const auto phi = random_spinor(lat, 2, rng);
    const auto psi = random_spinor(lat, 2, rng);
    const cplx pp = inner_product(phi, phi);
    CHECK(pp.real() > 0.0);
    CHECK(std::abs(pp.imag()) <= 1e-12 * pp.real());
    CHECK(std::abs(inner_product(psi, phi) - std::conj(inner_product(phi, psi))) <= 1e-12);

    SECTION("weight 1 + t^2 on a spinor supported at t = 1 doubles the value") {
        auto single = SpinorField::zero(lat, 2);
        const std::vector<int> idx{6, 3};  // t = -2 + 6 * 0.5 = 1
        const auto s = lat.site(idx);
        REQUIRE(lat.coords(s)[0] == 1.0);
        single.at(s) << cplx(0.5, 1.0), cplx(-2.0, 0.25);
        const auto w = ScalarField::sample(lat, [](std::span<const double> x) { return cplx(1.0 + x[0] * x[0]); });
        const cplx plain = inner_product(single, single);
        const cplx weighted = inner_product(single, single, w);
        CHECK(plain.real() == Catch::Approx((0.25 + 1.0 + 4.0 + 0.0625) * lat.cell_volume()));
        CHECK(std::abs(weighted - 2.0 * plain) <= 1e-14);
    }
    SECTION("mismatches are rejected") {
        const Lattice other({{-2.0, 2.0, 8}, {-1.0, 1.0, 8}}, Boundary::periodic);
        CHECK_THROWS_AS(inner_product(phi, SpinorField::zero(other, 2)), std::invalid_argument);
        CHECK_THROWS_AS(inner_product(phi, SpinorField::zero(lat, 4)), std::invalid_argument);
    }
}

TEST_CASE("scalar field CSV format", "[lattice]") {
    const Lattice lat({{0.0, 1.0, 4}, {0.0, 2.0, 4}}, Boundary::clamped);
    const auto f = ScalarField::sample(lat, [](std::span<const double> x) { return cplx(x[0], -x[1]); });
    std::ostringstream os;
    write_csv(os, f);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "site,t,x,re,im");
    std::getline(is, line);
    CHECK(line == "0,0,0,0,-0");
    std::getline(is, line);
    CHECK(line == "1,0,0.6666666666666666,0,-0.6666666666666666");
    int rows = 3;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 17);
    CHECK(os.str().find('\r') == std::string::npos);
}
