#include "lnc/steepness.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace lnc;

namespace {

struct Flat {
    Lattice lat;
    GammaRep rep;
    Matrix gamma;
    DiracOperator d;
    ScalarField u;
    explicit Flat(int n, Boundary b = Boundary::clamped)
        : lat(Lattice::cube(n, -1.0, 1.0, n == 2 ? 9 : 4, b)),
          rep(build_gamma(n)),
          gamma(chirality(rep)),
          d(DiracOperator::flat(rep, lat)),
          u(ScalarField::constant(lat, 1.0)) {}
};

ScalarField linear(const Lattice& lat, std::vector<double> g, double c = 0.0) {
    return ScalarField::sample(lat, [g, c](std::span<const double> x) {
        double v = c;
        for (std::size_t k = 0; k < g.size(); ++k) v += g[k] * x[k];
        return cplx(v);
    });
}

}  // namespace

TEST_CASE("matrix criterion on flat 1+1", "[steepness]") {
    Flat w(2);
    SECTION("f = t is steep with min eigenvalue 0") {
        const auto r = is_steep_matrix(linear(w.lat, {1.0, 0.0}), w.d, w.gamma);
        CHECK(r.global);
        CHECK(r.sites_failed == 0);
        CHECK(std::abs(r.worst_margin) <= 1e-14);
        CHECK(r.hermiticity_residual <= 1e-14);
    }
    SECTION("f = t/2 is not steep") {
        const auto r = is_steep_matrix(linear(w.lat, {0.5, 0.0}), w.d, w.gamma);
        CHECK_FALSE(r.global);
        CHECK(r.sites_failed == w.lat.sites());
        CHECK(r.worst_margin == Catch::Approx(-0.5));  // e0(e0 a - sqrt(1 + b^2)) = 1/2 - 1
    }
    SECTION("f = -t is past oriented") {
        const auto r = is_steep_matrix(linear(w.lat, {-1.0, 0.0}), w.d, w.gamma);
        CHECK_FALSE(r.global);
        CHECK(r.worst_margin == Catch::Approx(-2.0));
    }
    SECTION("errors") {
        const auto lat3 = Lattice::cube(3, -1.0, 1.0, 4, Boundary::clamped);
        const auto d3 = DiracOperator::flat(build_gamma(3), lat3);
        CHECK_THROWS_AS(is_steep_matrix(linear(lat3, {1, 0, 0}), d3, Matrix::Identity(2, 2)), std::domain_error);
        const auto complex_f = ScalarField::constant(w.lat, cplx(0.0, 1.0));
        CHECK_THROWS_AS(is_steep_matrix(complex_f, w.d, w.gamma), std::invalid_argument);
    }
}

TEST_CASE("matrix margin equals the closed-form eigenvalue", "[steepness]") {
    // eigenvalues e0 (e0 a +- sqrt(1 + |b|^2))
    const auto rep = build_gamma(4);
    const Matrix gamma = chirality(rep);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> g{uni(rng), uni(rng), uni(rng), uni(rng)};
        const double u = 0.5 + std::abs(uni(rng));
        const double e0 = 1 / std::sqrt(u);
        const double expected = e0 * (e0 * g[0] - std::sqrt(1 + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]));
        const auto [m, res] = matrix_margin(rep, gamma, g, u);
        CHECK(m == Catch::Approx(expected).margin(1e-12));
        CHECK(res <= 1e-13);
    }
}

TEST_CASE("scalar criterion", "[steepness]") {
    Flat w(2);
    CHECK(is_steep_scalar(linear(w.lat, {1.0, 0.0}), w.u).global);
    const auto two = is_steep_scalar(linear(w.lat, {2.0, 0.0}), w.u);
    CHECK(two.global);
    CHECK(two.worst_margin == Catch::Approx(3.0));  // g = -4
    const auto x = is_steep_scalar(linear(w.lat, {0.0, 1.0}), w.u);
    CHECK_FALSE(x.global);
    CHECK(x.worst_margin == Catch::Approx(-2.0));  // g = +1
    const auto past = is_steep_scalar(linear(w.lat, {-2.0, 0.0}), w.u);
    CHECK_FALSE(past.global);
    CHECK(past.worst_margin == Catch::Approx(3.0));  // the metric part is fine; orientation fails
    CHECK_FALSE(past.future_oriented[0]);
}

TEST_CASE("boundary cases agree", "[steepness]") {
    Flat w(2);
    const auto on_cone_m = is_steep_matrix(linear(w.lat, {1.0, 0.0}), w.d, w.gamma);
    const auto on_cone_s = is_steep_scalar(linear(w.lat, {1.0, 0.0}), w.u);
    CHECK(on_cone_m.global);
    CHECK(on_cone_s.global);
    CHECK(std::abs(on_cone_s.worst_margin) <= 1e-14);
    const auto fm = linear(w.lat, {1.0001, 0.0001});
    CHECK(is_steep_matrix(fm, w.d, w.gamma).global);
    CHECK(is_steep_scalar(fm, w.u).global);
}

TEST_CASE("conformal factor rescales the time derivative", "[steepness]") {
    const auto lat = Lattice::cube(2, -1.0, 1.0, 5, Boundary::clamped);
    const auto rep = build_gamma(2);
    const auto u = ScalarField::constant(lat, 4.0);
    const DiracOperator d(rep, lat, u);
    // g = -a^2/4: f = 2t is on the boundary, f = t is not steep.
    CHECK(is_steep_matrix(linear(lat, {2.0, 0.0}), d, chirality(rep)).global);
    CHECK(is_steep_scalar(linear(lat, {2.0, 0.0}), u).global);
    CHECK_FALSE(is_steep_matrix(linear(lat, {1.0, 0.0}), d, chirality(rep)).global);
    CHECK_FALSE(is_steep_scalar(linear(lat, {1.0, 0.0}), u).global);
}

TEST_CASE("equivalence scan", "[steepness]") {
    for (int n : {2, 4}) {
        const auto r = equivalence_scan(n, 200, 42);
        INFO("n = " << n);
        CHECK(r.all_agree());
        CHECK(r.steep_count > 20);
        CHECK(r.steep_count < 180);
    }
    CHECK(equivalence_scan(2, 100, 42, 2.5).all_agree());
    CHECK_THROWS_AS(equivalence_scan(3, 10, 1), std::domain_error);
}

TEST_CASE("scale monotonicity and additive constants", "[steepness]") {
    Flat w(4);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    int steep = 0;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> g{0.0, uni(rng), uni(rng), uni(rng)};
        g[0] = std::sqrt(1 + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]) * (1.0 + std::abs(uni(rng)));
        const auto f = linear(w.lat, g);
        const auto base = is_steep_matrix(f, w.d, w.gamma);
        REQUIRE(base.global);
        ++steep;
        for (double lambda : {1.0, 1.5, 10.0}) {
            std::vector<double> gl = g;
            for (auto& v : gl) v *= lambda;
            CHECK(is_steep_matrix(linear(w.lat, gl), w.d, w.gamma).global);
            CHECK(is_steep_scalar(linear(w.lat, gl), w.u).global);
        }
        const auto shifted = is_steep_matrix(linear(w.lat, g, 3.7), w.d, w.gamma);
        CHECK(shifted.global);
        CHECK(shifted.worst_margin == Catch::Approx(base.worst_margin).margin(1e-12));
    }
    CHECK(steep == 40);
}

TEST_CASE("matrix criterion is basis independent", "[steepness]") {
    Flat w(2);
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    Matrix a(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = cplx(g(rng), g(rng));
    const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
    const auto rep2 = w.rep.conjugated(q);
    const auto d2 = DiracOperator::flat(rep2, w.lat);
    for (const auto& grad : std::vector<std::vector<double>>{{1, 0}, {0.5, 0}, {2, 1}, {1.2, -0.7}, {-1, 0}}) {
        const auto f = linear(w.lat, grad);
        const auto r1 = is_steep_matrix(f, w.d, w.gamma);
        const auto r2 = is_steep_matrix(f, d2, chirality(rep2));
        CHECK(r1.global == r2.global);
        CHECK(r1.worst_margin == Catch::Approx(r2.worst_margin).margin(1e-12));
    }
}

TEST_CASE("linear functions have translation-invariant margins", "[steepness]") {
    Flat w(2, Boundary::clamped);
    const auto r = is_steep_matrix(linear(w.lat, {1.7, 0.4}), w.d, w.gamma);
    double lo = r.margins[0], hi = r.margins[0];
    for (double m : r.margins) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    CHECK(hi - lo <= 1e-12);
}

TEST_CASE("report serializes", "[steepness]") {
    Flat w(2);
    const auto r = is_steep_scalar(linear(w.lat, {0.5, 0.0}), w.u);
    const auto j = to_json(r, true);
    CHECK(j["global"] == false);
    CHECK(j["sites_failed"] == w.lat.sites());
    CHECK(j["site_detail"].size() == w.lat.sites());
    CHECK(j["h"].size() == 2);
    CHECK_FALSE(to_json(r).contains("site_detail"));
}
