#include "lnc/dirac.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numbers>

using namespace lnc;

namespace {

Lattice periodic_box(int n, int points) {
    return Lattice::cube(n, 0.0, 2 * std::numbers::pi, points, Boundary::periodic);
}

}  // namespace

TEST_CASE("plane wave eigenvalues follow the central-difference symbol", "[dirac]") {
    const int points = 16;
    const auto lat = periodic_box(2, points);
    const auto d = DiracOperator::flat(build_gamma(2), lat);
    const double h = lat.spacing(0);
    for (int kt : {1, 3}) {
        for (int kx : {0, 2}) {
            const Vector chi = (Vector(2) << cplx(0.3, 1.0), cplx(-0.7, 0.2)).finished();
            auto phi = SpinorField::zero(lat, 2);
            for (std::size_t s = 0; s < lat.sites(); ++s) {
                const auto x = lat.coords(s);
                phi.at(s) = std::exp(I_unit * (kt * x[0] + kx * x[1])) * chi;
            }
            const auto out = d.apply(phi);
            // D e^{ik.x} chi = sum_mu gamma^mu sin(k_mu h)/h e^{ik.x} chi
            const Matrix symbol = d.rep()[0] * (std::sin(kt * h) / h) + d.rep()[1] * (std::sin(kx * h) / h);
            double err = 0.0;
            for (std::size_t s = 0; s < lat.sites(); ++s) err = std::max(err, (out.at(s) - symbol * phi.at(s)).norm());
            INFO("k = (" << kt << ", " << kx << ")");
            CHECK(err <= 1e-12);
        }
    }
}

TEST_CASE("commutator with coordinate time is -i gamma^0", "[dirac]") {
    for (auto b : {Boundary::periodic, Boundary::clamped}) {
        const auto lat = Lattice::cube(2, -1.0, 1.0, 6, b);
        const auto d = DiracOperator::flat(build_gamma(2), lat);
        const auto c = commutator_with_time(d);
        const Matrix expected = -I_unit * d.rep()[0];
        for (const auto& m : c.values) CHECK((m - expected).norm() <= 1e-15);
        if (b == Boundary::clamped) {
            // Away from the seam the operator commutator agrees with the multiplication operator.
            const auto t = ScalarField::coordinate(lat, 0);
            const auto ms = commutator_with_scalar(d, t);
            for (const auto& m : ms.values) CHECK((m - expected).norm() <= 1e-12);
        }
    }
}

TEST_CASE("temporal axioms hold in flat space", "[dirac]") {
    for (int n : {2, 3}) {
        const auto lat = Lattice::cube(n, 0.0, 1.0, n == 2 ? 8 : 4, Boundary::periodic);
        const auto d = DiracOperator::flat(build_gamma(n), lat);
        const auto r = check_temporal_axioms(d, TemporalElement::coordinate_time(lat));
        INFO("n = " << n);
        for (const auto& f : r.failures) INFO(f);
        CHECK(r.passed);
        CHECK(r.hermiticity_residual <= 1e-12);
        CHECK(r.square_residual <= 1e-13);
        CHECK(r.u_ax_min == Catch::Approx(1.0));
        CHECK(r.u_ax_max == Catch::Approx(1.0));
        CHECK(r.skew_residual <= 1e-12);
        CHECK(r.commutation_residual <= 1e-13);
        CHECK(r.krein_skew_residual <= 1e-12);
        CHECK(r.krein_adjoint_residual <= 1e-12);
        CHECK(r.adjoints_exact);
    }
}

TEST_CASE("constant conformal factor u = 4 gives u_ax = 1/4", "[dirac]") {
    const auto lat = Lattice::cube(2, 0.0, 1.0, 8, Boundary::periodic);
    const DiracOperator d(build_gamma(2), lat, ScalarField::constant(lat, 4.0));
    const auto r = check_temporal_axioms(d, TemporalElement::coordinate_time(lat));
    CHECK(r.passed);
    CHECK(r.u_ax_min == Catch::Approx(0.25));
    CHECK(r.u_ax_max == Catch::Approx(0.25));
    CHECK(r.u_metric_min == 4.0);
    CHECK(r.reciprocity_residual <= 1e-14);
}

TEST_CASE("time-dependent conformal factor: algebraic checks pass, skew residual is reported", "[dirac]") {
    const auto lat = Lattice::cube(2, -1.0, 1.0, 8, Boundary::periodic);
    const auto u = ScalarField::sample(lat, [](std::span<const double> x) { return cplx(1.0 + 0.5 * x[0] * x[0]); });
    const DiracOperator d(build_gamma(2), lat, u);
    const auto r = check_temporal_axioms(d, TemporalElement::coordinate_time(lat));
    CHECK(r.hermiticity_residual <= 1e-12);
    CHECK(r.square_residual <= 1e-13);
    CHECK(r.commutation_residual <= 1e-13);
    CHECK(r.reciprocity_residual <= 1e-13);
    CHECK(r.u_ax_min == Catch::Approx(1.0 / 1.5));
    CHECK(r.u_ax_max == Catch::Approx(1.0));
    // C D = -u^{-1} d_t - ...: the u^{-1} in front of d_t is not symmetric under the flat measure.
    CHECK(r.skew_residual > 1e-6);
}

TEST_CASE("a broken gamma^0 fails the axioms", "[dirac]") {
    const auto lat = Lattice::cube(2, 0.0, 1.0, 6, Boundary::periodic);
    const auto base = build_gamma(2);
    Matrix g0 = base[0];
    g0(0, 0) += 1e-3;
    const auto d = DiracOperator::flat(GammaRep({g0, base[1]}, {-1, 1}), lat);
    const auto r = check_temporal_axioms(d, TemporalElement::coordinate_time(lat));
    CHECK_FALSE(r.passed);
    CHECK(r.hermiticity_residual > 1e-4);
    CHECK_FALSE(r.failures.empty());
}

TEST_CASE("elliptic square matches the discrete symbol", "[dirac]") {
    const int points = 8;
    const auto lat = periodic_box(2, points);
    const auto d = DiracOperator::flat(build_gamma(2), lat);
    const auto r = spectrum(elliptic_square(d, TemporalElement::coordinate_time(lat)));
    CHECK(r.hermiticity_residual <= 1e-12);
    CHECK(r.min_eigenvalue >= -1e-12);

    std::vector<double> expected;
    const double h = lat.spacing(0);
    for (int a = 0; a < points; ++a)
        for (int b = 0; b < points; ++b) {
            const double st = std::sin(2 * std::numbers::pi * a / points) / h;
            const double sx = std::sin(2 * std::numbers::pi * b / points) / h;
            for (int c = 0; c < d.spinor_size(); ++c) expected.push_back(st * st + sx * sx);
        }
    std::sort(expected.begin(), expected.end());
    REQUIRE(static_cast<std::size_t>(r.eigenvalues.size()) == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(std::abs(r.eigenvalues(static_cast<Eigen::Index>(i)) - expected[i]) <= 1e-10);
}

TEST_CASE("dense operator size limit and argument validation", "[dirac]") {
    const auto big = Lattice::cube(2, 0.0, 1.0, 64, Boundary::periodic);
    const auto d = DiracOperator::flat(build_gamma(2), big);
    CHECK_THROWS_AS(d.dense(), std::length_error);

    const auto lat = Lattice::cube(2, 0.0, 1.0, 4, Boundary::periodic);
    CHECK_THROWS_AS(DiracOperator::flat(build_gamma(3), lat), std::invalid_argument);
    CHECK_THROWS_AS(DiracOperator(build_gamma(2), lat, ScalarField::constant(lat, -1.0)), std::invalid_argument);
    const auto ux = ScalarField::sample(lat, [](std::span<const double> x) { return cplx(1.0 + x[1]); });
    CHECK_THROWS_AS(DiracOperator(build_gamma(2), lat, ux), std::invalid_argument);
    CHECK_THROWS_AS(d.apply(SpinorField::zero(lat, 2)), std::invalid_argument);
}

TEST_CASE("flat Dirac operator satisfies D^dagger = -J D J", "[dirac]") {
    const auto lat = Lattice::cube(2, 0.0, 1.0, 6, Boundary::periodic);
    const auto d = DiracOperator::flat(build_gamma(2), lat);
    const Matrix dm = d.dense();
    // gamma^0 is anti-Hermitian, so D is Krein-self-adjoint but not Hermitian.
    CHECK(hermiticity_residual(dm) > 1e-3);
    const Matrix j = fundamental_symmetry(d.rep());
    const Matrix jbig = kron(Matrix::Identity(36, 36), j);
    CHECK((dm.adjoint() + jbig * dm * jbig).norm() <= 1e-12);
}
