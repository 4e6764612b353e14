#include "lnc/filtration.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace lnc;

namespace {

const Lattice& line() {
    static const Lattice lat({{-4.0, 4.0, 33}}, Boundary::clamped);
    return lat;
}

FilteredElement gauss_deg(int n) {
    return {n, [](std::span<const double> x) { return cplx(std::exp(-x[0] * x[0])); }, "exp(-t^2)"};
}

std::vector<double> pt(double t) { return {t}; }

}  // namespace

TEST_CASE("weighted norms", "[filtration]") {
    // T in A~_{-1}: sup |t| / sqrt(1+t^2) < 1
    const double nt = weighted_norm(FilteredElement::time(), -1, line());
    CHECK(nt == Catch::Approx(4.0 / std::sqrt(17.0)));
    CHECK(nt < 1.0);
    for (int m : {0, -1, -3}) CHECK(weighted_norm(FilteredElement::unit(), m, line()) == Catch::Approx(1.0));
    CHECK(weighted_norm(gauss_deg(2), -2, line()) == Catch::Approx(1.0));
}

TEST_CASE("degree bookkeeping", "[filtration]") {
    const FilteredElement up(1, [](std::span<const double>) { return cplx(1.0); });
    const FilteredElement down(-1, [](std::span<const double>) { return cplx(1.0); });
    CHECK(multiply(up, down).degree() == 0);
    const auto tt = multiply(FilteredElement::time(), FilteredElement::time());
    CHECK(tt.degree() == 2);
    CHECK(tt.filtration_index() == -2);
    for (double t : {-3.0, 0.0, 0.5, 2.0}) CHECK(std::abs(tt.value_at(pt(t)) - t * t) <= 1e-12);
    const auto a = gauss_deg(3);
    const auto a1 = multiply(a, FilteredElement::unit());
    CHECK(a1.degree() == 3);
    for (double t : {-1.0, 0.25}) CHECK(a1.value_at(pt(t)) == a.value_at(pt(t)));
}

TEST_CASE("descending filtration: lifting preserves the element", "[filtration]") {
    const auto a = gauss_deg(1);
    const auto l = a.lifted();
    CHECK(l.degree() == 2);
    for (std::size_t s = 0; s < line().sites(); ++s) {
        const auto x = line().coords(s);
        CHECK(std::abs(l.value_at(x) - a.value_at(x)) <= 1e-14);
    }
    CHECK(std::isfinite(weighted_norm(a, a.filtration_index() - 1, line())));
}

TEST_CASE("submultiplicativity with grading", "[filtration]") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double p = uni(rng), q = uni(rng);
        const int da = static_cast<int>(std::floor(3 * uni(rng))), db = static_cast<int>(std::floor(3 * uni(rng)));
        const FilteredElement a(da, [p](std::span<const double> x) { return cplx(std::cos(p * x[0]), 0.3); });
        const FilteredElement b(db, [q](std::span<const double> x) { return cplx(std::tanh(q + x[0])); });
        const double lhs = weighted_norm(multiply(a, b), -da - db, line());
        const double rhs = weighted_norm(a, -da, line()) * weighted_norm(b, -db, line());
        CHECK(lhs <= rhs * (1 + 1e-12));
    }
}

TEST_CASE("weighted inner product", "[filtration]") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    const Lattice lat({{-2.0, 2.0, 8}, {-1.0, 1.0, 4}}, Boundary::periodic);
    Vector v(static_cast<Eigen::Index>(lat.sites()) * 2);
    for (auto& z : v) z = cplx(g(rng), g(rng));
    const SpinorField phi(lat, 2, v);
    CHECK(std::abs(weighted_inner_product(phi, phi, 0) - inner_product(phi, phi)) <= 1e-12);
    for (int n = -2; n <= 2; ++n) CHECK(weighted_inner_product(phi, phi, n).real() > 0.0);

    auto single = SpinorField::zero(lat, 2);
    const std::vector<int> idx{6, 1};  // t = -2 + 6 * 0.5 = 1
    single.at(lat.site(idx)) << cplx(1.0, -0.5), cplx(0.25, 0.0);
    CHECK(std::abs(weighted_inner_product(single, single, 1) - 2.0 * weighted_inner_product(single, single, 0)) <= 1e-14);
}

TEST_CASE("operator norm grading check", "[filtration]") {
    SECTION("a = 1") {
        const auto r = operator_norm_grading_check(FilteredElement::unit(), line(), 20, 1);
        CHECK(r.passed);
        CHECK(r.weighted_norm == Catch::Approx(1.0));
        CHECK(r.concentrated_ratio == Catch::Approx(1.0));
    }
    SECTION("a = (1+T^2)^{1/2} exp(-t^2), degree 1") {
        const auto r = operator_norm_grading_check(gauss_deg(1), line(), 20, 2);
        CHECK(r.passed);
        CHECK(r.relative_gap <= 0.05);
        CHECK(r.random_ratio_max <= r.weighted_norm);
    }
    SECTION("a = T, independence of n") {
        const auto r = operator_norm_grading_check(FilteredElement::time(), line(), 20, 3);
        CHECK(r.passed);
        CHECK(r.n_spread <= 1e-10);
    }
}

TEST_CASE("growth fit flags misdeclared degrees", "[filtration]") {
    const Lattice wide({{-50.0, 50.0, 101}}, Boundary::clamped);
    const FilteredElement honest(2, [](std::span<const double>) { return cplx(1.0); });
    const auto g = growth_fit(honest, wide);
    CHECK(g.slope == Catch::Approx(2.0).margin(1e-9));
    CHECK_FALSE(g.suspicious);
    const FilteredElement liar(0, [](std::span<const double> x) { return cplx(x[0] * x[0] * x[0]); });
    CHECK(growth_fit(liar, wide).suspicious);
}

TEST_CASE("state extension at evaluation points", "[filtration]") {
    const FilteredElement root(1, [](std::span<const double>) { return cplx(1.0); });
    CHECK(extend_state(EvaluationState{pt(0.0)}, root) == cplx(1.0));
    CHECK(std::abs(extend_state(EvaluationState{pt(1.0)}, FilteredElement::time()) - 1.0) <= 1e-15);
    for (std::size_t s = 0; s < line().sites(); ++s) {
        const auto x = line().coords(s);
        for (const auto& a : {gauss_deg(2), FilteredElement::time(), root})
            CHECK(std::abs(extend_state(EvaluationState{x}, a) - a.value_at(x)) <= 1e-12 * std::max(1.0, std::abs(a.value_at(x))));
    }
    // linearity in a at fixed degree
    const FilteredElement sum(2, [](std::span<const double> x) { return cplx(std::exp(-x[0] * x[0]) + 2.0 * std::sin(x[0])); });
    const FilteredElement sinp(2, [](std::span<const double> x) { return cplx(std::sin(x[0])); });
    const EvaluationState chi{pt(0.7)};
    CHECK(std::abs(extend_state(chi, sum) - extend_state(chi, gauss_deg(2)) - 2.0 * extend_state(chi, sinp)) <= 1e-13);

    CHECK_THROWS_AS(extend_state(EvaluationState{pt(std::numeric_limits<double>::infinity())}, root), std::domain_error);
}

TEST_CASE("well-definedness of the extension", "[filtration]") {
    const FilteredElement b(0, [](std::span<const double> x) { return cplx((1 + x[0] * x[0]) * std::exp(-x[0] * x[0])); });
    CHECK(well_definedness_check(gauss_deg(2), b, line()) <= 1e-12);
    CHECK(well_definedness_check(gauss_deg(2), gauss_deg(2), line()) == 0.0);
    CHECK_THROWS_AS(well_definedness_check(gauss_deg(2), gauss_deg(1), line()), std::invalid_argument);

    const ToyAlgebra alg{{-2.0, -0.5, 0.0, 1.0, 3.0}};
    std::mt19937_64 rng(1);
    std::vector<ToyState> states;
    for (int i = 0; i < 10; ++i) states.push_back(random_toy_state(alg.size(), rng));
    ToyFiltered a{2, ToyElement::identity(alg.size())};
    ToyFiltered a2{0, ToyElement::identity(alg.size())};
    for (std::size_t k = 0; k < alg.size(); ++k) {
        Matrix m(2, 2);
        m << 1.0, cplx(0, 2), -0.5, 3.0;
        a.bounded.fiber[k] = m * (0.5 + static_cast<double>(k));
        a2.bounded.fiber[k] = a.bounded.fiber[k] * (1 + alg.t[k] * alg.t[k]);
    }
    CHECK(well_definedness_check(alg, a, a2, states) <= 1e-12);
}

TEST_CASE("toy state extension", "[filtration]") {
    const ToyAlgebra alg{{0.0, 2.0}};
    Matrix b(2, 2);
    b << 2.0, cplx(1, 1), cplx(1, -1), -1.0;
    ToyFiltered a{1, {{Matrix::Identity(2, 2), b}}};
    Vector psi(2);
    psi << cplx(0.6, 0.0), cplx(0.0, 0.8);
    const ToyState chi(1, psi);
    const cplx direct = std::sqrt(5.0) * psi.dot(b * psi);
    CHECK(std::abs(extend_state(alg, chi, a) - direct) <= 1e-14);
    CHECK_THROWS_AS(ToyState(0, Vector::Ones(2)), std::invalid_argument);
    const ToyAlgebra inf{{std::numeric_limits<double>::infinity()}};
    CHECK_THROWS_AS(extend_state(inf, ToyState(0, psi), ToyFiltered{0, ToyElement::identity(1)}), std::domain_error);
}

TEST_CASE("central multiplicativity", "[filtration]") {
    const ToyAlgebra alg{{-3, -2, -1, 0, 1, 2, 3, 4}};
    const auto r = central_multiplicativity_check(alg, 500, 17);
    CHECK(r.passed);
    CHECK(r.central_residual <= 1e-13);
    CHECK(r.identity_residual <= 1e-15);
    CHECK(r.noncentral_residual > 1e-3);

    // explicit counterexample: a = sigma_x, psi = e_0, chi(a^2) = 1 but chi(a)^2 = 0
    Matrix sx(2, 2);
    sx << 0, 1, 1, 0;
    const ToyElement a{{sx}};
    Vector e0(2);
    e0 << 1, 0;
    const ToyState chi(0, e0);
    CHECK(chi(a * a) == cplx(1.0));
    CHECK(chi(a) == cplx(0.0));
}

TEST_CASE("closed forms give exact point values", "[filtration]") {
    const auto t = FilteredElement::time().with_closed_form([](std::span<const double> x) { return cplx(x[0]); });
    for (double v : {-2.7, 0.1, 0.3, 1.9}) {
        CHECK(t.value_at(pt(v)) == cplx(v));
        CHECK(extend_state(EvaluationState{pt(v)}, t) == cplx(v));
        CHECK(t.lifted().value_at(pt(v)) == cplx(v));
        CHECK(std::abs(extend_state(EvaluationState{pt(v)}, FilteredElement::time()) - v) <= 1e-15 * std::max(1.0, std::abs(v)));
    }
    // products do not inherit a closed form
    CHECK_FALSE(multiply(t, t).closed_form());
}
