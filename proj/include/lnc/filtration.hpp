#pragma once

// Filtered algebra generated by the time element T: an element of degree n is
// a = (1+T^2)^{n/2} a0 with a0 bounded, so a lies in A~_{-n} (T itself has degree 1 and
// lies in A~_{-1}). Weighted norms, the scale of weighted inner products, state extension,
// and the finite toy algebra C^K (x) M_2 used for the noncommutative state checks.

#include "lnc/lattice.hpp"
#include "lnc/linalg.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace lnc {

/// (1+t^2)^{p/2}, the basic weight.
inline double time_weight(double t, double p) { return std::pow(1.0 + t * t, 0.5 * p); }

class FilteredElement {
public:
    FilteredElement(int degree, PointFunction bounded, std::string label = {})
        : degree_(degree), bounded_(std::move(bounded)), label_(std::move(label)) {
        if (!bounded_) throw std::invalid_argument("FilteredElement: empty bounded part");
    }

    /// Bounded part given as samples on a lattice; evaluation off the lattice sites is an error.
    static FilteredElement from_field(int degree, const ScalarField& a0, std::string label = {}) {
        auto shared = std::make_shared<ScalarField>(a0);
        return {degree,
                [shared](std::span<const double> x) {
                    const auto s = shared->lattice().site_at(x);
                    if (!s) throw std::out_of_range("FilteredElement: point is not a lattice site");
                    return (*shared)[*s];
                },
                std::move(label)};
    }

    /// The time element T = (1+T^2)^{1/2} * t(1+t^2)^{-1/2}.
    static FilteredElement time() {
        return {1, [](std::span<const double> x) { return cplx(x[0] / std::sqrt(1.0 + x[0] * x[0])); }, "T"};
    }

    static FilteredElement unit() {
        return {0, [](std::span<const double>) { return cplx(1.0); }, "1"};
    }

    [[nodiscard]] int degree() const { return degree_; }
    /// Index of the filtration space hosting the element: degree n lives in A~_{-n}.
    [[nodiscard]] int filtration_index() const { return -degree_; }
    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] const PointFunction& bounded() const { return bounded_; }

    /// Same element with its unfactored form f = (1+t^2)^{d/2} a0 attached. Pointwise values then come
    /// from f directly, so e.g. the element t evaluates to exactly t instead of (1+t^2)^{1/2} * t(1+t^2)^{-1/2}.
    [[nodiscard]] FilteredElement with_closed_form(PointFunction f) const {
        auto copy = *this;
        copy.closed_ = std::move(f);
        return copy;
    }
    [[nodiscard]] const std::optional<PointFunction>& closed_form() const { return closed_; }

    [[nodiscard]] cplx bounded_at(std::span<const double> x) const { return bounded_(x); }
    [[nodiscard]] cplx value_at(std::span<const double> x) const {
        if (closed_) return (*closed_)(x);
        return time_weight(x[0], degree_) * bounded_(x);
    }

    [[nodiscard]] ScalarField sample(const Lattice& lat) const {
        return ScalarField::sample(lat, [this](std::span<const double> x) { return value_at(x); });
    }
    [[nodiscard]] ScalarField sample_bounded(const Lattice& lat) const { return ScalarField::sample(lat, bounded_); }

    /// Same element written at degree + 1: a0' = (1+t^2)^{-1/2} a0 (A~_n is contained in A~_{n-1}).
    [[nodiscard]] FilteredElement lifted() const {
        auto b = bounded_;
        FilteredElement out{degree_ + 1, [b](std::span<const double> x) { return time_weight(x[0], -1.0) * b(x); }, label_};
        out.closed_ = closed_;
        return out;
    }

private:
    int degree_;
    PointFunction bounded_;
    std::string label_;
    std::optional<PointFunction> closed_;
};

/// Degrees add exactly; bounded parts multiply.
inline FilteredElement multiply(const FilteredElement& a, const FilteredElement& b) {
    auto fa = a.bounded();
    auto fb = b.bounded();
    std::string label = a.label().empty() || b.label().empty() ? std::string{} : "(" + a.label() + ")*(" + b.label() + ")";
    return {a.degree() + b.degree(), [fa, fb](std::span<const double> x) { return fa(x) * fb(x); }, std::move(label)};
}

/// sup over lattice sites of |(1+t^2)^{m/2} a(x)|, the norm of A~_m.
inline double weighted_norm(const FilteredElement& a, int m, const Lattice& lat) {
    double best = 0.0;
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        const auto x = lat.coords(s);
        best = std::max(best, time_weight(x[0], m + a.degree()) * std::abs(a.bounded_at(x)));
    }
    return best;
}

/// <psi, (1+T^2)^n phi> by lattice quadrature.
inline cplx weighted_inner_product(const SpinorField& psi, const SpinorField& phi, int n) {
    const auto w = ScalarField::sample(psi.lattice(), [n](std::span<const double> x) { return cplx(time_weight(x[0], 2.0 * n)); });
    return inner_product(psi, phi, w);
}

struct GrowthFit {
    double slope = 0.0;      ///< fitted exponent p in |a| ~ (1+t^2)^{p/2}
    int declared = 0;
    bool suspicious = false;  ///< slope exceeds the declared degree by more than 1/2
    std::size_t samples = 0;
};

/// Least-squares slope of log|a| against (1/2) log(1+t^2) over the lattice sites where a != 0.
inline GrowthFit growth_fit(const FilteredElement& a, const Lattice& lat) {
    GrowthFit g;
    g.declared = a.degree();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        const auto x = lat.coords(s);
        const double v = std::abs(a.value_at(x));
        if (!(v > 1e-300) || !std::isfinite(v)) continue;
        const double lx = 0.5 * std::log1p(x[0] * x[0]);
        const double ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++g.samples;
    }
    const double n = static_cast<double>(g.samples);
    const double den = n * sxx - sx * sx;
    g.slope = g.samples > 1 && den > 1e-300 ? (n * sxy - sx * sy) / den : 0.0;
    g.suspicious = g.slope > g.declared + 0.5;
    return g;
}

struct GradingReport {
    double weighted_norm = 0.0;      ///< sup |(1+t^2)^{m/2} a|, m = filtration index
    double random_ratio_max = 0.0;   ///< best ratio over random test vectors, all n
    double concentrated_ratio = 0.0; ///< ratio for a vector supported at the maximizing site (n = 0)
    double relative_gap = 0.0;       ///< 1 - concentrated_ratio / weighted_norm
    double n_spread = 0.0;           ///< max - min of the concentrated ratio over n in {-2..2}
    bool passed = false;
};

inline nlohmann::json to_json(const GradingReport& r) {
    return {{"weighted_norm", r.weighted_norm},         {"random_ratio_max", r.random_ratio_max},
            {"concentrated_ratio", r.concentrated_ratio}, {"relative_gap", r.relative_gap},
            {"n_spread", r.n_spread},                     {"passed", r.passed}};
}

/// Operator norm of the multiplication operator a : H_n -> H_{n+m} (m = filtration index)
/// estimated by sup of sqrt(<a phi, a phi>_{n+m} / <phi, phi>_n), compared with the weighted norm.
inline GradingReport operator_norm_grading_check(const FilteredElement& a, const Lattice& lat, int trials,
                                                 std::uint64_t seed) {
    GradingReport r;
    const int m = a.filtration_index();
    r.weighted_norm = weighted_norm(a, m, lat);
    const auto av = a.sample(lat);

    std::size_t best_site = 0;
    double best = -1.0;
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        const double v = time_weight(lat.coords(s)[0], m) * std::abs(av[s]);
        if (v > best) {
            best = v;
            best_site = s;
        }
    }

    auto ratio = [&](const SpinorField& phi, int n) {
        const auto aphi = phi.scaled(av);
        const double num = weighted_inner_product(aphi, aphi, n + m).real();
        const double den = weighted_inner_product(phi, phi, n).real();
        return std::sqrt(num / den);
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int i = 0; i < trials; ++i) {
        Vector v(static_cast<Eigen::Index>(lat.sites()) * 2);
        for (auto& z : v) z = cplx(normal(rng), normal(rng));
        const SpinorField phi(lat, 2, v);
        for (int n = -2; n <= 2; ++n) r.random_ratio_max = std::max(r.random_ratio_max, ratio(phi, n));
    }

    auto conc = SpinorField::zero(lat, 2);
    conc.at(best_site) << cplx(0.6, 0.0), cplx(0.0, 0.8);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int n = -2; n <= 2; ++n) {
        const double q = ratio(conc, n);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        if (n == 0) r.concentrated_ratio = q;
    }
    r.n_spread = hi - lo;
    r.relative_gap = r.weighted_norm > 0.0 ? 1.0 - r.concentrated_ratio / r.weighted_norm : 0.0;
    const double slack = 1e-12 * std::max(1.0, r.weighted_norm);
    r.passed = r.random_ratio_max <= r.weighted_norm + slack && r.concentrated_ratio <= r.weighted_norm + slack &&
               r.relative_gap <= 0.05 && r.n_spread <= 1e-10;
    return r;
}

// ---------------------------------------------------------------------------------------------
// States

/// Evaluation state at a spacetime point; chi((1+T^2)^{-1/2}) = (1+t_p^2)^{-1/2}.
struct EvaluationState {
    std::vector<double> point;
};

/// chi((1+T^2)^{-1/2})^{-n} chi(a0). A state at infinite time (added by the unitization) has
/// chi((1+T^2)^{-1/2}) = 0 and is rejected.
inline cplx extend_state(const EvaluationState& chi, const FilteredElement& a) {
    if (chi.point.empty()) throw std::invalid_argument("extend_state: empty point");
    const double t = chi.point[0];
    const double w = std::isfinite(t) ? 1.0 / std::sqrt(1.0 + t * t) : 0.0;
    if (!(w > 0.0))
        throw std::domain_error("extend_state: chi((1+T^2)^{-1/2}) = 0; states from the unitization are ignored");
    // With a closed form attached, w^{-n} chi(a0) = f(x) is evaluated without the factorization round trip.
    if (a.closed_form()) return (*a.closed_form())(chi.point);
    return std::pow(w, -a.degree()) * a.bounded_at(chi.point);
}

/// Finite algebra C^K (x) M_2 with central time T = diag(t_k) (x) I.
struct ToyAlgebra {
    std::vector<double> t;
    [[nodiscard]] std::size_t size() const { return t.size(); }
};

/// Element of C^K (x) M_2: one 2x2 fiber per point.
struct ToyElement {
    std::vector<Matrix> fiber;

    static ToyElement identity(std::size_t k) { return {std::vector<Matrix>(k, Matrix::Identity(2, 2))}; }
    static ToyElement central(const std::vector<cplx>& f) {
        ToyElement e;
        for (auto v : f) e.fiber.push_back(v * Matrix::Identity(2, 2));
        return e;
    }
    [[nodiscard]] ToyElement operator*(const ToyElement& o) const {
        if (o.fiber.size() != fiber.size()) throw std::invalid_argument("ToyElement: size mismatch");
        ToyElement e;
        for (std::size_t k = 0; k < fiber.size(); ++k) e.fiber.push_back(fiber[k] * o.fiber[k]);
        return e;
    }
};

/// Pure state (k, psi): chi(A) = psi^* A_k psi with |psi| = 1.
struct ToyState {
    std::size_t k = 0;
    Vector psi;

    ToyState(std::size_t site, Vector v) : k(site), psi(std::move(v)) {
        if (psi.size() != 2) throw std::invalid_argument("ToyState: psi must be a 2-vector");
        if (std::abs(psi.norm() - 1.0) > 1e-12) throw std::invalid_argument("ToyState: psi must be a unit vector");
    }
    [[nodiscard]] cplx operator()(const ToyElement& a) const {
        if (k >= a.fiber.size()) throw std::out_of_range("ToyState: site outside the algebra");
        return psi.dot(a.fiber[k] * psi);  // Eigen's dot conjugates the left factor
    }
};

struct ToyFiltered {
    int degree = 0;
    ToyElement bounded;
};

/// Value of (1+T^2)^{n/2} a0 as a toy element.
inline ToyElement toy_value(const ToyAlgebra& alg, const ToyFiltered& a) {
    ToyElement e = a.bounded;
    for (std::size_t k = 0; k < alg.size(); ++k) e.fiber[k] *= time_weight(alg.t[k], a.degree);
    return e;
}

inline cplx extend_state(const ToyAlgebra& alg, const ToyState& chi, const ToyFiltered& a) {
    if (chi.k >= alg.size()) throw std::out_of_range("extend_state: site outside the toy algebra");
    const double t = alg.t[chi.k];
    const double w = std::isfinite(t) ? 1.0 / std::sqrt(1.0 + t * t) : 0.0;
    if (!(w > 0.0))
        throw std::domain_error("extend_state: chi((1+T^2)^{-1/2}) = 0; states from the unitization are ignored");
    return std::pow(w, -a.degree) * chi(a.bounded);
}

/// Compares two decompositions of the same element across evaluation states at the lattice sites.
/// Throws if the decompositions differ as functions.
inline double well_definedness_check(const FilteredElement& a, const FilteredElement& b, const Lattice& lat) {
    const auto va = a.sample(lat);
    const auto vb = b.sample(lat);
    for (std::size_t s = 0; s < lat.sites(); ++s)
        if (std::abs(va[s] - vb[s]) > 1e-12 * std::max(1.0, std::abs(va[s])))
            throw std::invalid_argument("well_definedness_check: decompositions differ at site " + std::to_string(s));
    double residual = 0.0;
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        const EvaluationState chi{lat.coords(s)};
        residual = std::max(residual, std::abs(extend_state(chi, a) - extend_state(chi, b)));
    }
    return residual;
}

inline double well_definedness_check(const ToyAlgebra& alg, const ToyFiltered& a, const ToyFiltered& b,
                                     const std::vector<ToyState>& states) {
    const auto va = toy_value(alg, a);
    const auto vb = toy_value(alg, b);
    for (std::size_t k = 0; k < alg.size(); ++k)
        if ((va.fiber[k] - vb.fiber[k]).norm() > 1e-12 * std::max(1.0, va.fiber[k].norm()))
            throw std::invalid_argument("well_definedness_check: decompositions differ at point " + std::to_string(k));
    double residual = 0.0;
    for (const auto& chi : states)
        residual = std::max(residual, std::abs(extend_state(alg, chi, a) - extend_state(alg, chi, b)));
    return residual;
}

struct MultiplicativityReport {
    int trials = 0;
    double central_residual = 0.0;      ///< max |chi(ab) - chi(a)chi(b)| with a central
    double identity_residual = 0.0;     ///< a = b = 1
    double noncentral_residual = 0.0;   ///< largest violation found with a non-central
    bool passed = false;                ///< central residual <= 1e-13, identity to rounding, counterexample found
};

inline nlohmann::json to_json(const MultiplicativityReport& r) {
    return {{"trials", r.trials},
            {"central_residual", r.central_residual},
            {"identity_residual", r.identity_residual},
            {"noncentral_residual", r.noncentral_residual},
            {"passed", r.passed}};
}

inline ToyState random_toy_state(std::size_t k_max, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<std::size_t> pick(0, k_max - 1);
    Vector psi(2);
    psi << cplx(normal(rng), normal(rng)), cplx(normal(rng), normal(rng));
    const auto k = pick(rng);
    return {k, psi / psi.norm()};
}

inline MultiplicativityReport central_multiplicativity_check(const ToyAlgebra& alg, int trials, std::uint64_t seed) {
    MultiplicativityReport r;
    r.trials = trials;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto random_fiber = [&]() {
        Matrix m(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m(i, j) = cplx(normal(rng), normal(rng));
        return m;
    };
    const std::size_t k = alg.size();
    for (int i = 0; i < trials; ++i) {
        std::vector<cplx> f(k);
        for (auto& v : f) v = cplx(normal(rng), normal(rng));
        const auto a = ToyElement::central(f);
        ToyElement b;
        for (std::size_t j = 0; j < k; ++j) b.fiber.push_back(random_fiber());
        const auto chi = random_toy_state(k, rng);
        const cplx ab = chi(a * b);
        r.central_residual = std::max(r.central_residual, std::abs(ab - chi(a) * chi(b)));

        // Non-central Hermitian a with b = a: chi(a^2) - chi(a)^2 is the variance of a in psi.
        ToyElement h;
        for (std::size_t j = 0; j < k; ++j) {
            const Matrix m = random_fiber();
            h.fiber.push_back(0.5 * (m + m.adjoint()));
        }
        r.noncentral_residual = std::max(r.noncentral_residual, std::abs(chi(h * h) - chi(h) * chi(h)));
    }
    const auto one = ToyElement::identity(k);
    const auto chi = random_toy_state(k, rng);
    r.identity_residual = std::abs(chi(one * one) - chi(one) * chi(one));
    r.passed = r.central_residual <= 1e-13 && r.identity_residual <= 1e-15 && r.noncentral_residual > 1e-3;
    return r;
}

}  // namespace lnc
