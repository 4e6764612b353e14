#pragma once

// Steepness (causal) constraint on test functions of the distance formula:
// matrix form  [D,T]([D,f] + i gamma) >= 0  and scalar form  g(grad f, grad f) <= -1
// with past-directed gradient (d_t f > 0 in signature (-,+,...)).

#include "lnc/dirac.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace lnc {

inline constexpr double kSteepTol = 1e-9;

enum class SteepnessMode { matrix, scalar };

inline std::string to_string(SteepnessMode m) { return m == SteepnessMode::matrix ? "matrix" : "scalar"; }

/// Per-site verdicts and margins. A margin >= -tol means the site is steep; larger is safer.
/// matrix mode: minimum eigenvalue of the Hermitized constraint matrix.
/// scalar mode: -(g(grad f, grad f) + 1), with the orientation test reported separately.
struct SteepnessReport {
    SteepnessMode mode = SteepnessMode::matrix;
    std::vector<bool> verdicts;
    std::vector<double> margins;
    std::vector<bool> future_oriented;  ///< scalar mode: d_t f > 0 at the site
    bool global = false;
    std::size_t sites_failed = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::size_t worst_site = 0;
    double hermiticity_residual = 0.0;  ///< matrix mode: max_x ||M - M^dagger||_F / 2
    std::vector<double> h;              ///< lattice spacings, so callers can judge stencil error
    double tol = kSteepTol;

    void finalize() {
        sites_failed = 0;
        worst_margin = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < verdicts.size(); ++s) {
            if (!verdicts[s]) ++sites_failed;
            if (margins[s] < worst_margin) {
                worst_margin = margins[s];
                worst_site = s;
            }
        }
        global = sites_failed == 0;
    }
};

/// {global, sites_failed, worst_margin, worst_site, h, tol, mode[, site_detail]}.
inline nlohmann::json to_json(const SteepnessReport& r, bool site_detail = false) {
    nlohmann::json j;
    j["mode"] = to_string(r.mode);
    j["global"] = r.global;
    j["sites_failed"] = r.sites_failed;
    j["worst_margin"] = r.worst_margin;
    j["worst_site"] = r.worst_site;
    j["h"] = r.h;
    j["tol"] = r.tol;
    if (r.mode == SteepnessMode::matrix) j["hermiticity_residual"] = r.hermiticity_residual;
    if (site_detail) {
        auto arr = nlohmann::json::array();
        for (std::size_t s = 0; s < r.verdicts.size(); ++s) arr.push_back({{"site", s}, {"steep", bool(r.verdicts[s])}, {"margin", r.margins[s]}});
        j["site_detail"] = arr;
    }
    return j;
}

namespace detail {

inline void require_real(const ScalarField& f, const char* who) {
    if (!f.is_real(1e-12))
        throw std::invalid_argument(std::string(who) + ": test function must be real-valued (max |Im f| = " +
                                    std::to_string(f.max_imag()) + ")");
}

inline std::vector<double> spacings(const Lattice& lat) {
    std::vector<double> h;
    for (int k = 0; k < lat.dim(); ++k) h.push_back(lat.spacing(k));
    return h;
}

}  // namespace detail

/// Pointwise matrix constraint: Hermitian part of C([D,f] + i gamma) with C = -i e^0 gamma^0 and
/// [D,f] = -i sum_mu e^mu gamma^mu d_mu f. Returns (min eigenvalue, anti-Hermitian residual).
inline std::pair<double, double> matrix_margin(const GammaRep& rep, const Matrix& gamma, std::span<const double> grad,
                                               double u) {
    const double e0 = 1.0 / std::sqrt(u);
    const Matrix c = (-I_unit * e0) * rep[0];
    Matrix df = Matrix::Zero(rep.size(), rep.size());
    for (int mu = 0; mu < rep.dimension(); ++mu)
        df += (-I_unit * (mu == 0 ? e0 : 1.0) * grad[static_cast<std::size_t>(mu)]) * rep[mu];
    const Matrix m = c * (df + I_unit * gamma);
    const double residual = 0.5 * (m - m.adjoint()).norm();
    return {hermitian_eigenvalues(m)(0), residual};
}

/// Pointwise scalar constraint. g = -a^2/u + |b|^2 evaluated as -(e0 a - |b|)(e0 a + |b|), which keeps
/// relative accuracy when the gradient is nearly null. Returns (margin = -(g + 1), d_t f > 0).
inline std::pair<double, bool> scalar_margin(std::span<const double> grad, double u) {
    const double e0a = grad[0] / std::sqrt(u);
    double b2 = 0.0;
    for (std::size_t i = 1; i < grad.size(); ++i) b2 += grad[i] * grad[i];
    const double b = std::sqrt(b2);
    const double g = -(e0a - b) * (e0a + b);
    return {-(g + 1.0), grad[0] > 0.0};
}

inline SteepnessReport is_steep_matrix(const ScalarField& f, const DiracOperator& d, const Matrix& gamma,
                                       double tol = kSteepTol) {
    if (d.rep().dimension() % 2 != 0)
        throw std::domain_error("is_steep_matrix: chirality needs even dimension, got n = " +
                                std::to_string(d.rep().dimension()));
    detail::require_real(f, "is_steep_matrix");
    if (!(f.lattice() == d.lattice())) throw std::invalid_argument("is_steep_matrix: lattice mismatch");
    if (gamma.rows() != d.rep().size() || gamma.cols() != d.rep().size())
        throw std::invalid_argument("is_steep_matrix: chirality has the wrong size");
    const auto& lat = d.lattice();
    std::vector<ScalarField> grads;
    for (int mu = 0; mu < lat.dim(); ++mu) grads.push_back(gradient(f, mu));

    SteepnessReport r;
    r.mode = SteepnessMode::matrix;
    r.tol = tol;
    r.h = detail::spacings(lat);
    r.verdicts.resize(lat.sites());
    r.margins.resize(lat.sites());
    std::vector<double> grad(static_cast<std::size_t>(lat.dim()));
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        for (int mu = 0; mu < lat.dim(); ++mu) grad[static_cast<std::size_t>(mu)] = grads[static_cast<std::size_t>(mu)][s].real();
        const auto [margin, residual] = matrix_margin(d.rep(), gamma, grad, d.conformal_u()[s].real());
        r.margins[s] = margin;
        r.verdicts[s] = margin >= -tol;
        r.hermiticity_residual = std::max(r.hermiticity_residual, residual);
    }
    r.finalize();
    return r;
}

inline SteepnessReport is_steep_scalar(const ScalarField& f, const ScalarField& u, double tol = kSteepTol) {
    detail::require_real(f, "is_steep_scalar");
    f.require_same(u);
    const auto& lat = f.lattice();
    std::vector<ScalarField> grads;
    for (int mu = 0; mu < lat.dim(); ++mu) grads.push_back(gradient(f, mu));

    SteepnessReport r;
    r.mode = SteepnessMode::scalar;
    r.tol = tol;
    r.h = detail::spacings(lat);
    r.verdicts.resize(lat.sites());
    r.margins.resize(lat.sites());
    r.future_oriented.resize(lat.sites());
    std::vector<double> grad(static_cast<std::size_t>(lat.dim()));
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        for (int mu = 0; mu < lat.dim(); ++mu) grad[static_cast<std::size_t>(mu)] = grads[static_cast<std::size_t>(mu)][s].real();
        const auto [margin, oriented] = scalar_margin(grad, u[s].real());
        r.margins[s] = margin;
        r.future_oriented[s] = oriented;
        r.verdicts[s] = oriented && margin >= -tol;
    }
    r.finalize();
    return r;
}

struct EquivalenceDraw {
    std::vector<double> gradient;  ///< (a, b_1, ..., b_{n-1})
    bool matrix_steep = false;
    bool scalar_steep = false;
    double matrix_margin = 0.0;
    double scalar_margin = 0.0;
};

struct EquivalenceReport {
    int dimension = 0;
    int samples = 0;
    int agreements = 0;
    int steep_count = 0;
    std::vector<EquivalenceDraw> disagreements;
    [[nodiscard]] bool all_agree() const { return agreements == samples; }
};

inline nlohmann::json to_json(const EquivalenceReport& r) {
    auto dis = nlohmann::json::array();
    for (const auto& d : r.disagreements)
        dis.push_back({{"gradient", d.gradient},
                       {"matrix_steep", d.matrix_steep},
                       {"scalar_steep", d.scalar_steep},
                       {"matrix_margin", d.matrix_margin},
                       {"scalar_margin", d.scalar_margin}});
    return {{"dimension", r.dimension},
            {"samples", r.samples},
            {"agreements", r.agreements},
            {"steep_count", r.steep_count},
            {"all_agree", r.all_agree()},
            {"disagreements", dis}};
}

/// Draws random linear f = a t + b.x + c on a small clamped lattice (where the lattice gradient of a
/// linear function is exact) and compares both criteria. Half the draws are placed within a relative
/// 1e-3 of the null cone so the comparison exercises the boundary, not just the easy interior.
inline EquivalenceReport equivalence_scan(int n, int samples, std::uint64_t seed, double u = 1.0,
                                          double tol = kSteepTol) {
    if (n % 2 != 0) throw std::domain_error("equivalence_scan: even dimension required for the chirality");
    const auto rep = build_gamma(n);
    const Matrix gamma = chirality(rep);
    const auto lat = Lattice::cube(n, -1.0, 1.0, 4, Boundary::clamped);
    const auto uf = ScalarField::constant(lat, u);
    const DiracOperator d(rep, lat, uf);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    EquivalenceReport report;
    report.dimension = n;
    report.samples = samples;
    for (int i = 0; i < samples; ++i) {
        std::vector<double> grad(static_cast<std::size_t>(n));
        double b2 = 0.0;
        for (int k = 1; k < n; ++k) {
            grad[static_cast<std::size_t>(k)] = 1.5 * uni(rng);
            b2 += grad[static_cast<std::size_t>(k)] * grad[static_cast<std::size_t>(k)];
        }
        if (i % 2 == 0) {
            grad[0] = 2.5 * uni(rng);
        } else {
            // a = sqrt(u) sqrt(1+|b|^2) (1 + delta): steep iff delta >= 0; sign flips give past-directed draws.
            const double delta = 1e-3 * uni(rng);
            const double sign = uni(rng) < -0.8 ? -1.0 : 1.0;
            grad[0] = sign * std::sqrt(u) * std::sqrt(1.0 + b2) * (1.0 + delta);
        }
        const double c = uni(rng);
        const auto f = ScalarField::sample(lat, [&](std::span<const double> x) {
            double v = c;
            for (int k = 0; k < n; ++k) v += grad[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
            return cplx(v);
        });
        const auto rm = is_steep_matrix(f, d, gamma, tol);
        const auto rs = is_steep_scalar(f, uf, tol);
        if (rm.global == rs.global) {
            ++report.agreements;
        } else {
            report.disagreements.push_back({grad, rm.global, rs.global, rm.worst_margin, rs.worst_margin});
        }
        if (rm.global) ++report.steep_count;
    }
    return report;
}

}  // namespace lnc
