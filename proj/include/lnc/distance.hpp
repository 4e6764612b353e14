#pragma once

// Lorentzian distance between events: exact Minkowski oracle, the boosted-time family
// f_v = gamma_v (t - v.x) (exactly steep, margin 0), a variational upper bound over certified
// steep candidates, and the conformal-time integral for purely temporal separations.

#include "lnc/filtration.hpp"
#include "lnc/format.hpp"
#include "lnc/steepness.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lnc {

struct EventPair {
    std::vector<double> p, q;

    EventPair(std::vector<double> p_, std::vector<double> q_) : p(std::move(p_)), q(std::move(q_)) {
        if (p.size() != q.size()) throw std::invalid_argument("EventPair: p and q have different dimensions");
        if (p.size() < 2) throw std::invalid_argument("EventPair: need at least one space dimension");
    }
    [[nodiscard]] std::size_t dim() const { return p.size(); }
    [[nodiscard]] double dt() const { return q[0] - p[0]; }
    [[nodiscard]] std::vector<double> dx() const {
        std::vector<double> d(p.size() - 1);
        for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = q[i] - p[i];
        return d;
    }
    [[nodiscard]] double spatial_norm() const {
        double r2 = 0.0;
        for (double v : dx()) r2 += v * v;
        return std::sqrt(r2);
    }
};

enum class DistanceMode { oracle, boosted, variational, conformal };

inline std::string to_string(DistanceMode m) {
    switch (m) {
        case DistanceMode::oracle: return "oracle";
        case DistanceMode::boosted: return "boosted";
        case DistanceMode::variational: return "variational";
        case DistanceMode::conformal: return "conformal";
    }
    return "?";
}

struct DistanceResult {
    double value = 0.0;
    DistanceMode mode = DistanceMode::oracle;
    std::optional<std::vector<double>> velocity;  ///< boosted: minimizing boost velocity
    std::optional<std::string> candidate;         ///< variational: achieving candidate label
    std::optional<SteepnessReport> certificate;   ///< steepness report of the achieving function
    std::size_t accepted = 0, rejected = 0;       ///< variational: candidate bookkeeping
    std::vector<std::string> rejections;          ///< variational: reason per rejected candidate
    double error_estimate = 0.0;                  ///< conformal: quadrature error estimate
};

inline nlohmann::json to_json(const DistanceResult& r) {
    nlohmann::json j{{"value", r.value}, {"mode", to_string(r.mode)}};
    if (r.velocity) j["velocity"] = *r.velocity;
    if (r.candidate) j["candidate"] = *r.candidate;
    if (r.certificate) j["certificate"] = to_json(*r.certificate);
    if (r.mode == DistanceMode::variational) {
        j["accepted"] = r.accepted;
        j["rejected"] = r.rejected;
        j["rejections"] = r.rejections;
    }
    if (r.mode == DistanceMode::conformal) j["error_estimate"] = r.error_estimate;
    return j;
}

/// sqrt(dt^2 - |dx|^2) for future-directed causal pairs, else 0.
inline DistanceResult minkowski_oracle(const EventPair& pair) {
    const double dt = pair.dt();
    const double r = pair.spatial_norm();
    DistanceResult res;
    res.mode = DistanceMode::oracle;
    res.value = dt >= 0.0 && dt >= r ? std::sqrt((dt - r) * (dt + r)) : 0.0;
    return res;
}

inline constexpr double kBoostCap = 1.0 - 1e-12;
inline constexpr double kGoldenTol = 1e-10;

/// Golden-section search for the minimum of a unimodal function on [a, b].
inline double golden_section_minimize(const std::function<double(double)>& f, double a, double b,
                                      double tol = kGoldenTol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Steepness certificate of f_v with speed s, computed pointwise (the gradient is constant).
/// g(grad f_v, grad f_v) = -gamma^2 (1 - s)(1 + s) = -1, evaluated with (1 - s) formed directly so the
/// certificate keeps full relative accuracy up to the boost cap.
inline SteepnessReport boosted_certificate(double s, double tol = kSteepTol) {
    const double one_minus = 1.0 - s, one_plus = 1.0 + s;
    const double gamma2 = 1.0 / (one_minus * one_plus);
    const double g = -gamma2 * one_minus * one_plus;
    SteepnessReport r;
    r.mode = SteepnessMode::scalar;
    r.tol = tol;
    r.margins = {-(g + 1.0)};
    r.future_oriented = {true};
    r.verdicts = {r.margins[0] >= -tol};
    r.finalize();
    return r;
}

/// min over |v| < 1 of max{0, gamma_v (dt - v.dx)}; the optimum lies along dx, so this is a 1-D
/// golden-section search over the speed s in [0, 1 - 1e-12].
inline DistanceResult boosted_family_distance(const EventPair& pair) {
    const double dt = pair.dt();
    const double r = pair.spatial_norm();
    const auto dx = pair.dx();
    auto objective = [&](double s) { return (dt - s * r) / std::sqrt((1.0 - s) * (1.0 + s)); };

    double s_best = 0.0;
    if (r > 0.0) {
        s_best = golden_section_minimize(objective, 0.0, kBoostCap);
        for (double s : {0.0, kBoostCap})
            if (objective(s) < objective(s_best)) s_best = s;
    }
    DistanceResult res;
    res.mode = DistanceMode::boosted;
    res.value = std::max(0.0, objective(s_best));
    std::vector<double> v(dx.size(), 0.0);
    if (r > 0.0)
        for (std::size_t i = 0; i < dx.size(); ++i) v[i] = s_best * dx[i] / r;
    res.velocity = v;
    res.certificate = boosted_certificate(s_best);
    return res;
}

/// f_v = gamma_v (t - v.x) as a degree-1 filtered element with bounded part f_v (1+t^2)^{-1/2}.
inline FilteredElement boosted_candidate(const std::vector<double>& v) {
    double s2 = 0.0;
    for (double c : v) s2 += c * c;
    if (!(s2 < 1.0)) throw std::invalid_argument("boosted_candidate: |v| must be < 1");
    const double gamma = 1.0 / std::sqrt(1.0 - s2);
    std::string label = "boost(";
    for (std::size_t i = 0; i < v.size(); ++i) label += (i ? "," : "") + format_double(v[i]);
    label += ")";
    return {1,
            [v, gamma](std::span<const double> x) {
                double f = x[0];
                for (std::size_t i = 0; i < v.size(); ++i) f -= v[i] * x[i + 1];
                return cplx(gamma * f / std::sqrt(1.0 + x[0] * x[0]));
            },
            label};
}

/// Steepness test applied to each sampled candidate.
using SteepnessCertifier = std::function<SteepnessReport(const ScalarField&)>;

/// Upper bound min over accepted candidates of max{0, chi_q(f) - chi_p(f)}, each candidate certified on
/// `lat` by `certify` and evaluated through the state-extension rule.
inline DistanceResult variational_distance(const EventPair& pair, const std::vector<FilteredElement>& candidates,
                                           const Lattice& lat, const SteepnessCertifier& certify) {
    if (static_cast<int>(pair.dim()) != lat.dim())
        throw std::invalid_argument("variational_distance: pair dimension differs from the working lattice");
    DistanceResult res;
    res.mode = DistanceMode::variational;
    std::optional<double> best;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const std::string name = c.label().empty() ? "candidate " + std::to_string(i) : c.label();
        const auto field = c.sample(lat);
        if (!field.is_real(1e-12)) {
            ++res.rejected;
            res.rejections.push_back(name + ": not real-valued");
            continue;
        }
        auto cert = certify(field);
        if (!cert.global) {
            ++res.rejected;
            res.rejections.push_back(name + ": not steep (" + std::to_string(cert.sites_failed) +
                                     " sites fail, worst margin " + format_double(cert.worst_margin) + ")");
            continue;
        }
        ++res.accepted;
        const double fp = extend_state(EvaluationState{pair.p}, c).real();
        const double fq = extend_state(EvaluationState{pair.q}, c).real();
        const double v = std::max(0.0, fq - fp);
        if (!best || v < *best) {
            best = v;
            res.candidate = name;
            res.certificate = std::move(cert);
        }
    }
    if (!best) throw std::runtime_error("no steep candidates");
    res.value = *best;
    return res;
}

/// Matrix-form certification with the chirality gamma (even n).
inline DistanceResult variational_distance(const EventPair& pair, const std::vector<FilteredElement>& candidates,
                                           const DiracOperator& d, const Matrix& gamma, double tol = kSteepTol) {
    return variational_distance(pair, candidates, d.lattice(),
                                [&](const ScalarField& f) { return is_steep_matrix(f, d, gamma, tol); });
}

/// Integral of sqrt(u(t)) from p0 to q0 (adaptive Gauss-Kronrod); 0 when q0 <= p0.
inline DistanceResult conformal_time_distance(double p0, double q0, const std::function<double(double)>& u) {
    DistanceResult res;
    res.mode = DistanceMode::conformal;
    if (q0 <= p0) return res;
    auto integrand = [&u](double t) {
        const double v = u(t);
        if (!(v > 0.0)) throw std::domain_error("conformal_time_distance: u must be positive, u(" + format_double(t) + ") = " + format_double(v));
        return std::sqrt(v);
    };
    double err = 0.0;
    res.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, p0, q0, 15, 1e-13, &err);
    res.error_estimate = err;
    return res;
}

inline DistanceResult conformal_time_distance(const EventPair& pair, const std::function<double(double)>& u) {
    if (pair.spatial_norm() != 0.0)
        throw std::invalid_argument("conformal_time_distance: only purely temporal separations are supported");
    return conformal_time_distance(pair.p[0], pair.q[0], u);
}

}  // namespace lnc
