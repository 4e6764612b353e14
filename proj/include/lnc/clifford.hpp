#pragma once

// Gamma-matrix representations of the Clifford algebra of signature (-,+,...,+),
// the fundamental symmetry J = i*gamma^0 and the chirality element.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lnc/linalg.hpp"

namespace lnc {

/// Tolerance for exact algebraic identities between gamma matrices.
inline constexpr double kCliffordTol = 1e-12;

/// A set of n complex square matrices of common size with a diagonal metric
/// g = diag(metric_signs). The constructor only checks shapes; use
/// check_clifford() to validate the algebra.
class GammaRep {
public:
    GammaRep(std::vector<Matrix> matrices, std::vector<int> metric_signs)
        : matrices_(std::move(matrices)), signs_(std::move(metric_signs)) {
        if (matrices_.size() < 2)
            throw std::invalid_argument("GammaRep: need at least two matrices");
        if (signs_.size() != matrices_.size())
            throw std::invalid_argument("GammaRep: metric_signs length differs from matrix count");
        const auto s = matrices_.front().rows();
        for (std::size_t k = 0; k < matrices_.size(); ++k) {
            if (matrices_[k].rows() != s || matrices_[k].cols() != s)
                throw std::invalid_argument("GammaRep: matrix " + std::to_string(k) +
                                            " is not square of size " + std::to_string(s));
            if (signs_[k] != 1 && signs_[k] != -1)
                throw std::invalid_argument("GammaRep: metric signs must be +1 or -1");
        }
    }

    [[nodiscard]] int dimension() const { return static_cast<int>(matrices_.size()); }
    [[nodiscard]] Eigen::Index size() const { return matrices_.front().rows(); }
    [[nodiscard]] const Matrix& operator[](std::size_t mu) const { return matrices_.at(mu); }
    [[nodiscard]] const std::vector<Matrix>& matrices() const { return matrices_; }
    [[nodiscard]] const std::vector<int>& metric_signs() const { return signs_; }

    /// U gamma^mu U^dagger for a unitary U.
    [[nodiscard]] GammaRep conjugated(const Matrix& u) const {
        std::vector<Matrix> out;
        out.reserve(matrices_.size());
        for (const auto& g : matrices_) out.push_back(u * g * u.adjoint());
        return {std::move(out), signs_};
    }

private:
    std::vector<Matrix> matrices_;
    std::vector<int> signs_;
};

namespace detail {

inline Matrix pauli(char which) {
    Matrix m = Matrix::Zero(2, 2);
    switch (which) {
        case 'I': m(0, 0) = 1.0; m(1, 1) = 1.0; break;
        case 'X': m(0, 1) = 1.0; m(1, 0) = 1.0; break;
        case 'Y': m(0, 1) = -I_unit; m(1, 0) = I_unit; break;
        case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
        default: throw std::logic_error("pauli: unknown label");
    }
    return m;
}

// Z x ... x Z x P x I x ... x I with P at tensor slot k out of m slots.
inline Matrix jordan_wigner(int k, int m, char p) {
    Matrix out = Matrix::Identity(1, 1);
    for (int slot = 0; slot < m; ++slot) {
        const char c = slot < k ? 'Z' : (slot == k ? p : 'I');
        out = kron(out, pauli(c));
    }
    return out;
}

}  // namespace detail

/// Hermitian generators e_0..e_{n-1} of the Euclidean Clifford algebra on
/// C^{2^floor(n/2)} (Jordan-Wigner tensor products of Pauli matrices).
inline std::vector<Matrix> euclidean_generators(int n) {
    if (n < 2) throw std::invalid_argument("euclidean_generators: n must be >= 2");
    const int m = n / 2;
    std::vector<Matrix> e;
    for (int k = 0; k < m; ++k) {
        e.push_back(detail::jordan_wigner(k, m, 'X'));
        e.push_back(detail::jordan_wigner(k, m, 'Y'));
    }
    if (n % 2 == 1) {
        Matrix z = Matrix::Identity(1, 1);
        for (int k = 0; k < m; ++k) z = kron(z, detail::pauli('Z'));
        e.push_back(z);
    }
    return e;
}

/// Lorentzian gamma matrices: gamma^0 = i e_0 (anti-Hermitian, square -1),
/// gamma^k = e_k (Hermitian, square +1). Deterministic for fixed n.
inline GammaRep build_gamma(int n) {
    if (n < 2) throw std::invalid_argument("build_gamma: dimension must be >= 2, got " + std::to_string(n));
    auto e = euclidean_generators(n);
    e[0] = I_unit * e[0];
    std::vector<int> signs(static_cast<std::size_t>(n), 1);
    signs[0] = -1;
    return {std::move(e), std::move(signs)};
}

struct RelationResidual {
    int mu = 0;
    int nu = 0;
    double residual = 0.0;
};

struct CliffordReport {
    std::vector<RelationResidual> anticommutators;  ///< ||{g^mu,g^nu} - 2 g^{mu nu} I||_F
    std::vector<double> hermiticity;                ///< per matrix, against the pattern implied by its sign
    int anti_hermitian_count = 0;
    bool pattern_ok = false;                        ///< exactly one anti-Hermitian matrix, at index 0
    double max_anticommutator = 0.0;
    RelationResidual worst;
    double max_hermiticity = 0.0;
    double tolerance = kCliffordTol;
    bool passed = false;
    std::vector<std::string> failures;
};

inline CliffordReport check_clifford(const GammaRep& rep, double tol = kCliffordTol) {
    CliffordReport r;
    r.tolerance = tol;
    const int n = rep.dimension();
    const Matrix id = Matrix::Identity(rep.size(), rep.size());
    for (int mu = 0; mu < n; ++mu) {
        for (int nu = mu; nu < n; ++nu) {
            const double g = mu == nu ? rep.metric_signs()[static_cast<std::size_t>(mu)] : 0.0;
            const double res = (anticommutator(rep[mu], rep[nu]) - 2.0 * g * id).norm();
            r.anticommutators.push_back({mu, nu, res});
            if (res >= r.max_anticommutator) {
                r.max_anticommutator = res;
                r.worst = {mu, nu, res};
            }
        }
    }
    for (int mu = 0; mu < n; ++mu) {
        const auto& g = rep[mu];
        const double h = rep.metric_signs()[static_cast<std::size_t>(mu)] < 0 ? anti_hermiticity_residual(g)
                                                                              : hermiticity_residual(g);
        r.hermiticity.push_back(h);
        r.max_hermiticity = std::max(r.max_hermiticity, h);
        if (anti_hermiticity_residual(g) <= tol) ++r.anti_hermitian_count;
    }
    r.pattern_ok = r.anti_hermitian_count == 1 && anti_hermiticity_residual(rep[0]) <= tol;
    for (int mu = 1; mu < n && r.pattern_ok; ++mu)
        r.pattern_ok = hermiticity_residual(rep[mu]) <= tol;

    if (r.max_anticommutator > tol)
        r.failures.push_back("anticommutator {g^" + std::to_string(r.worst.mu) + ",g^" + std::to_string(r.worst.nu) +
                             "} residual " + std::to_string(r.worst.residual));
    if (r.max_hermiticity > tol) r.failures.push_back("Hermiticity residual exceeds tolerance");
    if (!r.pattern_ok)
        r.failures.push_back("Hermiticity pattern: " + std::to_string(r.anti_hermitian_count) +
                             " anti-Hermitian matrices, expected exactly one at index 0");
    r.passed = r.failures.empty();
    return r;
}

/// J = i gamma^0. Throws if the representation fails check_clifford().
inline Matrix fundamental_symmetry(const GammaRep& rep) {
    const auto report = check_clifford(rep);
    if (!report.passed)
        throw std::invalid_argument("fundamental_symmetry: invalid gamma representation: " + report.failures.front());
    return I_unit * rep[0];
}

/// Krein adjoint A^+ = J A^dagger J.
inline Matrix krein_adjoint(const Matrix& j, const Matrix& a) { return j * a.adjoint() * j; }

/// gamma = (-i)^{n/2+1} gamma^0 ... gamma^{n-1}; only defined for even n.
inline Matrix chirality(const GammaRep& rep) {
    const int n = rep.dimension();
    if (n % 2 != 0)
        throw std::domain_error("chirality: no grading in odd dimension " + std::to_string(n));
    Matrix prod = Matrix::Identity(rep.size(), rep.size());
    for (int mu = 0; mu < n; ++mu) prod = prod * rep[mu];
    return std::pow(-I_unit, n / 2 + 1) * prod;
}

enum class SignatureVerdict { lorentzian, not_lorentzian, indeterminate };

inline const char* to_string(SignatureVerdict v) {
    switch (v) {
        case SignatureVerdict::lorentzian: return "lorentzian";
        case SignatureVerdict::not_lorentzian: return "not_lorentzian";
        case SignatureVerdict::indeterminate: return "indeterminate";
    }
    return "?";
}

struct SignatureAudit {
    SignatureVerdict verdict = SignatureVerdict::indeterminate;
    std::string reason;
    int negative = 0;  ///< generators squaring to -1
    int positive = 0;  ///< generators squaring to +1
    std::vector<std::string> diagnostics;
};

/// Decide whether a list of mutually anticommuting generators carries a
/// Lorentzian signature with time at index 0. Generators that do not close a
/// diagonal Clifford algebra give an indeterminate verdict.
inline SignatureAudit signature_audit(const std::vector<Matrix>& gens, double tol = kCliffordTol) {
    SignatureAudit a;
    if (gens.empty()) {
        a.reason = "no generators";
        return a;
    }
    const auto s = gens.front().rows();
    for (std::size_t k = 0; k < gens.size(); ++k) {
        if (gens[k].rows() != s || gens[k].cols() != s) {
            a.reason = "generator " + std::to_string(k) + " has mismatched shape";
            return a;
        }
    }
    const Matrix id = Matrix::Identity(s, s);
    std::vector<int> anti;
    for (std::size_t k = 0; k < gens.size(); ++k) {
        const Matrix sq = gens[k] * gens[k];
        if ((sq - id).norm() <= tol) {
            ++a.positive;
        } else if ((sq + id).norm() <= tol) {
            ++a.negative;
        } else {
            a.diagnostics.push_back("generator " + std::to_string(k) + " does not square to +-I");
        }
        const bool herm = hermiticity_residual(gens[k]) <= tol;
        const bool aherm = anti_hermiticity_residual(gens[k]) <= tol;
        if (aherm) anti.push_back(static_cast<int>(k));
        if (!herm && !aherm) a.diagnostics.push_back("generator " + std::to_string(k) + " is neither Hermitian nor anti-Hermitian");
    }
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            const double r = anticommutator(gens[i], gens[j]).norm();
            if (r > tol)
                a.diagnostics.push_back("generators " + std::to_string(i) + "," + std::to_string(j) +
                                        " do not anticommute (residual " + std::to_string(r) + ")");
        }
    if (!a.diagnostics.empty()) {
        a.verdict = SignatureVerdict::indeterminate;
        a.reason = "generators do not close a diagonal Clifford algebra";
        return a;
    }
    if (anti.empty()) {
        a.verdict = SignatureVerdict::not_lorentzian;
        a.reason = "no anti-Hermitian generator (Euclidean signature)";
    } else if (anti.size() > 1) {
        a.verdict = SignatureVerdict::not_lorentzian;
        a.reason = std::to_string(anti.size()) + " anti-Hermitian generators: signature (" +
                   std::to_string(a.positive) + "," + std::to_string(a.negative) + ")";
    } else if (anti.front() != 0) {
        a.verdict = SignatureVerdict::not_lorentzian;
        a.reason = "anti-Hermitian generator at index " + std::to_string(anti.front()) + ", time must be index 0";
    } else {
        a.verdict = SignatureVerdict::lorentzian;
        a.reason = "exactly one anti-Hermitian generator (index 0); all cross anticommutators vanish";
    }
    return a;
}

}  // namespace lnc
