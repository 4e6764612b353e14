#pragma once

// Lattice Dirac operator D = -i (u^{-1/2} gamma^0 d_t + gamma^i d_i) for a
// metric g = -u(t) dt^2 + dx^2, its commutators with functions, the temporal
// axiom checks and the elliptic operator <D>^2.

#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lnc/clifford.hpp"
#include "lnc/lattice.hpp"

namespace lnc {

/// Largest dense operator (rows) the adjointness and spectrum checks will build.
inline constexpr Eigen::Index kMaxDenseRows = 4096;

/// A matrix per lattice site.
struct MatrixField {
    Lattice lattice;
    std::vector<Matrix> values;
};

/// The global time T: the coordinate t sampled on the lattice.
class TemporalElement {
public:
    explicit TemporalElement(ScalarField t) : field_(std::move(t)) {
        const auto& lat = field_.lattice();
        if (!field_.is_real()) throw std::invalid_argument("TemporalElement: time must be real-valued");
        for (std::size_t s = 0; s < lat.sites(); ++s) {
            if (lat.index(s, 0) + 1 >= lat.points(0)) continue;
            const auto next = lat.neighbor(s, 0, 1);
            if (!(field_[next].real() > field_[s].real()))
                throw std::invalid_argument("TemporalElement: time must increase strictly along axis 0");
        }
    }

    static TemporalElement coordinate_time(const Lattice& lat) { return TemporalElement(ScalarField::coordinate(lat, 0)); }

    [[nodiscard]] const ScalarField& field() const { return field_; }

private:
    ScalarField field_;
};

class DiracOperator {
public:
    /// `conformal_u` is the metric factor u in g = -u dt^2 + g_T; it must be
    /// real, strictly positive and depend on t only. Flat space is u = 1.
    DiracOperator(GammaRep rep, Lattice lattice, ScalarField conformal_u)
        : rep_(std::move(rep)), lattice_(std::move(lattice)), u_(std::move(conformal_u)) {
        if (rep_.dimension() != lattice_.dim())
            throw std::invalid_argument("DiracOperator: gamma dimension " + std::to_string(rep_.dimension()) +
                                        " differs from lattice dimension " + std::to_string(lattice_.dim()));
        if (!(u_.lattice() == lattice_)) throw std::invalid_argument("DiracOperator: conformal factor on another lattice");
        if (!u_.is_real(1e-14)) throw std::invalid_argument("DiracOperator: conformal factor must be real");
        if (u_.values().real().minCoeff() <= 0.0)
            throw std::invalid_argument("DiracOperator: conformal factor must be strictly positive");
        for (std::size_t s = 0; s < lattice_.sites(); ++s) {
            const std::size_t slice0 = s - (s % lattice_.stride(0));
            if (std::abs(u_[s] - u_[slice0]) > 1e-12 * std::abs(u_[slice0]))
                throw std::invalid_argument("DiracOperator: conformal factor must depend on t only");
        }
        e0_.resize(lattice_.sites());
        for (std::size_t s = 0; s < lattice_.sites(); ++s) e0_[s] = 1.0 / std::sqrt(u_[s].real());
    }

    static DiracOperator flat(GammaRep rep, const Lattice& lat) {
        return {std::move(rep), lat, ScalarField::constant(lat, 1.0)};
    }

    [[nodiscard]] const GammaRep& rep() const { return rep_; }
    [[nodiscard]] const Lattice& lattice() const { return lattice_; }
    [[nodiscard]] const ScalarField& conformal_u() const { return u_; }
    [[nodiscard]] int spinor_size() const { return static_cast<int>(rep_.size()); }

    /// Inverse vielbein component along axis mu at a site: u^{-1/2} for time, 1 otherwise.
    [[nodiscard]] double vielbein(int mu, std::size_t site) const { return mu == 0 ? e0_[site] : 1.0; }

    /// -i sum_mu e^mu gamma^mu v_mu, the Clifford action of a covector at a site.
    [[nodiscard]] Matrix clifford_action(std::span<const cplx> covector, std::size_t site) const {
        Matrix m = Matrix::Zero(rep_.size(), rep_.size());
        for (int mu = 0; mu < rep_.dimension(); ++mu)
            m += (-I_unit * vielbein(mu, site) * covector[static_cast<std::size_t>(mu)]) * rep_[mu];
        return m;
    }

    [[nodiscard]] SpinorField apply(const SpinorField& phi) const {
        if (!(phi.lattice() == lattice_)) throw std::invalid_argument("DiracOperator::apply: lattice mismatch");
        if (phi.components() != spinor_size())
            throw std::invalid_argument("DiracOperator::apply: spinor has " + std::to_string(phi.components()) +
                                        " components, representation needs " + std::to_string(spinor_size()));
        SpinorField out = SpinorField::zero(lattice_, spinor_size());
        for (int mu = 0; mu < rep_.dimension(); ++mu) {
            const SpinorField d = gradient(phi, mu);
            const Matrix g = -I_unit * rep_[mu];
            for (std::size_t s = 0; s < lattice_.sites(); ++s) out.at(s) += vielbein(mu, s) * (g * d.at(s));
        }
        return out;
    }

    [[nodiscard]] Eigen::Index dense_rows() const {
        return static_cast<Eigen::Index>(lattice_.sites()) * spinor_size();
    }

    /// Column-by-column dense matrix of apply(); refuses beyond kMaxDenseRows rows.
    [[nodiscard]] Matrix dense() const {
        const auto n = dense_rows();
        if (n > kMaxDenseRows)
            throw std::length_error("DiracOperator::dense: " + std::to_string(n) + " rows exceeds limit " +
                                    std::to_string(kMaxDenseRows) + "; use at most " +
                                    std::to_string(kMaxDenseRows / spinor_size()) + " sites");
        Matrix m(n, n);
        SpinorField e = SpinorField::zero(lattice_, spinor_size());
        for (Eigen::Index j = 0; j < n; ++j) {
            e.data().setZero();
            e.data()(j) = 1.0;
            m.col(j) = apply(e).data();
        }
        return m;
    }

private:
    GammaRep rep_;
    Lattice lattice_;
    ScalarField u_;
    std::vector<double> e0_;
};

/// [D,f] as the multiplication operator -i sum_mu e^mu gamma^mu (d_mu f)(x),
/// using the lattice gradient of f.
inline MatrixField commutator_with_scalar(const DiracOperator& d, const ScalarField& f) {
    if (!(f.lattice() == d.lattice())) throw std::invalid_argument("commutator_with_scalar: lattice mismatch");
    const auto& lat = d.lattice();
    std::vector<ScalarField> grads;
    for (int mu = 0; mu < lat.dim(); ++mu) grads.push_back(gradient(f, mu));
    MatrixField out{lat, {}};
    out.values.reserve(lat.sites());
    std::vector<cplx> cov(static_cast<std::size_t>(lat.dim()));
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        for (int mu = 0; mu < lat.dim(); ++mu) cov[static_cast<std::size_t>(mu)] = grads[static_cast<std::size_t>(mu)][s];
        out.values.push_back(d.clifford_action(cov, s));
    }
    return out;
}

/// [D,T] = -i c(dT) for the coordinate time, whose differential is exactly dt
/// (the lattice gradient of t is wrong across a periodic seam).
inline MatrixField commutator_with_time(const DiracOperator& d) {
    const auto& lat = d.lattice();
    MatrixField out{lat, {}};
    out.values.reserve(lat.sites());
    std::vector<cplx> cov(static_cast<std::size_t>(lat.dim()), 0.0);
    cov[0] = 1.0;
    for (std::size_t s = 0; s < lat.sites(); ++s) out.values.push_back(d.clifford_action(cov, s));
    return out;
}

inline SpinorField apply(const MatrixField& m, const SpinorField& phi) {
    if (!(m.lattice == phi.lattice())) throw std::invalid_argument("apply(MatrixField): lattice mismatch");
    SpinorField out = phi;
    for (std::size_t s = 0; s < m.lattice.sites(); ++s) out.at(s) = m.values[s] * phi.at(s);
    return out;
}

/// D(f phi) - f D(phi), the operator-level commutator.
inline SpinorField operator_commutator(const DiracOperator& d, const ScalarField& f, const SpinorField& phi) {
    SpinorField a = d.apply(phi.scaled(f));
    const SpinorField b = d.apply(phi).scaled(f);
    a.data() -= b.data();
    return a;
}

/// Block-diagonal dense matrix of a matrix field.
inline Matrix dense(const MatrixField& m) {
    const auto s = m.values.front().rows();
    const auto n = static_cast<Eigen::Index>(m.lattice.sites()) * s;
    if (n > kMaxDenseRows) throw std::length_error("dense(MatrixField): too many rows");
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < m.lattice.sites(); ++i)
        out.block(static_cast<Eigen::Index>(i) * s, static_cast<Eigen::Index>(i) * s, s, s) = m.values[i];
    return out;
}

/// Dense multiplication operator f(x) (x) Identity_components.
inline Matrix multiplication_operator(const ScalarField& f, int components) {
    const auto n = static_cast<Eigen::Index>(f.size()) * components;
    if (n > kMaxDenseRows) throw std::length_error("multiplication_operator: too many rows");
    Vector diag(n);
    for (std::size_t s = 0; s < f.size(); ++s)
        diag.segment(static_cast<Eigen::Index>(s) * components, components).setConstant(f[s]);
    return diag.asDiagonal();
}

struct AxiomTolerances {
    double hermiticity = 1e-12;
    double square = 1e-13;
    double skew = 1e-12;
    double commutation = 1e-13;
};

struct AxiomReport {
    double hermiticity_residual = 0.0;       ///< ||C - C^dagger||_F, C = [D,T] dense
    double square_residual = 0.0;            ///< max_x ||C_x^2 - u_ax(x) I||_F
    double u_ax_min = 0.0;                   ///< u_ax = [D,T]^2 = -g^{00}
    double u_ax_max = 0.0;
    double u_metric_min = 0.0;               ///< u in g = -u dt^2 + g_T
    double u_metric_max = 0.0;
    double reciprocity_residual = 0.0;       ///< max_x |u_ax * u_metric - 1|
    bool u_ax_positive = false;
    double skew_residual = 0.0;              ///< ||(C D)^dagger + C D||_F
    double commutation_residual = 0.0;       ///< max over sampled f of ||C M_f - M_f C||_F
    double krein_skew_residual = 0.0;        ///< ||(J D)^dagger + J D||_F with J = -u_ax^{-1/2} C
    double krein_adjoint_residual = 0.0;     ///< ||D^dagger + J D J||_F
    bool adjoints_exact = false;             ///< periodic lattice, no boundary terms
    AxiomTolerances tol;
    bool passed = false;
    std::vector<std::string> failures;
};

/// Checks of the temporal axioms on the dense matrices of D and [D,T].
/// Norms are Frobenius norms, an upper bound for the operator norm.
inline AxiomReport check_temporal_axioms(const DiracOperator& d, const TemporalElement& t, unsigned seed = 7,
                                         AxiomTolerances tol = {}) {
    if (!(t.field().lattice() == d.lattice())) throw std::invalid_argument("check_temporal_axioms: lattice mismatch");
    AxiomReport r;
    r.tol = tol;
    const auto& lat = d.lattice();
    r.adjoints_exact = lat.boundary() == Boundary::periodic;
    const auto s = static_cast<Eigen::Index>(d.spinor_size());

    const MatrixField cfield = commutator_with_time(d);
    const Matrix c = dense(cfield);
    const Matrix dm = d.dense();

    r.hermiticity_residual = hermiticity_residual(c);

    r.u_ax_min = std::numeric_limits<double>::infinity();
    r.u_ax_max = -std::numeric_limits<double>::infinity();
    r.u_metric_min = d.conformal_u().values().real().minCoeff();
    r.u_metric_max = d.conformal_u().values().real().maxCoeff();
    std::vector<double> u_ax(lat.sites());
    for (std::size_t i = 0; i < lat.sites(); ++i) {
        const Matrix sq = cfield.values[i] * cfield.values[i];
        const double ua = sq.trace().real() / static_cast<double>(s);
        u_ax[i] = ua;
        r.square_residual = std::max(r.square_residual, (sq - ua * Matrix::Identity(s, s)).norm());
        r.u_ax_min = std::min(r.u_ax_min, ua);
        r.u_ax_max = std::max(r.u_ax_max, ua);
        r.reciprocity_residual = std::max(r.reciprocity_residual, std::abs(ua * d.conformal_u()[i].real() - 1.0));
    }
    r.u_ax_positive = r.u_ax_min > 0.0;

    const Matrix cd = c * dm;
    r.skew_residual = (cd.adjoint() + cd).norm();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 3; ++trial) {
        Vector v(static_cast<Eigen::Index>(lat.sites()));
        for (auto& z : v) z = cplx(normal(rng), normal(rng));
        const Matrix mf = multiplication_operator(ScalarField(lat, v), static_cast<int>(s));
        r.commutation_residual = std::max(r.commutation_residual, (c * mf - mf * c).norm());
    }

    if (r.u_ax_positive) {
        Vector inv_sqrt(c.rows());
        for (std::size_t i = 0; i < lat.sites(); ++i)
            inv_sqrt.segment(static_cast<Eigen::Index>(i) * s, s).setConstant(1.0 / std::sqrt(u_ax[i]));
        const Matrix j = -(inv_sqrt.asDiagonal() * c);
        const Matrix jd = j * dm;
        r.krein_skew_residual = (jd.adjoint() + jd).norm();
        r.krein_adjoint_residual = (dm.adjoint() + j * dm * j).norm();
    }

    auto fail = [&](bool bad, const std::string& what) {
        if (bad) r.failures.push_back(what);
    };
    fail(r.hermiticity_residual > tol.hermiticity, "[D,T] is not Hermitian");
    fail(r.square_residual > tol.square, "[D,T]^2 is not a multiple of the identity per site");
    fail(!r.u_ax_positive, "[D,T]^2 is not positive");
    fail(r.skew_residual > tol.skew, "[D,T]D is not skew-adjoint");
    fail(r.commutation_residual > tol.commutation, "[D,T] does not commute with multiplication operators");
    fail(r.u_ax_positive && r.krein_skew_residual > tol.skew, "J D is not skew-adjoint");
    fail(r.u_ax_positive && r.krein_adjoint_residual > tol.skew, "D^dagger != -J D J");
    r.passed = r.failures.empty();
    return r;
}

/// <D>^2 = -1/2 (D C D C + C D C D) with C = [D,T], as a dense matrix.
inline Matrix elliptic_square(const DiracOperator& d, const TemporalElement& t) {
    if (!(t.field().lattice() == d.lattice())) throw std::invalid_argument("elliptic_square: lattice mismatch");
    const Matrix c = dense(commutator_with_time(d));
    const Matrix dm = d.dense();
    const Matrix dc = dm * c;
    const Matrix cd = c * dm;
    return -0.5 * (dc * dc + cd * cd);
}

struct SpectrumReport {
    double hermiticity_residual = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    Eigen::VectorXd eigenvalues;
};

inline SpectrumReport spectrum(const Matrix& op) {
    SpectrumReport r;
    r.hermiticity_residual = hermiticity_residual(op);
    r.eigenvalues = hermitian_eigenvalues(op);
    r.min_eigenvalue = r.eigenvalues.minCoeff();
    r.max_eigenvalue = r.eigenvalues.maxCoeff();
    return r;
}

}  // namespace lnc
