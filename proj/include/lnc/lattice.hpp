#pragma once

// Uniform rectangular spacetime lattices, complex scalar and spinor fields on
// them, second-order finite differences and lattice quadrature.
//
// Sites are ordered row-major with axis 0 (time) slowest:
//   site = ((i_0 * N_1 + i_1) * N_2 + i_2) ...
// Spinor components are stored site-major: data[site * components + a].

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lnc/format.hpp"
#include "lnc/linalg.hpp"

namespace lnc {

enum class Boundary { periodic, clamped };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "clamped"; }

struct Axis {
    double min = 0.0;
    double max = 1.0;
    int points = 4;
    bool operator==(const Axis&) const = default;
};

/// Coordinate name used in CSV headers and expressions: t, x, y, z, x4, x5, ...
inline std::string axis_name(int axis) {
    static const char* names[] = {"t", "x", "y", "z"};
    if (axis >= 0 && axis < 4) return names[axis];
    return "x" + std::to_string(axis);
}

/// Periodic axes place N points at min + i*h with h = (max-min)/N (max is
/// identified with min). Clamped axes include both endpoints, h = (max-min)/(N-1).
class Lattice {
public:
    Lattice(std::vector<Axis> axes, Boundary boundary) : axes_(std::move(axes)), boundary_(boundary) {
        if (axes_.empty()) throw std::invalid_argument("Lattice: need at least one axis");
        sites_ = 1;
        for (std::size_t k = 0; k < axes_.size(); ++k) {
            const auto& a = axes_[k];
            if (a.points < 4)
                throw std::invalid_argument("Lattice: axis " + std::to_string(k) + " needs at least 4 points");
            if (!(a.max > a.min))
                throw std::invalid_argument("Lattice: axis " + std::to_string(k) + " has empty extent");
            sites_ *= static_cast<std::size_t>(a.points);
        }
        strides_.assign(axes_.size(), 1);
        for (int k = static_cast<int>(axes_.size()) - 2; k >= 0; --k)
            strides_[static_cast<std::size_t>(k)] =
                strides_[static_cast<std::size_t>(k) + 1] * static_cast<std::size_t>(axes_[static_cast<std::size_t>(k) + 1].points);
    }

    /// Same extent [min,max] and point count on every axis.
    static Lattice cube(int dim, double min, double max, int points, Boundary b) {
        return {std::vector<Axis>(static_cast<std::size_t>(dim), Axis{min, max, points}), b};
    }

    [[nodiscard]] int dim() const { return static_cast<int>(axes_.size()); }
    [[nodiscard]] std::size_t sites() const { return sites_; }
    [[nodiscard]] Boundary boundary() const { return boundary_; }
    [[nodiscard]] const Axis& axis(int k) const { return axes_.at(static_cast<std::size_t>(k)); }
    [[nodiscard]] const std::vector<Axis>& axes() const { return axes_; }
    [[nodiscard]] int points(int k) const { return axis(k).points; }
    [[nodiscard]] std::size_t stride(int k) const { return strides_.at(static_cast<std::size_t>(k)); }

    [[nodiscard]] double spacing(int k) const {
        const auto& a = axis(k);
        const int cells = boundary_ == Boundary::periodic ? a.points : a.points - 1;
        return (a.max - a.min) / cells;
    }

    [[nodiscard]] double cell_volume() const {
        double v = 1.0;
        for (int k = 0; k < dim(); ++k) v *= spacing(k);
        return v;
    }

    [[nodiscard]] double coordinate(int k, int i) const { return axis(k).min + i * spacing(k); }

    [[nodiscard]] int index(std::size_t site, int k) const {
        return static_cast<int>((site / stride(k)) % static_cast<std::size_t>(points(k)));
    }

    [[nodiscard]] std::vector<double> coords(std::size_t site) const {
        std::vector<double> x(axes_.size());
        for (int k = 0; k < dim(); ++k) x[static_cast<std::size_t>(k)] = coordinate(k, index(site, k));
        return x;
    }

    [[nodiscard]] std::size_t site(std::span<const int> idx) const {
        std::size_t s = 0;
        for (int k = 0; k < dim(); ++k) s += stride(k) * static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
        return s;
    }

    /// Site displaced by `offset` along axis k; periodic wrap or clamped to range.
    [[nodiscard]] std::size_t neighbor(std::size_t site, int k, int offset) const {
        const int n = points(k);
        int i = index(site, k) + offset;
        if (boundary_ == Boundary::periodic) i = ((i % n) + n) % n;
        else if (i < 0 || i >= n) throw std::out_of_range("Lattice::neighbor: outside clamped lattice");
        return site + (static_cast<std::ptrdiff_t>(i) - index(site, k)) * static_cast<std::ptrdiff_t>(stride(k));
    }

    /// Quadrature weight: cell volume, halved per clamped edge (trapezoid).
    [[nodiscard]] double quadrature_weight(std::size_t site) const {
        double w = cell_volume();
        if (boundary_ == Boundary::clamped)
            for (int k = 0; k < dim(); ++k) {
                const int i = index(site, k);
                if (i == 0 || i == points(k) - 1) w *= 0.5;
            }
        return w;
    }

    /// Nearest site to a point, or nullopt when the point is not within 1e-9*h of a site.
    [[nodiscard]] std::optional<std::size_t> site_at(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim()) return std::nullopt;
        std::size_t s = 0;
        for (int k = 0; k < dim(); ++k) {
            const double h = spacing(k);
            const double r = (x[static_cast<std::size_t>(k)] - axis(k).min) / h;
            const double i = std::round(r);
            if (std::abs(r - i) > 1e-9 || i < 0 || i >= points(k)) return std::nullopt;
            s += stride(k) * static_cast<std::size_t>(i);
        }
        return s;
    }

    bool operator==(const Lattice& o) const { return axes_ == o.axes_ && boundary_ == o.boundary_; }

private:
    std::vector<Axis> axes_;
    Boundary boundary_;
    std::vector<std::size_t> strides_;
    std::size_t sites_ = 0;
};

using PointFunction = std::function<cplx(std::span<const double>)>;

class ScalarField {
public:
    ScalarField(Lattice lattice, Vector values) : lattice_(std::move(lattice)), values_(std::move(values)) {
        if (static_cast<std::size_t>(values_.size()) != lattice_.sites())
            throw std::invalid_argument("ScalarField: sample count does not match site count");
    }

    static ScalarField constant(const Lattice& lat, cplx c) {
        return {lat, Vector::Constant(static_cast<Eigen::Index>(lat.sites()), c)};
    }

    static ScalarField sample(const Lattice& lat, const PointFunction& f) {
        Vector v(static_cast<Eigen::Index>(lat.sites()));
        for (std::size_t s = 0; s < lat.sites(); ++s) {
            const auto x = lat.coords(s);
            v(static_cast<Eigen::Index>(s)) = f(x);
        }
        return {lat, std::move(v)};
    }

    /// The coordinate function x^axis.
    static ScalarField coordinate(const Lattice& lat, int axis) {
        return sample(lat, [axis](std::span<const double> x) { return cplx(x[static_cast<std::size_t>(axis)]); });
    }

    [[nodiscard]] const Lattice& lattice() const { return lattice_; }
    [[nodiscard]] const Vector& values() const { return values_; }
    [[nodiscard]] cplx operator[](std::size_t site) const { return values_(static_cast<Eigen::Index>(site)); }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

    [[nodiscard]] double max_imag() const { return values_.imag().cwiseAbs().maxCoeff(); }
    [[nodiscard]] bool is_real(double tol = 0.0) const { return max_imag() <= tol; }

    [[nodiscard]] ScalarField map(const std::function<cplx(cplx)>& fn) const {
        Vector v = values_.unaryExpr(fn);
        return {lattice_, std::move(v)};
    }

    friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
        a.require_same(b);
        return {a.lattice_, a.values_ + b.values_};
    }
    friend ScalarField operator-(const ScalarField& a, const ScalarField& b) {
        a.require_same(b);
        return {a.lattice_, a.values_ - b.values_};
    }
    /// Pointwise product.
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
        a.require_same(b);
        return {a.lattice_, a.values_.cwiseProduct(b.values_)};
    }
    friend ScalarField operator*(cplx c, const ScalarField& a) { return {a.lattice_, c * a.values_}; }

    void require_same(const ScalarField& o) const {
        if (!(lattice_ == o.lattice_)) throw std::invalid_argument("ScalarField: lattice mismatch");
    }

private:
    Lattice lattice_;
    Vector values_;
};

class SpinorField {
public:
    SpinorField(Lattice lattice, int components, Vector data)
        : lattice_(std::move(lattice)), components_(components), data_(std::move(data)) {
        if (components_ < 1) throw std::invalid_argument("SpinorField: need at least one component");
        if (static_cast<std::size_t>(data_.size()) != lattice_.sites() * static_cast<std::size_t>(components_))
            throw std::invalid_argument("SpinorField: data length does not match sites * components");
    }

    static SpinorField zero(const Lattice& lat, int components) {
        return {lat, components, Vector::Zero(static_cast<Eigen::Index>(lat.sites()) * components)};
    }

    /// Same spinor chi at every site, multiplied by the scalar profile f.
    static SpinorField product(const ScalarField& f, const Vector& chi) {
        const auto& lat = f.lattice();
        const auto s = static_cast<int>(chi.size());
        Vector d(static_cast<Eigen::Index>(lat.sites()) * s);
        for (std::size_t i = 0; i < lat.sites(); ++i) d.segment(static_cast<Eigen::Index>(i) * s, s) = f[i] * chi;
        return {lat, s, std::move(d)};
    }

    [[nodiscard]] const Lattice& lattice() const { return lattice_; }
    [[nodiscard]] int components() const { return components_; }
    [[nodiscard]] const Vector& data() const { return data_; }
    [[nodiscard]] Vector& data() { return data_; }

    [[nodiscard]] auto at(std::size_t site) const {
        return data_.segment(static_cast<Eigen::Index>(site) * components_, components_);
    }
    [[nodiscard]] auto at(std::size_t site) {
        return data_.segment(static_cast<Eigen::Index>(site) * components_, components_);
    }

    /// Pointwise multiplication by a scalar field.
    [[nodiscard]] SpinorField scaled(const ScalarField& f) const {
        if (!(f.lattice() == lattice_)) throw std::invalid_argument("SpinorField: lattice mismatch");
        SpinorField out = *this;
        for (std::size_t s = 0; s < lattice_.sites(); ++s) out.at(s) *= f[s];
        return out;
    }

private:
    Lattice lattice_;
    int components_;
    Vector data_;
};

namespace detail {

// Second-order derivative along one axis of interleaved data with `comps`
// values per site.
inline Vector difference(const Lattice& lat, const Vector& data, int comps, int axis) {
    if (axis < 0 || axis >= lat.dim())
        throw std::out_of_range("gradient: axis " + std::to_string(axis) + " outside dimension " +
                                std::to_string(lat.dim()));
    const double h = lat.spacing(axis);
    const int n = lat.points(axis);
    const auto stride = static_cast<std::ptrdiff_t>(lat.stride(axis));
    const bool periodic = lat.boundary() == Boundary::periodic;
    Vector out(data.size());
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        const int i = lat.index(s, axis);
        const auto base = static_cast<std::ptrdiff_t>(s);
        auto at = [&](int j) -> std::ptrdiff_t {
            if (periodic) j = ((j % n) + n) % n;
            return (base + (j - i) * stride) * comps;
        };
        for (int c = 0; c < comps; ++c) {
            cplx d;
            if (periodic || (i > 0 && i < n - 1)) {
                d = (data(at(i + 1) + c) - data(at(i - 1) + c)) / (2.0 * h);
            } else if (i == 0) {
                d = (-3.0 * data(at(0) + c) + 4.0 * data(at(1) + c) - data(at(2) + c)) / (2.0 * h);
            } else {
                d = (3.0 * data(at(n - 1) + c) - 4.0 * data(at(n - 2) + c) + data(at(n - 3) + c)) / (2.0 * h);
            }
            out(base * comps + c) = d;
        }
    }
    return out;
}

}  // namespace detail

/// Central second-order difference; periodic axes wrap, clamped axes use
/// one-sided second-order stencils at the two edges.
inline ScalarField gradient(const ScalarField& f, int axis) {
    return {f.lattice(), detail::difference(f.lattice(), f.values(), 1, axis)};
}

inline SpinorField gradient(const SpinorField& f, int axis) {
    return {f.lattice(), f.components(), detail::difference(f.lattice(), f.data(), f.components(), axis)};
}

/// Riemann sum (periodic) or trapezoidal rule (clamped), times cell volume.
inline cplx integrate(const ScalarField& f) {
    const auto& lat = f.lattice();
    cplx acc = 0.0;
    for (std::size_t s = 0; s < lat.sites(); ++s) acc += lat.quadrature_weight(s) * f[s];
    return acc;
}

/// sum_sites conj(psi) . phi * weight * quadrature weight.
inline cplx inner_product(const SpinorField& psi, const SpinorField& phi,
                          const std::optional<ScalarField>& weight = std::nullopt) {
    if (!(psi.lattice() == phi.lattice())) throw std::invalid_argument("inner_product: lattice mismatch");
    if (psi.components() != phi.components()) throw std::invalid_argument("inner_product: spinor size mismatch");
    if (weight && !(weight->lattice() == psi.lattice()))
        throw std::invalid_argument("inner_product: weight lattice mismatch");
    const auto& lat = psi.lattice();
    cplx acc = 0.0;
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        cplx local = psi.at(s).dot(phi.at(s));  // Eigen's dot conjugates the left operand
        if (weight) local *= (*weight)[s];
        acc += lat.quadrature_weight(s) * local;
    }
    return acc;
}

/// L2 inner product of scalar fields, conjugate-linear in the first argument.
inline cplx inner_product(const ScalarField& f, const ScalarField& g) {
    f.require_same(g);
    const auto& lat = f.lattice();
    cplx acc = 0.0;
    for (std::size_t s = 0; s < lat.sites(); ++s) acc += lat.quadrature_weight(s) * std::conj(f[s]) * g[s];
    return acc;
}

/// CSV with header `site,t,x,...,re,im`, LF line endings.
inline void write_csv(std::ostream& os, const ScalarField& f) {
    const auto& lat = f.lattice();
    os << "site";
    for (int k = 0; k < lat.dim(); ++k) os << ',' << axis_name(k);
    os << ",re,im\n";
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        os << s;
        for (double c : lat.coords(s)) os << ',' << format_double(c);
        os << ',' << format_double(f[s].real()) << ',' << format_double(f[s].imag()) << '\n';
    }
}

/// Spinor variant: one row per (site, component), header `site,comp,t,x,...,re,im`.
inline void write_csv(std::ostream& os, const SpinorField& f) {
    const auto& lat = f.lattice();
    os << "site,comp";
    for (int k = 0; k < lat.dim(); ++k) os << ',' << axis_name(k);
    os << ",re,im\n";
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        const auto x = lat.coords(s);
        for (int a = 0; a < f.components(); ++a) {
            const cplx v = f.at(s)(a);
            os << s << ',' << a;
            for (double c : x) os << ',' << format_double(c);
            os << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
        }
    }
}

}  // namespace lnc
