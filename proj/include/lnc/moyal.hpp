#pragma once

// Moyal star product f * h = fh + (i/2) Theta^{mu nu} d_mu f d_nu h + ..., so that
// [x^mu, x^nu]_* = i Theta^{mu nu}. Three engines:
//  - quadrature: (f*h)(x) = (2 pi)^{-k} int f(x - Theta u / 2) e^{i u.x} h^(u) du with h^ from an FFT,
//    over the k noncommutative axes (axes whose Theta row vanishes are spectators);
//  - twisted: periodic lattice, plane waves multiply with the twist e^{-(i/2) k.Theta k'};
//  - matrix basis: Laguerre-Gaussian basis f_mn of a planar block, where the product is a
//    matrix product of coefficients.

#include "lnc/format.hpp"
#include "lnc/lattice.hpp"
#include "lnc/linalg.hpp"

#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lnc {

// ---------------------------------------------------------------------------------------------
// Theta

class ThetaMatrix {
public:
    /// Rejects non-square input and any entry with Theta + Theta^T != 0 (exact), naming the entries.
    explicit ThetaMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw std::invalid_argument("ThetaMatrix: must be square, got " + std::to_string(m_.rows()) + "x" +
                                        std::to_string(m_.cols()));
        std::string bad;
        for (Eigen::Index i = 0; i < m_.rows(); ++i)
            for (Eigen::Index j = i; j < m_.cols(); ++j)
                if (m_(i, j) + m_(j, i) != 0.0) {
                    if (!bad.empty()) bad += "; ";
                    if (i == j)
                        bad += "Theta(" + std::to_string(i) + "," + std::to_string(i) + ") = " + format_double(m_(i, i)) +
                               " must be 0";
                    else
                        bad += "Theta(" + std::to_string(i) + "," + std::to_string(j) + ") = " + format_double(m_(i, j)) +
                               " but Theta(" + std::to_string(j) + "," + std::to_string(i) + ") = " +
                               format_double(m_(j, i));
                }
        if (!bad.empty()) throw std::invalid_argument("ThetaMatrix: not skew-symmetric: " + bad);
    }

    static ThetaMatrix zero(int n) { return ThetaMatrix(Eigen::MatrixXd::Zero(n, n)); }

    /// Theta^{ij} = theta = -Theta^{ji}, all other entries zero.
    static ThetaMatrix planar(int n, int i, int j, double theta) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        m(i, j) = theta;
        m(j, i) = -theta;
        return ThetaMatrix(m);
    }

    [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
    [[nodiscard]] double operator()(int i, int j) const { return m_(i, j); }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return m_; }

    /// Axes with a nonzero row; the remaining axes are spectators of the product.
    [[nodiscard]] std::vector<int> noncommutative_axes() const {
        std::vector<int> axes;
        for (int i = 0; i < dim(); ++i)
            if (m_.row(i).cwiseAbs().maxCoeff() != 0.0) axes.push_back(i);
        return axes;
    }

    struct Plane {
        int x, y;
        double theta;  ///< Theta^{xy} > 0
    };
    /// The single 2-D block, oriented so that theta > 0, if Theta has exactly one.
    [[nodiscard]] std::optional<Plane> planar_block() const {
        const auto axes = noncommutative_axes();
        if (axes.size() != 2) return std::nullopt;
        const double t = m_(axes[0], axes[1]);
        if (t > 0) return Plane{axes[0], axes[1], t};
        return Plane{axes[1], axes[0], -t};
    }

private:
    Eigen::MatrixXd m_;
};

struct CommutativeTimeVerdict {
    bool commutative_time = false;
    std::vector<int> offending;  ///< axes mu with Theta^{0 mu} != 0
};

/// True iff Theta^{0 mu} = Theta^{mu 0} = 0 for all mu (exact).
inline CommutativeTimeVerdict check_commutative_time(const ThetaMatrix& theta) {
    CommutativeTimeVerdict v;
    for (int mu = 0; mu < theta.dim(); ++mu)
        if (theta(0, mu) != 0.0 || theta(mu, 0) != 0.0) v.offending.push_back(mu);
    v.commutative_time = v.offending.empty();
    return v;
}

// ---------------------------------------------------------------------------------------------
// Matrix basis

/// f_mn for the planar block with Theta^{xy} = theta:
/// f_mn = 2 (-1)^m sqrt(m!/n!) (sqrt(2/theta) (X + iY))^{n-m} L_m^{(n-m)}(2 rho^2/theta) e^{-rho^2/theta}, n >= m,
/// f_mn = conj(f_nm) otherwise. They satisfy f_mn * f_kl = delta_nk f_ml and int f_mn^* f_kl = 2 pi theta delta delta.
inline cplx basis_function(int m, int n, double theta, double X, double Y) {
    if (m < 0 || n < 0) throw std::invalid_argument("basis_function: negative index");
    if (n < m) return std::conj(basis_function(n, m, theta, X, Y));
    const double rho2 = X * X + Y * Y;
    const double z = 2.0 * rho2 / theta;
    const int d = n - m;
    const double norm = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
    const cplx w = std::sqrt(2.0 / theta) * cplx(X, Y);
    cplx wd = 1.0;
    for (int i = 0; i < d; ++i) wd *= w;
    const double sign = m % 2 == 0 ? 1.0 : -1.0;
    return 2.0 * sign * norm * wd * std::assoc_laguerre(static_cast<unsigned>(m), static_cast<unsigned>(d), z) *
           std::exp(-rho2 / theta);
}

/// Coefficients c_mn of sum c_mn f_mn on the plane (axis_x, axis_y) with Theta^{xy} = theta > 0.
struct BasisCoefficients {
    Matrix c;
    double theta = 1.0;
    int axis_x = 0, axis_y = 1;

    [[nodiscard]] int truncation() const { return static_cast<int>(c.rows()); }

    static BasisCoefficients unit(int m, int n, int N, double theta, int ax = 0, int ay = 1) {
        BasisCoefficients b{Matrix::Zero(N, N), theta, ax, ay};
        b.c(m, n) = 1.0;
        return b;
    }

    [[nodiscard]] cplx evaluate(std::span<const double> x) const {
        const double X = x[static_cast<std::size_t>(axis_x)], Y = x[static_cast<std::size_t>(axis_y)];
        cplx acc = 0.0;
        for (Eigen::Index m = 0; m < c.rows(); ++m)
            for (Eigen::Index n = 0; n < c.cols(); ++n)
                if (c(m, n) != 0.0) acc += c(m, n) * basis_function(static_cast<int>(m), static_cast<int>(n), theta, X, Y);
        return acc;
    }
};

/// Product in the matrix basis: a plain matrix product (exact for the truncated coefficients).
inline BasisCoefficients star_matrix_basis(const BasisCoefficients& a, const BasisCoefficients& b) {
    if (a.truncation() < 1 || b.truncation() < 1) throw std::invalid_argument("star_matrix_basis: truncation N < 1");
    if (a.c.rows() != a.c.cols() || b.c.rows() != b.c.cols() || a.c.rows() != b.c.rows())
        throw std::invalid_argument("star_matrix_basis: coefficient matrices must be square with equal truncation");
    if (a.theta != b.theta || a.axis_x != b.axis_x || a.axis_y != b.axis_y)
        throw std::invalid_argument("star_matrix_basis: operands live on different planes");
    return {a.c * b.c, a.theta, a.axis_x, a.axis_y};
}

/// Largest singular value of the truncated left-multiplication operator, i.e. of the coefficient matrix.
inline double operator_norm(const BasisCoefficients& a) {
    Eigen::JacobiSVD<Matrix> svd(a.c);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// ---------------------------------------------------------------------------------------------
// Elements

/// A function in sampled, expression (callable) or matrix-basis form.
class MoyalElement {
public:
    enum class Kind { sampled, expression, coefficients };

    static MoyalElement sampled(ScalarField f) { return MoyalElement(std::move(f)); }
    static MoyalElement expression(PointFunction f, std::string text = {}) {
        if (!f) throw std::invalid_argument("MoyalElement: empty expression");
        MoyalElement e{std::move(f)};
        e.text_ = std::move(text);
        return e;
    }
    static MoyalElement coefficients(BasisCoefficients c) { return MoyalElement(std::move(c)); }

    [[nodiscard]] Kind kind() const { return static_cast<Kind>(form_.index()); }
    [[nodiscard]] const std::string& text() const { return text_; }

    /// Pointwise evaluator (expression and coefficient forms).
    [[nodiscard]] PointFunction function() const {
        if (const auto* f = std::get_if<PointFunction>(&form_)) return *f;
        if (const auto* b = std::get_if<BasisCoefficients>(&form_)) {
            auto copy = *b;
            return [copy](std::span<const double> x) { return copy.evaluate(x); };
        }
        throw std::invalid_argument("MoyalElement: sampled elements cannot be evaluated off the lattice");
    }

    [[nodiscard]] ScalarField sample(const Lattice& lat) const {
        if (const auto* s = std::get_if<ScalarField>(&form_)) {
            if (!(s->lattice() == lat)) throw std::invalid_argument("MoyalElement: sampled on a different lattice");
            return *s;
        }
        return ScalarField::sample(lat, function());
    }

    [[nodiscard]] const BasisCoefficients& basis() const { return std::get<BasisCoefficients>(form_); }

private:
    explicit MoyalElement(ScalarField f) : form_(std::move(f)) {}
    explicit MoyalElement(PointFunction f) : form_(std::move(f)) {}
    explicit MoyalElement(BasisCoefficients c) : form_(std::move(c)) {}
    std::variant<ScalarField, PointFunction, BasisCoefficients> form_;
    std::string text_;
};

// ---------------------------------------------------------------------------------------------
// FFT helpers

namespace detail {

/// In-place unnormalized multi-dimensional DFT (row-major, last axis fastest), forward sign e^{-2 pi i jk/N}.
inline void fft_nd(std::vector<cplx>& data, const std::vector<int>& shape, bool inverse) {
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::size_t stride = data.size();
    std::vector<cplx> line, out;
    for (std::size_t a = 0; a < shape.size(); ++a) {
        const auto n = static_cast<std::size_t>(shape[a]);
        stride /= n;
        const std::size_t block = n * stride;
        line.resize(n);
        for (std::size_t outer = 0; outer < data.size(); outer += block)
            for (std::size_t inner = 0; inner < stride; ++inner) {
                const std::size_t base = outer + inner;
                for (std::size_t j = 0; j < n; ++j) line[j] = data[base + j * stride];
                if (inverse)
                    fft.inv(out, line);
                else
                    fft.fwd(out, line);
                for (std::size_t j = 0; j < n; ++j) data[base + j * stride] = out[j];
            }
    }
}

/// Signed frequency index of DFT bin j out of n.
inline int signed_mode(int j, int n) { return j < (n + 1) / 2 ? j : j - n; }

inline std::vector<int> unravel(std::size_t flat, const std::vector<int>& shape) {
    std::vector<int> idx(shape.size());
    for (std::size_t a = shape.size(); a-- > 0;) {
        idx[a] = static_cast<int>(flat % static_cast<std::size_t>(shape[a]));
        flat /= static_cast<std::size_t>(shape[a]);
    }
    return idx;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Quadrature engine

struct QuadratureConfig {
    double half_width = 8.0;  ///< box [-L, L)^k on the noncommutative axes
    int points = 128;         ///< grid points per axis
    double decay_ratio = 1e-8;
};

struct QuadratureResult {
    cplx value = 0.0;
    double error_estimate = 0.0;  ///< |value(M) - value(M/2)|
};

namespace detail {

/// max |fn| on the box faces divided by max |fn| on the grid (spectators fixed at x).
inline double edge_ratio(const PointFunction& fn, std::span<const double> x, const std::vector<int>& axes, double L,
                         int M) {
    const std::vector<int> shape(axes.size(), M);
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    const double hs = 2.0 * L / M;
    std::vector<double> y(x.begin(), x.end());
    double edge = 0.0, peak = 0.0;
    for (std::size_t f = 0; f < total; ++f) {
        const auto idx = unravel(f, shape);
        bool on_edge = false;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            y[static_cast<std::size_t>(axes[a])] = -L + idx[a] * hs;
            on_edge = on_edge || idx[a] == 0 || idx[a] == M - 1;
        }
        const double v = std::abs(fn(y));
        peak = std::max(peak, v);
        if (on_edge) edge = std::max(edge, v);
    }
    return peak > 0.0 ? edge / peak : 0.0;
}

inline cplx quadrature_core(const PointFunction& f, const PointFunction& h, const ThetaMatrix& theta,
                            std::span<const double> x, const std::vector<int>& axes, double L, int M) {
    const std::size_t k = axes.size();
    const std::vector<int> shape(k, M);
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    const double hs = 2.0 * L / M;
    const double du = std::numbers::pi / L;

    std::vector<double> y(x.begin(), x.end());
    std::vector<cplx> hh(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        const auto idx = unravel(flat, shape);
        for (std::size_t a = 0; a < k; ++a) y[static_cast<std::size_t>(axes[a])] = -L + idx[a] * hs;
        hh[flat] = h(y);
    }
    fft_nd(hh, shape, false);

    std::vector<double> u(k);
    cplx acc = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        const auto idx = unravel(flat, shape);
        double phase = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            u[a] = signed_mode(idx[a], M) * du;
            phase += u[a] * (x[static_cast<std::size_t>(axes[a])] + L);
        }
        for (std::size_t a = 0; a < k; ++a) {
            double shift = 0.0;
            for (std::size_t b = 0; b < k; ++b) shift += theta(axes[a], axes[b]) * u[b];
            y[static_cast<std::size_t>(axes[a])] = x[static_cast<std::size_t>(axes[a])] - 0.5 * shift;
        }
        acc += f(y) * std::polar(1.0, phase) * hh[flat];
    }
    return acc / static_cast<double>(total);
}

}  // namespace detail

/// (f * h)(x) by the oscillatory integral; refuses inputs that do not decay at the box faces.
inline QuadratureResult star_quadrature(const PointFunction& f, const PointFunction& h, const ThetaMatrix& theta,
                                        std::span<const double> x, const QuadratureConfig& cfg = {},
                                        bool estimate_error = true) {
    if (static_cast<int>(x.size()) != theta.dim())
        throw std::invalid_argument("star_quadrature: point dimension differs from Theta");
    const auto axes = theta.noncommutative_axes();
    if (axes.empty()) return {f(x) * h(x), 0.0};
    if (cfg.points < 16 || cfg.points % 2 != 0)
        throw std::invalid_argument("star_quadrature: points must be even and >= 16");
    for (const auto* fn : {&f, &h}) {
        const double r = detail::edge_ratio(*fn, x, axes, cfg.half_width, cfg.points);
        if (r > cfg.decay_ratio)
            throw std::domain_error("star_quadrature: input does not decay on the quadrature box (edge/peak = " +
                                    format_double(r) + " > " + format_double(cfg.decay_ratio) +
                                    "); the integral is ill-conditioned");
    }
    QuadratureResult r;
    r.value = detail::quadrature_core(f, h, theta, x, axes, cfg.half_width, cfg.points);
    if (estimate_error)
        r.error_estimate =
            std::abs(r.value - detail::quadrature_core(f, h, theta, x, axes, cfg.half_width, cfg.points / 2));
    return r;
}

// ---------------------------------------------------------------------------------------------
// Twisted engine

struct TwistedResult {
    ScalarField value;
    double tail_fraction = 0.0;  ///< max of input spectral tails and wrapped product energy
    bool aliasing_warning = false;
};

inline constexpr double kAliasingThreshold = 1e-6;

/// Periodic-lattice product: per slice of spectator coordinates, a double sum over the Fourier modes of the
/// noncommutative axes with twist e^{-(i/2) k.Theta k'}. Output modes K = k + k' wrap cyclically, so for
/// Theta = 0 the result is exactly the pointwise product; the wrapped energy is reported as aliasing.
inline TwistedResult star_twisted(const ScalarField& f, const ScalarField& h, const ThetaMatrix& theta) {
    f.require_same(h);
    const auto& lat = f.lattice();
    if (lat.boundary() != Boundary::periodic) throw std::invalid_argument("star_twisted: periodic lattice required");
    if (lat.dim() != theta.dim()) throw std::invalid_argument("star_twisted: Theta dimension differs from the lattice");
    const auto axes = theta.noncommutative_axes();
    if (axes.empty()) return {f * h, 0.0, false};

    const std::size_t k = axes.size();
    std::vector<int> shape(k);
    std::vector<double> period(k);
    for (std::size_t a = 0; a < k; ++a) {
        shape[a] = lat.points(axes[a]);
        period[a] = lat.axis(axes[a]).max - lat.axis(axes[a]).min;
    }
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);

    // signed modes and wavenumbers for every bin
    std::vector<std::vector<int>> modes(total);
    std::vector<std::vector<double>> wave(total);
    for (std::size_t b = 0; b < total; ++b) {
        const auto idx = detail::unravel(b, shape);
        modes[b].resize(k);
        wave[b].resize(k);
        for (std::size_t a = 0; a < k; ++a) {
            modes[b][a] = detail::signed_mode(idx[a], shape[a]);
            wave[b][a] = 2.0 * std::numbers::pi * modes[b][a] / period[a];
        }
    }
    auto tail = [&](const std::vector<cplx>& spec) {
        double all = 0.0, outer = 0.0;
        for (std::size_t b = 0; b < total; ++b) {
            const double e = std::norm(spec[b]);
            all += e;
            bool high = false;
            for (std::size_t a = 0; a < k; ++a) high = high || 4 * std::abs(modes[b][a]) > shape[a];
            if (high) outer += e;
        }
        return all > 0.0 ? outer / all : 0.0;
    };
    // site offset of each bin within a slice
    std::vector<std::size_t> offset(total);
    for (std::size_t b = 0; b < total; ++b) {
        const auto idx = detail::unravel(b, shape);
        std::size_t o = 0;
        for (std::size_t a = 0; a < k; ++a) o += lat.stride(axes[a]) * static_cast<std::size_t>(idx[a]);
        offset[b] = o;
    }

    // per-axis tables: unsigned bin index, wavenumber, (i1 + i2) mod n, and whether the signed mode sum leaves the band
    std::vector<std::vector<int>> index(total);
    for (std::size_t b = 0; b < total; ++b) index[b] = detail::unravel(b, shape);
    std::vector<std::vector<double>> axis_wave(k);
    std::vector<std::vector<cplx>> axis_phase(k);
    std::vector<std::vector<std::size_t>> sum_index(k);
    std::vector<std::vector<char>> leaves_band(k);
    for (std::size_t a = 0; a < k; ++a) {
        const int n = shape[a];
        const int lo = -(n / 2), hi = (n - 1) / 2;
        axis_phase[a].resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) axis_wave[a].push_back(2.0 * std::numbers::pi * detail::signed_mode(i, n) / period[a]);
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2) {
                const int m = detail::signed_mode(i1, n) + detail::signed_mode(i2, n);
                sum_index[a].push_back(static_cast<std::size_t>((i1 + i2) % n));
                leaves_band[a].push_back(m < lo || m > hi);
            }
    }

    Vector out(static_cast<Eigen::Index>(lat.sites()));
    TwistedResult res{ScalarField::constant(lat, 0.0), 0.0, false};
    std::vector<cplx> fs(total), hs(total), acc(total);
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        bool slice_origin = true;
        for (int a : axes) slice_origin = slice_origin && lat.index(s, a) == 0;
        if (!slice_origin) continue;
        for (std::size_t b = 0; b < total; ++b) {
            fs[b] = f[s + offset[b]];
            hs[b] = h[s + offset[b]];
        }
        detail::fft_nd(fs, shape, false);
        detail::fft_nd(hs, shape, false);
        const double norm = 1.0 / static_cast<double>(total);
        for (std::size_t b = 0; b < total; ++b) {
            fs[b] *= norm;
            hs[b] *= norm;
        }
        res.tail_fraction = std::max({res.tail_fraction, tail(fs), tail(hs)});

        std::fill(acc.begin(), acc.end(), cplx(0.0));
        double f_energy = 0.0, h_energy = 0.0, wrapped = 0.0;
        for (std::size_t b = 0; b < total; ++b) {
            f_energy += std::norm(fs[b]);
            h_energy += std::norm(hs[b]);
        }
        for (std::size_t b1 = 0; b1 < total; ++b1) {
            if (fs[b1] == 0.0) continue;
            // the phase -(1/2) k1.Theta k2 separates over the axes of k2
            for (std::size_t c = 0; c < k; ++c) {
                double coef = 0.0;
                for (std::size_t a = 0; a < k; ++a) coef += wave[b1][a] * theta(axes[a], axes[c]);
                for (int i = 0; i < shape[c]; ++i) axis_phase[c][static_cast<std::size_t>(i)] = std::polar(1.0, -0.5 * coef * axis_wave[c][static_cast<std::size_t>(i)]);
            }
            const double f_e = std::norm(fs[b1]);
            for (std::size_t b2 = 0; b2 < total; ++b2) {
                cplx term = fs[b1] * hs[b2];
                std::size_t flat = 0;
                bool wraps = false;
                for (std::size_t a = 0; a < k; ++a) {
                    const auto n = static_cast<std::size_t>(shape[a]);
                    const std::size_t pair = static_cast<std::size_t>(index[b1][a]) * n + static_cast<std::size_t>(index[b2][a]);
                    term *= axis_phase[a][static_cast<std::size_t>(index[b2][a])];
                    flat = flat * n + sum_index[a][pair];
                    wraps = wraps || leaves_band[a][pair];
                }
                if (wraps) wrapped += f_e * std::norm(hs[b2]);
                acc[flat] += term;
            }
        }
        const double all = f_energy * h_energy;
        if (all > 0.0) res.tail_fraction = std::max(res.tail_fraction, wrapped / all);
        detail::fft_nd(acc, shape, true);
        for (std::size_t b = 0; b < total; ++b) out(static_cast<Eigen::Index>(s + offset[b])) = acc[b];
    }
    res.value = ScalarField(lat, std::move(out));
    res.aliasing_warning = res.tail_fraction > kAliasingThreshold;
    return res;
}

// ---------------------------------------------------------------------------------------------
// Checks

struct TraceReport {
    cplx integral_star = 0.0;
    cplx integral_pointwise = 0.0;
    double residual = 0.0;
    double tail_fraction = 0.0;
};

/// |int f*h - int f h| with the twisted engine and lattice quadrature.
inline TraceReport trace_property(const MoyalElement& f, const MoyalElement& h, const ThetaMatrix& theta,
                                  const Lattice& lat) {
    const auto fs = f.sample(lat);
    const auto hs = h.sample(lat);
    const auto prod = star_twisted(fs, hs, theta);
    TraceReport r;
    r.integral_star = integrate(prod.value);
    r.integral_pointwise = integrate(fs * hs);
    r.residual = std::abs(r.integral_star - r.integral_pointwise);
    r.tail_fraction = prod.tail_fraction;
    return r;
}

/// Richardson extrapolation of a ladder A(sigma_i), sigma doubling, with error terms sigma^{-p_j};
/// needs one more rung than exponents.
inline cplx richardson(std::vector<cplx> ladder, const std::vector<double>& exponents) {
    if (ladder.size() != exponents.size() + 1)
        throw std::invalid_argument("richardson: ladder needs one more value than exponents");
    for (double p : exponents) {
        const double r = std::pow(2.0, p);
        for (std::size_t i = 0; i + 1 < ladder.size(); ++i) ladder[i] = (r * ladder[i + 1] - ladder[i]) / (r - 1.0);
        ladder.pop_back();
    }
    return ladder[0];
}

/// Gaussian-damped coordinate x^mu exp(-|x|^2 / sigma).
inline PointFunction damped_coordinate(int mu, double sigma) {
    return [mu, sigma](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return cplx(x[static_cast<std::size_t>(mu)] * std::exp(-r2 / sigma));
    };
}

struct CommutationReport {
    int mu = 0, nu = 0;
    std::vector<double> sigmas;
    std::vector<cplx> ladder;
    cplx extrapolated = 0.0;
    cplx expected = 0.0;          ///< i Theta^{mu nu}
    double residual = 0.0;        ///< |extrapolated - expected|
    double quadrature_error = 0.0;
    std::optional<double> oracle_residual;  ///< origin + planar block: max |ladder - i theta s^4/(s^2+theta^2)^2|
};

inline nlohmann::json to_json(const CommutationReport& r) {
    nlohmann::json j{{"mu", r.mu},
                     {"nu", r.nu},
                     {"sigmas", r.sigmas},
                     {"extrapolated", {r.extrapolated.real(), r.extrapolated.imag()}},
                     {"expected", {r.expected.real(), r.expected.imag()}},
                     {"residual", r.residual},
                     {"quadrature_error", r.quadrature_error}};
    if (r.oracle_residual) j["oracle_residual"] = *r.oracle_residual;
    return j;
}

/// [x^mu, x^nu]_* at a point, from damped coordinates on a doubling sigma ladder extrapolated to
/// sigma -> infinity. At the origin the ladder expands in sigma^{-2} ({8, 16, 32}, exponents 2, 4);
/// elsewhere in sigma^{-1} ({16, ..., 128}, exponents 1, 2, 3).
inline CommutationReport commutation_check(const ThetaMatrix& theta, int mu, int nu, std::span<const double> x,
                                           double grid_spacing = 0.5) {
    CommutationReport r;
    r.mu = mu;
    r.nu = nu;
    r.expected = I_unit * theta(mu, nu);
    bool origin = true;
    for (double v : x) origin = origin && v == 0.0;
    r.sigmas = origin ? std::vector<double>{8.0, 16.0, 32.0} : std::vector<double>{16.0, 32.0, 64.0, 128.0};
    const auto plane = theta.planar_block();
    const bool closed_form = origin && plane && ((plane->x == mu && plane->y == nu) || (plane->x == nu && plane->y == mu));
    double oracle = 0.0;
    for (double sigma : r.sigmas) {
        double reach = 0.0;
        for (double v : x) reach = std::max(reach, std::abs(v));
        QuadratureConfig cfg;
        cfg.half_width = std::sqrt(40.0 * sigma) + reach;
        cfg.points = 2 * static_cast<int>(std::ceil(cfg.half_width / grid_spacing));
        const auto a = damped_coordinate(mu, sigma), b = damped_coordinate(nu, sigma);
        const auto ab = star_quadrature(a, b, theta, x, cfg);
        const auto ba = star_quadrature(b, a, theta, x, cfg);
        const cplx c = ab.value - ba.value;
        r.ladder.push_back(c);
        r.quadrature_error = std::max({r.quadrature_error, ab.error_estimate, ba.error_estimate});
        if (closed_form) {
            const double t = plane->theta, s2 = sigma * sigma;
            const double sign = plane->x == mu ? 1.0 : -1.0;
            oracle = std::max(oracle, std::abs(c - sign * I_unit * t * s2 * s2 / ((s2 + t * t) * (s2 + t * t))));
        }
    }
    r.extrapolated = richardson(r.ladder, origin ? std::vector<double>{2.0, 4.0} : std::vector<double>{1.0, 2.0, 3.0});
    r.residual = std::abs(r.extrapolated - r.expected);
    if (closed_form) r.oracle_residual = oracle;
    return r;
}

struct ProjectionResult {
    BasisCoefficients coefficients;
    double leakage = 0.0;  ///< relative L2 norm of the part not captured by the truncation
};

/// c_mn = (2 pi theta)^{-1} <f_mn, f> on the plane, spectator coordinates taken from `base`.
inline ProjectionResult project_to_basis(const PointFunction& f, const ThetaMatrix::Plane& plane, int N,
                                         std::span<const double> base, double half_width = 8.0, int points = 128) {
    if (N < 1) throw std::invalid_argument("project_to_basis: N < 1");
    const double hs = 2.0 * half_width / points;
    std::vector<double> y(base.begin(), base.end());
    std::vector<cplx> vals(static_cast<std::size_t>(points) * static_cast<std::size_t>(points));
    std::vector<std::pair<double, double>> xy(vals.size());
    for (int i = 0; i < points; ++i)
        for (int j = 0; j < points; ++j) {
            const std::size_t s = static_cast<std::size_t>(i) * static_cast<std::size_t>(points) + static_cast<std::size_t>(j);
            xy[s] = {-half_width + i * hs, -half_width + j * hs};
            y[static_cast<std::size_t>(plane.x)] = xy[s].first;
            y[static_cast<std::size_t>(plane.y)] = xy[s].second;
            vals[s] = f(y);
        }
    ProjectionResult r{{Matrix::Zero(N, N), plane.theta, plane.x, plane.y}, 0.0};
    std::vector<cplx> recon(vals.size(), 0.0);
    const double scale = hs * hs / (2.0 * std::numbers::pi * plane.theta);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) {
            cplx acc = 0.0;
            std::vector<cplx> fmn(vals.size());
            for (std::size_t s = 0; s < vals.size(); ++s) {
                fmn[s] = basis_function(m, n, plane.theta, xy[s].first, xy[s].second);
                acc += std::conj(fmn[s]) * vals[s];
            }
            const cplx c = acc * scale;
            r.coefficients.c(m, n) = c;
            for (std::size_t s = 0; s < vals.size(); ++s) recon[s] += c * fmn[s];
        }
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < vals.size(); ++s) {
        num += std::norm(vals[s] - recon[s]);
        den += std::norm(vals[s]);
    }
    r.leakage = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return r;
}

struct EngineAgreement {
    int products = 0;
    double max_error = 0.0;
    int worst_m = 0, worst_n = 0, worst_k = 0, worst_l = 0;
};

/// Quadrature of f_mn * f_kl against delta_nk f_ml for m, n < N, k in {n, (n+1) mod N}, l = (m+k) mod N,
/// at the given points of the plane (other coordinates zero).
inline EngineAgreement basis_quadrature_agreement(const ThetaMatrix& theta, int N,
                                                  const std::vector<std::pair<double, double>>& points,
                                                  const QuadratureConfig& cfg) {
    const auto plane = theta.planar_block();
    if (!plane) throw std::invalid_argument("basis_quadrature_agreement: Theta needs a single planar block");
    EngineAgreement agg;
    std::vector<double> x(static_cast<std::size_t>(theta.dim()), 0.0);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n)
            for (int k : {n, (n + 1) % N}) {
                const int l = (m + k) % N;
                const auto fa = MoyalElement::coefficients(BasisCoefficients::unit(m, n, N, plane->theta, plane->x, plane->y)).function();
                const auto fb = MoyalElement::coefficients(BasisCoefficients::unit(k, l, N, plane->theta, plane->x, plane->y)).function();
                ++agg.products;
                for (const auto& [X, Y] : points) {
                    x[static_cast<std::size_t>(plane->x)] = X;
                    x[static_cast<std::size_t>(plane->y)] = Y;
                    const cplx q = star_quadrature(fa, fb, theta, x, cfg, false).value;
                    const cplx exact = n == k ? basis_function(m, l, plane->theta, X, Y) : cplx(0.0);
                    const double err = std::abs(q - exact);
                    if (err > agg.max_error) {
                        agg.max_error = err;
                        agg.worst_m = m;
                        agg.worst_n = n;
                        agg.worst_k = k;
                        agg.worst_l = l;
                    }
                }
            }
    return agg;
}

}  // namespace lnc
