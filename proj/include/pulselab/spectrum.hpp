#pragma once

// Spectra of the linearized delayed models.
//
// The characteristic function used throughout is
//     F(lambda) = det( S (lambda I - J0 - J1 e^{-lambda T}) ),
// with S dividing the fast rows by gamma. It is entire in lambda and equals
// the cleared-denominator characteristic equations up to the nonvanishing
// factor e^{-lambda T}.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <ostream>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "pulselab/error.hpp"
#include "pulselab/models.hpp"

namespace pulselab {

using cplx = std::complex<double>;

struct ValueAndDerivative {
    cplx value;
    cplx derivative;
};

namespace detail {

using CMat3 = std::array<std::array<cplx, 3>, 3>;

inline cplx det(const CMat3& m, std::size_t n) {
    if (n == 1) return m[0][0];
    if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace detail

/// det(S(lambda I - J0 - J1 e^{-lambda T})) and its lambda-derivative.
class CharacteristicFunction {
public:
    CharacteristicFunction() = default;
    explicit CharacteristicFunction(Linearization lin) : lin_(lin) {}

    [[nodiscard]] const Linearization& linearization() const noexcept { return lin_; }

    [[nodiscard]] cplx operator()(cplx lambda) const { return detail::det(matrix(lambda), lin_.dim); }

    /// Derivative by Jacobi's formula (sum of column-replaced determinants).
    [[nodiscard]] ValueAndDerivative evaluate(cplx lambda) const {
        const auto M = matrix(lambda);
        const cplx E = std::exp(-lambda * lin_.delay);
        const std::size_t n = lin_.dim;
        cplx d = 0;
        for (std::size_t col = 0; col < n; ++col) {
            auto Mc = M;
            for (std::size_t i = 0; i < n; ++i) {
                const double sc = scale(i);
                Mc[i][col] = sc * ((i == col ? 1.0 : 0.0) + lin_.delay * lin_.J1[i][col] * E);
            }
            d += detail::det(Mc, n);
        }
        return {detail::det(M, n), d};
    }

private:
    [[nodiscard]] double scale(std::size_t row) const { return lin_.fast[row] ? 1.0 / lin_.gamma : 1.0; }

    [[nodiscard]] detail::CMat3 matrix(cplx lambda) const {
        const cplx E = std::exp(-lambda * lin_.delay);
        detail::CMat3 M{};
        for (std::size_t i = 0; i < lin_.dim; ++i) {
            const double sc = scale(i);
            for (std::size_t j = 0; j < lin_.dim; ++j)
                M[i][j] = sc * ((i == j ? lambda : cplx(0)) - lin_.J0[i][j] - lin_.J1[i][j] * E);
        }
        return M;
    }

    Linearization lin_;
};

inline CharacteristicFunction char_function(const ModelInstance& model, EquilibriumKind kind) {
    validate(model);
    const auto eq = equilibrium(model, kind);
    return CharacteristicFunction(linearize(model, eq.state));
}

inline cplx char_value(const ModelInstance& model, EquilibriumKind kind, cplx lambda) {
    return char_function(model, kind)(lambda);
}

// ---------------------------------------------------------------------------
// Roots

enum class RootClass { stable, unstable, neutral };

constexpr std::string_view to_string(RootClass c) {
    switch (c) {
        case RootClass::stable: return "stable";
        case RootClass::unstable: return "unstable";
        case RootClass::neutral: break;
    }
    return "neutral";
}

inline constexpr double kNeutralBand = 1e-8;

struct ComplexRoot {
    double x = 0;
    double omega = 0;
    /// Newton step length |F/F'| at the root.
    double residual = 0;
    RootClass cls = RootClass::stable;

    [[nodiscard]] cplx lambda() const { return {x, omega}; }
};

inline RootClass classify(double x) {
    if (std::abs(x) < kNeutralBand) return RootClass::neutral;
    return x < 0 ? RootClass::stable : RootClass::unstable;
}

struct Box {
    double x_min = -5;
    double x_max = 5;
    double omega_max = 10;
};

struct RootSearchOptions {
    std::size_t nx = 41;
    /// 0 selects max(200, 8 seeds per 2*pi/T of omega range)
    std::size_t nomega = 0;
    double delay = 1;
    double dedup = 1e-6;
    std::size_t winding_points = 10000;
    bool verify = true;
    unsigned workers = 1;
};

namespace detail {

template <class F>
bool newton_polish(const F& f, cplx& z, double& residual, int max_iter = 60) {
    for (int it = 0; it < max_iter; ++it) {
        const auto [v, d] = f.evaluate(z);
        if (!std::isfinite(std::abs(v)) || std::abs(d) == 0 || !std::isfinite(std::abs(d))) return false;
        const cplx step = v / d;
        z -= step;
        residual = std::abs(step);
        if (residual <= 1e-14 * std::max(1.0, std::abs(z))) {
            residual = std::abs(f.evaluate(z).value / f.evaluate(z).derivative);
            return true;
        }
    }
    return residual <= 1e-9 * std::max(1.0, std::abs(z));
}

inline double wrap_angle(double a) { return std::remainder(a, 2 * std::numbers::pi); }

/// Accumulated arg F along the segment [a, b], refined until every increment
/// stays below pi/8.
template <class F>
double arg_increment(const F& f, cplx a, cplx b, cplx fa, cplx fb, int depth) {
    const double d = wrap_angle(std::arg(fb) - std::arg(fa));
    if (std::abs(d) < std::numbers::pi / 8 || depth > 40) return d;
    const cplx m = 0.5 * (a + b);
    const cplx fm = f(m);
    return arg_increment(f, a, m, fa, fm, depth + 1) + arg_increment(f, m, b, fm, fb, depth + 1);
}

}  // namespace detail

/// Argument-principle count of zeros of f inside the rectangle
/// [x_min, x_max] x [omega_lo, omega_hi].
template <class F>
long winding_number(const F& f, double x_min, double x_max, double omega_lo, double omega_hi, std::size_t points) {
    const std::array<cplx, 5> corners{cplx(x_min, omega_lo), cplx(x_max, omega_lo), cplx(x_max, omega_hi),
                                      cplx(x_min, omega_hi), cplx(x_min, omega_lo)};
    std::array<double, 4> len{};
    double perimeter = 0;
    for (int s = 0; s < 4; ++s) perimeter += (len[s] = std::abs(corners[s + 1] - corners[s]));
    double total = 0;
    for (int s = 0; s < 4; ++s) {
        const auto n = std::max<std::size_t>(4, static_cast<std::size_t>(points * len[s] / perimeter));
        cplx za = corners[s];
        cplx fa = f(za);
        for (std::size_t i = 1; i <= n; ++i) {
            const cplx zb = corners[s] + (corners[s + 1] - corners[s]) * (static_cast<double>(i) / n);
            const cplx fb = f(zb);
            total += detail::arg_increment(f, za, zb, fa, fb, 0);
            za = zb;
            fa = fb;
        }
    }
    return std::lround(total / (2 * std::numbers::pi));
}

/// Roots of a real-on-real-axis entire function inside the box (omega >= 0
/// half stored). `f` must provide operator()(cplx) and evaluate(cplx).
template <class F>
std::vector<ComplexRoot> find_roots(const F& f, const Box& box, const RootSearchOptions& opt = {}) {
    if (!(box.x_max > box.x_min) || !(box.omega_max > 0) || !std::isfinite(box.x_min) || !std::isfinite(box.x_max) ||
        !std::isfinite(box.omega_max))
        throw ValidationError("find_roots: box must be finite and non-empty");
    const std::size_t nx = std::max<std::size_t>(opt.nx, 2);
    std::size_t nw = opt.nomega;
    if (nw == 0) {
        const double per_period = box.omega_max / (2 * std::numbers::pi / opt.delay);
        nw = std::max<std::size_t>(200, static_cast<std::size_t>(std::ceil(8 * per_period)));
    }
    const double slack = 1e-9 * std::max({1.0, std::abs(box.x_min), std::abs(box.x_max), box.omega_max});

    auto polish_range = [&](std::size_t j0, std::size_t j1, std::vector<ComplexRoot>& out) {
        for (std::size_t j = j0; j < j1; ++j) {
            const double w = box.omega_max * static_cast<double>(j) / static_cast<double>(nw - 1);
            for (std::size_t i = 0; i < nx; ++i) {
                const double x = box.x_min + (box.x_max - box.x_min) * static_cast<double>(i) / (nx - 1);
                cplx z(x, w);
                double res = 0;
                if (!detail::newton_polish(f, z, res)) continue;
                if (std::abs(z.imag()) < 1e-8) {
                    // snap onto the real axis and repolish there
                    z = cplx(z.real(), 0);
                    if (!detail::newton_polish(f, z, res)) continue;
                    z = cplx(z.real(), 0);
                }
                if (z.imag() < 0) z = std::conj(z);
                if (z.real() < box.x_min - slack || z.real() > box.x_max + slack || z.imag() > box.omega_max + slack)
                    continue;
                out.push_back({z.real(), z.imag(), res, classify(z.real())});
            }
        }
    };

    std::vector<ComplexRoot> raw;
    const unsigned workers = std::max(1u, opt.workers);
    if (workers == 1) {
        polish_range(0, nw, raw);
    } else {
        std::vector<std::vector<ComplexRoot>> parts(workers);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] { polish_range(nw * w / workers, nw * (w + 1) / workers, parts[w]); });
        for (auto& t : pool) t.join();
        for (auto& p : parts) raw.insert(raw.end(), p.begin(), p.end());
    }

    std::sort(raw.begin(), raw.end(), [](const ComplexRoot& a, const ComplexRoot& b) {
        return a.omega != b.omega ? a.omega < b.omega : a.x < b.x;
    });
    std::vector<ComplexRoot> roots;
    for (const auto& r : raw) {
        bool dup = false;
        for (auto it = roots.rbegin(); it != roots.rend() && r.omega - it->omega <= opt.dedup; ++it)
            if (std::abs(r.lambda() - it->lambda()) <= opt.dedup * std::max(1.0, std::abs(r.lambda()))) {
                dup = true;
                break;
            }
        if (!dup) roots.push_back(r);
    }
    std::sort(roots.begin(), roots.end(), [](const ComplexRoot& a, const ComplexRoot& b) {
        return a.x != b.x ? a.x > b.x : a.omega < b.omega;
    });

    if (opt.verify) {
        long expected = 0;
        for (const auto& r : roots) expected += r.omega == 0 ? 1 : 2;
        const long w = winding_number(f, box.x_min, box.x_max, -box.omega_max, box.omega_max, opt.winding_points);
        if (w != expected) throw WindingMismatch(static_cast<std::size_t>(expected), w);
    }
    return roots;
}

inline Box standard_box(const ModelInstance& model) {
    return {-5.0, 5.0, 4 * std::numbers::pi * model.p.gamma / model.p.T};
}

inline std::vector<ComplexRoot> find_roots_in_box(const ModelInstance& model, EquilibriumKind kind, const Box& box,
                                                  RootSearchOptions opt = {}) {
    opt.delay = model.p.T;
    return find_roots(char_function(model, kind), box, opt);
}

/// Rightmost root in the standard box; ties go to the smaller frequency.
inline ComplexRoot leading_root(const ModelInstance& model, EquilibriumKind kind, RootSearchOptions opt = {}) {
    const auto roots = find_roots_in_box(model, kind, standard_box(model), opt);
    if (roots.empty()) throw NoRoot("leading_root: no roots in the standard box");
    return roots.front();
}

inline void write_roots_csv(const std::vector<ComplexRoot>& roots, std::ostream& os) {
    os << "re,im,residual,class\n";
    char buf[128];
    for (const auto& r : roots) {
        std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.6g,", r.x, r.omega, r.residual);
        os << buf << to_string(r.cls) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Asymptotic curves carrying the weak and strong spectra

enum class CurveKind { weakZero, weakPositive, strongPositive };

constexpr std::string_view to_string(CurveKind k) {
    switch (k) {
        case CurveKind::weakZero: return "weakZero";
        case CurveKind::weakPositive: return "weakPositive";
        case CurveKind::strongPositive: break;
    }
    return "strongPositive";
}

struct CurvePoint {
    double omega;
    double x;
};

struct SpectrumCurve {
    CurveKind kind = CurveKind::weakZero;
    std::vector<CurvePoint> points;
    ModelInstance model;
};

namespace detail {

/// P0 and P1 in det = P0 - e^{-lambda T} P1 for the matrix with the given
/// diagonal shifts. Exact because only the A row carries delayed terms.
inline std::pair<cplx, cplx> delay_split(const Linearization& lin, const std::array<cplx, 3>& diag,
                                         const std::array<bool, 3>& keep) {
    CMat3 M0{}, M1{};
    std::array<std::size_t, 3> idx{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < lin.dim; ++i)
        if (keep[i]) idx[n++] = i;
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t i = idx[a];
        const double sc = lin.fast[i] ? 1.0 / lin.gamma : 1.0;
        for (std::size_t b = 0; b < n; ++b) {
            const std::size_t j = idx[b];
            M0[a][b] = (a == b ? diag[i] : cplx(0)) - sc * lin.J0[i][j];
            M1[a][b] = M0[a][b] - sc * lin.J1[i][j];
        }
    }
    const cplx P0 = det(M0, n);
    return {P0, P0 - det(M1, n)};
}

}  // namespace detail

/// Weak curve x(omega), lambda = x + i gamma omega: the fast block evaluated
/// at lambda/gamma = i omega balances |e^{-lambda T}| = |P0/P1|.
inline SpectrumCurve weak_curve(const ModelInstance& model, EquilibriumKind kind, const std::vector<double>& omegas) {
    validate(model);
    const auto eq = equilibrium(model, kind);
    const auto lin = linearize(model, eq.state);
    SpectrumCurve curve{kind == EquilibriumKind::zeroA ? CurveKind::weakZero : CurveKind::weakPositive, {}, model};
    for (double w : omegas) {
        const std::array<cplx, 3> diag{cplx(0, w), cplx(0, w), cplx(0, w)};
        const auto [P0, P1] = detail::delay_split(lin, diag, lin.fast);
        curve.points.push_back({w, std::log(std::abs(P1) / std::abs(P0)) / lin.delay});
    }
    return curve;
}

/// Residual of the strong-spectrum relation at lambda = x + i omega: the fast
/// rows with lambda/gamma dropped, written as 2 ln|P1/P0| - 2 T x.
inline double strong_relation(const Linearization& lin, double x, double omega) {
    const cplx lam(x, omega);
    const std::array<cplx, 3> diag{lin.fast[0] ? cplx(0) : lam, lin.fast[1] ? cplx(0) : lam,
                                   lin.fast[2] ? cplx(0) : lam};
    const auto [P0, P1] = detail::delay_split(lin, diag, {true, true, true});
    return 2 * std::log(std::abs(P1)) - 2 * std::log(std::abs(P0)) - 2 * lin.delay * x;
}

/// Strong curve: every x in [-20, 5] solving the strong relation at each
/// omega; omegas without a solution are skipped.
inline SpectrumCurve strong_curve(const ModelInstance& model, const std::vector<double>& omegas,
                                  double x_lo = -20, double x_hi = 5) {
    validate(model);
    const auto eq = positive_equilibrium_exact(model);
    const auto lin = linearize(model, eq.state);
    SpectrumCurve curve{CurveKind::strongPositive, {}, model};
    for (double w : omegas) {
        auto g = [&](double x) { return strong_relation(lin, x, w); };
        for (const auto& [a, b] : sign_change_brackets(g, x_lo, x_hi, 500)) {
            const auto tol = [](double u, double v) { return std::abs(u - v) <= 1e-13 * std::max(1.0, std::abs(u)); };
            std::uintmax_t it = 200;
            const auto [lo, hi] = boost::math::tools::bisect(g, a, b, tol, it);
            curve.points.push_back({w, 0.5 * (lo + hi)});
        }
    }
    return curve;
}

inline void write_curve_csv(const SpectrumCurve& curve, std::ostream& os) {
    os << "omega,x\n";
    char buf[96];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%.15g,%.15g\n", p.omega, p.x);
        os << buf;
    }
}

}  // namespace pulselab
