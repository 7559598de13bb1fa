#pragma once

// Cascades of Hopf bifurcations of the zero-A and positive equilibria:
// numeric location from the characteristic equation at lambda = i omega and
// the closed-form large-gamma expansions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pulselab/error.hpp"
#include "pulselab/models.hpp"
#include "pulselab/numerics.hpp"
#include "pulselab/spectrum.hpp"

namespace pulselab {

enum class Provenance { numeric, asymptotic };

constexpr std::string_view to_string(Provenance p) { return p == Provenance::numeric ? "numeric" : "asymptotic"; }

struct HopfPoint {
    int n = 1;
    double omega = 0;
    /// g0 - g0* for g0-driven models, tau* - tau_death for competingFast
    double delta = 0;
    EquilibriumKind kind = EquilibriumKind::zeroA;
    Provenance provenance = Provenance::asymptotic;
    /// |F(i omega)| at the point (numeric only)
    double residual = 0;
};

/// Model at the bifurcation-parameter value belonging to offset delta.
inline ModelInstance at_offset(const ModelInstance& model, double delta) {
    const double th = threshold(model);
    return with_bifurcation_parameter(model, driven_by_death_rate(model.id) ? th - delta : th + delta);
}

namespace detail {

/// Coefficient c0 of the zero-A A-row, 1 + lambda/gamma + ... = K e^{-lambda T},
/// evaluated at threshold (K = c0 there).
inline double zero_row_coefficient(const ModelInstance& model) {
    if (model.id == ModelId::competingFast) return model.p.kappa * competing_zero_state(model.p).G;
    return model.p.kappa * threshold(model) / model.p.alpha;
}

inline void require_index(int n) {
    if (n < 1) throw ValidationError("Hopf index n must be >= 1");
}

}  // namespace detail

/// Zero-A cascade from the exact transcendental conditions.
///
/// g0 models: omega/gamma = -c0 tan(omega T), delta = g0*(1/cos(omega T) - 1).
/// competingFast: omega/gamma = -kappa G* sin(omega T), delta = kappa G*(1 - cos(omega T)).
/// The branch omega T in (2 pi n - pi/2, 2 pi n) is the one with delta > 0.
inline HopfPoint hopf_zero_numeric(const ModelInstance& model, int n) {
    detail::require_index(n);
    validate(model);
    const auto& p = model.p;
    const double c0 = detail::zero_row_coefficient(model);
    const bool sine = model.id == ModelId::competingFast;
    auto h = [&](double w) {
        const double u = w * p.T;
        return w / p.gamma + (sine ? c0 * std::sin(u) : c0 * std::tan(u));
    };
    const double pi = std::numbers::pi;
    const double hi = 2 * pi * n / p.T;
    double lo = (2 * pi * n - pi / 2) / p.T;
    // keep tan finite on the bracket
    lo += 1e-12 * hi;
    if (h(lo) >= 0)
        throw NoRoot("zero-A Hopf point n=" + std::to_string(n) + " does not exist (gamma too small for this n)");
    const double w = bisect_then_newton(h, lo, hi);
    HopfPoint hp;
    hp.n = n;
    hp.omega = w;
    hp.kind = EquilibriumKind::zeroA;
    hp.provenance = Provenance::numeric;
    hp.delta = sine ? c0 * (1 - std::cos(w * p.T)) : threshold(model) * (1 / std::cos(w * p.T) - 1);
    hp.residual = std::abs(char_function(at_offset(model, hp.delta), EquilibriumKind::zeroA)(cplx(0, w)));
    return hp;
}

inline HopfPoint hopf_zero_asymptotic(const ModelInstance& model, int n) {
    detail::require_index(n);
    validate(model);
    const auto& p = model.p;
    const double c0 = detail::zero_row_coefficient(model);
    const double eps = 1 / (c0 * p.gamma * p.T);
    const double base = 2 * std::numbers::pi * n / p.T;
    const double s = 2 * std::numbers::pi * n / (p.gamma * p.T);
    HopfPoint hp;
    hp.n = n;
    hp.kind = EquilibriumKind::zeroA;
    hp.provenance = Provenance::asymptotic;
    hp.omega = base * (1 - eps + eps * eps);
    if (model.id == ModelId::competingFast)
        hp.delta = s * s / (2 * c0);
    else
        hp.delta = p.alpha * p.alpha / (2 * p.kappa * p.kappa * threshold(model)) * s * s;
    return hp;
}

/// Large-gamma expansion of the positive-equilibrium cascade.
inline HopfPoint hopf_positive_asymptotic(const ModelInstance& model, int n) {
    detail::require_index(n);
    validate(model);
    const auto& p = model.p;
    const double pi = std::numbers::pi;
    const double wn = 2 * pi * n / p.T;
    const double s2 = std::pow(2 * pi * n / (p.gamma * p.T), 2);
    HopfPoint hp;
    hp.n = n;
    hp.kind = EquilibriumKind::positive;
    hp.provenance = Provenance::asymptotic;
    switch (model.id) {
        case ModelId::prototype:
        case ModelId::logisticQ: {
            const double gs = threshold(model);
            const double eps = p.alpha / (p.kappa * gs * p.gamma * p.T);
            // logisticQ: the competitor enters through mu*s, with beta to the first power
            const bool logistic = model.id == ModelId::logisticQ;
            const double ms = logistic ? p.mu * p.s : p.mu * p.q0 * p.s;
            const double b = logistic ? p.beta : p.beta * p.beta;
            const double lorentz = p.alpha * p.alpha + wn * wn;
            const double D = ms - b * p.kappa * gs * p.k / lorentz;
            const double num2 = b * p.kappa * gs * p.k * (2 * pi * pi * n * n - p.alpha * p.T) / (p.alpha * p.T * lorentz) + ms;
            hp.omega = wn * (1 - eps + eps * eps * num2 / D);
            hp.delta = s2 * (b * gs * p.kappa * p.k - p.alpha * p.alpha * ms) / (2 * p.kappa * p.kappa * gs * D);
            break;
        }
        case ModelId::logisticQG: {
            const double gs = threshold(model);
            const double eps = p.alpha / (p.gamma * p.T * p.kappa * gs);
            const double lorentz = gs * gs + wn * wn;
            const double ams = p.alpha * p.mu * p.s;
            const double D = ams - gs * gs * p.kappa * p.beta * p.k / lorentz;
            const double num2 = p.beta * gs * p.kappa * p.k * (2 * pi * pi * n * n - gs * p.T) / (p.T * lorentz) + ams;
            hp.omega = wn * (1 - eps + eps * eps * num2 / D);
            hp.delta = std::pow(2 * pi * n * p.alpha / (p.gamma * p.T * p.kappa), 2) / (2 * gs) *
                       (p.kappa * p.beta * p.k - ams) / D;
            break;
        }
        case ModelId::competingFast: {
            const auto z = competing_zero_state(p);
            const double u = p.g0 * p.r / z.G + z.G * p.m * p.nu;
            const double v = p.g0 * p.s / z.G + z.G * p.k * p.nu;
            const double F = p.f * u - p.mu * v + p.kappa * z.G * (p.k * p.r - p.m * p.s);
            hp.omega = wn * (1 - 1 / (z.G * p.T * p.kappa * p.gamma));
            const double top = p.m * (std::pow(wn * p.r, 2) / u + u);
            const double bottom = 2 * p.kappa * (p.g0 - p.alpha * z.G) * (wn * wn * p.r * (p.mu * p.s - p.f * p.r) / F - u);
            hp.delta = s2 * top / bottom;
            break;
        }
        case ModelId::reducedA:
        case ModelId::reducedB: {
            const double ratio = model.id == ModelId::reducedA ? wn / p.alpha : wn * p.kappa / p.alpha;
            hp.omega = wn * (1 - 1 / (p.gamma * p.T));
            hp.delta = -p.alpha / (2 * p.kappa) * s2 * (1 + ratio * ratio);
            break;
        }
    }
    return hp;
}

struct HopfNewtonOptions {
    int max_iter = 50;
    double tol = 1e-12;
    std::optional<HopfPoint> seed;
};

/// Solves Re F(i omega; delta) = Im F(i omega; delta) = 0 for (omega, delta)
/// by 2-D Newton with a central-difference Jacobian. The positive equilibrium
/// is recomputed exactly at every iterate.
inline HopfPoint hopf_positive_numeric(const ModelInstance& model, int n, const HopfNewtonOptions& opt = {}) {
    detail::require_index(n);
    validate(model);
    const HopfPoint seed = opt.seed ? *opt.seed : hopf_positive_asymptotic(model, n);
    const double th = threshold(model);
    const double sign = driven_by_death_rate(model.id) ? -1.0 : 1.0;

    // unknowns: omega and the bifurcation parameter itself
    auto residual = [&](double w, double par) -> std::array<double, 2> {
        const auto m = with_bifurcation_parameter(model, par);
        const cplx F = char_function(m, EquilibriumKind::positive)(cplx(0, w));
        return {F.real(), F.imag()};
    };
    auto safe_residual = [&](double w, double par, std::array<double, 2>& out) {
        try {
            out = residual(w, par);
            return std::isfinite(out[0]) && std::isfinite(out[1]);
        } catch (const Error&) {
            return false;
        }
    };

    double w = seed.omega;
    double par = th + sign * seed.delta;
    std::array<double, 2> r{};
    if (!safe_residual(w, par, r))
        throw NewtonFailure("Hopf n=" + std::to_string(n) + ": seed outside the domain of the positive equilibrium",
                            std::numeric_limits<double>::infinity());
    double rn = std::hypot(r[0], r[1]);
    for (int it = 0; it < opt.max_iter && rn > opt.tol; ++it) {
        const double hw = 1e-7 * std::max(1.0, std::abs(w));
        const double hp = 1e-7 * std::max(1.0, std::abs(par));
        std::array<double, 2> a{}, b{}, c{}, d{};
        if (!safe_residual(w + hw, par, a) || !safe_residual(w - hw, par, b) || !safe_residual(w, par + hp, c) ||
            !safe_residual(w, par - hp, d))
            throw NewtonFailure("Hopf n=" + std::to_string(n) + ": Jacobian stencil left the equilibrium domain", rn);
        const double j00 = (a[0] - b[0]) / (2 * hw), j10 = (a[1] - b[1]) / (2 * hw);
        const double j01 = (c[0] - d[0]) / (2 * hp), j11 = (c[1] - d[1]) / (2 * hp);
        const double det = j00 * j11 - j01 * j10;
        if (det == 0 || !std::isfinite(det)) throw NewtonFailure("Hopf n=" + std::to_string(n) + ": singular Jacobian", rn);
        const double dw = (j11 * r[0] - j01 * r[1]) / det;
        const double dp = (-j10 * r[0] + j00 * r[1]) / det;
        // backtrack until the residual decreases and the equilibrium still exists
        double step = 1;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, step *= 0.5) {
            std::array<double, 2> trial{};
            if (safe_residual(w - step * dw, par - step * dp, trial) && std::hypot(trial[0], trial[1]) < rn) {
                w -= step * dw;
                par -= step * dp;
                r = trial;
                rn = std::hypot(r[0], r[1]);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (!(rn <= 1e-10))
        throw NewtonFailure("Hopf n=" + std::to_string(n) + ": Newton did not converge in " +
                                std::to_string(opt.max_iter) + " iterations",
                            rn);
    HopfPoint out;
    out.n = n;
    out.omega = w;
    out.delta = sign * (par - th);
    out.kind = EquilibriumKind::positive;
    out.provenance = Provenance::numeric;
    out.residual = rn;
    return out;
}

inline HopfPoint hopf_numeric(const ModelInstance& model, EquilibriumKind kind, int n) {
    return kind == EquilibriumKind::zeroA ? hopf_zero_numeric(model, n) : hopf_positive_numeric(model, n);
}

inline HopfPoint hopf_asymptotic(const ModelInstance& model, EquilibriumKind kind, int n) {
    return kind == EquilibriumKind::zeroA ? hopf_zero_asymptotic(model, n) : hopf_positive_asymptotic(model, n);
}

// ---------------------------------------------------------------------------
// Tables

struct CascadeRow {
    int n = 0;
    EquilibriumKind kind = EquilibriumKind::zeroA;
    HopfPoint asymptotic;
    std::optional<HopfPoint> numeric;
    std::string error;

    [[nodiscard]] double delta_error_pct() const {
        return numeric ? 100 * std::abs(numeric->delta - asymptotic.delta) / std::abs(numeric->delta) : NAN;
    }
    [[nodiscard]] double omega_error_pct() const {
        return numeric ? 100 * std::abs(numeric->omega - asymptotic.omega) / std::abs(numeric->omega) : NAN;
    }
};

struct DeltaWindow {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    [[nodiscard]] bool contains(double d) const { return d >= lo && d <= hi; }
};

/// Both methods for n = 1..n_max on both equilibria; points whose asymptotic
/// offset leaves `window` are skipped, per-point failures are recorded.
inline std::vector<CascadeRow> cascade_scan(const ModelInstance& model, DeltaWindow window, int n_max,
                                            std::vector<EquilibriumKind> kinds = {EquilibriumKind::zeroA,
                                                                                  EquilibriumKind::positive}) {
    validate(model);
    std::vector<CascadeRow> rows;
    for (auto kind : kinds) {
        for (int n = 1; n <= n_max; ++n) {
            CascadeRow row;
            row.n = n;
            row.kind = kind;
            row.asymptotic = hopf_asymptotic(model, kind, n);
            if (!window.contains(row.asymptotic.delta)) continue;
            try {
                row.numeric = hopf_numeric(model, kind, n);
            } catch (const NumericalError& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline void write_cascade_csv(const std::vector<CascadeRow>& rows, std::ostream& os) {
    os << "n,delta_asym,delta_num,delta_err_pct,omega_asym,omega_num,omega_err_pct\n";
    char buf[256];
    for (const auto& r : rows) {
        const double dn = r.numeric ? r.numeric->delta : NAN;
        const double wn = r.numeric ? r.numeric->omega : NAN;
        std::snprintf(buf, sizeof buf, "%d,%.15g,%.15g,%.6g,%.15g,%.15g,%.6g\n", r.n, r.asymptotic.delta, dn,
                      r.delta_error_pct(), r.asymptotic.omega, wn, r.omega_error_pct());
        os << buf;
    }
}

}  // namespace pulselab
