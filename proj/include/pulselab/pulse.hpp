#pragma once

// Large-gamma pulse asymptotics of the prototype family: the area map eta,
// its fixed point p*, the slow-stage prey bounds, the Dirac-comb limit and the
// heteroclinic profile of a single pulse.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <vector>

#include "pulselab/dde.hpp"
#include "pulselab/error.hpp"
#include "pulselab/hopf.hpp"
#include "pulselab/models.hpp"
#include "pulselab/numerics.hpp"
#include "pulselab/spectrum.hpp"

namespace pulselab {

/// Area map eta(p) = kappa g0 (1-e^{-alpha T})(1-e^{-k p}) / (alpha k (1-e^{-alpha T - k p})).
inline double eta(double p, const Parameters& q) {
    if (p < 0) throw ValidationError("eta: p must be >= 0");
    if (p == 0) return 0;
    const double num = -std::expm1(-q.alpha * q.T) * -std::expm1(-q.k * p);
    const double den = -std::expm1(-q.alpha * q.T - q.k * p);
    return q.kappa * q.g0 * num / (q.alpha * q.k * den);
}

/// Unique positive fixed point of eta; requires kappa g0 / alpha > 1.
inline double solve_pstar(const Parameters& q) {
    if (!(q.kappa * q.g0 / q.alpha > 1))
        throw NoRoot("solve_pstar: kappa*g0/alpha <= 1, eta has only the zero fixed point");
    auto f = [&](double p) { return eta(p, q) - p; };
    const double hi = q.kappa * q.g0 * -std::expm1(-q.alpha * q.T) / (q.alpha * q.k) + 1;
    return bisect_then_newton(f, 1e-12, hi, 1e-12);
}

struct SlowBounds {
    double G_b;  ///< prey at pulse begin
    double G_e;  ///< prey at pulse end
    double a;    ///< kappa G_b
};

inline SlowBounds g_bounds(const Parameters& q, double p) {
    const double G_b = q.g0 * -std::expm1(-q.alpha * q.T) / (q.alpha * -std::expm1(-q.alpha * q.T - q.k * p));
    return {G_b, G_b * std::exp(-q.k * p), q.kappa * G_b};
}

/// gamma -> infinity limit: A = p* sum_n delta(t - nT), Q = q0/beta between
/// pulses, G relaxing from G_e to G_b.
struct DiracComb {
    double pstar;
    double period;
    double G_b;
    double G_e;
    double q_plateau;
    double g_ceiling;  ///< g0/alpha
    double alpha;

    /// Prey between pulses, s = t - nT in (0, T).
    [[nodiscard]] double prey(double s) const { return g_ceiling - (g_ceiling - G_e) * std::exp(-alpha * s); }
};

inline DiracComb dirac_comb_limit(const Parameters& q) {
    const double p = solve_pstar(q);
    const auto b = g_bounds(q, p);
    return {p, q.T, b.G_b, b.G_e, q.q0 / q.beta, q.g0 / q.alpha, q.alpha};
}

// ---------------------------------------------------------------------------
// Heteroclinic profile: -P'(theta) + P(theta) = (a/k)(1 - e^{-k P(theta - c)})

/// chi(lambda) = 1 - lambda - b e^{-lambda c}
struct ScalarDelayChar {
    double b;
    double c;
    [[nodiscard]] cplx operator()(cplx z) const { return 1.0 - z - b * std::exp(-z * c); }
    [[nodiscard]] ValueAndDerivative evaluate(cplx z) const {
        const cplx e = b * std::exp(-z * c);
        return {1.0 - z - e, -1.0 + c * e};
    }
};

struct ProfileRoots {
    ComplexRoot zero_leading;  ///< rightmost root at P = 0
    double lambda_plus;        ///< positive real root at P = p*
    bool ac_below_one;
    bool a_decay_below_one;    ///< a e^{-k p*} < 1
    bool leading_real;
};

inline ProfileRoots profile_linearization_roots(double a, double k, double c, double pstar) {
    if (!(a > 0 && k > 0 && c > 0 && pstar > 0))
        throw ValidationError("profile_linearization_roots: a, k, c, p* must be positive");
    ProfileRoots out{};
    const double b = a * std::exp(-k * pstar);
    out.ac_below_one = a * c < 1;
    out.a_decay_below_one = b < 1;
    const ScalarDelayChar plus{b, c};
    auto g = [&](double x) { return plus(cplx(x, 0)).real(); };
    if (b < 1) {
        out.lambda_plus = bisect_then_newton(g, 0.0, 1.0);
    } else {
        throw NoRoot("profile_linearization_roots: a e^{-k p*} >= 1, no positive root at p*");
    }
    const ScalarDelayChar zero{a, c};
    RootSearchOptions opt;
    opt.delay = c;
    opt.nx = 61;
    const auto roots = find_roots(zero, Box{-40.0, 5.0, 2 * std::numbers::pi * 6 / c}, opt);
    if (roots.empty()) throw NoRoot("profile_linearization_roots: no root of the zero linearization in the box");
    out.zero_leading = roots.front();
    out.leading_real = roots.front().omega == 0;
    return out;
}

struct ProfileEquation {
    static constexpr std::size_t dim = 1;
    double a;
    double k;
    double c;
    double delay() const { return c; }
    StateArray<1> operator()(double, const StateArray<1>& y, const StateArray<1>& yd) const {
        return {y[0] - a / k * -std::expm1(-k * yd[0])};
    }
};

struct HeteroclinicProfile {
    double a = 0, k = 0, c = 0, pstar = 0;
    double lambda_plus = 0;
    bool leading_real = true;
    std::vector<double> theta;
    std::vector<double> P;
    std::vector<double> Abar;

    /// Total variation of P, i.e. the integral of |Abar| (trapezoid on the grid).
    [[nodiscard]] double area() const {
        double s = 0;
        for (std::size_t i = 1; i < theta.size(); ++i)
            s += 0.5 * (std::abs(Abar[i]) + std::abs(Abar[i - 1])) * (theta[i] - theta[i - 1]);
        return s;
    }
};

struct HeteroclinicOptions {
    double epsilon = 1e-6;
    double theta_span = 200;
    /// grid points per unit delay c
    std::size_t steps_per_delay = 200;
    double floor = 1e-8;
};

/// Integrates the profile equation in increasing theta from the unstable
/// manifold of p*, P = p* - eps e^{lambda_+ theta} on [-c, 0], until P settles
/// below `floor`. The theta axis is shifted so that max |Abar| sits at 0.
///
/// With a real leading root at 0 the decay is monotone and the run ends at the
/// first P < floor; the orbit counts as lost once P < -1e-6. With a complex
/// leading root the tail rings around 0, so undershoot down to -1e-3 p* is
/// admitted and the run ends once |P| < floor has held for a whole delay.
inline HeteroclinicProfile solve_heteroclinic(double a, double k, double c, double pstar,
                                              const HeteroclinicOptions& opt = {}) {
    const auto roots = profile_linearization_roots(a, k, c, pstar);
    const double lp = roots.lambda_plus;
    const ProfileEquation eq{a, k, c};
    IntegratorConfig cfg;
    const std::size_t per_delay = std::max<std::size_t>(opt.steps_per_delay, 4);
    cfg.step = c / static_cast<double>(per_delay);
    cfg.record = opt.theta_span;
    const double lower = roots.leading_real ? -1e-6 : -std::max(1e-6, 1e-3 * pstar);
    const std::size_t hold = roots.leading_real ? 1 : per_delay + 1;
    bool escaped = false;
    std::size_t quiet = 0;
    auto history = [&](double th) { return StateArray<1>{pstar - opt.epsilon * std::exp(lp * th)}; };
    auto stop = [&](double, const StateArray<1>& y) {
        if (y[0] < lower || y[0] > pstar + 1) {
            escaped = true;
            return true;
        }
        quiet = std::abs(y[0]) < opt.floor ? quiet + 1 : 0;
        return quiet >= hold;
    };
    const auto traj = integrate(eq, history, cfg, stop);
    const auto P = traj.values(0);
    if (escaped || quiet < hold)
        throw NoHeteroclinic("no heteroclinic connection from p* to 0 for a=" + std::to_string(a) +
                             ", k=" + std::to_string(k) + ", c=" + std::to_string(c));
    HeteroclinicProfile prof;
    prof.a = a, prof.k = k, prof.c = c, prof.pstar = pstar, prof.lambda_plus = lp;
    prof.leading_real = roots.leading_real;
    const auto S = traj.slopes(0);
    std::size_t imax = 0;
    for (std::size_t i = 0; i < S.size(); ++i)
        if (std::abs(S[i]) > std::abs(S[imax])) imax = i;
    // refine the extremum with a parabola through the neighbours
    double shift = traj.time(imax);
    if (imax > 0 && imax + 1 < S.size()) {
        const double y0 = std::abs(S[imax - 1]), y1 = std::abs(S[imax]), y2 = std::abs(S[imax + 1]);
        const double den = y0 - 2 * y1 + y2;
        if (den != 0) shift += 0.5 * (y0 - y2) / den * traj.step();
    }
    prof.theta.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        prof.theta.push_back(traj.time(i) - shift);
        prof.P.push_back(P[i]);
        prof.Abar.push_back(S[i]);
    }
    return prof;
}

struct PhysicalPulse {
    std::vector<double> t;
    std::vector<double> A;

    [[nodiscard]] double peak() const { return *std::max_element(A.begin(), A.end()); }
    [[nodiscard]] double area() const {
        double s = 0;
        for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (A[i] + A[i - 1]) * (t[i] - t[i - 1]);
        return s;
    }
    /// Full width at half maximum, by linear interpolation of the crossings.
    [[nodiscard]] double fwhm() const {
        const double half = 0.5 * peak();
        const auto imax = static_cast<std::size_t>(std::max_element(A.begin(), A.end()) - A.begin());
        std::size_t i = imax;
        while (i > 0 && A[i - 1] >= half) --i;
        std::size_t j = imax;
        while (j + 1 < A.size() && A[j + 1] >= half) ++j;
        if (i == 0 || j + 1 == A.size()) return NAN;
        const double tl = t[i - 1] + (half - A[i - 1]) / (A[i] - A[i - 1]) * (t[i] - t[i - 1]);
        const double tr = t[j] + (half - A[j]) / (A[j + 1] - A[j]) * (t[j + 1] - t[j]);
        return tr - tl;
    }
};

/// A(t) = -gamma Abar(-gamma t): the reversed fast time mapped back to a
/// pulse that rises then falls, centred at t = 0.
inline PhysicalPulse rescale_pulse(const HeteroclinicProfile& prof, double gamma) {
    PhysicalPulse out;
    const std::size_t n = prof.theta.size();
    out.t.resize(n);
    out.A.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.t[n - 1 - i] = -prof.theta[i] / gamma;
        out.A[n - 1 - i] = -gamma * prof.Abar[i];
    }
    return out;
}

inline void write_profile_csv(const HeteroclinicProfile& prof, std::ostream& os, std::size_t stride = 1) {
    os << "theta,P,Abar\n";
    char buf[128];
    for (std::size_t i = 0; i < prof.theta.size(); i += std::max<std::size_t>(stride, 1)) {
        std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g\n", prof.theta[i], prof.P[i], prof.Abar[i]);
        os << buf;
    }
}

inline void write_pulse_csv(const PhysicalPulse& pulse, std::ostream& os, std::size_t stride = 1) {
    os << "t,A\n";
    char buf[96];
    for (std::size_t i = 0; i < pulse.t.size(); i += std::max<std::size_t>(stride, 1)) {
        std::snprintf(buf, sizeof buf, "%.15g,%.15g\n", pulse.t[i], pulse.A[i]);
        os << buf;
    }
}

// ---------------------------------------------------------------------------
// Period offset c in tau = T (1 + c/(gamma T))

/// Near-threshold estimate from the first positive-equilibrium Hopf frequency.
inline double c_asymptotic(const ModelInstance& model) {
    const auto h = hopf_positive_asymptotic(model, 1);
    return model.p.gamma * (2 * std::numbers::pi / h.omega - model.p.T);
}

/// gamma (tau - T) from a measured period.
inline double c_from_period(const ModelInstance& model, double period) { return model.p.gamma * (period - model.p.T); }

// ---------------------------------------------------------------------------
// Initial history on the pulse train

/// History on [-T, 0] resembling one period of the Dirac-comb limit: a
/// Gaussian pulse of area p* and width 1/gamma at t = -T/2, prey following the
/// inter-pulse relaxation, competitor on its plateau. Models with the linear
/// prey equation (prototype, logisticQ) only.
struct PulseSeedHistory {
    double pstar;
    double width;
    double centre;
    double q_plateau;
    DiracComb comb;

    [[nodiscard]] StateArray<3> operator()(double t) const {
        const double z = (t - centre) / width;
        const double A = pstar / (width * std::sqrt(2 * std::numbers::pi)) * std::exp(-0.5 * z * z);
        const double since = t >= centre ? t - centre : t - centre + comb.period;
        return {A, q_plateau, comb.prey(since)};
    }
};

inline PulseSeedHistory pulse_seed_history(const ModelInstance& model) {
    if (model.id != ModelId::prototype && model.id != ModelId::logisticQ)
        throw ValidationError("pulse_seed_history: defined for prototype and logisticQ only");
    const auto comb = dirac_comb_limit(model.p);
    return {comb.pstar, 1 / model.p.gamma, -model.p.T / 2, model.p.q0 / model.p.beta, comb};
}

}  // namespace pulselab
