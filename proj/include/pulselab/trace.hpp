#pragma once

// Analysis of settled periodic traces: Fourier harmonics and phase locking,
// per-pulse statistics, and the power-law extrapolation of the pulse area.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "pulselab/dde.hpp"
#include "pulselab/error.hpp"

namespace pulselab {

inline double wrap_phase(double a) {
    double w = std::remainder(a, 2 * std::numbers::pi);
    if (w <= -std::numbers::pi) w += 2 * std::numbers::pi;
    return w;
}

/// A(t) = A0 + sum_n A_n cos(2 pi n (t - start)/tau + phi_n), n = 1..N.
struct HarmonicSet {
    double period = 0;
    double start = 0;
    double mean = 0;
    std::vector<double> amplitude;  ///< index n-1
    std::vector<double> phase;      ///< index n-1, in (-pi, pi]

    [[nodiscard]] std::size_t size() const { return amplitude.size(); }

    [[nodiscard]] double synthesize(double t) const {
        double s = mean;
        const double u = 2 * std::numbers::pi * (t - start) / period;
        for (std::size_t n = 1; n <= size(); ++n) s += amplitude[n - 1] * std::cos(n * u + phase[n - 1]);
        return s;
    }
};

/// Harmonics of uniformly spaced samples over exactly one period (the
/// trapezoid rule, which for periodic data is the rectangle rule).
inline HarmonicSet harmonics_of_samples(const std::vector<double>& samples, double period, double start, std::size_t N) {
    const std::size_t M = samples.size();
    if (M < 2 * N + 1) throw ValidationError("harmonics: too few samples per period");
    HarmonicSet hs;
    hs.period = period;
    hs.start = start;
    hs.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(M);
    for (std::size_t n = 1; n <= N; ++n) {
        double a = 0, b = 0;
        for (std::size_t j = 0; j < M; ++j) {
            const double u = 2 * std::numbers::pi * static_cast<double>(n * j % M) / static_cast<double>(M);
            a += samples[j] * std::cos(u);
            b += samples[j] * std::sin(u);
        }
        a *= 2.0 / static_cast<double>(M);
        b *= 2.0 / static_cast<double>(M);
        hs.amplitude.push_back(std::hypot(a, b));
        hs.phase.push_back(wrap_phase(std::atan2(-b, a)));
    }
    return hs;
}

/// Harmonics of component c over [start, start + period) on the dense interpolant.
inline HarmonicSet fourier_harmonics(const HistoryTrajectory& traj, std::size_t c, std::size_t N, double period,
                                     double start) {
    if (!(period > 0)) throw ValidationError("fourier_harmonics: period must be positive");
    if (start < traj.t0() || start + period > traj.t1() + 1e-9 * traj.step())
        throw OutOfRange("fourier_harmonics: period window outside trajectory");
    const auto M = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(period / traj.step())), 4 * N + 1);
    std::vector<double> samples(M);
    for (std::size_t j = 0; j < M; ++j)
        samples[j] = traj.eval(c, std::min(start + period * static_cast<double>(j) / static_cast<double>(M), traj.t1()));
    return harmonics_of_samples(samples, period, start, N);
}

/// Period from the tail, window starting at the first detected peak.
inline HarmonicSet fourier_harmonics(const HistoryTrajectory& traj, std::size_t c, std::size_t N) {
    const auto pe = estimate_period(traj, c);
    return fourier_harmonics(traj, c, N, pe.period, pe.peaks.front().time);
}

struct PhaseAlignment {
    /// max_n |phi_n| after the time shift that zeroes phi_1; harmonics below
    /// 1e-8 A_1 carry no usable phase and count as aligned
    double max_deviation = 0;
    std::vector<double> centred_phase;
    std::vector<double> amplitude_ratio;  ///< A_n / A_1
};

inline PhaseAlignment phase_alignment(const HarmonicSet& hs, std::size_t n_max = 0) {
    if (hs.size() == 0) throw ValidationError("phase_alignment: empty harmonic set");
    if (n_max == 0 || n_max > hs.size()) n_max = hs.size();
    PhaseAlignment out;
    const double p1 = hs.phase[0];
    for (std::size_t n = 1; n <= n_max; ++n) {
        const bool resolved = hs.amplitude[n - 1] > 1e-8 * hs.amplitude[0];
        const double ph = resolved ? wrap_phase(hs.phase[n - 1] - static_cast<double>(n) * p1) : 0.0;
        out.centred_phase.push_back(ph);
        out.amplitude_ratio.push_back(hs.amplitude[n - 1] / hs.amplitude[0]);
        out.max_deviation = std::max(out.max_deviation, std::abs(ph));
    }
    return out;
}

inline void write_harmonics_csv(const HarmonicSet& hs, std::ostream& os) {
    os << "n,amplitude,phase\n";
    char buf[96];
    for (std::size_t n = 1; n <= hs.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%zu,%.15g,%.15g\n", n, hs.amplitude[n - 1], hs.phase[n - 1]);
        os << buf;
    }
}

// ---------------------------------------------------------------------------
// p(gamma) = p^ + b gamma^{-beta}

struct PowerLawFit {
    double pstar_hat = 0;
    double b = 0;
    double beta = 0;
    /// Euclidean norm of the residuals
    double residual = 0;
};

namespace detail {

/// Least squares for (p^, b) at fixed beta; returns the fit with its residual.
inline PowerLawFit linear_fit(const std::vector<std::pair<double, double>>& pts, double beta) {
    double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (const auto& [g, p] : pts) {
        const double x = std::pow(g, -beta);
        s1 += 1, sx += x, sxx += x * x, sy += p, sxy += x * p;
    }
    const double det = s1 * sxx - sx * sx;
    PowerLawFit f;
    f.beta = beta;
    f.b = (s1 * sxy - sx * sy) / det;
    f.pstar_hat = (sy - f.b * sx) / s1;
    double r2 = 0;
    for (const auto& [g, p] : pts) r2 += std::pow(p - f.pstar_hat - f.b * std::pow(g, -beta), 2);
    f.residual = std::sqrt(r2);
    return f;
}

}  // namespace detail

/// Grid search over beta in [0.25, 3] (step 1e-3), then Brent refinement in
/// the neighbouring grid cells.
inline PowerLawFit power_law_fit(std::vector<std::pair<double, double>> pts) {
    if (pts.size() < 4) throw ValidationError("power_law_fit: need at least 4 points");
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].first == pts[i - 1].first) throw ValidationError("power_law_fit: gamma values must be distinct");
    for (const auto& [g, p] : pts)
        if (!(g > 0) || !std::isfinite(p)) throw ValidationError("power_law_fit: gamma must be positive, p finite");
    constexpr double lo = 0.25, hi = 3.0, step = 1e-3;
    PowerLawFit best = detail::linear_fit(pts, lo);
    const auto n = static_cast<int>(std::lround((hi - lo) / step));
    for (int i = 1; i <= n; ++i) {
        const auto f = detail::linear_fit(pts, lo + step * i);
        if (f.residual < best.residual) best = f;
    }
    const double a = std::max(lo, best.beta - step);
    const double b = std::min(hi, best.beta + step);
    const auto [beta, res] =
        boost::math::tools::brent_find_minima([&](double x) { return detail::linear_fit(pts, x).residual; }, a, b, 52);
    if (res <= best.residual) best = detail::linear_fit(pts, beta);
    return best;
}

// ---------------------------------------------------------------------------
// Pulse statistics

struct PulseMetrics {
    double period = 0;
    double amplitude = 0;        ///< mean peak height
    double fwhm = 0;             ///< mean full width at half maximum
    double floor = 0;            ///< max of the pulse component between pulses
    double area = 0;             ///< mean integral over one pulse-centred period
    double time_average = 0;     ///< area / period
    std::size_t pulses = 0;
    std::optional<double> competitor_collapse;  ///< min Q during pulses
    std::optional<double> competitor_plateau;   ///< mean Q between pulses
};

namespace detail {

/// Crossing of level y by component c between ta (above or below) and tb.
inline double crossing(const HistoryTrajectory& traj, std::size_t c, double level, double ta, double tb) {
    const double fa = traj.eval(c, ta) - level;
    for (int it = 0; it < 100 && std::abs(tb - ta) > 1e-14 * std::max(1.0, std::abs(ta)); ++it) {
        const double m = 0.5 * (ta + tb);
        const double fm = traj.eval(c, m) - level;
        if ((fm > 0) == (fa > 0))
            ta = m;
        else
            tb = m;
    }
    return 0.5 * (ta + tb);
}

/// Width at half height of the peak at `pk`, searching within half a period.
inline double peak_fwhm(const HistoryTrajectory& traj, std::size_t c, const Peak& pk, double period) {
    const double half = 0.5 * pk.height;
    const double h = traj.step();
    double tl = pk.time;
    while (tl - h > pk.time - period / 2 && tl - h >= traj.t0() && traj.eval(c, tl - h) > half) tl -= h;
    double tr = pk.time;
    while (tr + h < pk.time + period / 2 && tr + h <= traj.t1() && traj.eval(c, tr + h) > half) tr += h;
    if (tl - h < traj.t0() || tr + h > traj.t1()) return NAN;
    return crossing(traj, c, half, tr, tr + h) - crossing(traj, c, half, tl, tl - h);
}

}  // namespace detail

/// Per-pulse statistics over the analysis window, averaged over the pulses
/// whose full period window fits in the trace (at least 5). Between pulses
/// means the middle half of each inter-peak interval; during a pulse means
/// within a quarter period of the peak.
inline PulseMetrics pulse_metrics(const HistoryTrajectory& traj, std::size_t c,
                                  std::optional<std::size_t> competitor = std::nullopt) {
    const auto pe = estimate_period(traj, c);
    const double tau = pe.period;
    PulseMetrics m;
    m.period = tau;
    std::vector<const Peak*> inner;
    for (const auto& pk : pe.peaks)
        if (pk.time - tau / 2 >= traj.t0() && pk.time + tau / 2 <= traj.t1()) inner.push_back(&pk);
    if (inner.size() < 5) throw NotPeriodic("pulse_metrics: fewer than 5 complete pulses");
    double amp = 0, width = 0, area = 0;
    for (const auto* pk : inner) {
        amp += pk->height;
        width += detail::peak_fwhm(traj, c, *pk, tau);
        area += integrate_component_over_period(traj, c, {pk->time - tau / 2, pk->time + tau / 2});
    }
    const auto n = static_cast<double>(inner.size());
    m.pulses = inner.size();
    m.amplitude = amp / n;
    m.fwhm = width / n;
    m.area = area / n;
    m.time_average = m.area / tau;

    double floor = 0;
    double qmin = INFINITY, qsum = 0;
    std::size_t qcount = 0;
    const auto& pk = pe.peaks;
    for (std::size_t i = 0; i + 1 < pk.size(); ++i) {
        const double gap = pk[i + 1].time - pk[i].time;
        const double a = pk[i].time + 0.25 * gap, b = pk[i].time + 0.75 * gap;
        for (std::size_t j = traj.index_at_or_after(a); j < traj.size() && traj.time(j) <= b; ++j) {
            floor = std::max(floor, traj.value(c, j));
            if (competitor) {
                qsum += traj.value(*competitor, j);
                ++qcount;
            }
        }
    }
    m.floor = floor;
    if (competitor) {
        for (const auto& p : pk) {
            const std::size_t j0 = traj.index_at_or_after(p.time - 0.25 * tau);
            for (std::size_t j = j0; j < traj.size() && traj.time(j) <= p.time + 0.25 * tau; ++j)
                qmin = std::min(qmin, traj.value(*competitor, j));
        }
        m.competitor_collapse = qmin;
        m.competitor_plateau = qcount ? qsum / static_cast<double>(qcount) : NAN;
    }
    return m;
}

struct SweepRow {
    double gamma;
    double p;
    double period;
    double peak;
    double fwhm;
};

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "gamma,p,period,peak,fwhm\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g,%.15g\n", r.gamma, r.p, r.period, r.peak, r.fwhm);
        os << buf;
    }
}

}  // namespace pulselab
