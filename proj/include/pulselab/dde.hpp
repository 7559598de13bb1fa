#pragma once

// Fixed-step integration of retarded DDEs with one discrete delay.
//
// The scheme is classical RK4 over the method of steps. Delayed arguments at
// t + c*h - T are read from a cubic Hermite interpolant of the already computed
// solution (values plus the RK4 first-stage slope at every node), or from the
// initial history function while t + c*h - T <= 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pulselab/error.hpp"

namespace pulselab {

template <std::size_t D>
using StateArray = std::array<double, D>;

/// A retarded system y'(t) = f(t, y(t), y(t - delay)) of fixed dimension.
template <class S>
concept DelaySystem = requires(const S& s, double t, const StateArray<S::dim>& y) {
    { S::dim } -> std::convertible_to<std::size_t>;
    { s.delay() } -> std::convertible_to<double>;
    { s(t, y, y) } -> std::same_as<StateArray<S::dim>>;
};

struct IntegratorConfig {
    double step = 1e-3;
    double transient = 0.0;
    double record = 1.0;
    bool positivity_clamp = false;
    /// When false only [transient, transient + record] is stored.
    bool retain_transient = true;
};

struct Window {
    double begin;
    double end;
    [[nodiscard]] double length() const noexcept { return end - begin; }
};

/// Dense, immutable record of a DDE run on the uniform grid t0 + i*h.
class HistoryTrajectory {
public:
    HistoryTrajectory() = default;
    HistoryTrajectory(double t0, double h, std::size_t dim, double analysis_start)
        : t0_(t0), h_(h), analysis_start_(analysis_start), values_(dim), slopes_(dim) {}

    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double t1() const noexcept { return t0_ + h_ * static_cast<double>(size() - 1); }
    [[nodiscard]] double step() const noexcept { return h_; }
    [[nodiscard]] std::size_t dim() const noexcept { return values_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return values_.empty() ? 0 : values_.front().size(); }
    [[nodiscard]] double time(std::size_t i) const noexcept { return t0_ + h_ * static_cast<double>(i); }
    /// Start of the post-transient part; analyses default to [analysis_start, t1].
    [[nodiscard]] double analysis_start() const noexcept { return analysis_start_; }
    [[nodiscard]] Window tail() const noexcept { return {analysis_start_, t1()}; }

    [[nodiscard]] std::span<const double> values(std::size_t c) const { return values_.at(c); }
    [[nodiscard]] std::span<const double> slopes(std::size_t c) const { return slopes_.at(c); }
    [[nodiscard]] double value(std::size_t c, std::size_t i) const { return values_.at(c).at(i); }

    /// Index of the first grid node with time >= t.
    [[nodiscard]] std::size_t index_at_or_after(double t) const noexcept {
        if (t <= t0_) return 0;
        const double u = std::ceil((t - t0_) / h_ - 1e-9);
        return std::min(static_cast<std::size_t>(u), size() - 1);
    }

    /// Cubic Hermite evaluation of component c; exact at grid nodes.
    [[nodiscard]] double eval(std::size_t c, double t) const {
        const double tol = 1e-9 * h_;
        if (size() < 2 || t < t0_ - tol || t > t1() + tol)
            throw OutOfRange("eval_dense: t=" + std::to_string(t) + " outside [" + std::to_string(t0_) + ", " +
                             std::to_string(t1()) + "]");
        const double u = std::clamp((t - t0_) / h_, 0.0, static_cast<double>(size() - 1));
        auto j = static_cast<std::size_t>(std::floor(u));
        if (j >= size() - 1) j = size() - 2;
        const double s = u - static_cast<double>(j);
        return hermite(values_[c][j], slopes_[c][j], values_[c][j + 1], slopes_[c][j + 1], s, h_);
    }

    [[nodiscard]] std::vector<double> eval(double t) const {
        std::vector<double> out(dim());
        for (std::size_t c = 0; c < dim(); ++c) out[c] = eval(c, t);
        return out;
    }

    void push_back(std::span<const double> value, std::span<const double> slope) {
        for (std::size_t c = 0; c < dim(); ++c) {
            values_[c].push_back(value[c]);
            slopes_[c].push_back(slope[c]);
        }
    }

    void reserve(std::size_t n) {
        for (std::size_t c = 0; c < dim(); ++c) {
            values_[c].reserve(n);
            slopes_[c].reserve(n);
        }
    }

    static double hermite(double y0, double f0, double y1, double f1, double s, double h) noexcept {
        const double s2 = s * s;
        const double s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 + (-2 * s3 + 3 * s2) * y1 +
               (s3 - s2) * h * f1;
    }

private:
    double t0_ = 0;
    double h_ = 1;
    double analysis_start_ = 0;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<double>> slopes_;
};

namespace detail {

struct NeverStop {
    template <class Y>
    bool operator()(double, const Y&) const noexcept {
        return false;
    }
};

}  // namespace detail

/// Integrates `sys` from t = 0 with `history` on [-delay, 0].
///
/// `stop(t, y)` is checked after every step; returning true ends the run there
/// (the trajectory then ends at that node).
template <DelaySystem S, class History, class Stop = detail::NeverStop>
HistoryTrajectory integrate(const S& sys, History&& history, const IntegratorConfig& cfg, Stop stop = {}) {
    constexpr std::size_t D = S::dim;
    using Y = StateArray<D>;

    const double h = cfg.step;
    const double delay = sys.delay();
    if (!(h > 0) || !std::isfinite(h)) throw ValidationError("integrate: step must be positive");
    if (!(delay > 0)) throw ValidationError("integrate: delay must be positive");
    if (h > delay * (1 + 1e-12)) throw StepTooLarge(h, delay);
    if (cfg.transient < 0 || cfg.record <= 0) throw ValidationError("integrate: bad transient/record length");

    const auto n_transient = static_cast<std::size_t>(std::llround(cfg.transient / h));
    const auto n_record = static_cast<std::size_t>(std::llround(cfg.record / h));
    const std::size_t n_total = n_transient + n_record;
    const std::size_t n_first = cfg.retain_transient ? 0 : n_transient;

    // Delay measured in steps; snapped when it is an integer so that delayed
    // stages land exactly on nodes and midpoints.
    double lag = delay / h;
    if (std::abs(lag - std::round(lag)) < 1e-9 * lag) lag = std::round(lag);

    const std::size_t ring = static_cast<std::size_t>(std::ceil(lag)) + 3;
    std::vector<Y> ring_y(ring);
    std::vector<Y> ring_f(ring);

    auto delayed = [&](std::size_t n, double c) -> Y {
        const double u = (static_cast<double>(n) - lag) + c;
        if (u <= 0) return history(u * h);
        auto j = static_cast<std::size_t>(std::floor(u));
        const double s = u - static_cast<double>(j);
        const Y& y0 = ring_y[j % ring];
        if (s == 0.0) return y0;
        const Y& f0 = ring_f[j % ring];
        const Y& y1 = ring_y[(j + 1) % ring];
        const Y& f1 = ring_f[(j + 1) % ring];
        Y out;
        for (std::size_t i = 0; i < D; ++i) out[i] = HistoryTrajectory::hermite(y0[i], f0[i], y1[i], f1[i], s, h);
        return out;
    };

    auto axpy = [](const Y& y, double a, const Y& k) {
        Y out;
        for (std::size_t i = 0; i < D; ++i) out[i] = y[i] + a * k[i];
        return out;
    };

    HistoryTrajectory traj(static_cast<double>(n_first) * h, h, D, static_cast<double>(n_transient) * h);
    traj.reserve(n_total - n_first + 1);

    Y y = history(0.0);
    ring_y[0] = y;
    std::size_t n = 0;
    for (; n < n_total; ++n) {
        const double t = static_cast<double>(n) * h;
        const Y k1 = sys(t, y, delayed(n, 0.0));
        ring_f[n % ring] = k1;
        if (n >= n_first) traj.push_back(y, k1);

        const Y mid = delayed(n, 0.5);
        const Y k2 = sys(t + 0.5 * h, axpy(y, 0.5 * h, k1), mid);
        const Y k3 = sys(t + 0.5 * h, axpy(y, 0.5 * h, k2), mid);
        const Y k4 = sys(t + h, axpy(y, h, k3), delayed(n, 1.0));

        for (std::size_t i = 0; i < D; ++i) {
            y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            if (cfg.positivity_clamp && y[i] < 0) y[i] = 0;
            if (!std::isfinite(y[i])) throw NonFiniteState(t + h);
        }
        ring_y[(n + 1) % ring] = y;
        if (stop(t + h, y)) {
            ++n;
            break;
        }
    }
    const Y f_end = sys(static_cast<double>(n) * h, y, delayed(n, 0.0));
    ring_f[n % ring] = f_end;
    if (n >= n_first) traj.push_back(y, f_end);
    return traj;
}

// ---------------------------------------------------------------------------
// Trace primitives

struct Peak {
    double time;
    double height;
};

/// Local maxima of component c above `threshold` inside `window`, refined by a
/// parabola through the three surrounding samples.
inline std::vector<Peak> find_peaks(const HistoryTrajectory& traj, std::size_t c, double threshold, Window window) {
    std::vector<Peak> peaks;
    if (traj.size() < 3) return peaks;
    const auto y = traj.values(c);
    const std::size_t lo = std::max<std::size_t>(traj.index_at_or_after(window.begin), 1);
    for (std::size_t i = lo; i + 1 < traj.size(); ++i) {
        if (traj.time(i) > window.end + 1e-9 * traj.step()) break;
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > threshold)) continue;
        const double denom = y[i - 1] - 2 * y[i] + y[i + 1];
        double offset = 0;
        double height = y[i];
        if (denom < 0) {
            offset = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            height = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * offset;
        }
        peaks.push_back({traj.time(i) + offset * traj.step(), height});
    }
    return peaks;
}

inline std::vector<Peak> find_peaks(const HistoryTrajectory& traj, std::size_t c, double threshold) {
    return find_peaks(traj, c, threshold, traj.tail());
}

struct PeriodEstimate {
    double period;
    /// max |difference - median| over successive peak spacings
    double max_deviation;
    std::vector<Peak> peaks;
};

/// Threshold halfway between the minimum and maximum of component c on `window`.
inline double mid_range_threshold(const HistoryTrajectory& traj, std::size_t c, Window window) {
    const auto y = traj.values(c);
    double lo = INFINITY;
    double hi = -INFINITY;
    for (std::size_t i = traj.index_at_or_after(window.begin); i < traj.size() && traj.time(i) <= window.end; ++i) {
        lo = std::min(lo, y[i]);
        hi = std::max(hi, y[i]);
    }
    return lo + 0.5 * (hi - lo);
}

inline PeriodEstimate estimate_period(const HistoryTrajectory& traj, std::size_t c, Window window) {
    auto peaks = find_peaks(traj, c, mid_range_threshold(traj, c, window), window);
    if (peaks.size() < 5)
        throw NotPeriodic("estimate_period: only " + std::to_string(peaks.size()) + " peaks in window");
    std::vector<double> gaps;
    for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks[i].time - peaks[i - 1].time);
    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    double dev = 0;
    for (double g : gaps) dev = std::max(dev, std::abs(g - median));
    return {median, dev, std::move(peaks)};
}

inline PeriodEstimate estimate_period(const HistoryTrajectory& traj, std::size_t c) {
    return estimate_period(traj, c, traj.tail());
}

/// Composite Simpson rule on the dense interpolant over `window`, with an even
/// number of panels no wider than the grid step.
inline double integrate_component_over_period(const HistoryTrajectory& traj, std::size_t c, Window window) {
    const double tol = 1e-9 * traj.step();
    if (window.begin < traj.t0() - tol || window.end > traj.t1() + tol || window.end < window.begin)
        throw OutOfRange("integrate_component_over_period: window outside trajectory");
    const double len = window.length();
    if (len == 0) return 0;
    auto panels = static_cast<std::size_t>(std::ceil(len / traj.step() - 1e-9));
    panels += panels % 2;
    panels = std::max<std::size_t>(panels, 2);
    const double dx = len / static_cast<double>(panels);
    double sum = traj.eval(c, window.begin) + traj.eval(c, window.end);
    for (std::size_t i = 1; i < panels; ++i)
        sum += (i % 2 ? 4.0 : 2.0) * traj.eval(c, window.begin + dx * static_cast<double>(i));
    return sum * dx / 3.0;
}

/// CSV dump with 15 significant digits; `stride` thins the rows.
inline void write_trajectory_csv(const HistoryTrajectory& traj, std::ostream& os, std::span<const std::string> names,
                                 std::size_t stride = 1) {
    os << 't';
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    char buf[32];
    stride = std::max<std::size_t>(stride, 1);
    for (std::size_t i = 0; i < traj.size(); i += stride) {
        std::snprintf(buf, sizeof buf, "%.15g", traj.time(i));
        os << buf;
        for (std::size_t c = 0; c < traj.dim(); ++c) {
            std::snprintf(buf, sizeof buf, "%.15g", traj.value(c, i));
            os << ',' << buf;
        }
        os << '\n';
    }
}

}  // namespace pulselab
