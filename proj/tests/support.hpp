#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "pulselab/pulse.hpp"
#include "pulselab/simulation.hpp"

namespace support {

/// Settled run: pulse-seeded history (or the default constant one), transient
/// and record given in delay periods, transient dropped.
inline pulselab::HistoryTrajectory settled(const pulselab::ModelInstance& m, double transient = 100,
                                           double record = 10, bool seeded = true) {
    using namespace pulselab;
    auto cfg = default_config(m);
    cfg.transient = transient * m.p.T;
    cfg.record = record * m.p.T;
    cfg.retain_transient = false;
    if (!seeded) return simulate(m, default_history(m), cfg);
    const auto seed = pulse_seed_history(m);
    return simulate(m,
                    [seed](double t) {
                        const auto s = seed(t);
                        return std::vector<double>(s.begin(), s.end());
                    },
                    cfg);
}

/// Trajectory sampled from an analytic function and its derivative.
template <class F, class DF>
pulselab::HistoryTrajectory sampled(F f, DF df, double t0, double t1, double h) {
    pulselab::HistoryTrajectory tr(t0, h, 1, t0);
    const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / h));
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = t0 + h * static_cast<double>(i);
        const double v = f(t), s = df(t);
        tr.push_back(std::span(&v, 1), std::span(&s, 1));
    }
    return tr;
}

/// Exact solution of y' = -y(t - 1) with y = 1 on [-1, 0] (method of steps).
inline double unit_delay_exact(double t) {
    double sum = 0;
    const int n = static_cast<int>(std::floor(t)) + 1;
    double fact = 1;
    for (int k = 0; k <= n; ++k) {
        if (k > 0) fact *= k;
        sum += (k % 2 ? -1.0 : 1.0) * std::pow(t - k + 1, k) / fact;
    }
    return sum;
}

}  // namespace support
