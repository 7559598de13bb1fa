#pragma once

// Simulation of a catalogued model: integrator defaults and the type-erased
// entry point used by the lab.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pulselab/dde.hpp"
#include "pulselab/error.hpp"
#include "pulselab/models.hpp"

namespace pulselab {

using HistoryFunction = std::function<std::vector<double>(double)>;

/// Largest step used by default. Besides h <= T/1000 and h <= 1/(100 gamma),
/// the competitor equation is stiff during a pulse (rate ~ gamma s A with
/// A = O(gamma)), which RK4 only tolerates for h <~ 10/(s gamma^2). The step
/// is rounded down so that T/h is an integer.
inline double default_step(const ModelInstance& model) {
    const double g = model.p.gamma;
    const double s = std::isfinite(model.p.s) && model.p.s > 0.5 ? model.p.s : 0.5;
    const double target = std::min({model.p.T / 1000, 1 / (100 * g), 10 / (s * g * g)});
    return model.p.T / std::ceil(model.p.T / target);
}

inline IntegratorConfig default_config(const ModelInstance& model) {
    IntegratorConfig cfg;
    cfg.step = default_step(model);
    cfg.transient = 50 * model.p.T;
    cfg.record = 10 * model.p.T;
    return cfg;
}

/// Constant history at the zero-A equilibrium with A raised to `seed`.
inline HistoryFunction default_history(const ModelInstance& model, double seed = 1e-3) {
    auto state = zero_a_equilibrium(model).state;
    state[0] = seed;
    return [state](double) { return state; };
}

inline HistoryTrajectory simulate(const ModelInstance& model, const HistoryFunction& history,
                                  const IntegratorConfig& cfg) {
    validate(model);
    return visit_rhs(model, [&](const auto& sys) {
        constexpr std::size_t D = std::decay_t<decltype(sys)>::dim;
        auto hist = [&](double t) {
            const auto v = history(t);
            if (v.size() != D) throw ValidationError("history returns a state of the wrong dimension");
            StateArray<D> out{};
            for (std::size_t i = 0; i < D; ++i) {
                if (!(v[i] >= 0)) throw ValidationError("initial history must be nonnegative");
                out[i] = v[i];
            }
            return out;
        };
        return integrate(sys, hist, cfg);
    });
}

inline HistoryTrajectory simulate(const ModelInstance& model) {
    return simulate(model, default_history(model), default_config(model));
}

/// Dense state at t (Hermite interpolation inside each step).
inline std::vector<double> eval_dense(const HistoryTrajectory& traj, double t) { return traj.eval(t); }

}  // namespace pulselab
