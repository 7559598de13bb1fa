#pragma once

// Catalog of the slow-fast delayed population models.
//
// Every model has a fast predator A (maturation delay T, delayed recruitment
// kappa*G(t-T)*A(t-T)), an optional fast competitor Q and a slow prey G. Fast
// equations carry the time-scale ratio gamma.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulselab/error.hpp"
#include "pulselab/numerics.hpp"

namespace pulselab {

enum class ModelId { prototype, logisticQ, logisticQG, competingFast, reducedA, reducedB };

inline constexpr std::array<ModelId, 6> kAllModels{ModelId::prototype,     ModelId::logisticQ, ModelId::logisticQG,
                                                   ModelId::competingFast, ModelId::reducedA,  ModelId::reducedB};

constexpr std::string_view to_string(ModelId id) {
    switch (id) {
        case ModelId::prototype: return "prototype";
        case ModelId::logisticQ: return "logisticQ";
        case ModelId::logisticQG: return "logisticQG";
        case ModelId::competingFast: return "competingFast";
        case ModelId::reducedA: return "reducedA";
        case ModelId::reducedB: return "reducedB";
    }
    return "?";
}

inline ModelId model_from_string(std::string_view name) {
    for (ModelId id : kAllModels)
        if (to_string(id) == name) return id;
    throw ValidationError("unknown model '" + std::string(name) + "'");
}

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

/// Parameter record shared by all models; each model reads a subset.
struct Parameters {
    double gamma = kUnset;      ///< fast/slow time-scale ratio
    double T = kUnset;          ///< maturation delay of A
    double kappa = kUnset;      ///< conversion of delayed predation into A recruits
    double mu = kUnset;         ///< competition of Q on A
    double q0 = kUnset;         ///< Q recruitment (or intrinsic growth)
    double beta = kUnset;       ///< Q death (or crowding)
    double s = kUnset;          ///< competition of A on Q
    double k = kUnset;          ///< predation of A on G
    double g0 = kUnset;         ///< G recruitment (or intrinsic growth)
    double alpha = kUnset;      ///< G death (or crowding)
    double nu = kUnset;         ///< Q growth on G (competingFast)
    double r = kUnset;          ///< Q crowding (competingFast)
    double m = kUnset;          ///< consumption of G by Q (competingFast)
    double f = kUnset;          ///< A crowding (competingFast)
    double tau_death = kUnset;  ///< death rate of A (competingFast bifurcation parameter)
};

struct ParameterField {
    std::string_view name;
    double Parameters::* member;
};

inline constexpr std::array<ParameterField, 15> kParameterFields{{
    {"gamma", &Parameters::gamma},
    {"T", &Parameters::T},
    {"kappa", &Parameters::kappa},
    {"mu", &Parameters::mu},
    {"q0", &Parameters::q0},
    {"beta", &Parameters::beta},
    {"s", &Parameters::s},
    {"k", &Parameters::k},
    {"g0", &Parameters::g0},
    {"alpha", &Parameters::alpha},
    {"nu", &Parameters::nu},
    {"r", &Parameters::r},
    {"m", &Parameters::m},
    {"f", &Parameters::f},
    {"tau_death", &Parameters::tau_death},
}};

inline std::vector<std::string_view> parameter_names(ModelId id) {
    switch (id) {
        case ModelId::prototype:
        case ModelId::logisticQ:
        case ModelId::logisticQG:
            return {"gamma", "T", "kappa", "mu", "q0", "beta", "s", "k", "g0", "alpha"};
        case ModelId::competingFast:
            return {"gamma", "T", "kappa", "mu", "nu", "beta", "s", "k", "r", "m", "f", "g0", "alpha", "tau_death"};
        case ModelId::reducedA:
        case ModelId::reducedB:
            return {"gamma", "T", "kappa", "k", "g0", "alpha"};
    }
    return {};
}

inline double* parameter_slot(Parameters& p, std::string_view name) {
    for (const auto& f : kParameterFields)
        if (f.name == name) return &(p.*f.member);
    return nullptr;
}

inline double parameter_value(const Parameters& p, std::string_view name) {
    for (const auto& f : kParameterFields)
        if (f.name == name) return p.*f.member;
    throw ValidationError("unknown parameter '" + std::string(name) + "'");
}

struct ModelInstance {
    ModelId id = ModelId::prototype;
    Parameters p;
};

/// Throws ValidationError naming the first missing or non-positive parameter.
inline void validate(const ModelInstance& model) {
    for (auto name : parameter_names(model.id)) {
        const double v = parameter_value(model.p, name);
        if (std::isnan(v))
            throw ValidationError("model " + std::string(to_string(model.id)) + ": missing parameter '" +
                                  std::string(name) + "'");
        if (!(v > 0) || !std::isfinite(v))
            throw ValidationError("model " + std::string(to_string(model.id)) + ": parameter '" + std::string(name) +
                                  "' must be positive and finite");
    }
}

constexpr std::size_t dimension(ModelId id) {
    return (id == ModelId::reducedA || id == ModelId::reducedB) ? 2 : 3;
}

constexpr bool has_competitor(ModelId id) { return dimension(id) == 3; }

inline std::vector<std::string> component_names(ModelId id) {
    if (has_competitor(id)) return {"A", "Q", "G"};
    return {"A", "G"};
}

/// Index of the slow prey component.
constexpr std::size_t prey_index(ModelId id) { return dimension(id) - 1; }

/// competingFast is driven by the death rate of A (decreasing through tau*),
/// every other model by the prey recruitment g0 (increasing through g0*).
constexpr bool driven_by_death_rate(ModelId id) { return id == ModelId::competingFast; }

inline double bifurcation_parameter(const ModelInstance& m) {
    return driven_by_death_rate(m.id) ? m.p.tau_death : m.p.g0;
}

inline ModelInstance with_bifurcation_parameter(ModelInstance m, double value) {
    (driven_by_death_rate(m.id) ? m.p.tau_death : m.p.g0) = value;
    return m;
}

inline ModelInstance with_gamma(ModelInstance m, double gamma) {
    m.p.gamma = gamma;
    return m;
}

// ---------------------------------------------------------------------------
// Right-hand sides. Templated on the number type so that Jacobians come from
// dual numbers instead of hand-written derivatives.

template <class X, std::size_t D>
using Vec = std::array<X, D>;

struct PrototypeRhs {
    static constexpr std::size_t dim = 3;
    Parameters p;
    double delay() const { return p.T; }
    template <class X>
    Vec<X, 3> operator()(double, const Vec<X, 3>& y, const Vec<X, 3>& yd) const {
        const X &A = y[0], &Q = y[1], &G = y[2];
        return {p.gamma * (-A + p.kappa * yd[2] * yd[0] - p.mu * Q * A), p.gamma * (p.q0 - p.beta * Q - p.s * A * Q),
                p.g0 - p.alpha * G - p.k * A * G};
    }
};

struct LogisticQRhs {
    static constexpr std::size_t dim = 3;
    Parameters p;
    double delay() const { return p.T; }
    template <class X>
    Vec<X, 3> operator()(double, const Vec<X, 3>& y, const Vec<X, 3>& yd) const {
        const X &A = y[0], &Q = y[1], &G = y[2];
        return {p.gamma * (-A + p.kappa * yd[2] * yd[0] - p.mu * Q * A),
                p.gamma * (p.q0 * Q - p.beta * Q * Q - p.s * A * Q), p.g0 - p.alpha * G - p.k * A * G};
    }
};

struct LogisticQGRhs {
    static constexpr std::size_t dim = 3;
    Parameters p;
    double delay() const { return p.T; }
    template <class X>
    Vec<X, 3> operator()(double, const Vec<X, 3>& y, const Vec<X, 3>& yd) const {
        const X &A = y[0], &Q = y[1], &G = y[2];
        return {p.gamma * (-A + p.kappa * yd[2] * yd[0] - p.mu * Q * A),
                p.gamma * (p.q0 * Q - p.beta * Q * Q - p.s * A * Q), p.g0 * G - p.alpha * G * G - p.k * A * G};
    }
};

struct CompetingFastRhs {
    static constexpr std::size_t dim = 3;
    Parameters p;
    double delay() const { return p.T; }
    template <class X>
    Vec<X, 3> operator()(double, const Vec<X, 3>& y, const Vec<X, 3>& yd) const {
        const X &A = y[0], &Q = y[1], &G = y[2];
        return {p.gamma * (p.kappa * yd[2] * yd[0] - p.tau_death * A - p.mu * Q * A - p.f * A * A),
                p.gamma * (p.nu * G * Q - p.beta * Q - p.s * A * Q - p.r * Q * Q),
                p.g0 - p.alpha * G - p.k * A * G - p.m * Q * G};
    }
};

struct ReducedARhs {
    static constexpr std::size_t dim = 2;
    Parameters p;
    double delay() const { return p.T; }
    template <class X>
    Vec<X, 2> operator()(double, const Vec<X, 2>& y, const Vec<X, 2>& yd) const {
        const X &A = y[0], &G = y[1];
        return {p.gamma * (-A + p.kappa * yd[1] * yd[0]), p.g0 - p.alpha * G - p.k * A * G};
    }
};

struct ReducedBRhs {
    static constexpr std::size_t dim = 2;
    Parameters p;
    double delay() const { return p.T; }
    template <class X>
    Vec<X, 2> operator()(double, const Vec<X, 2>& y, const Vec<X, 2>& yd) const {
        const X &A = y[0], &G = y[1];
        return {p.gamma * (-A + p.kappa * yd[1] * yd[0]), p.g0 * G - p.alpha * G * G - p.k * A * G};
    }
};

/// Calls `fn` with the typed right-hand side of `model`.
template <class Fn>
decltype(auto) visit_rhs(const ModelInstance& model, Fn&& fn) {
    switch (model.id) {
        case ModelId::prototype: return fn(PrototypeRhs{model.p});
        case ModelId::logisticQ: return fn(LogisticQRhs{model.p});
        case ModelId::logisticQG: return fn(LogisticQGRhs{model.p});
        case ModelId::competingFast: return fn(CompetingFastRhs{model.p});
        case ModelId::reducedA: return fn(ReducedARhs{model.p});
        case ModelId::reducedB: break;
    }
    return fn(ReducedBRhs{model.p});
}

inline std::vector<double> rhs(const ModelInstance& model, double t, std::span<const double> y,
                               std::span<const double> y_delayed) {
    if (y.size() != dimension(model.id) || y_delayed.size() != dimension(model.id))
        throw ValidationError("rhs: state dimension does not match model");
    return visit_rhs(model, [&](const auto& sys) {
        constexpr std::size_t D = std::decay_t<decltype(sys)>::dim;
        Vec<double, D> a{}, b{};
        for (std::size_t i = 0; i < D; ++i) {
            a[i] = y[i];
            b[i] = y_delayed[i];
        }
        const auto out = sys(t, a, b);
        return std::vector<double>(out.begin(), out.end());
    });
}

// ---------------------------------------------------------------------------
// Linearization about an equilibrium: d/dt dy = J0 dy(t) + J1 dy(t - T).

struct Linearization {
    std::size_t dim = 3;
    std::array<std::array<double, 3>, 3> J0{};
    std::array<std::array<double, 3>, 3> J1{};
    /// rows of fast species (carry the gamma factor)
    std::array<bool, 3> fast{};
    double gamma = 1;
    double delay = 1;
};

inline Linearization linearize(const ModelInstance& model, std::span<const double> state) {
    Linearization lin;
    lin.dim = dimension(model.id);
    lin.gamma = model.p.gamma;
    lin.delay = model.p.T;
    lin.fast = {true, lin.dim == 3, false};
    visit_rhs(model, [&](const auto& sys) {
        constexpr std::size_t D = std::decay_t<decltype(sys)>::dim;
        for (std::size_t j = 0; j < D; ++j) {
            for (int delayed = 0; delayed < 2; ++delayed) {
                Vec<Dual, D> y{}, yd{};
                for (std::size_t i = 0; i < D; ++i) y[i] = yd[i] = Dual(state[i]);
                (delayed ? yd : y)[j].d = 1;
                const auto out = sys(0.0, y, yd);
                for (std::size_t i = 0; i < D; ++i) (delayed ? lin.J1 : lin.J0)[i][j] = out[i].d;
            }
        }
        return 0;
    });
    return lin;
}

// ---------------------------------------------------------------------------
// Thresholds and equilibria

struct CompetingZeroState {
    double Q;
    double G;
};

/// Zero-A equilibrium of competingFast: nu*G - r*Q = beta, alpha*G + m*Q*G = g0.
inline CompetingZeroState competing_zero_state(const Parameters& p) {
    if (!(p.nu * p.g0 > p.alpha * p.beta))
        throw NoRoot("competingFast: nu*g0 <= alpha*beta, no positive zero-A equilibrium");
    const double a2 = p.m * p.nu / p.r;
    const double a1 = p.alpha - p.m * p.beta / p.r;
    const double G = (-a1 + std::sqrt(a1 * a1 + 4 * a2 * p.g0)) / (2 * a2);
    return {(p.nu * G - p.beta) / p.r, G};
}

/// g0* for g0-driven models, tau* for competingFast.
inline double threshold(const ModelInstance& model) {
    const auto& p = model.p;
    switch (model.id) {
        case ModelId::prototype:
        case ModelId::logisticQ:
        case ModelId::logisticQG: return p.alpha * (1 + p.mu * p.q0 / p.beta) / p.kappa;
        case ModelId::competingFast: {
            const auto z = competing_zero_state(p);
            return p.kappa * z.G - p.mu * z.Q;
        }
        case ModelId::reducedA:
        case ModelId::reducedB: break;
    }
    return p.alpha / p.kappa;
}

/// Signed distance past the threshold: g0 - g0* or tau* - tau.
inline double threshold_offset(const ModelInstance& model) {
    const double th = threshold(model);
    return driven_by_death_rate(model.id) ? th - model.p.tau_death : model.p.g0 - th;
}

enum class EquilibriumKind { zeroA, positive };

constexpr std::string_view to_string(EquilibriumKind k) { return k == EquilibriumKind::zeroA ? "zeroA" : "positive"; }

struct EquilibriumInfo {
    EquilibriumKind kind = EquilibriumKind::zeroA;
    std::vector<double> state;
    /// first-order coefficients (A~, Q~, G~) or (A~, G~) where defined
    std::optional<std::vector<double>> correction;
    double threshold = 0;
    double offset = 0;
    /// further equilibria reported alongside (logisticQ: A = Q = 0)
    std::vector<std::vector<double>> additional;
};

inline EquilibriumInfo zero_a_equilibrium(const ModelInstance& model) {
    const auto& p = model.p;
    EquilibriumInfo info;
    info.kind = EquilibriumKind::zeroA;
    info.threshold = threshold(model);
    info.offset = threshold_offset(model);
    switch (model.id) {
        case ModelId::prototype:
        case ModelId::logisticQG: info.state = {0.0, p.q0 / p.beta, p.g0 / p.alpha}; break;
        case ModelId::logisticQ:
            info.state = {0.0, p.q0 / p.beta, p.g0 / p.alpha};
            info.additional.push_back({0.0, 0.0, p.g0 / p.alpha});
            break;
        case ModelId::competingFast: {
            const auto z = competing_zero_state(p);
            info.state = {0.0, z.Q, z.G};
            break;
        }
        case ModelId::reducedA:
        case ModelId::reducedB: info.state = {0.0, p.g0 / p.alpha}; break;
    }
    return info;
}

enum class EquilibriumMode { exact, asymptotic };

namespace detail {

/// Q and G of the nonzero-A equilibrium as explicit functions of A, plus the
/// remaining scalar residual whose root fixes A.
struct ScalarReduction {
    ModelInstance model;

    [[nodiscard]] std::array<double, 3> state(double A) const {
        const auto& p = model.p;
        switch (model.id) {
            case ModelId::prototype: return {A, p.q0 / (p.beta + p.s * A), p.g0 / (p.alpha + p.k * A)};
            case ModelId::logisticQ: return {A, (p.q0 - p.s * A) / p.beta, p.g0 / (p.alpha + p.k * A)};
            case ModelId::logisticQG: return {A, (p.q0 - p.s * A) / p.beta, (p.g0 - p.k * A) / p.alpha};
            case ModelId::competingFast: {
                const double G =
                    (p.f * A + p.tau_death - p.mu * (p.beta + p.s * A) / p.r) / (p.kappa - p.mu * p.nu / p.r);
                return {A, (p.nu * G - p.beta - p.s * A) / p.r, G};
            }
            default: return {A, 0, 1 / p.kappa};
        }
    }

    [[nodiscard]] double residual(double A) const {
        const auto& p = model.p;
        const auto [a, Q, G] = state(A);
        if (model.id == ModelId::competingFast) return p.g0 - p.alpha * G - p.k * A * G - p.m * Q * G;
        return p.kappa * G - p.mu * Q - 1;
    }

    [[nodiscard]] double upper_bracket() const {
        const auto& p = model.p;
        switch (model.id) {
            case ModelId::prototype: return p.kappa * p.g0 / (p.k * p.alpha) + 1;
            case ModelId::logisticQ: return std::min(p.q0 / p.s, p.kappa * p.g0 / (p.k * p.alpha) + 1);
            case ModelId::logisticQG: return std::min(p.q0 / p.s, p.g0 / p.k);
            case ModelId::competingFast: return p.kappa * p.g0 / (p.alpha * p.f) + 1;
            default: return 1;
        }
    }
};

}  // namespace detail

inline EquilibriumInfo positive_equilibrium_exact(const ModelInstance& model) {
    const auto& p = model.p;
    EquilibriumInfo info;
    info.kind = EquilibriumKind::positive;
    info.threshold = threshold(model);
    info.offset = threshold_offset(model);
    if (model.id == ModelId::reducedA) {
        info.state = {(p.kappa * p.g0 - p.alpha) / p.k, 1 / p.kappa};
        return info;
    }
    if (model.id == ModelId::reducedB) {
        info.state = {(p.g0 - p.alpha / p.kappa) / p.k, 1 / p.kappa};
        return info;
    }
    const detail::ScalarReduction red{model};
    auto f = [&](double A) { return red.residual(A); };
    auto positive = [&](double A) {
        const auto s = red.state(A);
        return s[1] > 0 && s[2] > 0;
    };
    const double hi = red.upper_bracket();
    for (const auto& [a, b] : sign_change_brackets(f, 0.0, hi, 400)) {
        const double A = bisect_then_newton(f, a, b);
        if (A > 0 && positive(A)) {
            const auto s = red.state(A);
            info.state = {s[0], s[1], s[2]};
            return info;
        }
    }
    throw NoRoot("positive equilibrium of " + std::string(to_string(model.id)) +
                 " does not exist on this side of the threshold (offset " + std::to_string(info.offset) + ")");
}

/// First-order expansion about the threshold, exact where the model admits it.
inline EquilibriumInfo positive_equilibrium_asymptotic(const ModelInstance& model) {
    const auto& p = model.p;
    EquilibriumInfo info;
    info.kind = EquilibriumKind::positive;
    info.threshold = threshold(model);
    info.offset = threshold_offset(model);
    const double gs = info.threshold;
    const double d = info.offset;
    switch (model.id) {
        case ModelId::prototype: {
            const double a = 1 / (p.k * gs / p.alpha - p.alpha * p.mu * p.s * p.q0 / (p.kappa * p.beta * p.beta));
            const double q = 1 / (p.alpha * p.mu / p.kappa - p.k * gs * p.beta * p.beta / (p.alpha * p.s * p.q0));
            const double g = p.mu / p.kappa * q;
            info.correction = std::vector<double>{a, q, g};
            info.state = {a * d, p.q0 / p.beta + q * d, gs / p.alpha + g * d};
            break;
        }
        case ModelId::logisticQ: {
            const double a = 1 / (p.k * gs / p.alpha - p.alpha * p.s * p.mu / (p.beta * p.kappa));
            const double q = 1 / (p.mu * p.alpha / p.kappa - p.k * gs * p.beta / (p.alpha * p.s));
            const double g = p.mu / p.kappa * q;
            info.correction = std::vector<double>{a, q, g};
            info.state = {a * d, p.q0 / p.beta + q * d, gs / p.alpha + g * d};
            break;
        }
        case ModelId::logisticQG: {
            const double a = p.beta * p.kappa / (p.k * p.beta * p.kappa - p.s * p.alpha * p.mu);
            const double q = p.kappa * p.s / (p.alpha * p.mu * p.s - p.kappa * p.beta * p.k);
            const double g = p.mu * p.s / (p.alpha * p.mu * p.s - p.kappa * p.beta * p.k);
            info.correction = std::vector<double>{a, q, g};
            info.state = {a * d, p.q0 / p.beta + q * d, gs / p.alpha + g * d};
            break;
        }
        case ModelId::competingFast: {
            const auto z = competing_zero_state(p);
            const double u = p.g0 * p.r / z.G + z.G * p.m * p.nu;
            const double v = p.g0 * p.s / z.G + z.G * p.k * p.nu;
            const double F = p.f * u - p.mu * v + p.kappa * z.G * (p.k * p.r - p.m * p.s);
            const double a = u / F;
            const double q = -v / F;
            const double g = z.G * (p.m * p.s - p.k * p.r) / F;
            info.correction = std::vector<double>{a, q, g};
            info.state = {a * d, z.Q + q * d, z.G + g * d};
            break;
        }
        case ModelId::reducedA:
            info.correction = std::vector<double>{p.kappa / p.k, 0.0};
            info.state = {p.kappa * d / p.k, 1 / p.kappa};
            break;
        case ModelId::reducedB:
            info.correction = std::vector<double>{1 / p.k, 0.0};
            info.state = {d / p.k, 1 / p.kappa};
            break;
    }
    return info;
}

inline EquilibriumInfo positive_equilibrium(const ModelInstance& model, EquilibriumMode mode) {
    return mode == EquilibriumMode::exact ? positive_equilibrium_exact(model) : positive_equilibrium_asymptotic(model);
}

inline EquilibriumInfo equilibrium(const ModelInstance& model, EquilibriumKind kind) {
    return kind == EquilibriumKind::zeroA ? zero_a_equilibrium(model)
                                          : positive_equilibrium(model, EquilibriumMode::exact);
}

// ---------------------------------------------------------------------------
// Parameter conditions

struct Condition {
    std::string name;
    std::string statement;
    double lhs;
    double rhs;
    bool holds;
};

struct ConditionReport {
    ModelId model;
    std::vector<Condition> conditions;

    [[nodiscard]] bool all_hold() const {
        for (const auto& c : conditions)
            if (!c.holds) return false;
        return true;
    }
    [[nodiscard]] const Condition& at(std::string_view name) const {
        for (const auto& c : conditions)
            if (c.name == name) return c;
        throw ValidationError("no condition named '" + std::string(name) + "'");
    }
};

/// Evaluates every inequality relevant to the model, as "lhs > rhs".
inline ConditionReport check_conditions(const ModelInstance& model) {
    const auto& p = model.p;
    ConditionReport rep{model.id, {}};
    auto add = [&](std::string name, std::string statement, double lhs, double rhs) {
        rep.conditions.push_back({std::move(name), std::move(statement), lhs, rhs, lhs > rhs});
    };
    const double w1 = 2 * std::numbers::pi / p.T;
    switch (model.id) {
        case ModelId::prototype: {
            const double gs = threshold(model);
            add("existence_side", "k g0*/alpha^2 > mu s q0/(kappa beta^2)", p.k * gs / (p.alpha * p.alpha),
                p.mu * p.s * p.q0 / (p.kappa * p.beta * p.beta));
            add("hopf_side", "mu q0 s > beta^2 g0* kappa k/(alpha^2 + (2pi/T)^2)", p.mu * p.q0 * p.s,
                p.beta * p.beta * gs * p.kappa * p.k / (p.alpha * p.alpha + w1 * w1));
            break;
        }
        case ModelId::logisticQ: {
            const double gs = threshold(model);
            add("existence_side", "k g0*/alpha^2 > s mu/(beta kappa)", p.k * gs / (p.alpha * p.alpha),
                p.s * p.mu / (p.beta * p.kappa));
            add("hopf_side", "s mu/(beta kappa) > k g0*/(alpha^2 + (2pi/T)^2)", p.s * p.mu / (p.beta * p.kappa),
                p.k * gs / (p.alpha * p.alpha + w1 * w1));
            break;
        }
        case ModelId::logisticQG: {
            const double gs = threshold(model);
            add("existence_side", "k beta kappa > s alpha mu", p.k * p.beta * p.kappa, p.s * p.alpha * p.mu);
            add("hopf_side", "alpha mu s > g0*^2 kappa beta k/(g0*^2 + (2pi/T)^2)", p.alpha * p.mu * p.s,
                gs * gs * p.kappa * p.beta * p.k / (gs * gs + w1 * w1));
            break;
        }
        case ModelId::competingFast: {
            add("zero_a_positive", "nu g0 > alpha beta", p.nu * p.g0, p.alpha * p.beta);
            if (!rep.conditions.back().holds) break;
            const auto z = competing_zero_state(p);
            const double u = p.g0 * p.r / z.G + z.G * p.m * p.nu;
            const double v = p.g0 * p.s / z.G + z.G * p.k * p.nu;
            const double F = p.f * u - p.mu * v + p.kappa * z.G * (p.k * p.r - p.m * p.s);
            add("F_star_positive", "F* > 0", F, 0.0);
            add("interspecific_competition", "mu s > f r", p.mu * p.s, p.f * p.r);
            add("hopf_side", "(2pi/T)^2 r (mu s - f r)/(g0 r/G* + G* m nu) > F*",
                w1 * w1 * p.r * (p.mu * p.s - p.f * p.r) / u, F);
            break;
        }
        case ModelId::reducedA:
        case ModelId::reducedB: {
            // Hopf points of the nonzero-A equilibrium sit at negative offsets.
            const double n1 = 2 * std::numbers::pi / (p.gamma * p.T);
            const double ratio = model.id == ModelId::reducedA ? w1 / p.alpha : w1 * p.kappa / p.alpha;
            const double d1 = -p.alpha / (2 * p.kappa) * n1 * n1 * (1 + ratio * ratio);
            add("hopf_side", "first Hopf offset of the nonzero-A equilibrium > 0", d1, 0.0);
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Shipped parameter sets

namespace presets {

/// Prototype trace set (gamma = 200, g0 = 3.1, threshold g0* = 3; mu from the threshold identity).
inline ModelInstance fig4() {
    Parameters p;
    p.gamma = 200, p.T = 1, p.kappa = 0.5, p.mu = 0.5, p.q0 = 1, p.beta = 1, p.s = 1, p.k = 1, p.g0 = 3.1, p.alpha = 1;
    return {ModelId::prototype, p};
}

/// fig4() with s = 2 (the area-scaling set).
inline ModelInstance fig8() {
    auto m = fig4();
    m.p.s = 2;
    return m;
}

/// Prototype far above threshold, used for the pulse-profile comparison.
inline ModelInstance fig10() {
    Parameters p;
    p.gamma = 100, p.T = 1, p.kappa = 0.6, p.mu = 0.5, p.q0 = 1, p.beta = 1, p.s = 1.7, p.k = 1, p.g0 = 5.672,
    p.alpha = 1;
    return {ModelId::prototype, p};
}

/// Competing fast species set, tau_death = 2.
inline ModelInstance fig7() {
    Parameters p;
    p.gamma = 200, p.T = 1, p.nu = 2, p.r = 3, p.alpha = 0.3, p.m = 0.1, p.kappa = 2, p.mu = 1, p.s = 3, p.k = 4,
    p.f = 0.05, p.beta = 1, p.g0 = 0.6, p.tau_death = 2;
    return {ModelId::competingFast, p};
}

/// Two-species reduced models (no competitor), g0* = 2.
inline ModelInstance reduced(ModelId id, double g0 = 2.5) {
    Parameters p;
    p.gamma = 100, p.T = 1, p.kappa = 0.5, p.k = 1, p.g0 = g0, p.alpha = 1;
    return {id, p};
}

}  // namespace presets

}  // namespace pulselab
