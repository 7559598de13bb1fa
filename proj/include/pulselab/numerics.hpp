#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "pulselab/error.hpp"

namespace pulselab {

/// Forward-mode dual number; enough arithmetic for the polynomial model right-hand sides.
struct Dual {
    double v = 0;
    double d = 0;
    constexpr Dual() = default;
    constexpr Dual(double value, double deriv = 0) : v(value), d(deriv) {}
};

constexpr Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
constexpr Dual operator-(Dual a) { return {-a.v, -a.d}; }
constexpr Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
constexpr Dual operator+(Dual a, double b) { return {a.v + b, a.d}; }
constexpr Dual operator+(double a, Dual b) { return {a + b.v, b.d}; }
constexpr Dual operator-(Dual a, double b) { return {a.v - b, a.d}; }
constexpr Dual operator-(double a, Dual b) { return {a - b.v, -b.d}; }
constexpr Dual operator*(Dual a, double b) { return {a.v * b, a.d * b}; }
constexpr Dual operator*(double a, Dual b) { return {a * b.v, a * b.d}; }

/// Sub-intervals of [lo, hi] (n equal pieces) where f changes sign or hits zero.
template <class F>
std::vector<std::pair<double, double>> sign_change_brackets(F&& f, double lo, double hi, int n) {
    std::vector<std::pair<double, double>> out;
    double x0 = lo;
    double f0 = f(x0);
    for (int i = 1; i <= n; ++i) {
        const double x1 = lo + (hi - lo) * i / n;
        const double f1 = f(x1);
        if (std::isfinite(f0) && std::isfinite(f1) && ((f0 <= 0 && f1 >= 0) || (f0 >= 0 && f1 <= 0)))
            out.emplace_back(x0, x1);
        x0 = x1;
        f0 = f1;
    }
    return out;
}

/// Bisection to `coarse`, then safeguarded Newton (central-difference slope)
/// inside the bracket to full precision. Requires a sign change on [lo, hi].
template <class F>
double bisect_then_newton(F&& f, double lo, double hi, double coarse = 1e-6) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo > 0) == (fhi > 0)) throw NoRoot("bisect_then_newton: no sign change on bracket");
    auto tol = [coarse](double a, double b) { return std::abs(b - a) <= coarse * std::max(1.0, std::abs(a)); };
    std::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol, iters);
    const double fd_step = 1e-7 * std::max(1.0, std::abs(a));
    auto fdf = [&](double x) {
        const double d = (f(x + fd_step) - f(x - fd_step)) / (2 * fd_step);
        return std::make_pair(f(x), d);
    };
    iters = 50;
    return boost::math::tools::newton_raphson_iterate(fdf, 0.5 * (a + b), lo, hi, 50, iters);
}

}  // namespace pulselab
