#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pulselab/dde.hpp"
#include "pulselab/simulation.hpp"
#include "support.hpp"

using namespace pulselab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct UnitDelay {
    static constexpr std::size_t dim = 1;
    double delay() const { return 1.0; }
    StateArray<1> operator()(double, const StateArray<1>&, const StateArray<1>& yd) const { return {-yd[0]}; }
};

struct Blowup {
    static constexpr std::size_t dim = 1;
    double delay() const { return 1.0; }
    StateArray<1> operator()(double, const StateArray<1>& y, const StateArray<1>&) const { return {y[0] * y[0]}; }
};

auto one = [](double) { return StateArray<1>{1.0}; };

HistoryTrajectory unit_delay_run(double h, double t_end) {
    IntegratorConfig cfg;
    cfg.step = h;
    cfg.record = t_end;
    return integrate(UnitDelay{}, one, cfg);
}

}  // namespace

TEST_CASE("method of steps: piecewise polynomial values", "[dde]") {
    const auto tr = unit_delay_run(1e-3, 3);
    CHECK_THAT(tr.eval(0, 1.0), WithinAbs(0.0, 1e-10));
    CHECK_THAT(tr.eval(0, 2.0), WithinAbs(-0.5, 1e-10));  // 1 - t + (t-1)^2/2 at t = 2
    CHECK_THAT(tr.eval(0, 0.5), WithinAbs(0.5, 1e-12));
    for (double t : {0.37, 1.61, 2.93}) CHECK_THAT(tr.eval(0, t), WithinAbs(support::unit_delay_exact(t), 1e-10));
}

TEST_CASE("trajectory grid invariants", "[dde]") {
    const double h = 1.0 / 64;
    const auto tr = unit_delay_run(h, 2);
    CHECK(tr.size() == 129);
    CHECK_THAT(tr.t1() - tr.t0(), WithinAbs(2.0, 1e-15));
    for (std::size_t i = 0; i < tr.size(); i += 7) CHECK(tr.eval(0, tr.time(i)) == tr.value(0, i));
    CHECK_THROWS_AS(tr.eval(0, 2.5), OutOfRange);
    CHECK_THROWS_AS(tr.eval(0, -0.1), OutOfRange);
}

TEST_CASE("dense output is continuous across step boundaries", "[dde]") {
    const double h = 0.01;
    const auto tr = unit_delay_run(h, 6);
    for (std::size_t i = 1; i + 1 < tr.size(); i += 37) {
        const double t = tr.time(i);
        CHECK_THAT(tr.eval(0, t - 1e-12), WithinAbs(tr.eval(0, t + 1e-12), 1e-10));
    }
}

TEST_CASE("order-4 convergence on y' = -y(t-1)", "[dde][convergence]") {
    // Up to t = 4 the exact solution is a polynomial of degree <= 4 and RK4
    // reproduces it to rounding, so the error is measured further out.
    const double t = 8;
    std::vector<double> err;
    for (double h : {1e-2, 5e-3, 2.5e-3}) err.push_back(std::abs(unit_delay_run(h, t).eval(0, t) - support::unit_delay_exact(t)));
    const double slope1 = std::log2(err[0] / err[1]);
    const double slope2 = std::log2(err[1] / err[2]);
    CHECK_THAT(slope1, WithinAbs(4.0, 0.2));
    CHECK_THAT(slope2, WithinAbs(4.0, 0.2));
}

TEST_CASE("midpoint interpolation agrees with a refined run", "[dde][convergence]") {
    const auto coarse = unit_delay_run(0.02, 6);
    const auto fine = unit_delay_run(0.01, 6);
    double worst = 0;
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
        const double t = coarse.time(i) + 0.01;
        worst = std::max(worst, std::abs(coarse.eval(0, t) - fine.eval(0, t)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("integrator errors", "[dde]") {
    IntegratorConfig cfg;
    cfg.step = 2;
    CHECK_THROWS_AS(integrate(UnitDelay{}, one, cfg), StepTooLarge);
    cfg.step = 0;
    CHECK_THROWS_AS(integrate(UnitDelay{}, one, cfg), ValidationError);
    cfg.step = 1e-3;
    cfg.record = 2;
    try {
        integrate(Blowup{}, one, cfg);
        FAIL("expected blow-up");
    } catch (const NonFiniteState& e) {
        CHECK(e.time() > 0.9);
        CHECK(e.time() < 1.01);
    }
}

TEST_CASE("stop predicate ends the run at the node", "[dde]") {
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.record = 5;
    const auto tr = integrate(UnitDelay{}, one, cfg, [](double, const StateArray<1>& y) { return y[0] < 0.2495; });
    CHECK(tr.value(0, tr.size() - 1) < 0.2495);
    CHECK(tr.value(0, tr.size() - 2) >= 0.2495);
    CHECK_THAT(tr.t1(), WithinAbs(0.751, 1e-9));
}

TEST_CASE("find_peaks and estimate_period on analytic traces", "[dde]") {
    const double h = 1e-3;
    const double w = 2 * std::numbers::pi;
    const auto s = support::sampled([&](double t) { return std::sin(w * t); }, [&](double t) { return w * std::cos(w * t); }, 0, 3, h);
    const auto peaks = find_peaks(s, 0, 0.5);
    REQUIRE(peaks.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(peaks[i].time, WithinAbs(0.25 + i, h));

    const auto flat = support::sampled([](double) { return 2.0; }, [](double) { return 0.0; }, 0, 3, h);
    CHECK(find_peaks(flat, 0, 0.0).empty());
    CHECK_THROWS_AS(estimate_period(flat, 0), NotPeriodic);

    const double tau = 1.5;
    const auto c = support::sampled([&](double t) { return std::cos(w * t / tau); },
                           [&](double t) { return -w / tau * std::sin(w * t / tau); }, 0, 12, h);
    const auto pe = estimate_period(c, 0);
    CHECK_THAT(pe.period, WithinAbs(tau, 2 * h));
    CHECK(pe.max_deviation < 2 * h);
    CHECK_THROWS_AS(estimate_period(support::sampled([&](double t) { return std::cos(w * t / tau); },
                                            [&](double t) { return -w / tau * std::sin(w * t / tau); }, 0, 5, h),
                                    0),
                    NotPeriodic);
}

TEST_CASE("per-period integral", "[dde]") {
    const auto flat = support::sampled([](double) { return 2.5; }, [](double) { return 0.0; }, 0, 3, 0.01);
    CHECK_THAT(integrate_component_over_period(flat, 0, {0.3, 1.7}), WithinRel(2.5 * 1.4, 1e-14));
    const auto sq = support::sampled([](double t) { return t * t; }, [](double t) { return 2 * t; }, 0, 3, 0.01);
    CHECK_THAT(integrate_component_over_period(sq, 0, {0.5, 2.5}), WithinRel((2.5 * 2.5 * 2.5 - 0.125) / 3, 1e-12));
    CHECK_THROWS_AS(integrate_component_over_period(flat, 0, {2.5, 3.5}), OutOfRange);
}

TEST_CASE("trajectory CSV", "[dde]") {
    const auto tr = unit_delay_run(0.25, 1);
    std::ostringstream os;
    const std::vector<std::string> names{"y"};
    write_trajectory_csv(tr, os, names);
    CHECK(os.str() == "t,y\n0,1\n0.25,0.75\n0.5,0.5\n0.75,0.25\n1,0\n");
}

TEST_CASE("catalogue runs: determinism and positivity", "[dde][model]") {
    auto m = presets::fig4();
    auto cfg = default_config(m);
    cfg.transient = 0;
    cfg.record = 20;
    const auto a = simulate(m, default_history(m), cfg);
    const auto b = simulate(m, default_history(m), cfg);
    REQUIRE(a.size() == b.size());
    bool identical = true;
    double lowest = INFINITY;
    for (std::size_t c = 0; c < a.dim(); ++c)
        for (std::size_t i = 0; i < a.size(); ++i) {
            identical = identical && a.value(c, i) == b.value(c, i);
            lowest = std::min(lowest, a.value(c, i));
        }
    CHECK(identical);
    CHECK(lowest >= -1e-12);

    for (auto model : {presets::fig7(), presets::reduced(ModelId::reducedA), presets::reduced(ModelId::reducedB)}) {
        auto c2 = default_config(model);
        c2.record = 10;
        c2.transient = 0;
        const auto tr = simulate(model, default_history(model), c2);
        double lo = INFINITY;
        for (std::size_t c = 0; c < tr.dim(); ++c)
            for (double v : tr.values(c)) lo = std::min(lo, v);
        CHECK(lo >= -1e-12);
    }
}

TEST_CASE("history validation", "[dde][model]") {
    const auto m = presets::fig4();
    auto cfg = default_config(m);
    cfg.record = 1;
    cfg.transient = 0;
    CHECK_THROWS_AS(simulate(m, [](double) { return std::vector<double>{-1.0, 1.0, 1.0}; }, cfg), ValidationError);
    CHECK_THROWS_AS(simulate(m, [](double) { return std::vector<double>{1.0, 1.0}; }, cfg), ValidationError);
}

TEST_CASE("Fig. 4 set: period, amplitude and period-offset scaling", "[dde][simulation]") {
    double c_prev = 0, peak_prev = 0;
    for (double g : {100.0, 200.0, 400.0}) {
        const auto m = with_gamma(presets::fig4(), g);
        const auto tr = support::settled(m);
        const auto pe = estimate_period(tr, 0);
        const double peak = std::max_element(pe.peaks.begin(), pe.peaks.end(),
                                             [](const Peak& a, const Peak& b) { return a.height < b.height; })
                                ->height;
        const double c = g * (pe.period - 1);
        if (g == 200.0) {
            CHECK(pe.period > 1.0);
            CHECK(pe.period < 1.01);
        }
        if (peak_prev > 0) {
            CHECK_THAT(peak / peak_prev, WithinAbs(2.0, 0.4));
            CHECK_THAT(c / c_prev, WithinAbs(1.0, 0.25));
        }
        c_prev = c, peak_prev = peak;
    }
}

TEST_CASE("constant default history reaches the pulsating attractor", "[dde][simulation]") {
    const auto m = presets::fig4();
    // From A = 1e-3 the oscillation needs several hundred delays to grow into pulses.
    const auto seeded = estimate_period(support::settled(m), 0);
    const auto plain = estimate_period(support::settled(m, 700, 10, false), 0);
    CHECK_THAT(plain.period, WithinAbs(seeded.period, 1e-6));
    CHECK_THAT(plain.peaks.front().height, WithinRel(seeded.peaks.front().height, 1e-4));
}
