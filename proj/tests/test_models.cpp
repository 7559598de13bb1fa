#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pulselab/models.hpp"

using namespace pulselab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ModelInstance as(ModelId id, ModelInstance m) {
    m.id = id;
    return m;
}

/// logisticQG needs k beta kappa > s alpha mu, which the Fig. 4 numbers meet only with equality.
ModelInstance logistic_qg() {
    auto m = as(ModelId::logisticQG, presets::fig4());
    m.p.s = 0.5;
    return m;
}

std::vector<ModelInstance> g0_family() {
    return {presets::fig4(), as(ModelId::logisticQ, presets::fig4()), logistic_qg()};
}

std::vector<ModelInstance> all_sets() {
    auto v = g0_family();
    v.push_back(presets::fig7());
    v.push_back(presets::reduced(ModelId::reducedA));
    v.push_back(presets::reduced(ModelId::reducedB));
    return v;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("names and parameter records", "[models]") {
    for (auto id : kAllModels) CHECK(model_from_string(to_string(id)) == id);
    CHECK_THROWS_AS(model_from_string("lotka"), ValidationError);
    CHECK(parameter_names(ModelId::competingFast).size() == 14);
    CHECK(parameter_names(ModelId::reducedB).size() == 6);
    CHECK(component_names(ModelId::reducedA) == std::vector<std::string>{"A", "G"});

    auto m = presets::fig4();
    m.p.T = kUnset;
    CHECK_THROWS_WITH(validate(m), ContainsSubstring("'T'"));
    m = presets::fig4();
    m.p.kappa = -1;
    CHECK_THROWS_WITH(validate(m), ContainsSubstring("'kappa'"));
    m = presets::reduced(ModelId::reducedA);
    CHECK_NOTHROW(validate(m));
}

TEST_CASE("prototype right-hand side by hand", "[models]") {
    const std::vector<double> ones{1, 1, 1};
    const auto d = rhs(presets::fig4(), 0, ones, ones);
    CHECK_THAT(d[0], WithinAbs(-200, 1e-12));
    CHECK_THAT(d[1], WithinAbs(-200, 1e-12));
    CHECK_THAT(d[2], WithinAbs(1.1, 1e-12));
    CHECK_THROWS_AS(rhs(presets::fig4(), 0, std::vector<double>{1, 1}, ones), ValidationError);
}

TEST_CASE("thresholds", "[models]") {
    CHECK_THAT(threshold(presets::fig4()), WithinAbs(3.0, 1e-14));
    CHECK_THAT(threshold(presets::reduced(ModelId::reducedA)), WithinAbs(2.0, 1e-14));
    const auto z = competing_zero_state(presets::fig7().p);
    CHECK_THAT(z.G, WithinAbs((-4 + std::sqrt(52.0)) / 2, 1e-12));
    CHECK_THAT(z.Q, WithinAbs(0.73703, 1e-5));
    CHECK_THAT(threshold(presets::fig7()), WithinAbs(2.47407, 1e-4));
    CHECK(threshold_offset(presets::fig7()) > 0);
    auto bad = presets::fig7();
    bad.p.g0 = 0.1;
    CHECK_THROWS_AS(threshold(bad), NoRoot);
}

TEST_CASE("zero-A equilibria are rest points", "[models]") {
    for (const auto& m : all_sets()) {
        const auto e = zero_a_equilibrium(m);
        CHECK(e.state[0] == 0.0);
        CHECK(max_abs(rhs(m, 0, e.state, e.state)) < 1e-12);
    }
    const auto e4 = zero_a_equilibrium(presets::fig4());
    CHECK(e4.state == std::vector<double>{0, 1, 3.1});
    const auto eq = zero_a_equilibrium(as(ModelId::logisticQ, presets::fig4()));
    REQUIRE(eq.additional.size() == 1);
    CHECK(eq.additional[0] == std::vector<double>{0, 0, 3.1});
    const auto m = as(ModelId::logisticQ, presets::fig4());
    CHECK(max_abs(rhs(m, 0, eq.additional[0], eq.additional[0])) < 1e-12);
}

TEST_CASE("positive equilibrium of the Fig. 4 set", "[models]") {
    const auto e = positive_equilibrium(presets::fig4(), EquilibriumMode::exact);
    CHECK_THAT(e.state[0], WithinAbs(0.05, 1e-12));
    CHECK_THAT(e.state[1], WithinAbs(1 / 1.05, 1e-12));
    CHECK_THAT(e.state[2], WithinAbs(3.1 / 1.05, 1e-12));
    const auto a = positive_equilibrium(presets::fig4(), EquilibriumMode::asymptotic);
    REQUIRE(a.correction);
    CHECK_THAT((*a.correction)[0], WithinAbs(0.5, 1e-12));
    CHECK_THAT(a.state[0], WithinAbs(0.05, 1e-12));
    CHECK_THAT(a.offset, WithinAbs(0.1, 1e-12));
}

TEST_CASE("reducedB closed form", "[models]") {
    const auto m = presets::reduced(ModelId::reducedB, 2.7);
    const auto e = positive_equilibrium(m, EquilibriumMode::exact);
    CHECK_THAT(e.state[0], WithinAbs(0.7, 1e-12));
    CHECK_THAT(e.state[1], WithinAbs(2.0, 1e-12));
}

TEST_CASE("exact equilibria are rest points", "[models][property]") {
    for (const auto& base : all_sets()) {
        for (double d : {0.3, 0.05, 1e-3}) {
            auto m = with_bifurcation_parameter(base, driven_by_death_rate(base.id) ? threshold(base) - d
                                                                                     : threshold(base) + d);
            const auto e = positive_equilibrium(m, EquilibriumMode::exact);
            INFO(to_string(m.id) << " offset " << d);
            CHECK(max_abs(rhs(m, 0, e.state, e.state)) < 1e-10);
            for (double x : e.state) CHECK(x > 0);
        }
    }
}

TEST_CASE("exact and asymptotic agree to first order", "[models][property]") {
    for (const auto& base : all_sets()) {
        std::vector<double> ratio;
        for (double d : {1e-1, 1e-2, 1e-3}) {
            auto m = with_bifurcation_parameter(base, driven_by_death_rate(base.id) ? threshold(base) - d
                                                                                     : threshold(base) + d);
            const auto ex = positive_equilibrium(m, EquilibriumMode::exact);
            const auto as = positive_equilibrium(m, EquilibriumMode::asymptotic);
            double err = 0;
            for (std::size_t i = 0; i < ex.state.size(); ++i) err = std::max(err, std::abs(ex.state[i] - as.state[i]));
            ratio.push_back(err / (d * d));
            // asymptotic mode is within O(delta^2) of a rest point
            CHECK(max_abs(rhs(m, 0, as.state, as.state)) < 50 * m.p.gamma * d * d);
        }
        INFO(to_string(base.id));
        CHECK(ratio[2] < 2 * ratio[0] + 1e-6);
        CHECK(ratio[1] < 2 * ratio[0] + 1e-6);
    }
}

TEST_CASE("transcritical collision", "[models][property]") {
    for (const auto& base : all_sets()) {
        const double d = 1e-8;
        auto m = with_bifurcation_parameter(base, driven_by_death_rate(base.id) ? threshold(base) - d
                                                                                 : threshold(base) + d);
        const auto ex = positive_equilibrium(m, EquilibriumMode::exact);
        const auto z = zero_a_equilibrium(m);
        for (std::size_t i = 0; i < z.state.size(); ++i) CHECK_THAT(ex.state[i], WithinAbs(z.state[i], 1e-6));
    }
}

TEST_CASE("no positive equilibrium below threshold", "[models]") {
    for (const auto& base : g0_family()) {
        const auto m = with_bifurcation_parameter(base, threshold(base) - 0.1);
        CHECK_THROWS_AS(positive_equilibrium(m, EquilibriumMode::exact), NoRoot);
    }
    const auto cf = with_bifurcation_parameter(presets::fig7(), threshold(presets::fig7()) + 0.1);
    CHECK_THROWS_AS(positive_equilibrium(cf, EquilibriumMode::exact), NoRoot);
}

TEST_CASE("linearization matches finite differences", "[models][property]") {
    for (const auto& m : all_sets()) {
        const auto e = positive_equilibrium(m, EquilibriumMode::exact);
        const auto lin = linearize(m, e.state);
        const std::size_t D = e.state.size();
        REQUIRE(lin.dim == D);
        for (std::size_t j = 0; j < D; ++j) {
            for (int delayed = 0; delayed < 2; ++delayed) {
                const double h = 1e-6;
                auto yp = e.state, ym = e.state;
                yp[j] += h, ym[j] -= h;
                const auto fp = delayed ? rhs(m, 0, e.state, yp) : rhs(m, 0, yp, e.state);
                const auto fm = delayed ? rhs(m, 0, e.state, ym) : rhs(m, 0, ym, e.state);
                for (std::size_t i = 0; i < D; ++i) {
                    const double fd = (fp[i] - fm[i]) / (2 * h);
                    const double ad = (delayed ? lin.J1 : lin.J0)[i][j];
                    CHECK_THAT(ad, WithinAbs(fd, 1e-5 * std::max(1.0, std::abs(fd))));
                }
            }
        }
    }
}

TEST_CASE("condition reports carry both sides", "[models]") {
    const auto r4 = check_conditions(presets::fig4());
    CHECK(r4.all_hold());
    CHECK_THAT(r4.at("existence_side").lhs, WithinAbs(3.0, 1e-12));
    CHECK_THAT(r4.at("existence_side").rhs, WithinAbs(1.0, 1e-12));
    CHECK_THAT(r4.at("hopf_side").lhs, WithinAbs(0.5, 1e-12));
    CHECK_THAT(r4.at("hopf_side").rhs, WithinAbs(1.5 / (1 + 4 * std::numbers::pi * std::numbers::pi), 1e-12));
    CHECK_THAT(r4.at("hopf_side").rhs, WithinAbs(0.03706, 1e-5));

    const auto r7 = check_conditions(presets::fig7());
    CHECK(r7.all_hold());
    CHECK_THAT(r7.at("interspecific_competition").lhs, WithinAbs(3.0, 1e-12));
    CHECK_THAT(r7.at("interspecific_competition").rhs, WithinAbs(0.15, 1e-12));
    CHECK_THAT(r7.at("F_star_positive").lhs, WithinAbs(23.68, 0.01));
    CHECK_THAT(r7.at("hopf_side").lhs, WithinAbs(234.0, 0.1));

    for (auto id : {ModelId::reducedA, ModelId::reducedB}) {
        const auto rr = check_conditions(presets::reduced(id));
        CHECK_FALSE(rr.at("hopf_side").holds);
        CHECK(rr.at("hopf_side").lhs < 0);
    }
    CHECK_THROWS_AS(r4.at("nonsense"), ValidationError);
}
