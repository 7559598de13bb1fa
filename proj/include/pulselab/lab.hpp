#pragma once

// Experiment orchestration: JSON configs, run kinds, worker pool, emitted
// files and their manifest.

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "pulselab/error.hpp"
#include "pulselab/hopf.hpp"
#include "pulselab/models.hpp"
#include "pulselab/pulse.hpp"
#include "pulselab/simulation.hpp"
#include "pulselab/spectrum.hpp"
#include "pulselab/trace.hpp"

namespace pulselab::lab {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class RunKind { simulate, spectrum, cascade, pulse, scaling };

inline std::string_view to_string(RunKind k) {
    switch (k) {
        case RunKind::simulate: return "simulate";
        case RunKind::spectrum: return "spectrum";
        case RunKind::cascade: return "cascade";
        case RunKind::pulse: return "pulse";
        case RunKind::scaling: return "scaling";
    }
    return "?";
}

inline RunKind run_kind_from_string(std::string_view s) {
    for (auto k : {RunKind::simulate, RunKind::spectrum, RunKind::cascade, RunKind::pulse, RunKind::scaling})
        if (to_string(k) == s) return k;
    throw ValidationError("run: unknown run kind '" + std::string(s) + "'");
}

enum class HistoryKind { constant, pulse };

struct ExperimentConfig {
    std::string name = "experiment";
    ModelInstance model;
    RunKind kind = RunKind::simulate;
    std::vector<double> gammas;  ///< empty: the model's gamma
    std::vector<double> g0s;     ///< empty: the model's g0
    std::optional<Box> box;
    int n_max = 5;
    std::size_t harmonics = 16;
    double transient_periods = 100;
    double record_periods = 10;
    HistoryKind history = HistoryKind::pulse;
    std::optional<double> c;  ///< pulse runs: profile speed; unset means measured
    std::size_t max_rows = 20000;
    std::size_t curve_points = 2000;
    std::string output;
    std::size_t workers = 1;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValidationError(where + ": unknown field '" + key + "'");
}

inline double number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ValidationError(field + ": expected a number");
    return v.get<double>();
}

inline std::vector<double> number_list(const json& v, const std::string& field) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ValidationError(field + ": expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::size_t count(const json& v, const std::string& field, std::size_t min) {
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min))
        throw ValidationError(field + ": expected an integer >= " + std::to_string(min));
    return v.get<std::size_t>();
}

inline bool allows_pulse_seed(ModelId id) { return id == ModelId::prototype || id == ModelId::logisticQ; }

}  // namespace detail

/// Reads and validates a config document. Every problem is a ValidationError
/// naming the offending field.
inline ExperimentConfig parse_config(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
    reject_unknown(doc, {"name", "model", "parameters", "run", "options", "workers"}, "config");
    ExperimentConfig cfg;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw ValidationError("name: expected a string");
        cfg.name = doc["name"].get<std::string>();
    }
    if (!doc.contains("model") || !doc["model"].is_string()) throw ValidationError("model: required string");
    cfg.model.id = model_from_string(doc["model"].get<std::string>());
    if (!doc.contains("run") || !doc["run"].is_string()) throw ValidationError("run: required string");
    cfg.kind = run_kind_from_string(doc["run"].get<std::string>());

    if (!doc.contains("parameters") || !doc["parameters"].is_object())
        throw ValidationError("parameters: required object");
    const auto allowed = parameter_names(cfg.model.id);
    for (const auto& [key, value] : doc["parameters"].items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValidationError("parameters." + key + ": not a parameter of model " +
                                  std::string(pulselab::to_string(cfg.model.id)));
        *parameter_slot(cfg.model.p, key) = number(value, "parameters." + key);
    }
    validate(cfg.model);

    if (doc.contains("workers")) cfg.workers = count(doc["workers"], "workers", 1);

    const json opts = doc.value("options", json::object());
    if (!opts.is_object()) throw ValidationError("options: expected an object");
    reject_unknown(opts,
                   {"gamma", "g0", "box", "n_max", "harmonics", "transient_periods", "record_periods", "history", "c",
                    "max_rows", "curve_points", "output"},
                   "options");
    if (opts.contains("gamma")) cfg.gammas = number_list(opts["gamma"], "options.gamma");
    if (opts.contains("g0")) cfg.g0s = number_list(opts["g0"], "options.g0");
    for (double g : cfg.gammas)
        if (!(g > 0) || !std::isfinite(g)) throw ValidationError("options.gamma: values must be positive");
    for (double g : cfg.g0s)
        if (!(g > 0) || !std::isfinite(g)) throw ValidationError("options.g0: values must be positive");
    if (opts.contains("box")) {
        const auto& b = opts["box"];
        if (!b.is_object()) throw ValidationError("options.box: expected an object");
        reject_unknown(b, {"x_min", "x_max", "omega_max"}, "options.box");
        Box box;
        box.x_min = number(b.at("x_min"), "options.box.x_min");
        box.x_max = number(b.at("x_max"), "options.box.x_max");
        box.omega_max = number(b.at("omega_max"), "options.box.omega_max");
        if (!(box.x_min < box.x_max) || !(box.omega_max > 0))
            throw ValidationError("options.box: need x_min < x_max and omega_max > 0");
        cfg.box = box;
    }
    if (opts.contains("n_max")) cfg.n_max = static_cast<int>(count(opts["n_max"], "options.n_max", 1));
    if (opts.contains("harmonics")) cfg.harmonics = count(opts["harmonics"], "options.harmonics", 5);
    if (opts.contains("transient_periods")) {
        cfg.transient_periods = number(opts["transient_periods"], "options.transient_periods");
        if (!(cfg.transient_periods >= 0)) throw ValidationError("options.transient_periods: must be >= 0");
    }
    if (opts.contains("record_periods")) {
        cfg.record_periods = number(opts["record_periods"], "options.record_periods");
        if (!(cfg.record_periods > 0)) throw ValidationError("options.record_periods: must be > 0");
    }
    if (opts.contains("history")) {
        const auto h = opts["history"].is_string() ? opts["history"].get<std::string>() : "";
        if (h == "constant")
            cfg.history = HistoryKind::constant;
        else if (h == "pulse")
            cfg.history = HistoryKind::pulse;
        else
            throw ValidationError("options.history: expected \"constant\" or \"pulse\"");
    } else if (!allows_pulse_seed(cfg.model.id)) {
        cfg.history = HistoryKind::constant;
    }
    if (cfg.history == HistoryKind::pulse && !allows_pulse_seed(cfg.model.id))
        throw ValidationError("options.history: pulse seeding needs the prototype or logisticQ model");
    if (opts.contains("c")) {
        cfg.c = number(opts["c"], "options.c");
        if (!(*cfg.c > 0)) throw ValidationError("options.c: must be positive");
    }
    if (opts.contains("max_rows")) cfg.max_rows = count(opts["max_rows"], "options.max_rows", 10);
    if (opts.contains("curve_points")) cfg.curve_points = count(opts["curve_points"], "options.curve_points", 10);
    if (opts.contains("output")) {
        if (!opts["output"].is_string()) throw ValidationError("options.output: expected a string");
        cfg.output = opts["output"].get<std::string>();
    }

    if (cfg.kind == RunKind::scaling && cfg.gammas.size() < 4)
        throw ValidationError("options.gamma: scaling runs need at least 4 distinct values");
    if (cfg.kind == RunKind::pulse && !allows_pulse_seed(cfg.model.id))
        throw ValidationError("model: pulse runs need the prototype or logisticQ model");
    if (cfg.kind == RunKind::scaling && !allows_pulse_seed(cfg.model.id))
        throw ValidationError("model: scaling runs need the prototype or logisticQ model");
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

inline ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Emitted files

struct Artifact {
    std::string path;  ///< relative to the output directory
    std::string content;
};

inline std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

struct RunResult {
    std::vector<Artifact> files;
    json summary = json::object();
};

namespace detail {

template <class Fn>
std::string to_text(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

/// Finite numbers as JSON numbers, the rest as null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::string point_dir(std::string_view key, double v) { return std::string(key) + "_" + fmt("%.10g", v); }

/// Runs `fn(i)` for i < n on up to `workers` threads; the first exception is
/// rethrown after all threads finish.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto body = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first) first = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (first) std::rethrow_exception(first);
}

struct Point {
    ModelInstance model;
    std::string dir;
};

/// Grid of (gamma, g0) points, each with its own subdirectory when the grid
/// has more than one point.
inline std::vector<Point> grid(const ExperimentConfig& cfg) {
    const auto gammas = cfg.gammas.empty() ? std::vector<double>{cfg.model.p.gamma} : cfg.gammas;
    const auto g0s = cfg.g0s.empty() ? std::vector<double>{cfg.model.p.g0} : cfg.g0s;
    std::vector<Point> pts;
    for (double g : gammas)
        for (double g0 : g0s) {
            Point pt{cfg.model, ""};
            pt.model.p.gamma = g;
            pt.model.p.g0 = g0;
            if (gammas.size() > 1) pt.dir += point_dir("gamma", g) + "/";
            if (g0s.size() > 1) pt.dir += point_dir("g0", g0) + "/";
            pts.push_back(pt);
        }
    return pts;
}

inline HistoryTrajectory run_simulation(const ExperimentConfig& cfg, const ModelInstance& model) {
    auto ic = default_config(model);
    ic.transient = cfg.transient_periods * model.p.T;
    ic.record = cfg.record_periods * model.p.T;
    ic.retain_transient = false;
    if (cfg.history == HistoryKind::pulse) {
        const auto seed = pulse_seed_history(model);
        return simulate(model,
                        [seed](double t) {
                            const auto s = seed(t);
                            return std::vector<double>(s.begin(), s.end());
                        },
                        ic);
    }
    return simulate(model, default_history(model), ic);
}

inline std::string trajectory_csv(const HistoryTrajectory& traj, const ModelInstance& model, std::size_t max_rows) {
    const auto names = component_names(model.id);
    const std::vector<std::string> cols(names.begin(), names.end());
    const std::size_t stride = (traj.size() + max_rows - 1) / max_rows;
    return to_text([&](std::ostream& os) { write_trajectory_csv(traj, os, cols, stride); });
}

inline json metrics_json(const PulseMetrics& m, const ModelInstance& model) {
    json j{{"period", num(m.period)},
           {"c", num(c_from_period(model, m.period))},
           {"amplitude", num(m.amplitude)},
           {"fwhm", num(m.fwhm)},
           {"floor", num(m.floor)},
           {"area", num(m.area)},
           {"time_average", num(m.time_average)},
           {"pulses", m.pulses}};
    if (m.competitor_collapse) j["competitor_collapse"] = num(*m.competitor_collapse);
    if (m.competitor_plateau) j["competitor_plateau"] = num(*m.competitor_plateau);
    return j;
}

inline std::string gnuplot_header(const std::string& title) {
    return "set datafile separator ','\nset key autotitle columnhead\nset title '" + title + "'\n";
}

// ---------------------------------------------------------------------------
// Run kinds

inline RunResult run_simulate(const ExperimentConfig& cfg, const Point& pt, bool plots) {
    RunResult r;
    const auto traj = run_simulation(cfg, pt.model);
    r.files.push_back({pt.dir + "trajectory.csv", trajectory_csv(traj, pt.model, cfg.max_rows)});
    const auto names = component_names(pt.model.id);
    const std::size_t prey = 0;
    const auto competitor = has_competitor(pt.model.id) ? std::optional<std::size_t>{1} : std::nullopt;
    try {
        const auto m = pulse_metrics(traj, prey, competitor);
        const auto hs = fourier_harmonics(traj, prey, cfg.harmonics);
        const auto pa = phase_alignment(hs, 5);
        r.summary = metrics_json(m, pt.model);
        r.summary["periodic"] = true;
        r.summary["phase_deviation"] = num(pa.max_deviation);
        r.files.push_back({pt.dir + "harmonics.csv", to_text([&](std::ostream& os) { write_harmonics_csv(hs, os); })});
    } catch (const NotPeriodic&) {
        r.summary["periodic"] = false;
        std::vector<double> last(traj.dim());
        for (std::size_t c = 0; c < traj.dim(); ++c) last[c] = traj.value(c, traj.size() - 1);
        r.summary["final_state"] = last;
    }
    r.files.push_back({pt.dir + "metrics.json", r.summary.dump(2) + "\n"});
    if (plots) {
        std::string gp = gnuplot_header("trajectory") + "set xlabel 't'\nplot ";
        for (std::size_t c = 0; c < names.size(); ++c)
            gp += (c ? ", '' using 1:" : "'trajectory.csv' using 1:") + std::to_string(c + 2) + " with lines";
        r.files.push_back({pt.dir + "trajectory.gp", gp + "\n"});
    }
    return r;
}

inline RunResult run_spectrum(const ExperimentConfig& cfg, const Point& pt, bool plots) {
    RunResult r;
    const Box box = cfg.box.value_or(standard_box(pt.model));
    const double gamma = pt.model.p.gamma;
    // weak curves in the scaled frequency (Im lambda = gamma omega), strong
    // curve over the first ten delay harmonics
    auto grid_to = [&](double top) {
        std::vector<double> w(cfg.curve_points);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = top * static_cast<double>(i + 1) / static_cast<double>(w.size());
        return w;
    };
    const auto weak_omegas = grid_to(box.omega_max / gamma);
    const auto strong_omegas = grid_to(std::min(box.omega_max, 20 * std::numbers::pi / pt.model.p.T));
    // below threshold the positive equilibrium is absent: its files carry the header only
    bool positive = true;
    try {
        positive_equilibrium(pt.model, EquilibriumMode::exact);
    } catch (const NoRoot&) {
        positive = false;
    }
    for (auto kind : {EquilibriumKind::zeroA, EquilibriumKind::positive}) {
        const std::string tag(pulselab::to_string(kind));
        const bool exists = kind == EquilibriumKind::zeroA || positive;
        const auto roots = exists ? find_roots_in_box(pt.model, kind, box) : std::vector<ComplexRoot>{};
        r.files.push_back({pt.dir + "roots_" + tag + ".csv",
                           to_text([&](std::ostream& os) { write_roots_csv(roots, os); })});
        json lead = nullptr;
        if (!roots.empty()) lead = {{"x", roots.front().x}, {"omega", roots.front().omega}};
        r.summary[tag] = {{"exists", exists}, {"roots", roots.size()}, {"leading", lead}};
        const auto weak = exists ? weak_curve(pt.model, kind, weak_omegas) : SpectrumCurve{};
        r.files.push_back({pt.dir + "curve_weak_" + tag + ".csv",
                           to_text([&](std::ostream& os) { write_curve_csv(weak, os); })});
    }
    r.summary["threshold"] = threshold(pt.model);
    json conds = json::array();
    for (const auto& c : check_conditions(pt.model).conditions)
        conds.push_back({{"name", c.name}, {"lhs", num(c.lhs)}, {"rhs", num(c.rhs)}, {"holds", c.holds}});
    r.summary["conditions"] = conds;
    const auto strong = positive ? strong_curve(pt.model, strong_omegas) : SpectrumCurve{};
    r.files.push_back({pt.dir + "curve_strong_positive.csv",
                       to_text([&](std::ostream& os) { write_curve_csv(strong, os); })});
    r.files.push_back({pt.dir + "spectrum.json", r.summary.dump(2) + "\n"});
    if (plots)
        r.files.push_back({pt.dir + "spectrum.gp",
                           gnuplot_header("characteristic roots") + "gamma = " + fmt("%.15g", gamma) +
                               "\nset xlabel 'Re'\nset ylabel 'Im'\n"
                               "plot 'roots_zeroA.csv' using 1:2 with points, 'roots_positive.csv' using 1:2 with "
                               "points, 'curve_weak_zeroA.csv' using 2:($1*gamma) with lines, "
                               "'curve_weak_positive.csv' using 2:($1*gamma) with lines, "
                               "'curve_strong_positive.csv' using 2:1 with points\n"});
    return r;
}

inline RunResult run_cascade(const ExperimentConfig& cfg, const Point& pt, bool plots) {
    RunResult r;
    for (auto kind : {EquilibriumKind::zeroA, EquilibriumKind::positive}) {
        const std::string tag(pulselab::to_string(kind));
        const auto rows = cascade_scan(pt.model, {}, cfg.n_max, {kind});
        r.files.push_back({pt.dir + "cascade_" + tag + ".csv",
                           to_text([&](std::ostream& os) { write_cascade_csv(rows, os); })});
        json failures = json::array();
        for (const auto& row : rows)
            if (!row.numeric) failures.push_back({{"n", row.n}, {"error", row.error}});
        r.summary[tag] = {{"points", rows.size()}, {"failures", failures}};
    }
    r.files.push_back({pt.dir + "cascade.json", r.summary.dump(2) + "\n"});
    if (plots)
        r.files.push_back({pt.dir + "cascade.gp",
                           gnuplot_header("Hopf cascade") +
                               "set xlabel 'n'\nset ylabel 'delta'\n"
                               "plot 'cascade_zeroA.csv' using 1:2 with linespoints, '' using 1:3 with points, "
                               "'cascade_positive.csv' using 1:2 with linespoints, '' using 1:3 with points\n"});
    return r;
}

inline RunResult run_pulse(const ExperimentConfig& cfg, const Point& pt, bool plots) {
    RunResult r;
    const auto& p = pt.model.p;
    const double pstar = solve_pstar(p);
    const auto gb = g_bounds(p, pstar);
    double c = 0;
    if (cfg.c) {
        c = *cfg.c;
    } else {
        const auto traj = run_simulation(cfg, pt.model);
        const auto m = pulse_metrics(traj, 0);
        c = c_from_period(pt.model, m.period);
        r.summary["simulation"] = metrics_json(m, pt.model);
    }
    const auto prof = solve_heteroclinic(gb.a, p.k, c, pstar);
    const auto pulse = rescale_pulse(prof, p.gamma);
    r.summary["pstar"] = pstar;
    r.summary["a"] = gb.a;
    r.summary["c"] = c;
    r.summary["lambda_plus"] = prof.lambda_plus;
    r.summary["pulse"] = {{"peak", num(pulse.peak())}, {"area", num(pulse.area())}, {"fwhm", num(pulse.fwhm())}};
    r.files.push_back({pt.dir + "profile.csv", to_text([&](std::ostream& os) { write_profile_csv(prof, os); })});
    r.files.push_back({pt.dir + "pulse.csv", to_text([&](std::ostream& os) { write_pulse_csv(pulse, os); })});
    r.files.push_back({pt.dir + "pulse.json", r.summary.dump(2) + "\n"});
    if (plots)
        r.files.push_back({pt.dir + "pulse.gp", gnuplot_header("pulse profile") +
                                                    "set xlabel 'theta'\nplot 'profile.csv' using 1:2 with lines, '' "
                                                    "using 1:3 with lines\n"});
    return r;
}

}  // namespace detail

struct RunOutput {
    std::vector<Artifact> files;  ///< sorted by path, manifest last
    json manifest;
};

/// Executes a validated config and returns the emitted files; nothing touches
/// the filesystem here. Results do not depend on the worker count.
inline RunOutput execute(const ExperimentConfig& cfg, std::size_t workers, bool plots = false) {
    using namespace detail;
    const auto pts = grid(cfg);
    std::vector<RunResult> results(pts.size());
    json summary;
    if (cfg.kind == RunKind::scaling) {
        std::vector<SweepRow> rows(pts.size());
        parallel_for(pts.size(), workers, [&](std::size_t i) {
            const auto traj = run_simulation(cfg, pts[i].model);
            const auto m = pulse_metrics(traj, 0);
            rows[i] = {pts[i].model.p.gamma, m.area, m.period, m.amplitude, m.fwhm};
        });
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.gamma < b.gamma; });
        std::vector<std::pair<double, double>> fit_pts;
        for (const auto& row : rows) fit_pts.emplace_back(row.gamma, row.p);
        const auto fit = power_law_fit(fit_pts);
        const json fj{{"pstar_hat", fit.pstar_hat}, {"b", fit.b}, {"beta", fit.beta}, {"residual", fit.residual}};
        RunResult res;
        res.files.push_back({"sweep.csv", to_text([&](std::ostream& os) { write_sweep_csv(rows, os); })});
        res.files.push_back({"fit.json", fj.dump(2) + "\n"});
        if (plots)
            res.files.push_back({"scaling.gp", gnuplot_header("p(gamma)") +
                                                   "set logscale x\nset xlabel 'gamma'\nf(x) = " +
                                                   fmt("%.15g", fit.pstar_hat) + " + " + fmt("%.15g", fit.b) +
                                                   " * x**(-" + fmt("%.15g", fit.beta) +
                                                   ")\nplot 'sweep.csv' using 1:2 with points, f(x)\n"});
        summary = {{"fit", fj}, {"pstar", solve_pstar(cfg.model.p)}};
        results = {res};
    } else {
        parallel_for(pts.size(), workers, [&](std::size_t i) {
            switch (cfg.kind) {
                case RunKind::simulate: results[i] = run_simulate(cfg, pts[i], plots); break;
                case RunKind::spectrum: results[i] = run_spectrum(cfg, pts[i], plots); break;
                case RunKind::cascade: results[i] = run_cascade(cfg, pts[i], plots); break;
                case RunKind::pulse: results[i] = run_pulse(cfg, pts[i], plots); break;
                case RunKind::scaling: break;
            }
        });
        if (pts.size() == 1) {
            summary = results[0].summary;
        } else {
            summary = json::object();
            for (std::size_t i = 0; i < pts.size(); ++i) summary[pts[i].dir] = results[i].summary;
        }
    }

    RunOutput out;
    for (auto& res : results)
        for (auto& f : res.files) out.files.push_back(std::move(f));
    std::sort(out.files.begin(), out.files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });

    json params = json::object();
    for (auto name : parameter_names(cfg.model.id)) params[std::string(name)] = parameter_value(cfg.model.p, name);
    json files = json::array();
    std::string hashes;
    for (const auto& f : out.files) {
        const auto h = sha256_hex(f.content);
        hashes += h;
        files.push_back({{"path", f.path}, {"sha256", h}, {"bytes", f.content.size()}});
    }
    out.manifest = {{"name", cfg.name},
                    {"model", pulselab::to_string(cfg.model.id)},
                    {"run", to_string(cfg.kind)},
                    {"parameters", params},
                    {"summary", summary},
                    {"files", files},
                    {"digest", sha256_hex(hashes)}};
    out.files.push_back({"manifest.json", out.manifest.dump(2) + "\n"});
    return out;
}

inline void write_output(const RunOutput& out, const fs::path& dir) {
    for (const auto& f : out.files) {
        const auto path = dir / f.path;
        fs::create_directories(path.parent_path());
        std::ofstream os(path, std::ios::binary);
        os << f.content;
        if (!os) throw Error("cannot write " + path.string());
    }
}

/// Output directory: PULSELAB_OUT, then --out, then the config, then
/// pulselab-out/<name>.
inline fs::path resolve_output(const ExperimentConfig& cfg, const std::optional<std::string>& cli_out) {
    if (const char* env = std::getenv("PULSELAB_OUT"); env && *env) return env;
    if (cli_out) return *cli_out;
    if (!cfg.output.empty()) return cfg.output;
    return fs::path("pulselab-out") / cfg.name;
}

enum ExitCode : int { kSuccess = 0, kFailure = 1, kValidation = 2, kNumerical = 3 };

}  // namespace pulselab::lab
