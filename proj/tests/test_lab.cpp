#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pulselab/lab.hpp"

using namespace pulselab;
using namespace pulselab::lab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

const char* kFig4Params = R"({"gamma": 200, "T": 1, "kappa": 0.5, "mu": 0.5, "q0": 1, "beta": 1,
                             "s": 0.5, "k": 1, "g0": 3.1, "alpha": 1})";

std::string config(const std::string& run, const std::string& options = "{}", const std::string& params = kFig4Params,
                   const std::string& model = "prototype") {
    return R"({"name": "t", "model": ")" + model + R"(", "run": ")" + run + R"(", "parameters": )" + params +
           R"(, "options": )" + options + "}";
}

/// Fresh scratch directory, removed on destruction.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& tag)
        : dir(fs::temp_directory_path() / ("pulselab_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + PULSELAB_CLI + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void expect_rejected(const std::string& text, const std::string& field) {
    INFO(text);
    CHECK_THROWS_WITH(parse_config_text(text), ContainsSubstring(field));
    CHECK_THROWS_AS(parse_config_text(text), ValidationError);
}

}  // namespace

TEST_CASE("config parsing: defaults and options", "[lab]") {
    const auto cfg = parse_config_text(config("spectrum", R"({"g0": [2.9, 3.1], "n_max": 3,
        "box": {"x_min": -2, "x_max": 1, "omega_max": 50}, "harmonics": 8})"));
    CHECK(cfg.kind == RunKind::spectrum);
    CHECK(cfg.model.id == ModelId::prototype);
    CHECK(cfg.model.p.gamma == 200);
    CHECK(cfg.g0s == std::vector<double>{2.9, 3.1});
    CHECK(cfg.n_max == 3);
    CHECK(cfg.harmonics == 8);
    REQUIRE(cfg.box);
    CHECK(cfg.box->omega_max == 50);
    CHECK(cfg.history == HistoryKind::pulse);
    CHECK(cfg.workers == 1);

    const auto pts = lab::detail::grid(cfg);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].dir == "g0_2.9/");
    CHECK(pts[1].model.p.g0 == 3.1);

    const auto scalar = parse_config_text(config("cascade", R"({"gamma": 400})"));
    CHECK(scalar.gammas == std::vector<double>{400});
    CHECK(lab::detail::grid(scalar).front().dir.empty());

    const auto cf = parse_config_text(config("simulate", "{}", R"({"gamma": 200, "T": 1, "kappa": 2, "mu": 1, "nu": 2,
        "beta": 1, "s": 3, "k": 4, "r": 3, "m": 0.1, "f": 0.05, "g0": 0.6, "alpha": 0.3, "tau_death": 2})",
                                          "competingFast"));
    CHECK(cf.history == HistoryKind::constant);
}

TEST_CASE("config parsing: errors name the field", "[lab]") {
    expect_rejected("{not json", "malformed JSON");
    expect_rejected("[1, 2]", "JSON object");
    expect_rejected(R"({"model": "prototype", "run": "simulate", "parameters": {}, "colour": 1})", "colour");
    expect_rejected(config("simulate", "{}", R"({"gamma": 200, "zeta": 1})"), "parameters.zeta");
    expect_rejected(config("simulate", "{}", kFig4Params, "lotka"), "lotka");
    expect_rejected(config("wander"), "wander");
    expect_rejected(config("simulate", R"({"speed": 3})"), "speed");
    expect_rejected(config("simulate", R"({"gamma": [100, -1]})"), "options.gamma");
    expect_rejected(config("simulate", R"({"gamma": "fast"})"), "options.gamma");
    expect_rejected(config("scaling", R"({"gamma": [100, 200, 400]})"), "options.gamma");
    expect_rejected(config("spectrum", R"({"box": {"x_min": 1, "x_max": 0, "omega_max": 5}})"), "options.box");
    expect_rejected(config("spectrum", R"({"box": {"x_min": 0, "x_max": 1, "omega_max": 5, "y": 2}})"), "options.box");
    expect_rejected(config("simulate", R"({"history": "random"})"), "options.history");
    expect_rejected(config("pulse", R"({"c": -0.1})"), "options.c");
    expect_rejected(config("simulate", R"({"record_periods": 0})"), "options.record_periods");
    expect_rejected(config("simulate", R"({"n_max": 0})"), "options.n_max");
    expect_rejected(config("simulate", "{}", R"({"gamma": 200, "T": "one"})"), "parameters.T");
    expect_rejected(config("pulse", "{}", R"({"gamma": 100, "T": 1, "kappa": 0.5, "k": 1, "g0": 2.5, "alpha": 1})",
                           "reducedA"),
                    "model");

    // missing T: the model check names the parameter
    const std::string no_t = config("simulate", "{}", R"({"gamma": 200, "kappa": 0.5, "mu": 0.5, "q0": 1, "beta": 1,
                                                       "s": 0.5, "k": 1, "g0": 3.1, "alpha": 1})");
    expect_rejected(no_t, "'T'");
}

TEST_CASE("presets parse and cover the shipped parameter sets", "[lab]") {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(PULSELAB_PRESET_DIR)) {
        INFO(e.path());
        const auto cfg = load_config(e.path());
        CHECK(cfg.name == e.path().stem().string());
        names.insert(cfg.name);
    }
    for (const char* n : {"fig4-simulate", "fig7-simulate", "fig8-scaling", "fig10-pulse"}) CHECK(names.count(n) == 1);
    CHECK_THROWS_AS(load_config("/nonexistent/pulselab.json"), ValidationError);
}

TEST_CASE("sha256", "[lab]") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("manifest covers every file", "[lab]") {
    const auto cfg = parse_config_text(config("cascade", R"({"gamma": [200, 400], "n_max": 3})"));
    const auto out = execute(cfg, 1, true);
    REQUIRE(out.files.back().path == "manifest.json");
    const auto& listed = out.manifest["files"];
    REQUIRE(listed.size() + 1 == out.files.size());
    std::string joined;
    for (std::size_t i = 0; i + 1 < out.files.size(); ++i) {
        CHECK(listed[i]["path"] == out.files[i].path);
        CHECK(listed[i]["sha256"] == sha256_hex(out.files[i].content));
        CHECK(listed[i]["bytes"] == out.files[i].content.size());
        joined += sha256_hex(out.files[i].content);
    }
    CHECK(out.manifest["digest"] == sha256_hex(joined));
    CHECK(out.manifest["parameters"]["g0"] == 3.1);
    CHECK(out.manifest["run"] == "cascade");
    for (std::size_t i = 1; i + 1 < out.files.size(); ++i) CHECK(out.files[i - 1].path < out.files[i].path);

    // any change in numerics changes the digest
    auto moved = cfg;
    moved.model.p.mu = 0.51;
    CHECK(execute(moved, 1).manifest["digest"] != out.manifest["digest"]);
}

TEST_CASE("outputs do not depend on the worker count", "[lab]") {
    const auto cascade = parse_config_text(config("cascade", R"({"gamma": [100, 200, 400, 800], "n_max": 4})"));
    const auto sim = parse_config_text(
        config("simulate", R"({"gamma": [100, 200], "g0": [3.1, 3.3], "transient_periods": 20, "record_periods": 6})"));
    for (const auto* cfg : {&cascade, &sim}) {
        const auto a = execute(*cfg, 1);
        const auto b = execute(*cfg, 3);
        const auto c = execute(*cfg, 3);
        REQUIRE(a.files.size() == b.files.size());
        for (std::size_t i = 0; i < a.files.size(); ++i) {
            INFO(a.files[i].path);
            CHECK(a.files[i].path == b.files[i].path);
            CHECK(a.files[i].content == b.files[i].content);
            CHECK(c.files[i].content == b.files[i].content);
        }
    }
}

TEST_CASE("simulate run: files and period report", "[lab]") {
    const auto out = execute(parse_config_text(config("simulate")), 1, true);
    std::vector<std::string> paths;
    for (const auto& f : out.files) paths.push_back(f.path);
    CHECK(paths == std::vector<std::string>{"harmonics.csv", "metrics.json", "trajectory.csv", "trajectory.gp",
                                            "manifest.json"});
    const auto& s = out.manifest["summary"];
    CHECK(s["periodic"] == true);
    const double period = s["period"];
    CHECK(period > 1.0);
    CHECK(period < 1.0 + 2.0 / 200);
    CHECK_THAT(s["c"].get<double>(), WithinAbs(200 * (period - 1), 1e-9));
    const auto& traj = out.files[2].content;
    CHECK(traj.rfind("t,A,Q,G\n", 0) == 0);
    CHECK(std::count(traj.begin(), traj.end(), '\n') <= 20001);
}

TEST_CASE("spectrum run on both sides of the threshold", "[lab]") {
    const auto out = execute(parse_config_text(config("spectrum", R"({"g0": [2.9, 3.1], "curve_points": 50})")), 2);
    const auto& s = out.manifest["summary"];
    CHECK(s["g0_2.9/"]["positive"]["exists"] == false);
    CHECK(s["g0_3.1/"]["positive"]["exists"] == true);
    CHECK(s["g0_2.9/"]["zeroA"]["leading"]["x"].get<double>() < 0);
    CHECK(s["g0_3.1/"]["zeroA"]["leading"]["x"].get<double>() > 0);
    CHECK_THAT(s["g0_3.1/"]["threshold"].get<double>(), WithinAbs(3.0, 1e-12));
    CHECK(s["g0_3.1/"]["conditions"].size() == 2);
}

TEST_CASE("fig10-pulse preset echoes a and p*", "[lab]") {
    const auto cfg = load_config(fs::path(PULSELAB_PRESET_DIR) / "fig10-pulse.json");
    const auto out = execute(cfg, 1);
    const auto& s = out.manifest["summary"];
    CHECK_THAT(s["a"].get<double>(), WithinAbs(2.2705, 1e-3));
    CHECK_THAT(s["pstar"].get<double>(), WithinAbs(1.9463, 1e-4));
    CHECK(s["c"].get<double>() > 0);
    bool has_profile = false;
    for (const auto& f : out.files)
        if (f.path == "profile.csv") has_profile = f.content.rfind("theta,P,Abar\n", 0) == 0;
    CHECK(has_profile);
}

TEST_CASE("output directory resolution", "[lab]") {
    auto cfg = parse_config_text(config("cascade"));
    ::unsetenv("PULSELAB_OUT");
    CHECK(resolve_output(cfg, std::nullopt) == fs::path("pulselab-out") / "t");
    cfg.output = "from-config";
    CHECK(resolve_output(cfg, std::nullopt) == "from-config");
    CHECK(resolve_output(cfg, "from-cli") == "from-cli");
    ::setenv("PULSELAB_OUT", "from-env", 1);
    CHECK(resolve_output(cfg, "from-cli") == "from-env");
    ::unsetenv("PULSELAB_OUT");
}

TEST_CASE("command line: exit codes and emitted files", "[lab][cli]") {
    Scratch tmp("cli");
    const auto good = tmp.dir / "good.json";
    std::ofstream(good) << config("cascade", R"({"n_max": 2})");
    const auto out = tmp.dir / "out";
    CHECK(run_cli("--config " + good.string() + " --out " + out.string() + " --emit-plots") == 0);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "cascade.gp"));
    const auto manifest = json::parse(slurp(out / "manifest.json"));
    for (const auto& f : manifest["files"]) CHECK(sha256_hex(slurp(out / f["path"].get<std::string>())) == f["sha256"]);

    // PULSELAB_OUT beats --out
    const auto env_out = tmp.dir / "env";
    CHECK(run_cli("--config " + good.string() + " --out " + (tmp.dir / "ignored").string(),
                  "PULSELAB_OUT=" + env_out.string()) == 0);
    CHECK(fs::exists(env_out / "manifest.json"));
    CHECK_FALSE(fs::exists(tmp.dir / "ignored"));

    // validation error: missing T, nothing written
    const auto bad = tmp.dir / "bad.json";
    std::ofstream(bad) << config("simulate", "{}", R"({"gamma": 200, "kappa": 0.5, "mu": 0.5, "q0": 1, "beta": 1,
                                                    "s": 0.5, "k": 1, "g0": 3.1, "alpha": 1})");
    const auto bad_out = tmp.dir / "bad_out";
    CHECK(run_cli("--config " + bad.string() + " --out " + bad_out.string()) == 2);
    CHECK_FALSE(fs::exists(bad_out));

    // numerical failure: the profile speed puts a c above 1, no connection exists
    const auto num = tmp.dir / "num.json";
    std::ofstream(num) << config("pulse", R"({"c": 3.0})");
    CHECK(run_cli("--config " + num.string() + " --out " + (tmp.dir / "num_out").string()) == 3);
    CHECK_FALSE(fs::exists(tmp.dir / "num_out"));

    CHECK(run_cli("--preset no-such-preset --out " + (tmp.dir / "x").string()) == 2);
    CHECK(run_cli("--workers 0 --config " + good.string()) != 0);
    CHECK(run_cli("") == 2);
}
