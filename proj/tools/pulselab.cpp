// Command-line front end: pulselab --config run.json [--out DIR] [--workers N] [--emit-plots]
//                          pulselab --preset fig4-simulate

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pulselab/lab.hpp"

#ifndef PULSELAB_PRESET_DIR
#define PULSELAB_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using namespace pulselab;

static fs::path preset_path(const std::string& name) {
    const char* env = std::getenv("PULSELAB_PRESETS");
    const fs::path dir = env && *env ? fs::path(env) : fs::path(PULSELAB_PRESET_DIR);
    return dir / (name + ".json");
}

int main(int argc, char** argv) {
    CLI::App app{"pulselab: pulsating solutions of delayed predator-prey models"};
    std::string config, preset, out;
    std::size_t workers = 0;
    bool plots = false;
    auto* cfg_opt = app.add_option("--config", config, "experiment config (JSON)");
    app.add_option("--preset", preset, "named preset shipped with the tool")->excludes(cfg_opt);
    app.add_option("--out", out, "output directory (PULSELAB_OUT takes precedence)");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--emit-plots", plots, "also write gnuplot scripts");
    CLI11_PARSE(app, argc, argv);

    try {
        if (config.empty() && preset.empty()) throw ValidationError("one of --config or --preset is required");
        const auto cfg = lab::load_config(preset.empty() ? fs::path(config) : preset_path(preset));
        const auto dir = lab::resolve_output(cfg, out.empty() ? std::nullopt : std::optional<std::string>(out));
        const auto result = lab::execute(cfg, workers ? workers : cfg.workers, plots);
        lab::write_output(result, dir);
        std::printf("%s: %zu files in %s\n", cfg.name.c_str(), result.files.size(), dir.string().c_str());
        std::printf("%s\n", result.manifest["summary"].dump(2).c_str());
        return lab::kSuccess;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return lab::kValidation;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return lab::kNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return lab::kFailure;
    }
}
