#include "fastlight/error.hpp"
#include "fastlight/fft.hpp"
#include "fastlight/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> traces;
    std::optional<std::size_t> samples;
    std::optional<double> rate;
    std::optional<unsigned> jobs;
};

void add_common(CLI::App* sub, Overrides& o) {
    auto* cfg = sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--preset", o.preset, "preset name (fig2-line, fig4-advance, coherent-ref)")->excludes(cfg);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out-dir", o.out_dir, "output directory");
    sub->add_option("--traces", o.traces, "traces per point");
    sub->add_option("--samples", o.samples, "samples per trace (power of two)");
    sub->add_option("--rate", o.rate, "sample rate in Hz");
    sub->add_option("--jobs", o.jobs, "worker threads (0: all cores)");
}

fastlight::ScenarioConfig resolve(fastlight::ScenarioId id, const Overrides& o) {
    using namespace fastlight;
    ScenarioConfig cfg;
    if (!o.config.empty()) {
        cfg = load_config(o.config);
    } else {
        cfg = preset_config(o.preset.empty() ? (id == ScenarioId::LineScan ? "fig2-line" : "fig4-advance")
                                             : o.preset);
    }
    cfg.scenario = id;
    if (o.seed) cfg.seed = *o.seed;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.traces) cfg.sampling.traces = *o.traces;
    if (o.samples) {
        cfg.sampling.samples = *o.samples;
        cfg.sampling.segment = std::min(cfg.sampling.segment, *o.samples);
    }
    if (o.rate) cfg.sampling.rate_hz = *o.rate;
    if (o.jobs) cfg.jobs = *o.jobs;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    using namespace fastlight;
    CLI::App app{"Fast-light twin-beam simulator"};
    app.require_subcommand(0, 1);
    bool show_version = false;
    app.add_flag("--version", show_version, "print build information");

    Overrides overrides;
    std::optional<ScenarioId> chosen;
    for (auto id : {ScenarioId::LineScan, ScenarioId::DelayScan, ScenarioId::Xcorr, ScenarioId::SelfTest}) {
        const char* help = id == ScenarioId::LineScan    ? "gain-line scan with added-noise readout"
                           : id == ScenarioId::DelayScan ? "delay and squeezing versus line offset"
                           : id == ScenarioId::Xcorr     ? "probe/conjugate cross-correlation at the operating point"
                                                         : "fast internal consistency checks";
        auto* sub = app.add_subcommand(to_string(id), help);
        add_common(sub, overrides);
        sub->callback([&chosen, id] { chosen = id; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (show_version) {
        std::printf("fastlight %s (FFT: %s, C++ %ld)\n", version(), fft::backend_version(), __cplusplus);
        return 0;
    }
    if (!chosen) {
        std::cerr << app.help();
        return kExitConfig;
    }

    ScenarioConfig cfg;
    try {
        cfg = resolve(*chosen, overrides);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const auto result = run_scenario(cfg);
        for (const auto& f : result.files) std::cout << f.string() << '\n';
        if (result.failed_checks > 0) {
            std::cerr << "selftest: " << result.failed_checks << " check(s) failed\n";
            return kExitRuntime;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
