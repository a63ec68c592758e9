#include "fastlight/scenario.hpp"
#include "fastlight/error.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fastlight;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ScenarioConfig small(ScenarioId id, const std::string& preset, const fs::path& dir) {
    ScenarioConfig c = preset_config(preset);
    c.scenario = id;
    c.sampling.samples = 1 << 14;
    c.sampling.segment = 4096;
    c.sampling.traces = 2;
    c.max_lag_s = 5e-7;
    c.detection_band = {1e5, 2e6};
    c.detunings_hz = {-5e6, 0.0, 5e6};
    c.out_dir = dir;
    c.jobs = 2;
    return c;
}

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("fastlight_scenario_" + name);
    fs::remove_all(d);
    return d;
}

} // namespace

TEST_CASE("presets") {
    const auto line = preset_config("fig2-line");
    CHECK(to_db(intensity_gain(line.line, 0.0)) == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(line.source.gain1 == doctest::Approx(gain_for_squeezing(-2.5)));
    CHECK(line.detunings_hz.size() == 25);
    CHECK(line.detunings_hz.front() == -30e6);
    CHECK(line.detunings_hz.back() == 30e6);

    const auto adv = preset_config("fig4-advance");
    CHECK(peak_advance(adv.line, 2.0 * kPi * adv.operating_offset_hz) == doctest::Approx(-12e-9).epsilon(1e-9));
    CHECK(intensity_gain(adv.line, 2.0 * kPi * adv.operating_offset_hz) <= 1.25);

    const auto coh = preset_config("coherent-ref");
    CHECK(coh.source.gain1 == 1.0);
    CHECK(coh.line.g == 0.0);
    const auto means = beam_means(coh.source);
    CHECK(means.probe == means.conjugate);

    CHECK_THROWS_AS(preset_config("nope"), ConfigError);
    CHECK_THROWS_AS(load_config("/definitely/not/here.json"), ConfigError);
    for (const auto& name : preset_names()) CHECK_NOTHROW(preset_config(name).validate());
}

TEST_CASE("line for a target advance") {
    const GainLine l = line_for_advance(2e6, 0.025, -12e-9, 4e6);
    CHECK(peak_advance(l, 2.0 * kPi * 4e6) == doctest::Approx(-12e-9).epsilon(1e-12));
    // Advance is impossible inside the half-width.
    CHECK_THROWS_AS(line_for_advance(2e6, 0.025, -12e-9, 0.5e6), InvalidParameter);
}

TEST_CASE("config parsing overrides a preset") {
    const auto c = parse_config(R"({
        "preset": "fig4-advance",
        "scenario": "delay-scan",
        "sampling": {"traces": 7, "samples": 65536},
        "channel": {"eta": 0.9},
        "source": {"squeezing_db": -3.0},
        "seed": 99,
        "detunings_hz": [1e6, 2e6]
    })");
    CHECK(c.scenario == ScenarioId::DelayScan);
    CHECK(c.sampling.traces == 7);
    CHECK(c.sampling.samples == 65536);
    CHECK(c.channel.eta == 0.9);
    CHECK(c.source.gain1 == doctest::Approx(gain_for_squeezing(-3.0)));
    CHECK(c.seed == 99);
    CHECK(c.detunings_hz.size() == 2);
    CHECK(c.line.g == preset_config("fig4-advance").line.g);

    const auto l = parse_config(R"({"line": {"peak_gain_db": 3.0, "fwhm_hz": 5e6, "length_m": 0.01}})");
    CHECK(to_db(intensity_gain(l.line, 0.0)) == doctest::Approx(3.0));
    CHECK(l.line.gamma == doctest::Approx(kPi * 5e6));

    const auto t = parse_config(R"({"operating_offset_hz": 3e6,
                                    "line": {"fwhm_hz": 1e6, "target_advance_s": -5e-9}})");
    CHECK(peak_advance(t.line, 2.0 * kPi * 3e6) == doctest::Approx(-5e-9));
}

TEST_CASE("config errors name the line or field") {
    CHECK_THROWS_WITH_AS(parse_config("{\n  \"seed\": 1,\n  \"traces\" 3\n}", "cfg.json"),
                         doctest::Contains("cfg.json:3"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"sampling": {"tracez": 3}})"), doctest::Contains("sampling.tracez"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"channel": {"eta": "high"}})"), doctest::Contains("channel.eta"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"preset": "fig9"})"), doctest::Contains("fig9"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"scenario": "dance"})"), doctest::Contains("scenario"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"([1, 2])"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"source": {"gain1": 1.2, "squeezing_db": -1}})"),
                         doctest::Contains("source"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"line": {"peak_gain_db": 3, "fwhm_hz": -1}})"),
                         doctest::Contains("line"), ConfigError);

    auto c = parse_config(R"({"sampling": {"samples": 1000}})");
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("sampling.samples"), ConfigError);
    c = parse_config(R"({"detunings_hz": [], "scenario": "line-scan"})");
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("detunings_hz"), ConfigError);
    c = parse_config(R"({"band_hz": [3e6, 1e5]})");
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("band_hz"), ConfigError);
    c = parse_config(R"({"channel": {"eta": 1.5}})");
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("channel.eta"), ConfigError);
}

TEST_CASE("config hash ignores the output directory and job count") {
    ScenarioConfig a = preset_config("fig2-line");
    ScenarioConfig b = a;
    b.out_dir = "elsewhere";
    b.jobs = 7;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    // The canonical form parses as JSON.
    CHECK(nlohmann::json::parse(canonical_json(a)).is_object());
}

TEST_CASE("scenarios write the documented files and are reproducible") {
    const auto d1 = fresh_dir("a");
    const auto d2 = fresh_dir("b");
    for (auto id : {ScenarioId::LineScan, ScenarioId::DelayScan, ScenarioId::Xcorr}) {
        const std::string preset = id == ScenarioId::LineScan ? "fig2-line" : "fig4-advance";
        const auto r1 = run_scenario(small(id, preset, d1));
        const auto r2 = run_scenario(small(id, preset, d2));
        REQUIRE(r1.files.size() == r2.files.size());
        for (std::size_t i = 0; i < r1.files.size(); ++i) {
            CHECK(r1.files[i].filename() == r2.files[i].filename());
            CHECK(slurp(r1.files[i]) == slurp(r2.files[i]));
        }
        const auto summary = nlohmann::json::parse(slurp(d1 / "summary.json"));
        CHECK(summary.contains("master_seed"));
        CHECK(summary.contains("point_seeds"));
        CHECK(summary["config_hash"].get<std::string>().size() == 16);
    }
    // Row counts match the scan length and headers carry units.
    const auto rows = [](const fs::path& p) {
        std::ifstream is(p);
        std::string header;
        std::getline(is, header);
        std::size_t n = 0;
        for (std::string l; std::getline(is, l);) ++n;
        return std::make_pair(header, n);
    };
    const auto [h1, n1] = rows(d1 / "line_scan.csv");
    CHECK(h1 == "detuning_hz,gain_db,predicted_noise_db,simulated_noise_db,group_index");
    CHECK(n1 == 3);
    const auto [h2, n2] = rows(d1 / "delay_scan.csv");
    CHECK(h2 == "detuning_hz,delay_s_fullband,delay_s_band,squeezing_db_band,analytic_squeezing_db");
    CHECK(n2 == 3);
    const auto [h3, n3] = rows(d1 / "xcorr.csv");
    CHECK(h3 == "lag_s,c_ref,c_fast");
    CHECK(n3 == 2 * 1250 + 1);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("thread count does not change the output") {
    const auto d1 = fresh_dir("j1");
    const auto d2 = fresh_dir("j3");
    auto c1 = small(ScenarioId::Xcorr, "fig4-advance", d1);
    auto c2 = small(ScenarioId::Xcorr, "fig4-advance", d2);
    c1.jobs = 1;
    c2.jobs = 3;
    c1.sampling.traces = c2.sampling.traces = 4;
    run_scenario(c1);
    run_scenario(c2);
    CHECK(slurp(d1 / "xcorr.csv") == slurp(d2 / "xcorr.csv"));
    CHECK(slurp(d1 / "summary.json") == slurp(d2 / "summary.json"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("partial outputs are removed on failure") {
    const auto d = fresh_dir("partial");
    // A directory squatting on summary.json makes the last write fail.
    fs::create_directories(d / "summary.json");
    CHECK_THROWS(run_scenario(small(ScenarioId::LineScan, "fig2-line", d)));
    CHECK_FALSE(fs::exists(d / "line_scan.csv"));
    fs::remove_all(d);
}

TEST_CASE("selftest passes") {
    const auto d = fresh_dir("selftest");
    ScenarioConfig c = preset_config("fig2-line");
    c.scenario = ScenarioId::SelfTest;
    c.out_dir = d;
    const auto r = run_scenario(c);
    CHECK(r.failed_checks == 0);
    CHECK(fs::exists(d / "selftest.csv"));
    fs::remove_all(d);
}

TEST_CASE("scenario names round trip") {
    for (auto id : {ScenarioId::LineScan, ScenarioId::DelayScan, ScenarioId::Xcorr, ScenarioId::SelfTest})
        CHECK(parse_scenario(to_string(id)) == id);
    CHECK_FALSE(parse_scenario("Xcorr").has_value());
}
