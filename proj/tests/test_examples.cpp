// End-to-end scenario examples at reduced trace counts.

#include "fastlight/scenario.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fastlight;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("fastlight_examples_" + name);
    fs::remove_all(d);
    return d;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream is(p);
    return nlohmann::json::parse(is);
}

} // namespace

TEST_CASE("line scan: simulated noise at the gain peak follows the prediction") {
    ScenarioConfig c = preset_config("fig2-line");
    c.scenario = ScenarioId::LineScan;
    c.detunings_hz = {0.0, 30e6};
    c.sampling.traces = 30;
    c.seed = 5;
    c.out_dir = fresh_dir("line");
    run_scenario(c);
    const auto rows = read_csv(c.out_dir / "line_scan.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][1] == doctest::Approx(7.5).epsilon(1e-9));
    CHECK(std::abs(rows[0][3] - rows[0][2]) <= 0.2);
    CHECK(std::abs(rows[1][3] - rows[1][2]) <= 0.2);
    MESSAGE("peak: predicted " << rows[0][2] << " dB, simulated " << rows[0][3] << " dB");
    fs::remove_all(c.out_dir);
}

TEST_CASE("wing-like flat channel: band squeezing against the closed form") {
    // Flat gain 1.25 with detection loss and technical noise, read out inside
    // the correlated band (|f| <= 10 MHz).
    ScenarioConfig c = parse_config(R"({
        "preset": "fig4-advance",
        "scenario": "xcorr",
        "band_hz": [1e5, 9e6],
        "sampling": {"samples": 262144, "segment": 16384, "traces": 16},
        "seed": 11
    })");
    c.line = flat_gain_line(1.25);
    c.out_dir = fresh_dir("flat");
    run_scenario(c);
    const auto s = read_json(c.out_dir / "summary.json");
    const double sim = s["squeezing_db_band"].get<double>();
    const double ana = s["analytic_squeezing_db"].get<double>();
    CHECK(s["channel_gain"].get<double>() == doctest::Approx(1.25));
    CHECK(sim < 0.0);
    CHECK(sim > -2.6);
    CHECK(std::abs(sim - ana) <= 0.15);
    MESSAGE("flat G=1.25: simulated " << sim << " dB, closed form " << ana << " dB");
    fs::remove_all(c.out_dir);
}

TEST_CASE("delay scan: delayed and degraded at the line centre, advanced on the wing") {
    ScenarioConfig c = preset_config("fig4-advance");
    c.scenario = ScenarioId::DelayScan;
    c.detunings_hz = {0.0, c.operating_offset_hz};
    c.sampling.traces = 12;
    c.seed = 3;
    c.out_dir = fresh_dir("delay");
    run_scenario(c);
    const auto rows = read_csv(c.out_dir / "delay_scan.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][2] > 0.0);
    CHECK(rows[1][2] < 0.0);
    CHECK(rows[0][3] > rows[1][3]);
    fs::remove_all(c.out_dir);
}
