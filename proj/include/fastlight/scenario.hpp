#pragma once

#include "fastlight/amplifier.hpp"
#include "fastlight/dispersion.hpp"
#include "fastlight/twin_beam.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fastlight {

enum class ScenarioId { LineScan, DelayScan, Xcorr, SelfTest };

const char* to_string(ScenarioId id);
std::optional<ScenarioId> parse_scenario(std::string_view name);

struct SamplingConfig {
    double rate_hz = 2.5e9;
    std::size_t samples = std::size_t{1} << 20;
    std::size_t traces = 100;
    std::size_t segment = 65536;
};

struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

struct ScenarioConfig {
    ScenarioId scenario = ScenarioId::Xcorr;
    std::string preset = "custom";
    GainLine line;
    double operating_offset_hz = 0.0;
    TwinBeamSource source;
    ChannelParams channel;
    SamplingConfig sampling;
    std::vector<double> detunings_hz;
    Band band{1e5, 3e6};
    double full_band_hz = 20e6;       // "full spectrum" delay: DC removed, low-pass at this corner
    Band detection_band{1e5, 5e5};    // line-scan noise readout
    double max_lag_s = 1e-6;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "out";
    unsigned jobs = 0;                // 0: hardware concurrency

    // Throws ConfigError naming the first offending field.
    void validate() const;
};

// Scales g so that peak_advance(line, offset) equals target_advance_s.
GainLine line_for_advance(double fwhm_hz, double length_m, double target_advance_s, double offset_hz);

std::vector<std::string> preset_names();

// Throws ConfigError for unknown names.
ScenarioConfig preset_config(std::string_view name);

// Parses a JSON document; an optional "preset" key selects the base that the
// remaining keys override. Errors carry the line number or field path.
ScenarioConfig parse_config(std::string_view json_text, std::string_view origin = "<config>");

// A preset name or a path to a JSON file.
ScenarioConfig load_config(const std::string& path_or_preset);

// Canonical JSON (resolved line parameters, no output directory or job count).
std::string canonical_json(const ScenarioConfig& config);

// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

// Conjugate mean for simulation: (G1 - 1) n0, or n0 when G1 == 1 (an
// equal-power coherent pair).
struct BeamMeans {
    double probe = 0.0;
    double conjugate = 0.0;
};
BeamMeans beam_means(const TwinBeamSource& source);

struct RunResult {
    std::vector<std::filesystem::path> files;
    int failed_checks = 0;   // selftest only
};

// Runs config.scenario and writes its outputs into config.out_dir. On any
// error the files written so far are removed and the exception propagates.
RunResult run_scenario(const ScenarioConfig& config);

const char* version();

} // namespace fastlight
