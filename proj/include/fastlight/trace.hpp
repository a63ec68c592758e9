#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fastlight {

bool is_power_of_two(std::size_t n);

// A sampled photocurrent fluctuation record. Samples are deviations from the
// mean in photons per sample; mean_flux carries the DC level that sets the
// shot-noise scale (a coherent beam has per-sample variance == mean_flux).
class Trace {
public:
    // Throws InvalidParameter unless samples.size() is a power of two >= 2,
    // sample_rate > 0 and mean_flux > 0.
    Trace(double sample_rate, double mean_flux, std::vector<double> samples, std::string seed_tag = {});

    double sample_rate() const { return sample_rate_; }
    double mean_flux() const { return mean_flux_; }
    std::span<const double> samples() const { return samples_; }
    const std::string& seed_tag() const { return seed_tag_; }
    std::size_t size() const { return samples_.size(); }
    double duration() const { return static_cast<double>(samples_.size()) / sample_rate_; }
    double nyquist() const { return 0.5 * sample_rate_; }

    // Moves the sample buffer out; the trace is left empty.
    std::vector<double> release_samples() && { return std::move(samples_); }

private:
    double sample_rate_;
    double mean_flux_;
    std::vector<double> samples_;
    std::string seed_tag_;
};

// a - b, with mean flux a + b: the shot noise of a difference signal is set by
// the total detected power.
Trace difference(const Trace& a, const Trace& b);

// Throws IncompatibleTraces when lengths or rates differ.
void require_compatible(const Trace& a, const Trace& b);

// CSV layout: two comment lines "# sample_rate_hz=<v>" and "# mean_flux=<v>",
// header "index,value", then one row per sample.
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);
Trace read_trace_csv(const std::filesystem::path& path);

// Binary layout, little-endian:
//   char[4] magic "FLTR" | u32 version (1) | f64 sample_rate | f64 mean_flux |
//   u64 count | f64 samples[count]
void write_trace_binary(const Trace& trace, const std::filesystem::path& path);
Trace read_trace_binary(const std::filesystem::path& path);

} // namespace fastlight
