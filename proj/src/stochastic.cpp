#include "fastlight/stochastic.hpp"

#include "fastlight/amplifier.hpp"
#include "fastlight/error.hpp"
#include "fastlight/fft.hpp"
#include "fastlight/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fastlight {

namespace {

void require_samples(std::size_t n) {
    if (n < 2 || !is_power_of_two(n))
        throw InvalidParameter("sample count must be a power of two, got " + std::to_string(n));
}

std::string tag(const std::string& parent, const char* step, std::uint64_t seed) {
    std::string out = parent.empty() ? std::string() : parent + "|";
    return out + step + ":" + std::to_string(seed);
}

} // namespace

void SpectralTargets::validate() const {
    const std::size_t n = frequency.size();
    if (s_pp.size() != n || s_cc.size() != n || s_pc.size() != n)
        throw InvalidParameter("SpectralTargets: arrays differ in length");
    for (std::size_t k = 0; k < n; ++k) {
        if (s_pp[k] < 0.0 || s_cc[k] < 0.0)
            throw InvalidParameter("SpectralTargets: negative PSD at bin " + std::to_string(k));
        if (std::norm(s_pc[k]) > s_pp[k] * s_cc[k] * (1.0 + 1e-12))
            throw InvalidParameter("SpectralTargets: PSD matrix not positive semidefinite at bin " +
                                   std::to_string(k));
    }
}

SpectralTargets build_targets(const TwinBeamSource& source, std::span<const double> grid, double sample_rate) {
    source.validate();
    if (!(sample_rate > 0.0)) throw InvalidParameter("build_targets: sample rate must be positive");
    const double nyquist = 0.5 * sample_rate;
    const double excess = 2.0 * source.gain1 - 2.0;
    const double cross = 2.0 * std::sqrt(source.gain1 * (source.gain1 - 1.0));

    SpectralTargets t;
    t.frequency.assign(grid.begin(), grid.end());
    t.s_pp.reserve(grid.size());
    t.s_cc.reserve(grid.size());
    t.s_pc.reserve(grid.size());
    for (double f : grid) {
        if (std::abs(f) > nyquist * (1.0 + 1e-12))
            throw InvalidParameter("build_targets: grid frequency " + std::to_string(f) + " Hz beyond Nyquist");
        const double w = correlation_weight(source, f);
        t.s_pp.push_back(1.0 + w * excess);
        t.s_cc.push_back(1.0 + w * excess);
        t.s_pc.emplace_back(w * cross, 0.0);
    }
    return t;
}

TracePair synth_twin_traces(const SpectralTargets& targets, std::size_t n_samples, double sample_rate,
                            double mean_p, double mean_c, std::uint64_t seed) {
    require_samples(n_samples);
    if (!(mean_p > 0.0) || !(mean_c > 0.0)) throw InvalidParameter("synth_twin_traces: means must be positive");
    const std::size_t bins = n_samples / 2 + 1;
    if (targets.frequency.size() != bins)
        throw InvalidParameter("synth_twin_traces: target grid does not match the sample count");
    const double df = sample_rate / static_cast<double>(n_samples);
    if (std::abs(targets.frequency.back() - df * static_cast<double>(bins - 1)) > 1e-9 * sample_rate)
        throw InvalidParameter("synth_twin_traces: target grid does not match the sample rate");

    // Per-bin variance of a white process with per-sample variance v is N v; a
    // beam at s shot-noise units has v = s * mean.
    const double n = static_cast<double>(n_samples);
    const double scale_p = n * mean_p;
    const double scale_c = n * mean_c;
    const double scale_x = n * std::sqrt(mean_p * mean_c);

    std::vector<std::complex<double>> xp(bins);
    std::vector<std::complex<double>> xc(bins);
    GaussianRng rng(seed);
    for (std::size_t k = 1; k < bins; ++k) {
        const double cpp = scale_p * targets.s_pp[k];
        const double ccc = scale_c * targets.s_cc[k];
        const std::complex<double> cpc = scale_x * targets.s_pc[k];
        const bool nyquist = (k == bins - 1);
        if (nyquist) {
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            const double l11 = std::sqrt(cpp);
            const double l21 = l11 > 0.0 ? cpc.real() / l11 : 0.0;
            const double l22 = std::sqrt(std::max(0.0, ccc - l21 * l21));
            xp[k] = l11 * z1;
            xc[k] = l21 * z1 + l22 * z2;
            continue;
        }
        const std::complex<double> z1 = rng.complex_normal(1.0);
        const std::complex<double> z2 = rng.complex_normal(1.0);
        const double l11 = std::sqrt(cpp);
        const std::complex<double> l21 = l11 > 0.0 ? cpc / l11 : std::complex<double>{};
        const double l22 = std::sqrt(std::max(0.0, ccc - std::norm(l21)));
        xp[k] = l11 * z1;
        xc[k] = l21 * z1 + l22 * z2;
    }

    const std::string base = "synth:" + std::to_string(seed);
    return TracePair{
        Trace(sample_rate, mean_p, fft::inverse_real(xp, n_samples), base + "/p"),
        Trace(sample_rate, mean_c, fft::inverse_real(xc, n_samples), base + "/c"),
    };
}

ChannelResponse channel_response(const GainLine& line, double carrier_offset, std::size_t n_samples,
                                 double sample_rate) {
    line.validate();
    require_samples(n_samples);
    const auto freq = fft::real_frequencies(n_samples, sample_rate);
    ChannelResponse r;
    r.gain = intensity_gain(line, carrier_offset);
    r.transfer = modulation_transfer(line, carrier_offset, freq);
    r.added_snu.reserve(freq.size());
    for (double f : freq) {
        const double gbar = sideband_gain(line, carrier_offset, f);
        r.added_snu.push_back(std::max(0.0, (gbar - 1.0) * gbar / r.gain));
    }
    return r;
}

Trace apply_channel(const Trace& trace, const ChannelResponse& response, double excess_db, std::uint64_t seed) {
    const std::size_t n_samples = trace.size();
    const std::size_t bins = n_samples / 2 + 1;
    if (response.transfer.size() != bins || response.added_snu.size() != bins)
        throw InvalidParameter("apply_channel: response grid does not match the trace");
    if (!(response.gain >= 1.0)) throw InvalidParameter("apply_channel: gain must be >= 1");
    if (!(excess_db >= 0.0)) throw InvalidParameter("apply_channel: excess noise must be >= 0 dB");

    const double excess = from_db(excess_db) - 1.0;
    const double mean_out = response.gain * trace.mean_flux();
    const double noise_scale = static_cast<double>(n_samples) * mean_out;

    auto spectrum = fft::forward_real(trace.samples());
    GaussianRng rng(seed);
    spectrum[0] *= response.gain;
    for (std::size_t k = 1; k < bins; ++k) {
        const double level = noise_scale * (response.added_snu[k] + excess);
        if (k == bins - 1) {
            // Nyquist stays real.
            spectrum[k] = response.gain * response.transfer[k].real() * spectrum[k].real() +
                          std::sqrt(level) * rng.normal();
        } else {
            spectrum[k] = response.gain * response.transfer[k] * spectrum[k] + rng.complex_normal(level);
        }
    }
    return Trace(trace.sample_rate(), mean_out, fft::inverse_real(spectrum, n_samples),
                 tag(trace.seed_tag(), "channel", seed));
}

Trace propagate_channel(const Trace& trace, const GainLine& line, double carrier_offset, double excess_db,
                        std::uint64_t seed) {
    line.validate();
    if (line.g == 0.0 && excess_db == 0.0) {
        std::vector<double> copy(trace.samples().begin(), trace.samples().end());
        return Trace(trace.sample_rate(), trace.mean_flux(), std::move(copy), tag(trace.seed_tag(), "vacuum", seed));
    }
    const auto response = channel_response(line, carrier_offset, trace.size(), trace.sample_rate());
    return apply_channel(trace, response, excess_db, seed);
}

Trace apply_detection(const Trace& trace, double eta, std::uint64_t seed, double dark_floor_snu) {
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidParameter("apply_detection: efficiency must lie in (0, 1]");
    if (!(dark_floor_snu >= 0.0)) throw InvalidParameter("apply_detection: dark floor must be >= 0");
    const double mean_out = eta * trace.mean_flux();
    std::vector<double> out(trace.samples().begin(), trace.samples().end());
    if (eta == 1.0 && dark_floor_snu == 0.0)
        return Trace(trace.sample_rate(), mean_out, std::move(out), tag(trace.seed_tag(), "detect", seed));

    const double sigma = std::sqrt(eta * (1.0 - eta) * trace.mean_flux() + dark_floor_snu * mean_out);
    GaussianRng rng(seed);
    for (double& v : out) v = eta * v + sigma * rng.normal();
    return Trace(trace.sample_rate(), mean_out, std::move(out), tag(trace.seed_tag(), "detect", seed));
}

TracePair shot_reference(double mean_p, double mean_c, std::size_t n_samples, double sample_rate,
                         std::uint64_t seed) {
    require_samples(n_samples);
    if (!(mean_p > 0.0) || !(mean_c > 0.0)) throw InvalidParameter("shot_reference: means must be positive");
    GaussianRng rng(seed);
    std::vector<double> p(n_samples);
    std::vector<double> c(n_samples);
    const double sp = std::sqrt(mean_p);
    const double sc = std::sqrt(mean_c);
    for (double& v : p) v = sp * rng.normal();
    for (double& v : c) v = sc * rng.normal();
    const std::string base = "shot:" + std::to_string(seed);
    return TracePair{Trace(sample_rate, mean_p, std::move(p), base + "/p"),
                     Trace(sample_rate, mean_c, std::move(c), base + "/c")};
}

} // namespace fastlight
