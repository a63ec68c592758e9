#pragma once

#include "fastlight/dispersion.hpp"
#include "fastlight/trace.hpp"
#include "fastlight/twin_beam.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fastlight {

// Per-frequency second-order targets for a probe/conjugate pair.
// s_pp and s_cc are one-sided PSDs in shot-noise units of each beam; s_pc is
// the cross-spectral density E[conj(X_p) X_c] normalised by the geometric
// mean of the two shot-noise levels.
struct SpectralTargets {
    std::vector<double> frequency;
    std::vector<double> s_pp;
    std::vector<double> s_cc;
    std::vector<std::complex<double>> s_pc;

    // Throws InvalidParameter if any bin has a negative PSD or |s_pc|^2 > s_pp s_cc.
    void validate() const;
};

struct TracePair {
    Trace probe;
    Trace conjugate;
};

// Spectral embedding of seeded_stats: in the correlated band s_pp = s_cc = 2G1 - 1
// and the difference noise is 1 / (2G1 - 1); outside it everything relaxes to
// the shot-noise floor following correlation_weight().
SpectralTargets build_targets(const TwinBeamSource& source, std::span<const double> grid, double sample_rate);

// Frequency-domain synthesis: each positive-frequency bin gets a bivariate
// circular complex Gaussian with the target covariance, the DC bin is zero and
// the Nyquist bin real, then one real inverse FFT per beam. `targets` must be
// on the real-FFT grid of (n_samples, sample_rate).
TracePair synth_twin_traces(const SpectralTargets& targets, std::size_t n_samples, double sample_rate,
                            double mean_p, double mean_c, std::uint64_t seed);

// Linear intensity channel tabulated on the real-FFT grid of a trace.
struct ChannelResponse {
    double gain = 1.0;                              // mean-flux gain G(D)
    std::vector<std::complex<double>> transfer;     // relative transfer M(f), M(0) = 1
    std::vector<double> added_snu;                  // added noise PSD, output shot-noise units
};

// Gain G(D), M(f) from modulation_transfer and added noise (Gbar - 1) Gbar / G
// with Gbar the sideband-averaged gain.
ChannelResponse channel_response(const GainLine& line, double carrier_offset, std::size_t n_samples,
                                 double sample_rate);

// Output spectrum G * M(f) * X(f) plus independent Gaussian noise of PSD
// added_snu(f) + (10^(excess_db/10) - 1), both in output shot-noise units.
Trace apply_channel(const Trace& trace, const ChannelResponse& response, double excess_db, std::uint64_t seed);

// channel_response + apply_channel. A line with g == 0 and no excess noise is
// the vacuum and returns the input samples unchanged.
Trace propagate_channel(const Trace& trace, const GainLine& line, double carrier_offset, double excess_db,
                        std::uint64_t seed);

// Detector with quantum efficiency eta: fluctuations scale by eta and white
// vacuum noise of variance eta (1 - eta) mean is added, so a PSD of s shot-noise
// units maps to eta s + 1 - eta. `dark_floor_snu` adds white electronic noise
// on top, in units of the detected beam's shot noise.
Trace apply_detection(const Trace& trace, double eta, std::uint64_t seed, double dark_floor_snu = 0.0);

// Two independent coherent (white, 1 SNU) traces with the given mean fluxes.
TracePair shot_reference(double mean_p, double mean_c, std::size_t n_samples, double sample_rate,
                         std::uint64_t seed);

} // namespace fastlight
