#pragma once

#include "fastlight/trace.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fastlight {

enum class Window { Hann, Rectangular };

enum class Normalization { Absolute, Snu, DbReShotNoise };

const char* to_string(Window w);
const char* to_string(Normalization n);

struct EstimatorInfo {
    std::size_t segment_len = 0;
    double overlap = 0.5;
    Window window = Window::Hann;
    std::size_t trace_count = 1;

    bool same_settings(const EstimatorInfo& other) const {
        return segment_len == other.segment_len && overlap == other.overlap && window == other.window;
    }
};

// One-sided spectrum on a strictly increasing grid. Absolute PSDs are in
// (photons/sample)^2 per Hz.
struct Spectrum {
    std::vector<double> frequency;
    std::vector<double> values;
    Normalization normalization = Normalization::Absolute;
    EstimatorInfo estimator;
};

struct XcorrResult {
    std::vector<double> lag;     // s
    std::vector<double> values;  // C12(t) / sqrt(C11(0) C22(0))
    double peak_lag = 0.0;       // s, parabolic refinement of the discrete maximum
    double fwhm = 0.0;           // s, NaN if the peak does not fall below half within the lag window
};

inline constexpr std::size_t kDefaultSegment = 65536;

// Welch estimate: windowed segments with fractional overlap, one-sided,
// density-normalised so that sum(P) * df equals the trace variance.
Spectrum psd(const Trace& trace, std::size_t segment_len = kDefaultSegment, double overlap = 0.5,
             Window window = Window::Hann);

// Mean of spectra with identical grid and estimator settings; trace counts add.
Spectrum average_spectra(std::span<const Spectrum> spectra);

// Pointwise 10 log10(spec / reference).
Spectrum snu_normalize(const Spectrum& spec, const Spectrum& reference);

// 10 log10 of the linear-SNU mean over bins with f_lo <= f <= f_hi. Accepts
// dB-re-shot-noise or linear SNU spectra.
double band_squeezing_db(const Spectrum& spec, double f_lo, double f_hi);

// Zero-phase band-pass response: unity in midband, raised-cosine edges whose
// -3 dB (power) points sit at f_lo and f_hi. The rising edge spans
// [0.364 f_lo, 1.364 f_lo] and the falling edge [0.636 f_hi, 1.636 f_hi].
// f_lo == 0 drops the high-pass edge and f_hi == Nyquist the
// low-pass edge; the DC bin is always removed.
double band_filter_gain(double f, double f_lo, double f_hi, double nyquist);

Trace band_filter(const Trace& trace, double f_lo, double f_hi);

// Normalised intensity cross-correlation C12(t) = sum_tau i1(tau) i2(t + tau),
// evaluated circularly through the FFT on lags |t| <= max_lag at the sample
// period. Positive peak lag means i2 lags i1.
XcorrResult cross_correlation(const Trace& i1, const Trace& i2, double max_lag);

// Pointwise mean of correlations on a common lag grid, with peak and FWHM recomputed.
XcorrResult average_correlations(std::span<const XcorrResult> results);

// Fill peak_lag and fwhm from lag/values.
void refine_peak(XcorrResult& result);

// argmax(c_fast) - argmax(c_ref), each refined by three-point parabolic
// interpolation. Negative values mean the fast beam is advanced. Throws
// DegeneratePeak when a correlation has no unique maximum.
double peak_delay(const XcorrResult& c_fast, const XcorrResult& c_ref);

void write_spectrum_csv(const Spectrum& spec, const std::filesystem::path& path);

} // namespace fastlight
