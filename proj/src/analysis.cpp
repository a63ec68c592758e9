#include "fastlight/analysis.hpp"

#include "fastlight/amplifier.hpp"
#include "fastlight/dispersion.hpp"
#include "fastlight/error.hpp"
#include "fastlight/fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace fastlight {

namespace {

// Fraction of a raised-cosine ramp at which it passes 1/sqrt(2).
const double kEdgeAt3dB = std::acos(1.0 - std::sqrt(2.0)) / kPi;

double rising(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return 0.5 - 0.5 * std::cos(kPi * x);
}

std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (w == Window::Hann) {
        // Periodic Hann; 50 % overlapped copies sum to a constant.
        for (std::size_t i = 0; i < n; ++i)
            out[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    }
    return out;
}

void require_same_grid(const std::vector<double>& a, const std::vector<double>& b, const char* who) {
    if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin()))
        throw IncompatibleSpectra(std::string(who) + ": frequency grids differ");
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::distance(v.begin(), std::max_element(v.begin(), v.end())));
}

void require_unique_peak(const XcorrResult& r, const char* name) {
    if (r.values.empty()) throw DegeneratePeak(std::string(name) + " correlation is empty");
    const std::size_t imax = argmax(r.values);
    const double top = r.values[imax];
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const std::size_t dist = i > imax ? i - imax : imax - i;
        if (dist > 1 && top - r.values[i] <= 1e-6)
            throw DegeneratePeak(std::string(name) + " correlation has no unique maximum");
    }
}

} // namespace

const char* to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

const char* to_string(Normalization n) {
    switch (n) {
    case Normalization::Absolute: return "absolute";
    case Normalization::Snu: return "snu";
    case Normalization::DbReShotNoise: return "db_re_shot_noise";
    }
    return "unknown";
}

Spectrum psd(const Trace& trace, std::size_t segment_len, double overlap, Window window) {
    if (segment_len < 2 || !is_power_of_two(segment_len))
        throw InvalidParameter("psd: segment length must be a power of two");
    if (segment_len > trace.size())
        throw InvalidParameter("psd: segment of " + std::to_string(segment_len) + " samples exceeds trace of " +
                               std::to_string(trace.size()));
    if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidParameter("psd: overlap must lie in [0, 1)");

    const auto w = make_window(window, segment_len);
    double u = 0.0;
    for (double v : w) u += v * v;
    const std::size_t hop =
        std::max<std::size_t>(1, segment_len - static_cast<std::size_t>(std::floor(segment_len * overlap)));
    const std::size_t bins = segment_len / 2 + 1;
    const double fs = trace.sample_rate();
    const double scale = 1.0 / (fs * u);

    std::vector<double> acc(bins, 0.0);
    std::vector<double> seg(segment_len);
    std::size_t count = 0;
    const auto x = trace.samples();
    for (std::size_t start = 0; start + segment_len <= x.size(); start += hop) {
        for (std::size_t i = 0; i < segment_len; ++i) seg[i] = x[start + i] * w[i];
        const auto spec = fft::forward_real(seg);
        for (std::size_t k = 0; k < bins; ++k) {
            double p = std::norm(spec[k]) * scale;
            if (k != 0 && k != bins - 1) p *= 2.0;
            acc[k] += p;
        }
        ++count;
    }
    for (double& v : acc) v /= static_cast<double>(count);

    Spectrum out;
    out.frequency = fft::real_frequencies(segment_len, fs);
    out.values = std::move(acc);
    out.normalization = Normalization::Absolute;
    out.estimator = EstimatorInfo{segment_len, overlap, window, 1};
    return out;
}

Spectrum average_spectra(std::span<const Spectrum> spectra) {
    if (spectra.empty()) throw InvalidParameter("average_spectra: nothing to average");
    Spectrum out = spectra.front();
    out.estimator.trace_count = 0;
    std::fill(out.values.begin(), out.values.end(), 0.0);
    for (const auto& s : spectra) {
        require_same_grid(out.frequency, s.frequency, "average_spectra");
        if (!s.estimator.same_settings(out.estimator) || s.normalization != out.normalization)
            throw IncompatibleSpectra("average_spectra: estimator settings differ");
        for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += s.values[k];
        out.estimator.trace_count += s.estimator.trace_count;
    }
    for (double& v : out.values) v /= static_cast<double>(spectra.size());
    return out;
}

Spectrum snu_normalize(const Spectrum& spec, const Spectrum& reference) {
    require_same_grid(spec.frequency, reference.frequency, "snu_normalize");
    if (!spec.estimator.same_settings(reference.estimator))
        throw IncompatibleSpectra("snu_normalize: estimator settings differ");
    if (spec.normalization != Normalization::Absolute || reference.normalization != Normalization::Absolute)
        throw IncompatibleSpectra("snu_normalize: both spectra must be absolute PSDs");
    Spectrum out = spec;
    out.normalization = Normalization::DbReShotNoise;
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        const double r = reference.values[k];
        out.values[k] = r > 0.0 ? to_db(spec.values[k] / r) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

double band_squeezing_db(const Spectrum& spec, double f_lo, double f_hi) {
    if (spec.normalization == Normalization::Absolute)
        throw InvalidParameter("band_squeezing_db: spectrum is not shot-noise normalised");
    if (!(f_lo <= f_hi)) throw InvalidParameter("band_squeezing_db: empty band");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < spec.frequency.size(); ++k) {
        const double f = spec.frequency[k];
        if (f < f_lo || f > f_hi) continue;
        const double v = spec.values[k];
        sum += spec.normalization == Normalization::DbReShotNoise ? from_db(v) : v;
        ++n;
    }
    if (n == 0) throw InvalidParameter("band_squeezing_db: no frequency bins inside the band");
    return to_db(sum / static_cast<double>(n));
}

double band_filter_gain(double f, double f_lo, double f_hi, double nyquist) {
    f = std::abs(f);
    if (f == 0.0) return 0.0;
    double h = 1.0;
    if (f_lo > 0.0) h *= rising((f - (1.0 - kEdgeAt3dB) * f_lo) / f_lo);
    if (f_hi < nyquist) h *= rising(((1.0 + kEdgeAt3dB) * f_hi - f) / f_hi);
    return h;
}

Trace band_filter(const Trace& trace, double f_lo, double f_hi) {
    const double nyquist = trace.nyquist();
    if (!(f_lo >= 0.0) || !(f_hi > f_lo) || !(f_hi <= nyquist))
        throw InvalidParameter("band_filter: need 0 <= f_lo < f_hi <= Nyquist");
    auto spec = fft::forward_real(trace.samples());
    const double df = trace.sample_rate() / static_cast<double>(trace.size());
    for (std::size_t k = 0; k < spec.size(); ++k)
        spec[k] *= band_filter_gain(static_cast<double>(k) * df, f_lo, f_hi, nyquist);
    return Trace(trace.sample_rate(), trace.mean_flux(), fft::inverse_real(spec, trace.size()),
                 trace.seed_tag() + "|band");
}

void refine_peak(XcorrResult& r) {
    if (r.values.size() < 3) {
        r.peak_lag = r.lag.empty() ? 0.0 : r.lag[argmax(r.values)];
        r.fwhm = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    const std::size_t i = argmax(r.values);
    const double dt = r.lag[1] - r.lag[0];
    double offset = 0.0;
    if (i > 0 && i + 1 < r.values.size()) {
        const double ym = r.values[i - 1];
        const double y0 = r.values[i];
        const double yp = r.values[i + 1];
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) offset = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
    }
    r.peak_lag = r.lag[i] + offset * dt;

    const double half = 0.5 * r.values[i];
    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = i; j > 0; --j) {
        if (r.values[j - 1] < half) {
            const double frac = (r.values[j] - half) / (r.values[j] - r.values[j - 1]);
            left = r.lag[j] - frac * dt;
            break;
        }
    }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = i; j + 1 < r.values.size(); ++j) {
        if (r.values[j + 1] < half) {
            const double frac = (r.values[j] - half) / (r.values[j] - r.values[j + 1]);
            right = r.lag[j] + frac * dt;
            break;
        }
    }
    r.fwhm = right - left;
}

XcorrResult cross_correlation(const Trace& i1, const Trace& i2, double max_lag) {
    require_compatible(i1, i2);
    if (!(max_lag >= 0.0)) throw InvalidParameter("cross_correlation: max_lag must be >= 0");
    const std::size_t n = i1.size();
    const double fs = i1.sample_rate();
    const auto max_k = static_cast<std::size_t>(std::llround(max_lag * fs));
    if (max_k >= n / 2) throw InvalidParameter("cross_correlation: max_lag must be well below the trace duration");

    const auto x1 = fft::forward_real(i1.samples());
    const auto x2 = fft::forward_real(i2.samples());
    std::vector<fft::cplx> cross(x1.size());
    for (std::size_t k = 0; k < cross.size(); ++k) cross[k] = std::conj(x1[k]) * x2[k];
    const auto c = fft::inverse_real(cross, n);

    double e1 = 0.0;
    double e2 = 0.0;
    for (double v : i1.samples()) e1 += v * v;
    for (double v : i2.samples()) e2 += v * v;
    if (!(e1 > 0.0) || !(e2 > 0.0)) throw InvalidParameter("cross_correlation: zero-energy trace");
    const double norm = 1.0 / std::sqrt(e1 * e2);

    XcorrResult out;
    const std::size_t len = 2 * max_k + 1;
    out.lag.resize(len);
    out.values.resize(len);
    for (std::size_t j = 0; j < len; ++j) {
        const auto m = static_cast<long long>(j) - static_cast<long long>(max_k);
        const std::size_t idx = m >= 0 ? static_cast<std::size_t>(m) : n - static_cast<std::size_t>(-m);
        out.lag[j] = static_cast<double>(m) / fs;
        out.values[j] = c[idx] * norm;
    }
    refine_peak(out);
    return out;
}

XcorrResult average_correlations(std::span<const XcorrResult> results) {
    if (results.empty()) throw InvalidParameter("average_correlations: nothing to average");
    XcorrResult out;
    out.lag = results.front().lag;
    out.values.assign(out.lag.size(), 0.0);
    for (const auto& r : results) {
        if (r.lag.size() != out.lag.size() || !std::equal(r.lag.begin(), r.lag.end(), out.lag.begin()))
            throw InvalidParameter("average_correlations: lag grids differ");
        for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] += r.values[j];
    }
    for (double& v : out.values) v /= static_cast<double>(results.size());
    refine_peak(out);
    return out;
}

double peak_delay(const XcorrResult& c_fast, const XcorrResult& c_ref) {
    if (c_fast.lag.size() != c_ref.lag.size() ||
        !std::equal(c_fast.lag.begin(), c_fast.lag.end(), c_ref.lag.begin()))
        throw InvalidParameter("peak_delay: lag grids differ");
    require_unique_peak(c_fast, "fast");
    require_unique_peak(c_ref, "reference");
    XcorrResult fast = c_fast;
    XcorrResult ref = c_ref;
    refine_peak(fast);
    refine_peak(ref);
    return fast.peak_lag - ref.peak_lag;
}

void write_spectrum_csv(const Spectrum& spec, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const char* column = "psd_per_hz";
    if (spec.normalization == Normalization::Snu) column = "psd_snu";
    if (spec.normalization == Normalization::DbReShotNoise) column = "noise_db";
    os << "frequency_hz," << column << '\n';
    char buf[64];
    for (std::size_t k = 0; k < spec.frequency.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.9e,%.9e\n", spec.frequency[k], spec.values[k]);
        os << buf;
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

} // namespace fastlight
