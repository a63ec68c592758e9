#include "fastlight/dispersion.hpp"

#include "fastlight/error.hpp"

#include <cmath>
#include <string>

namespace fastlight {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// (n - 1) * omega L / c, the complex excess phase accumulated over the cell.
std::complex<double> excess_phase(const GainLine& line, double delta) {
    const double k_l = line.omega_carrier * line.length / kSpeedOfLight;
    return (line.g / (4.0 * kPi)) * k_l * line.gamma / std::complex<double>(delta, line.gamma);
}

} // namespace

void GainLine::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw InvalidParameter("GainLine: gamma must be positive, got " + std::to_string(gamma));
    if (!(length > 0.0) || !std::isfinite(length))
        throw InvalidParameter("GainLine: length must be positive, got " + std::to_string(length));
    if (!(g >= 0.0) || !std::isfinite(g))
        throw InvalidParameter("GainLine: gain coefficient must be >= 0, got " + std::to_string(g));
    if (!(omega0 > 0.0) || !(omega_carrier > 0.0))
        throw InvalidParameter("GainLine: optical frequencies must be positive");
}

std::complex<double> refractive_index(const GainLine& line, double delta) {
    return 1.0 + (line.g / (4.0 * kPi)) * line.gamma / std::complex<double>(delta, line.gamma);
}

std::complex<double> refractive_index_derivative(const GainLine& line, double delta) {
    const std::complex<double> d(delta, line.gamma);
    return -(line.g / (4.0 * kPi)) * line.gamma / (d * d);
}

double group_index(const GainLine& line, double delta) {
    return refractive_index(line, delta).real() +
           line.omega_carrier * refractive_index_derivative(line, delta).real();
}

double intensity_gain(const GainLine& line, double delta) {
    const double im_n = refractive_index(line, delta).imag();
    return std::exp(-2.0 * im_n * line.omega_carrier * line.length / kSpeedOfLight);
}

std::complex<double> field_transfer(const GainLine& line, double delta) {
    return std::exp(kI * excess_phase(line, delta));
}

double peak_advance(const GainLine& line, double delta) {
    return line.length / kSpeedOfLight * (group_index(line, delta) - 1.0);
}

GainLine calibrate(double peak_gain_db, double fwhm_hz, double length_m, double omega_carrier) {
    if (!(peak_gain_db >= 0.0))
        throw InvalidParameter("calibrate: peak gain must be >= 0 dB");
    if (!(fwhm_hz > 0.0))
        throw InvalidParameter("calibrate: fwhm must be positive");
    if (!(length_m > 0.0))
        throw InvalidParameter("calibrate: length must be positive");
    if (!(omega_carrier > 0.0))
        throw InvalidParameter("calibrate: carrier frequency must be positive");

    GainLine line;
    line.gamma = kPi * fwhm_hz;
    line.length = length_m;
    line.omega_carrier = omega_carrier;
    line.omega0 = omega_carrier;
    // ln G(0) = g * omega L / (2 pi c)
    const double log_gain = peak_gain_db * std::log(10.0) / 10.0;
    line.g = log_gain * 2.0 * kPi * kSpeedOfLight / (omega_carrier * length_m);
    return line;
}

GainLine flat_gain_line(double gain, double length_m) {
    if (!(gain >= 1.0))
        throw InvalidParameter("flat_gain_line: gain must be >= 1");
    GainLine line;
    line.gamma = 1e16;
    line.length = length_m;
    line.g = std::log(gain) * 2.0 * kPi * kSpeedOfLight / (line.omega_carrier * length_m);
    return line;
}

MediumResponse medium_response(const GainLine& line, std::span<const double> detunings) {
    line.validate();
    MediumResponse out;
    out.detuning_grid.assign(detunings.begin(), detunings.end());
    out.n_complex.reserve(detunings.size());
    out.gain.reserve(detunings.size());
    out.group_index.reserve(detunings.size());
    for (double d : detunings) {
        out.n_complex.push_back(refractive_index(line, d));
        out.gain.push_back(intensity_gain(line, d));
        out.group_index.push_back(group_index(line, d));
    }
    return out;
}

std::complex<double> modulation_transfer(const GainLine& line, double carrier_offset, double f) {
    const double w = 2.0 * kPi * f;
    const std::complex<double> z0 = excess_phase(line, carrier_offset);
    // H(D + w) / H(D) and H(D - w) / H(D); the carrier normalisation cancels exactly.
    const std::complex<double> upper = std::exp(kI * (excess_phase(line, carrier_offset + w) - z0));
    const std::complex<double> lower = std::exp(kI * (excess_phase(line, carrier_offset - w) - z0));
    const std::complex<double> optical = 0.5 * (upper + std::conj(lower));
    return std::conj(optical);
}

std::vector<std::complex<double>> modulation_transfer(const GainLine& line, double carrier_offset,
                                                      std::span<const double> f) {
    std::vector<std::complex<double>> out;
    out.reserve(f.size());
    for (double fi : f) out.push_back(modulation_transfer(line, carrier_offset, fi));
    return out;
}

double sideband_gain(const GainLine& line, double carrier_offset, double f) {
    const double w = 2.0 * kPi * f;
    return 0.5 * (intensity_gain(line, carrier_offset + w) + intensity_gain(line, carrier_offset - w));
}

} // namespace fastlight
