#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace fastlight {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = std::numbers::pi;

constexpr double angular_frequency_from_wavelength(double wavelength_m) {
    return 2.0 * kPi * kSpeedOfLight / wavelength_m;
}

// Rb D1 line, 795 nm.
inline constexpr double kDefaultCarrier = angular_frequency_from_wavelength(795e-9);

// Lorentzian gain line
//
//   n(w) = 1 + (g / 4pi) * gamma / (delta + i*gamma),   delta = w - omega0
//
// with Im n <= 0 read as gain for fields propagating as exp(i(n w z / c - w t)).
// All "detuning" arguments below are offsets delta from the line centre in rad/s.
struct GainLine {
    double g = 0.0;                       // dimensionless gain coefficient
    double gamma = kPi * 10e6;            // HWHM, rad/s
    double omega0 = kDefaultCarrier;      // line centre, rad/s
    double omega_carrier = kDefaultCarrier;
    double length = 0.025;                // m

    // Throws InvalidParameter when any invariant is broken.
    void validate() const;
};

// Evaluated per detuning grid point by medium_response().
struct MediumResponse {
    std::vector<double> detuning_grid;
    std::vector<std::complex<double>> n_complex;
    std::vector<double> gain;
    std::vector<double> group_index;
};

std::complex<double> refractive_index(const GainLine& line, double delta);

// Closed-form dn/dw = -(g/4pi) * gamma / (delta + i gamma)^2.
std::complex<double> refractive_index_derivative(const GainLine& line, double delta);

// n_g = Re n + omega_carrier * Re dn/dw.
double group_index(const GainLine& line, double delta);

// Linear power gain exp(-2 Im n * omega L / c).
double intensity_gain(const GainLine& line, double delta);

// Field transfer H(delta) = exp(i (n - 1) omega L / c); |H|^2 == intensity_gain.
std::complex<double> field_transfer(const GainLine& line, double delta);

// Pulse peak shift (L / c) (n_g - 1). Negative means the peak is advanced.
double peak_advance(const GainLine& line, double delta);

// Build a line whose dB gain profile peaks at peak_gain_db with the given
// full width at half maximum (Hz). Since ln G is exactly Lorentzian in delta,
// gamma = pi * fwhm.
GainLine calibrate(double peak_gain_db, double fwhm_hz, double length_m,
                   double omega_carrier = kDefaultCarrier);

// A line so wide that gain and phase are flat over any simulated band; the
// flat-gain limit of the amplifier relations.
GainLine flat_gain_line(double gain, double length_m = 0.025);

MediumResponse medium_response(const GainLine& line, std::span<const double> detunings);

// Relative intensity-modulation transfer of a carrier at offset carrier_offset
// for sideband frequencies f (Hz):
//
//   M(f) = [H(D + 2 pi f) H*(D) + H(D) H*(D - 2 pi f)] / (2 |H(D)|^2)
//
// The result is returned in the signal-processing Fourier convention
// X(f) = sum x(t) exp(-2 pi i f t), i.e. the complex conjugate of the optical
// (exp(-i w t)) expression above. A positive group delay tau therefore shows up
// as M(f) ~ exp(-2 pi i f tau) and can be multiplied directly onto an FFT.
// M(0) == 1 and M(-f) == conj(M(f)) hold exactly.
std::complex<double> modulation_transfer(const GainLine& line, double carrier_offset, double f);
std::vector<std::complex<double>> modulation_transfer(const GainLine& line, double carrier_offset,
                                                      std::span<const double> f);

// Sideband-averaged gain [G(D + 2 pi f) + G(D - 2 pi f)] / 2.
double sideband_gain(const GainLine& line, double carrier_offset, double f);

} // namespace fastlight
