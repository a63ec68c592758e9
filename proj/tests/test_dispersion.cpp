#include "fastlight/dispersion.hpp"
#include "fastlight/amplifier.hpp"
#include "fastlight/error.hpp"
#include "oracles/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace fastlight;

namespace {

// Direct evaluation of the Lorentzian susceptibility, kept separate from the library.
std::complex<double> index_oracle(double g, double gamma, double delta) {
    const std::complex<double> den(delta, gamma);
    return 1.0 + g * gamma / (4.0 * kPi * den);
}

GainLine reference_line() { return calibrate(7.5, 10e6, 0.025); }

// Half-maximum point of the dB profile, by bisection.
double half_width(const GainLine& line) {
    const double half = 0.5 * to_db(intensity_gain(line, 0.0));
    double lo = 0.0;
    double hi = 100.0 * line.gamma;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (to_db(intensity_gain(line, mid)) > half ? lo : hi) = mid;
    }
    return lo;
}

} // namespace

TEST_CASE("refractive index at resonance, far detuning and one half-width") {
    GainLine line = reference_line();
    const auto n0 = refractive_index(line, 0.0);
    CHECK(n0.real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(n0.imag() == doctest::Approx(-line.g / (4.0 * kPi)).epsilon(1e-12));

    const auto far = refractive_index(line, 1e6 * line.gamma);
    CHECK(std::abs(far - 1.0) < 1e-5 * line.g);

    const auto at_gamma = refractive_index(line, line.gamma);
    const std::complex<double> expected = 1.0 + (line.g / (8.0 * kPi)) * std::complex<double>(1.0, -1.0);
    CHECK(std::abs(at_gamma - expected) < 1e-14);
}

TEST_CASE("group index: slow at the centre, zero crossing at gamma, minimum at sqrt(3) gamma") {
    const GainLine line = reference_line();
    const double w = line.omega_carrier;
    CHECK(group_index(line, 0.0) - 1.0 == doctest::Approx(w * line.g / (4.0 * kPi * line.gamma)).epsilon(1e-12));
    CHECK(group_index(line, line.gamma) == doctest::Approx(refractive_index(line, line.gamma).real()).epsilon(1e-12));

    const double d_min = std::sqrt(3.0) * line.gamma;
    const double expected = -w * line.g / (32.0 * kPi * line.gamma) + refractive_index(line, d_min).real();
    CHECK(group_index(line, d_min) == doctest::Approx(expected).epsilon(1e-10));

    double best = 1e300;
    double best_d = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double d = line.gamma * 5.0 * i / 200000.0;
        const double ng = group_index(line, d);
        if (ng < best) {
            best = ng;
            best_d = d;
        }
    }
    CHECK(best_d == doctest::Approx(d_min).epsilon(1e-3));
    CHECK(best == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("group index derivative agrees with a finite difference of the index") {
    const GainLine line = reference_line();
    for (double u : {-3.0, -1.0, -0.2, 0.0, 0.7, 2.0}) {
        const double d = u * line.gamma;
        const double h = 1e-4 * line.gamma;
        const auto fd = (refractive_index(line, d + h) - refractive_index(line, d - h)) / (2.0 * h);
        CHECK(std::abs(fd - refractive_index_derivative(line, d)) < 1e-6 * std::abs(refractive_index_derivative(line, 0.0)));
    }
}

TEST_CASE("intensity gain anchors") {
    const GainLine line = reference_line();
    CHECK(intensity_gain(line, 0.0) == doctest::Approx(std::pow(10.0, 0.75)).epsilon(1e-12));
    CHECK(std::abs(intensity_gain(line, 0.0) - 5.6234132519) < 1e-9);
    CHECK(to_db(intensity_gain(line, line.gamma)) == doctest::Approx(3.75).epsilon(1e-12));

    GainLine empty = line;
    empty.g = 0.0;
    for (double d : {-1e9, 0.0, 3e7}) CHECK(intensity_gain(empty, d) == 1.0);
}

TEST_CASE("calibrate round trip and examples") {
    const GainLine line = reference_line();
    CHECK(std::abs(to_db(intensity_gain(line, 0.0)) - 7.5) < 1e-9);
    const double fwhm = 2.0 * half_width(line) / (2.0 * kPi);
    CHECK(std::abs(fwhm - 10e6) / 10e6 < 1e-6);

    CHECK(calibrate(0.0, 3e6, 0.1).g == 0.0);

    const GainLine small = calibrate(3.01, 2e6, 0.01);
    CHECK(to_db(intensity_gain(small, 2.0 * kPi * 1e6)) == doctest::Approx(1.505).epsilon(1e-12));

    CHECK_THROWS_AS(calibrate(7.5, 0.0, 0.025), InvalidParameter);
    CHECK_THROWS_AS(calibrate(7.5, -1.0, 0.025), InvalidParameter);
    CHECK_THROWS_AS(calibrate(7.5, 10e6, 0.0), InvalidParameter);
    CHECK_THROWS_AS(calibrate(-1.0, 10e6, 0.025), InvalidParameter);
}

TEST_CASE("peak advance") {
    GainLine line = reference_line();
    line.g = 0.0;
    CHECK(peak_advance(line, 1e7) == 0.0);

    // (L / c) (n_g - 1) with n_g - 1 = -144 over 25 mm.
    const double dt = 0.025 / kSpeedOfLight * -144.0;
    CHECK(dt == doctest::Approx(-12.0e-9).epsilon(1e-3));

    // Pick g so that n_g - 1 = -144 at sqrt(3) gamma and compare.
    GainLine unit = reference_line();
    unit.g = 1.0;
    const double d = std::sqrt(3.0) * unit.gamma;
    const double per_g = group_index(unit, d) - 1.0;
    unit.g = -144.0 / per_g;
    CHECK(peak_advance(unit, d) == doctest::Approx(dt).epsilon(1e-12));

    // Zero advance where n_g crosses 1 on the wing.
    const GainLine ref = reference_line();
    double lo = 0.0;
    double hi = ref.gamma * 1.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (group_index(ref, mid) > 1.0 ? lo : hi) = mid;
    }
    CHECK(std::abs(peak_advance(ref, lo)) < 1e-18);
}

TEST_CASE("modulation transfer anchors") {
    const GainLine line = reference_line();
    for (double d : {0.0, line.gamma, 2.5 * line.gamma}) {
        const auto m0 = modulation_transfer(line, d, 0.0);
        CHECK(m0.real() == 1.0);
        CHECK(m0.imag() == 0.0);
    }
    GainLine empty = line;
    empty.g = 0.0;
    for (double f : {1e3, 1e6, 3e7}) CHECK(std::abs(modulation_transfer(empty, 2e7, f) - 1.0) < 1e-15);

    // Small-f phase slope reproduces the group delay (DSP sign convention).
    for (double u : {0.0, 0.5, 1.7, 2.0, 3.0}) {
        const double d = u * line.gamma;
        const double f = 100.0;
        const double slope = -std::arg(modulation_transfer(line, d, f)) / (2.0 * kPi * f);
        const double expected = peak_advance(line, d);
        if (std::abs(expected) > 1e-12) {
            CHECK(slope == doctest::Approx(expected).epsilon(0.01));
        }
    }
}

TEST_CASE("medium response tabulates the pointwise functions") {
    const GainLine line = reference_line();
    const std::vector<double> grid{-2e8, -1e7, 0.0, 5e7};
    const auto r = medium_response(line, grid);
    REQUIRE(r.gain.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(r.gain[i] == intensity_gain(line, grid[i]));
        CHECK(r.group_index[i] == group_index(line, grid[i]));
        CHECK(r.n_complex[i] == refractive_index(line, grid[i]));
    }
    GainLine bad = line;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(medium_response(bad, grid), InvalidParameter);
}

TEST_CASE("flat gain line is flat over the simulated band") {
    const GainLine flat = flat_gain_line(1.25);
    CHECK(intensity_gain(flat, 0.0) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(intensity_gain(flat, 2.0 * kPi * 1.25e9) == doctest::Approx(1.25).epsilon(1e-9));
    CHECK(std::abs(modulation_transfer(flat, 0.0, 1e9) - 1.0) < 1e-6);
    CHECK_THROWS_AS(flat_gain_line(0.5), InvalidParameter);
}

TEST_CASE("property: index matches the direct oracle") {
    gen::Source src(11);
    for (int i = 0; i < gen::kCases; ++i) {
        GainLine line;
        line.g = src.log_uniform(1e-6, 1.0);
        line.gamma = src.log_uniform(1e5, 1e9);
        const double d = src.uniform(-20.0, 20.0) * line.gamma;
        CHECK(std::abs(refractive_index(line, d) - index_oracle(line.g, line.gamma, d)) < 1e-14);
    }
}

TEST_CASE("property: |H|^2 equals the intensity gain and ln G is Lorentzian") {
    gen::Source src(12);
    for (int i = 0; i < gen::kCases; ++i) {
        const GainLine line = calibrate(src.uniform(0.0, 12.0), src.log_uniform(1e5, 1e8), src.uniform(0.001, 0.1));
        const double d = src.uniform(-10.0, 10.0) * line.gamma;
        CHECK(std::norm(field_transfer(line, d)) == doctest::Approx(intensity_gain(line, d)).epsilon(1e-12));
        const double u = d / line.gamma;
        CHECK(std::log(intensity_gain(line, d)) * (1.0 + u * u) ==
              doctest::Approx(std::log(intensity_gain(line, 0.0))).epsilon(1e-10));
    }
}

TEST_CASE("property: transfer is Hermitian with unit DC value") {
    gen::Source src(13);
    for (int i = 0; i < gen::kCases; ++i) {
        const GainLine line = calibrate(src.uniform(0.0, 10.0), src.log_uniform(1e5, 1e8), 0.025);
        const double d = src.uniform(-6.0, 6.0) * line.gamma;
        const double f = src.log_uniform(1.0, 1e9);
        const auto plus = modulation_transfer(line, d, f);
        const auto minus = modulation_transfer(line, d, -f);
        CHECK(std::abs(plus - std::conj(minus)) < 1e-12);
        CHECK(modulation_transfer(line, d, 0.0) == std::complex<double>(1.0, 0.0));
    }
}

TEST_CASE("property: advance bounded by ln G / (2 gamma)") {
    gen::Source src(14);
    for (int i = 0; i < gen::kCases; ++i) {
        const GainLine line = calibrate(src.uniform(0.1, 15.0), src.log_uniform(1e5, 1e8), 0.025);
        const double d = src.uniform(-10.0, 10.0) * line.gamma;
        const double bound = std::log(intensity_gain(line, d)) / (2.0 * line.gamma);
        // Re n - 1 contributes (L/c)(Re n - 1), which is tiny next to the dispersive term.
        const double dispersive = line.length / kSpeedOfLight * line.omega_carrier *
                                  refractive_index_derivative(line, d).real();
        CHECK(std::abs(dispersive) <= bound * (1.0 + 1e-12));
    }
}

TEST_CASE("property: group index is even in the detuning") {
    gen::Source src(15);
    for (int i = 0; i < gen::kCases; ++i) {
        const GainLine line = calibrate(src.uniform(0.1, 15.0), src.log_uniform(1e5, 1e8), 0.025);
        const double d = src.uniform(0.0, 10.0) * line.gamma;
        const double dn = line.omega_carrier * refractive_index_derivative(line, d).real();
        const double dn_m = line.omega_carrier * refractive_index_derivative(line, -d).real();
        CHECK(dn == doctest::Approx(dn_m).epsilon(1e-12));
        CHECK(intensity_gain(line, d) == doctest::Approx(intensity_gain(line, -d)).epsilon(1e-14));
    }
}

TEST_CASE("invalid lines are rejected") {
    GainLine line;
    line.g = -1.0;
    CHECK_THROWS_AS(line.validate(), InvalidParameter);
    line = GainLine{};
    line.length = 0.0;
    CHECK_THROWS_AS(line.validate(), InvalidParameter);
    line = GainLine{};
    line.gamma = std::nan("");
    CHECK_THROWS_AS(line.validate(), InvalidParameter);
    CHECK_NOTHROW(GainLine{}.validate());
}
