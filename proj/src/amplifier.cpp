#include "fastlight/amplifier.hpp"

#include "fastlight/error.hpp"

#include <cmath>
#include <string>

namespace fastlight {

namespace {

void require_gain(double g, const char* who) {
    if (!(g >= 1.0)) throw InvalidParameter(std::string(who) + ": gain must be >= 1");
}

void require_eta(double eta, const char* who) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw InvalidParameter(std::string(who) + ": efficiency must lie in (0, 1]");
}

} // namespace

void ChannelParams::validate() const {
    require_gain(gain2, "ChannelParams");
    require_eta(eta, "ChannelParams");
    if (!(excess_noise_db >= 0.0)) throw InvalidParameter("ChannelParams: excess noise must be >= 0 dB");
}

double amp_mean(double gain, double n_in) {
    require_gain(gain, "amp_mean");
    if (!(n_in >= 0.0)) throw InvalidParameter("amp_mean: photon number must be >= 0");
    return gain * n_in + gain - 1.0;
}

double amp_variance(double gain, double n_in, double var_in) {
    require_gain(gain, "amp_variance");
    if (!(n_in >= 0.0) || !(var_in >= 0.0))
        throw InvalidParameter("amp_variance: photon number and variance must be >= 0");
    return gain * gain * var_in + gain * (gain - 1.0) * (n_in + 1.0);
}

double snu_out(double gain, double s_in) {
    require_gain(gain, "snu_out");
    return gain * s_in + (gain - 1.0);
}

double loss_channel(double eta, double s) {
    require_eta(eta, "loss_channel");
    return eta * s + (1.0 - eta);
}

double amplified_difference_snu(double g1, double g2) {
    require_gain(g1, "difference_noise");
    require_gain(g2, "difference_noise");
    const double a = g1 - 1.0;
    const double b = 2.0 * g1 - 1.0;
    const double num = g1 * b + g2 * g2 * a * b + g2 * (g2 - 1.0) * a - 4.0 * g2 * g1 * a;
    const double den = g1 + g2 * a;
    return num / den;
}

DifferenceNoise difference_noise_after_channel(double g1, double g2, double eta, double excess_db) {
    if (!(excess_db >= 0.0)) throw InvalidParameter("difference_noise: excess noise must be >= 0 dB");
    const double r = amplified_difference_snu(g1, g2);
    DifferenceNoise out;
    out.snu = loss_channel(eta, r) + (from_db(excess_db) - 1.0);
    out.db = to_db(out.snu);
    return out;
}

} // namespace fastlight
