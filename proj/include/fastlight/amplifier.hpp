#pragma once

#include <cmath>

namespace fastlight {

// Second (fast-light) process and detection chain.
struct ChannelParams {
    double gain2 = 1.0;            // linear gain G of the phase-insensitive amplifier
    double eta = 0.95;             // detection efficiency
    double excess_noise_db = 0.2;  // technical noise added on top, dB re shot noise

    void validate() const;
};

// Ideal phase-insensitive amplifier, exact photon-number relations:
//   <n_out>     = G <n_in> + G - 1
//   Var(n_out)  = G^2 Var(n_in) + G (G - 1) (<n_in> + 1)
double amp_mean(double gain, double n_in);
double amp_variance(double gain, double n_in, double var_in);

// Large-n form of the above in shot-noise units of the respective beam.
double snu_out(double gain, double s_in);

// Beam-splitter loss: eta * s + (1 - eta).
double loss_channel(double eta, double s);

struct DifferenceNoise {
    double snu = 0.0;
    double db = 0.0;
};

// Twin-beam intensity-difference noise when the conjugate passes an ideal
// amplifier of gain g2, both arms are detected with efficiency eta, and
// excess_db of flat technical noise is added to the difference.
DifferenceNoise difference_noise_after_channel(double g1, double g2, double eta, double excess_db);

// The bare two-process ratio R(G1, G2) before loss and excess noise.
double amplified_difference_snu(double g1, double g2);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

} // namespace fastlight
