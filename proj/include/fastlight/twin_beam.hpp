#pragma once

namespace fastlight {

// Seeded four-wave-mixing source producing the probe/conjugate pair.
struct TwinBeamSource {
    double gain1 = 1.0;             // linear 4WM gain G1
    double seed_flux = 3.2e4;       // mean seed photons per analysis interval (sample)
    double pair_bandwidth = 20e6;   // Hz, total width of the correlated band
    double rolloff = 2e6;           // Hz, Lorentzian corner of the band edge

    void validate() const;
};

struct BeamStats {
    double mean_p = 0.0;
    double mean_c = 0.0;
    double var_p = 0.0;
    double var_c = 0.0;
    double cov_pc = 0.0;
};

// Large-n0 probe/conjugate statistics of a coherent seed amplified by G1:
// means G1 n0 and (G1 - 1) n0, variances G1 (2G1 - 1) n0 and (G1 - 1)(2G1 - 1) n0,
// covariance 2 G1 (G1 - 1) n0.
BeamStats seeded_stats(double gain1, double seed_flux);

// var_p + var_c - 2 cov_pc.
double intensity_difference_variance(const BeamStats& stats);

// Difference noise relative to the coherent reference, 10 log10(1 / (2G1 - 1)).
double squeezing_db(double gain1);

// Inverse of squeezing_db; input must be <= 0 dB.
double gain_for_squeezing(double squeezing_db);

// Fraction of the full pair correlation present at sideband frequency f (Hz):
// 1 inside |f| <= pair_bandwidth / 2, Lorentzian tail with corner `rolloff` beyond.
double correlation_weight(const TwinBeamSource& source, double f);

} // namespace fastlight
