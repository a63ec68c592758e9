#include "fastlight/twin_beam.hpp"

#include "fastlight/error.hpp"

#include <cmath>

namespace fastlight {

void TwinBeamSource::validate() const {
    if (!(gain1 >= 1.0)) throw InvalidParameter("TwinBeamSource: gain1 must be >= 1");
    if (!(seed_flux > 0.0)) throw InvalidParameter("TwinBeamSource: seed_flux must be positive");
    if (!(pair_bandwidth > 0.0)) throw InvalidParameter("TwinBeamSource: pair_bandwidth must be positive");
    if (!(rolloff > 0.0)) throw InvalidParameter("TwinBeamSource: rolloff must be positive");
}

BeamStats seeded_stats(double gain1, double seed_flux) {
    if (!(gain1 >= 1.0)) throw InvalidParameter("seeded_stats: gain1 must be >= 1");
    const double g = gain1;
    const double n0 = seed_flux;
    BeamStats s;
    s.mean_p = g * n0;
    s.mean_c = (g - 1.0) * n0;
    s.var_p = g * (2.0 * g - 1.0) * n0;
    s.var_c = (g - 1.0) * (2.0 * g - 1.0) * n0;
    s.cov_pc = 2.0 * g * (g - 1.0) * n0;
    return s;
}

double intensity_difference_variance(const BeamStats& stats) {
    return stats.var_p + stats.var_c - 2.0 * stats.cov_pc;
}

double squeezing_db(double gain1) {
    if (!(gain1 >= 1.0)) throw InvalidParameter("squeezing_db: gain1 must be >= 1");
    return 10.0 * std::log10(1.0 / (2.0 * gain1 - 1.0));
}

double gain_for_squeezing(double squeezing_db) {
    if (!(squeezing_db <= 0.0))
        throw InvalidParameter("gain_for_squeezing: squeezing must be <= 0 dB");
    return 0.5 * (std::pow(10.0, -squeezing_db / 10.0) + 1.0);
}

double correlation_weight(const TwinBeamSource& source, double f) {
    const double edge = 0.5 * source.pair_bandwidth;
    const double af = std::abs(f);
    if (af <= edge) return 1.0;
    const double x = (af - edge) / source.rolloff;
    return 1.0 / (1.0 + x * x);
}

} // namespace fastlight
