#include "fastlight/scenario.hpp"

#include "fastlight/analysis.hpp"
#include "fastlight/error.hpp"
#include "fastlight/fft.hpp"
#include "fastlight/random.hpp"
#include "fastlight/stochastic.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef FASTLIGHT_VERSION
#define FASTLIGHT_VERSION "0.0.0"
#endif

namespace fastlight {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing helpers

std::string field_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!names.count(key)) throw ConfigError("unknown field '" + field_path(path, key) + "'");
    }
}

const json* child_object(const json& obj, const std::string& parent, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return nullptr;
    if (!it->is_object()) throw ConfigError("field '" + field_path(parent, key) + "': expected an object");
    return &*it;
}

bool read_number(const json& obj, const std::string& parent, const char* key, double& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number()) throw ConfigError("field '" + field_path(parent, key) + "': expected a number");
    out = it->get<double>();
    if (!std::isfinite(out)) throw ConfigError("field '" + field_path(parent, key) + "': must be finite");
    return true;
}

template <typename Int>
bool read_unsigned(const json& obj, const std::string& parent, const char* key, Int& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
        throw ConfigError("field '" + field_path(parent, key) + "': expected a non-negative integer");
    out = static_cast<Int>(it->get<std::uint64_t>());
    return true;
}

bool read_string(const json& obj, const std::string& parent, const char* key, std::string& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_string()) throw ConfigError("field '" + field_path(parent, key) + "': expected a string");
    out = it->get<std::string>();
    return true;
}

Band read_band(const json& obj, const char* key, Band fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
        throw ConfigError(std::string("field '") + key + "': expected [f_lo, f_hi] in Hz");
    return Band{(*it)[0].get<double>(), (*it)[1].get<double>()};
}

std::size_t line_of_offset(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

void apply_line(const json& obj, ScenarioConfig& cfg) {
    const std::string p = "line";
    reject_unknown(obj, p,
                   {"g", "gamma_rad_s", "omega0_rad_s", "omega_carrier_rad_s", "length_m", "peak_gain_db", "fwhm_hz",
                    "target_advance_s", "target_offset_hz"});
    GainLine line = cfg.line;
    double length = line.length;
    read_number(obj, p, "length_m", length);
    double fwhm = line.gamma / kPi;
    read_number(obj, p, "fwhm_hz", fwhm);
    double carrier = line.omega_carrier;
    read_number(obj, p, "omega_carrier_rad_s", carrier);

    double value = 0.0;
    try {
        if (obj.contains("g")) {
            read_number(obj, p, "g", line.g);
            if (!read_number(obj, p, "gamma_rad_s", line.gamma)) line.gamma = kPi * fwhm;
            line.length = length;
            line.omega_carrier = carrier;
            line.omega0 = carrier;
            read_number(obj, p, "omega0_rad_s", line.omega0);
        } else if (read_number(obj, p, "target_advance_s", value)) {
            double offset = cfg.operating_offset_hz;
            read_number(obj, p, "target_offset_hz", offset);
            line = line_for_advance(fwhm, length, value, offset);
        } else if (read_number(obj, p, "peak_gain_db", value)) {
            line = calibrate(value, fwhm, length, carrier);
        } else {
            // Width or length only: keep the peak gain of the base line.
            const double peak_db = to_db(intensity_gain(cfg.line, 0.0));
            line = calibrate(peak_db, fwhm, length, carrier);
        }
        line.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("field 'line': ") + e.what());
    }
    cfg.line = line;
}

void apply_source(const json& obj, ScenarioConfig& cfg) {
    const std::string p = "source";
    reject_unknown(obj, p, {"gain1", "squeezing_db", "seed_flux", "pair_bandwidth_hz", "rolloff_hz"});
    if (obj.contains("gain1") && obj.contains("squeezing_db"))
        throw ConfigError("field 'source': give either gain1 or squeezing_db, not both");
    double sq = 0.0;
    read_number(obj, p, "gain1", cfg.source.gain1);
    if (read_number(obj, p, "squeezing_db", sq)) {
        if (sq > 0.0) throw ConfigError("field 'source.squeezing_db': must be <= 0");
        cfg.source.gain1 = gain_for_squeezing(sq);
    }
    read_number(obj, p, "seed_flux", cfg.source.seed_flux);
    read_number(obj, p, "pair_bandwidth_hz", cfg.source.pair_bandwidth);
    read_number(obj, p, "rolloff_hz", cfg.source.rolloff);
}

void apply_overrides(const json& doc, ScenarioConfig& cfg) {
    reject_unknown(doc, "",
                   {"scenario", "preset", "line", "operating_offset_hz", "source", "channel", "sampling",
                    "detunings_hz", "band_hz", "full_band_hz", "detection_band_hz", "max_lag_s", "seed", "out_dir",
                    "jobs"});
    std::string scenario;
    if (read_string(doc, "", "scenario", scenario)) {
        auto id = parse_scenario(scenario);
        if (!id) throw ConfigError("field 'scenario': unknown scenario '" + scenario + "'");
        cfg.scenario = *id;
    }
    // The operating offset feeds target-advance line construction, so read it first.
    read_number(doc, "", "operating_offset_hz", cfg.operating_offset_hz);
    if (const json* line = child_object(doc, "", "line")) {
        apply_line(*line, cfg);
        cfg.preset = cfg.preset + "+custom";
    }
    if (const json* src = child_object(doc, "", "source")) apply_source(*src, cfg);
    if (const json* ch = child_object(doc, "", "channel")) {
        reject_unknown(*ch, "channel", {"eta", "excess_noise_db"});
        read_number(*ch, "channel", "eta", cfg.channel.eta);
        read_number(*ch, "channel", "excess_noise_db", cfg.channel.excess_noise_db);
    }
    if (const json* s = child_object(doc, "", "sampling")) {
        reject_unknown(*s, "sampling", {"rate_hz", "samples", "traces", "segment"});
        read_number(*s, "sampling", "rate_hz", cfg.sampling.rate_hz);
        read_unsigned(*s, "sampling", "samples", cfg.sampling.samples);
        read_unsigned(*s, "sampling", "traces", cfg.sampling.traces);
        read_unsigned(*s, "sampling", "segment", cfg.sampling.segment);
    }
    if (auto it = doc.find("detunings_hz"); it != doc.end()) {
        if (!it->is_array()) throw ConfigError("field 'detunings_hz': expected an array of numbers");
        cfg.detunings_hz.clear();
        for (const auto& v : *it) {
            if (!v.is_number()) throw ConfigError("field 'detunings_hz': expected an array of numbers");
            cfg.detunings_hz.push_back(v.get<double>());
        }
    }
    cfg.band = read_band(doc, "band_hz", cfg.band);
    cfg.detection_band = read_band(doc, "detection_band_hz", cfg.detection_band);
    read_number(doc, "", "full_band_hz", cfg.full_band_hz);
    read_number(doc, "", "max_lag_s", cfg.max_lag_s);
    read_unsigned(doc, "", "seed", cfg.seed);
    std::string out;
    if (read_string(doc, "", "out_dir", out)) cfg.out_dir = out;
    read_unsigned(doc, "", "jobs", cfg.jobs);
}

// ---------------------------------------------------------------------------
// Output helpers

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) std::filesystem::remove(f, ec);
    }

    std::ofstream open(const std::string& name) {
        std::filesystem::create_directories(dir_);
        const auto path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
        files_.push_back(path);
        return os;
    }

    std::filesystem::path reserve(const std::string& name) {
        std::filesystem::create_directories(dir_);
        files_.push_back(dir_ / name);
        return files_.back();
    }

    std::vector<std::filesystem::path> commit() {
        committed_ = true;
        return files_;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
    bool committed_ = false;
};

void write_json(OutputSet& out, const std::string& name, const json& doc) {
    auto os = out.open(name);
    os << doc.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed: " + name);
}

// ---------------------------------------------------------------------------
// Parallel execution

unsigned effective_jobs(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
    jobs = std::min<unsigned>(effective_jobs(jobs), static_cast<unsigned>(std::max<std::size_t>(count, 1)));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Twin-beam measurement pipeline

// Seed streams below a trace seed.
enum Stream : std::uint64_t { kSynth = 1, kChannel = 2, kDetectProbe = 3, kDetectRef = 4, kDetectFast = 5, kShot = 6 };

struct PointSetup {
    double offset_hz = 0.0;
    double gain = 1.0;
    bool vacuum = false;
    double beam_excess_db = 0.0;
    ChannelResponse response;
};

struct TraceOutcome {
    Spectrum diff;
    Spectrum shot;
    XcorrResult ref_band;
    XcorrResult fast_band;
    XcorrResult ref_full;
    XcorrResult fast_full;
};

struct PointOutcome {
    Spectrum snu_db;
    XcorrResult ref_band;
    XcorrResult fast_band;
    XcorrResult ref_full;
    XcorrResult fast_full;
};

PointSetup setup_point(const ScenarioConfig& cfg, double offset_hz) {
    PointSetup pt;
    pt.offset_hz = offset_hz;
    const double offset = 2.0 * kPi * offset_hz;
    pt.gain = intensity_gain(cfg.line, offset);
    const double excess = from_db(cfg.channel.excess_noise_db) - 1.0;
    pt.vacuum = cfg.line.g == 0.0 && excess == 0.0;
    if (!pt.vacuum) {
        pt.response = channel_response(cfg.line, offset, cfg.sampling.samples, cfg.sampling.rate_hz);
        // The technical noise is specified on the detected difference signal;
        // refer it back to the propagated beam before detection.
        const auto means = beam_means(cfg.source);
        const double eta = cfg.channel.eta;
        const double per_beam =
            excess * (means.probe + pt.gain * means.conjugate) / (eta * pt.gain * means.conjugate);
        pt.beam_excess_db = to_db(1.0 + per_beam);
    }
    return pt;
}

TraceOutcome run_trace(const ScenarioConfig& cfg, const SpectralTargets& targets, const PointSetup& pt,
                       std::uint64_t trace_seed, bool with_xcorr) {
    const auto& s = cfg.sampling;
    const auto means = beam_means(cfg.source);
    auto pair = synth_twin_traces(targets, s.samples, s.rate_hz, means.probe, means.conjugate,
                                  derive_seed(trace_seed, kSynth));
    const Trace fast = pt.vacuum ? pair.conjugate
                                 : apply_channel(pair.conjugate, pt.response, pt.beam_excess_db,
                                                 derive_seed(trace_seed, kChannel));
    const double eta = cfg.channel.eta;
    const Trace probe_d = apply_detection(pair.probe, eta, derive_seed(trace_seed, kDetectProbe));
    const Trace fast_d = apply_detection(fast, eta, derive_seed(trace_seed, kDetectFast));

    TraceOutcome out;
    out.diff = psd(difference(probe_d, fast_d), s.segment);
    const auto shot = shot_reference(probe_d.mean_flux(), fast_d.mean_flux(), s.samples, s.rate_hz,
                                     derive_seed(trace_seed, kShot));
    out.shot = psd(difference(shot.probe, shot.conjugate), s.segment);

    if (with_xcorr) {
        const Trace ref_d = apply_detection(pair.conjugate, eta, derive_seed(trace_seed, kDetectRef));
        {
            const Trace p = band_filter(probe_d, cfg.band.lo, cfg.band.hi);
            out.ref_band = cross_correlation(p, band_filter(ref_d, cfg.band.lo, cfg.band.hi), cfg.max_lag_s);
            out.fast_band = cross_correlation(p, band_filter(fast_d, cfg.band.lo, cfg.band.hi), cfg.max_lag_s);
        }
        {
            const Trace p = band_filter(probe_d, 0.0, cfg.full_band_hz);
            out.ref_full = cross_correlation(p, band_filter(ref_d, 0.0, cfg.full_band_hz), cfg.max_lag_s);
            out.fast_full = cross_correlation(p, band_filter(fast_d, 0.0, cfg.full_band_hz), cfg.max_lag_s);
        }
    }
    return out;
}

PointOutcome run_point(const ScenarioConfig& cfg, const SpectralTargets& targets, double offset_hz,
                       std::uint64_t point_seed, bool with_xcorr) {
    const PointSetup pt = setup_point(cfg, offset_hz);
    std::vector<TraceOutcome> traces(cfg.sampling.traces);
    parallel_for(traces.size(), cfg.jobs, [&](std::size_t k) {
        traces[k] = run_trace(cfg, targets, pt, derive_seed(point_seed, k), with_xcorr);
    });

    std::vector<Spectrum> diffs;
    std::vector<Spectrum> shots;
    diffs.reserve(traces.size());
    shots.reserve(traces.size());
    for (auto& t : traces) {
        diffs.push_back(std::move(t.diff));
        shots.push_back(std::move(t.shot));
    }
    PointOutcome out;
    out.snu_db = snu_normalize(average_spectra(diffs), average_spectra(shots));
    if (with_xcorr) {
        auto collect = [&](XcorrResult TraceOutcome::*member) {
            std::vector<XcorrResult> v;
            v.reserve(traces.size());
            for (auto& t : traces) v.push_back(std::move(t.*member));
            return average_correlations(v);
        };
        out.ref_band = collect(&TraceOutcome::ref_band);
        out.fast_band = collect(&TraceOutcome::fast_band);
        out.ref_full = collect(&TraceOutcome::ref_full);
        out.fast_full = collect(&TraceOutcome::fast_full);
    }
    return out;
}

SpectralTargets targets_for(const ScenarioConfig& cfg) {
    const auto grid = fft::real_frequencies(cfg.sampling.samples, cfg.sampling.rate_hz);
    return build_targets(cfg.source, grid, cfg.sampling.rate_hz);
}

json summary_base(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& point_seeds) {
    json j;
    j["scenario"] = to_string(cfg.scenario);
    j["preset"] = cfg.preset;
    j["version"] = version();
    j["fftw_version"] = fft::backend_version();
    j["master_seed"] = cfg.seed;
    j["config_hash"] = config_hash(cfg);
    j["point_seeds"] = point_seeds;
    j["traces_per_point"] = cfg.sampling.traces;
    j["samples_per_trace"] = cfg.sampling.samples;
    j["sample_rate_hz"] = cfg.sampling.rate_hz;
    return j;
}

std::vector<std::uint64_t> point_seeds(const ScenarioConfig& cfg, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = derive_seed(cfg.seed, i);
    return seeds;
}

double analytic_db(const ScenarioConfig& cfg, double gain) {
    return difference_noise_after_channel(cfg.source.gain1, gain, cfg.channel.eta, cfg.channel.excess_noise_db).db;
}

// ---------------------------------------------------------------------------
// Scenarios

RunResult run_line_scan(const ScenarioConfig& cfg) {
    OutputSet out(cfg.out_dir);
    const auto targets = targets_for(cfg);
    const auto seeds = point_seeds(cfg, cfg.detunings_hz.size());
    auto csv = out.open("line_scan.csv");
    csv << "detuning_hz,gain_db,predicted_noise_db,simulated_noise_db,group_index\n";
    for (std::size_t i = 0; i < cfg.detunings_hz.size(); ++i) {
        const double d_hz = cfg.detunings_hz[i];
        const double offset = 2.0 * kPi * d_hz;
        const double gain = intensity_gain(cfg.line, offset);
        const auto point = run_point(cfg, targets, d_hz, seeds[i], false);
        const double simulated = band_squeezing_db(point.snu_db, cfg.detection_band.lo, cfg.detection_band.hi);
        csv << fmt(d_hz) << ',' << fmt(to_db(gain)) << ',' << fmt(analytic_db(cfg, gain)) << ','
            << fmt(simulated) << ',' << fmt(group_index(cfg.line, offset)) << '\n';
    }
    csv.close();
    if (!csv) throw std::runtime_error("write failed: line_scan.csv");

    json summary = summary_base(cfg, seeds);
    summary["points"] = cfg.detunings_hz.size();
    summary["detection_band_hz"] = {cfg.detection_band.lo, cfg.detection_band.hi};
    summary["peak_gain_db"] = to_db(intensity_gain(cfg.line, 0.0));
    write_json(out, "summary.json", summary);
    return RunResult{out.commit(), 0};
}

RunResult run_delay_scan(const ScenarioConfig& cfg) {
    OutputSet out(cfg.out_dir);
    const auto targets = targets_for(cfg);
    const auto seeds = point_seeds(cfg, cfg.detunings_hz.size());
    auto csv = out.open("delay_scan.csv");
    csv << "detuning_hz,delay_s_fullband,delay_s_band,squeezing_db_band,analytic_squeezing_db\n";
    for (std::size_t i = 0; i < cfg.detunings_hz.size(); ++i) {
        const double d_hz = cfg.detunings_hz[i];
        const double gain = intensity_gain(cfg.line, 2.0 * kPi * d_hz);
        const auto point = run_point(cfg, targets, d_hz, seeds[i], true);
        const double full = peak_delay(point.fast_full, point.ref_full);
        const double band = peak_delay(point.fast_band, point.ref_band);
        const double sq = band_squeezing_db(point.snu_db, cfg.band.lo, cfg.band.hi);
        csv << fmt(d_hz) << ',' << fmt(full) << ',' << fmt(band) << ',' << fmt(sq) << ','
            << fmt(analytic_db(cfg, gain)) << '\n';
    }
    csv.close();
    if (!csv) throw std::runtime_error("write failed: delay_scan.csv");

    json summary = summary_base(cfg, seeds);
    summary["points"] = cfg.detunings_hz.size();
    summary["band_hz"] = {cfg.band.lo, cfg.band.hi};
    summary["full_band_hz"] = cfg.full_band_hz;
    write_json(out, "summary.json", summary);
    return RunResult{out.commit(), 0};
}

RunResult run_xcorr(const ScenarioConfig& cfg) {
    OutputSet out(cfg.out_dir);
    const auto targets = targets_for(cfg);
    const auto seeds = point_seeds(cfg, 1);
    const double d_hz = cfg.operating_offset_hz;
    const double offset = 2.0 * kPi * d_hz;
    const auto point = run_point(cfg, targets, d_hz, seeds[0], true);

    auto csv = out.open("xcorr.csv");
    csv << "lag_s,c_ref,c_fast\n";
    for (std::size_t j = 0; j < point.ref_band.lag.size(); ++j)
        csv << fmt(point.ref_band.lag[j]) << ',' << fmt(point.ref_band.values[j]) << ','
            << fmt(point.fast_band.values[j]) << '\n';
    csv.close();
    if (!csv) throw std::runtime_error("write failed: xcorr.csv");
    write_spectrum_csv(point.snu_db, out.reserve("spectrum.csv"));

    const double gain = intensity_gain(cfg.line, offset);
    json summary = summary_base(cfg, seeds);
    summary["operating_offset_hz"] = d_hz;
    summary["channel_gain"] = gain;
    summary["peak_advance_s"] = peak_advance(cfg.line, offset);
    summary["peak_lag_ref_s"] = point.ref_band.peak_lag;
    summary["peak_lag_fast_s"] = point.fast_band.peak_lag;
    summary["delay_s_band"] = peak_delay(point.fast_band, point.ref_band);
    summary["delay_s_fullband"] = peak_delay(point.fast_full, point.ref_full);
    summary["fwhm_ref_s"] = point.ref_band.fwhm;
    summary["fwhm_fast_s"] = point.fast_band.fwhm;
    summary["squeezing_db_band"] = band_squeezing_db(point.snu_db, cfg.band.lo, cfg.band.hi);
    summary["analytic_squeezing_db"] = analytic_db(cfg, gain);
    summary["band_hz"] = {cfg.band.lo, cfg.band.hi};
    write_json(out, "summary.json", summary);
    return RunResult{out.commit(), 0};
}

struct Check {
    std::string name;
    double value;
    double expected;
    double tolerance;
    bool pass() const { return std::abs(value - expected) <= tolerance; }
};

RunResult run_selftest(const ScenarioConfig& cfg) {
    OutputSet out(cfg.out_dir);
    std::vector<Check> checks;

    const GainLine ref = calibrate(7.5, 10e6, 0.025);
    checks.push_back({"calibrated_peak_gain_db", to_db(intensity_gain(ref, 0.0)), 7.5, 1e-9});
    {
        // Half-maximum of the dB profile by bisection.
        double lo = 0.0;
        double hi = 10.0 * ref.gamma;
        const double half = 0.5 * to_db(intensity_gain(ref, 0.0));
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (to_db(intensity_gain(ref, mid)) > half ? lo : hi) = mid;
        }
        checks.push_back({"calibrated_fwhm_hz", 2.0 * lo / (2.0 * kPi), 10e6, 10e6 * 1e-6});
    }
    const double g1 = gain_for_squeezing(-2.5);
    checks.push_back({"squeezing_round_trip_db", squeezing_db(g1), -2.5, 1e-12});
    checks.push_back({"difference_noise_reduction_snu", difference_noise_after_channel(g1, 1.0, 1.0, 0.0).snu,
                      1.0 / (2.0 * g1 - 1.0), 1e-12});
    {
        const double delta = 2.0 * ref.gamma;
        const double f = 100.0;
        const double slope = -std::arg(modulation_transfer(ref, delta, f)) / (2.0 * kPi * f);
        const double expected = peak_advance(ref, delta);
        checks.push_back({"transfer_phase_slope_s", slope, expected, 0.01 * std::abs(expected)});
    }

    // Short stochastic runs on reduced traces.
    const std::size_t n = std::size_t{1} << 18;
    const double fs = cfg.sampling.rate_hz;
    {
        TwinBeamSource src = cfg.source;
        src.gain1 = g1;
        const auto grid = fft::real_frequencies(n, fs);
        const auto targets = build_targets(src, grid, fs);
        std::vector<Spectrum> diffs;
        std::vector<Spectrum> shots;
        for (std::uint64_t k = 0; k < 16; ++k) {
            const std::uint64_t seed = derive_seed(cfg.seed, 1000 + k);
            const auto pair = synth_twin_traces(targets, n, fs, g1 * src.seed_flux, (g1 - 1.0) * src.seed_flux,
                                                derive_seed(seed, kSynth));
            diffs.push_back(psd(difference(pair.probe, pair.conjugate), 16384));
            const auto shot = shot_reference(pair.probe.mean_flux(), pair.conjugate.mean_flux(), n, fs,
                                             derive_seed(seed, kShot));
            shots.push_back(psd(difference(shot.probe, shot.conjugate), 16384));
        }
        const auto snu = snu_normalize(average_spectra(diffs), average_spectra(shots));
        checks.push_back({"simulated_band_squeezing_db", band_squeezing_db(snu, 1e5, 1e7), -2.5, 0.2});
    }
    {
        GaussianRng rng(derive_seed(cfg.seed, 2000));
        std::vector<double> x(n);
        for (double& v : x) v = rng.normal();
        const Trace white(fs, 1.0, std::move(x));
        const Trace base = band_filter(white, 1e5, 3e6);
        const double shift = 12e-9;
        auto spec = fft::forward_real(base.samples());
        for (std::size_t k = 0; k < spec.size(); ++k)
            spec[k] *= std::polar(1.0, -2.0 * kPi * (static_cast<double>(k) * fs / static_cast<double>(n)) * shift);
        const Trace moved(fs, 1.0, fft::inverse_real(spec, n));
        const double dt = peak_delay(cross_correlation(base, moved, 1e-6), cross_correlation(base, base, 1e-6));
        checks.push_back({"injected_delay_s", dt, shift, 0.2e-9});
    }

    int failed = 0;
    auto csv = out.open("selftest.csv");
    csv << "check,value,expected,tolerance,pass\n";
    for (const auto& c : checks) {
        csv << c.name << ',' << fmt(c.value) << ',' << fmt(c.expected) << ',' << fmt(c.tolerance) << ','
            << (c.pass() ? "true" : "false") << '\n';
        if (!c.pass()) ++failed;
    }
    csv.close();
    if (!csv) throw std::runtime_error("write failed: selftest.csv");

    json summary = summary_base(cfg, point_seeds(cfg, 0));
    summary["checks"] = checks.size();
    summary["failed"] = failed;
    write_json(out, "summary.json", summary);
    return RunResult{out.commit(), failed};
}

void validate_band(const Band& b, double nyquist, const char* field, bool allow_zero_lo) {
    const bool lo_ok = allow_zero_lo ? b.lo >= 0.0 : b.lo > 0.0;
    if (!lo_ok || !(b.hi > b.lo) || !(b.hi <= nyquist))
        throw ConfigError(std::string("field '") + field + "': need 0 < f_lo < f_hi <= Nyquist");
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

// ---------------------------------------------------------------------------

const char* to_string(ScenarioId id) {
    switch (id) {
    case ScenarioId::LineScan: return "line-scan";
    case ScenarioId::DelayScan: return "delay-scan";
    case ScenarioId::Xcorr: return "xcorr";
    case ScenarioId::SelfTest: return "selftest";
    }
    return "unknown";
}

std::optional<ScenarioId> parse_scenario(std::string_view name) {
    for (auto id : {ScenarioId::LineScan, ScenarioId::DelayScan, ScenarioId::Xcorr, ScenarioId::SelfTest})
        if (name == to_string(id)) return id;
    return std::nullopt;
}

const char* version() { return FASTLIGHT_VERSION; }

void ScenarioConfig::validate() const {
    try {
        line.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("field 'line': ") + e.what());
    }
    try {
        source.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("field 'source': ") + e.what());
    }
    if (!(channel.eta > 0.0 && channel.eta <= 1.0)) throw ConfigError("field 'channel.eta': must lie in (0, 1]");
    if (!(channel.excess_noise_db >= 0.0)) throw ConfigError("field 'channel.excess_noise_db': must be >= 0");
    if (!(sampling.rate_hz > 0.0)) throw ConfigError("field 'sampling.rate_hz': must be positive");
    if (sampling.samples < 1024 || !is_power_of_two(sampling.samples))
        throw ConfigError("field 'sampling.samples': must be a power of two >= 1024");
    if (sampling.segment < 16 || !is_power_of_two(sampling.segment) || sampling.segment > sampling.samples)
        throw ConfigError("field 'sampling.segment': must be a power of two no longer than the trace");
    if (sampling.traces == 0) throw ConfigError("field 'sampling.traces': must be at least 1");
    const double nyquist = 0.5 * sampling.rate_hz;
    validate_band(band, nyquist, "band_hz", false);
    validate_band(detection_band, nyquist, "detection_band_hz", false);
    if (!(full_band_hz > 0.0 && full_band_hz <= nyquist))
        throw ConfigError("field 'full_band_hz': must lie in (0, Nyquist]");
    const double duration = static_cast<double>(sampling.samples) / sampling.rate_hz;
    if (!(max_lag_s > 0.0 && max_lag_s < 0.25 * duration))
        throw ConfigError("field 'max_lag_s': must be positive and below a quarter of the trace duration");
    for (double d : detunings_hz)
        if (!std::isfinite(d)) throw ConfigError("field 'detunings_hz': values must be finite");
    if ((scenario == ScenarioId::LineScan || scenario == ScenarioId::DelayScan) && detunings_hz.empty())
        throw ConfigError("field 'detunings_hz': scans need at least one detuning");
}

GainLine line_for_advance(double fwhm_hz, double length_m, double target_advance_s, double offset_hz) {
    GainLine unit = calibrate(0.0, fwhm_hz, length_m);
    unit.g = 1.0;
    const double per_unit = peak_advance(unit, 2.0 * kPi * offset_hz);
    const double g = target_advance_s / per_unit;
    if (!(g >= 0.0) || !std::isfinite(g))
        throw InvalidParameter("line_for_advance: the requested sign of the advance is not reachable at this offset");
    unit.g = g;
    return unit;
}

std::vector<std::string> preset_names() { return {"fig2-line", "fig4-advance", "coherent-ref"}; }

ScenarioConfig preset_config(std::string_view name) {
    ScenarioConfig cfg;
    cfg.preset = std::string(name);
    cfg.source.gain1 = gain_for_squeezing(-2.5);
    cfg.channel.eta = 0.95;
    cfg.channel.excess_noise_db = 0.2;

    if (name == "fig2-line") {
        cfg.line = calibrate(7.5, 10e6, 0.025);
        cfg.operating_offset_hz = 15e6;
        for (int i = -12; i <= 12; ++i) cfg.detunings_hz.push_back(2.5e6 * i);
        return cfg;
    }
    if (name == "fig4-advance") {
        // A single Lorentzian advances by at most ln G / (2 gamma); a 12 ns
        // advance at carrier gain <= 1.25 needs a line of a few MHz width.
        cfg.operating_offset_hz = 4e6;
        cfg.line = line_for_advance(2e6, 0.025, -12e-9, cfg.operating_offset_hz);
        cfg.detunings_hz = {-6e6, -4e6, -2e6, 0.0, 2e6, 4e6, 6e6};
        return cfg;
    }
    if (name == "coherent-ref") {
        cfg.source.gain1 = 1.0;
        cfg.line = calibrate(0.0, 10e6, 0.025);
        cfg.channel.excess_noise_db = 0.0;
        cfg.operating_offset_hz = 0.0;
        cfg.detunings_hz = {0.0};
        return cfg;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

ScenarioConfig parse_config(std::string_view json_text, std::string_view origin) {
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(origin) + ":" + std::to_string(line_of_offset(json_text, e.byte)) +
                          ": JSON parse error: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(std::string(origin) + ": top level must be a JSON object");

    ScenarioConfig cfg = preset_config("fig2-line");
    cfg.preset = "custom";
    std::string preset;
    if (read_string(doc, "", "preset", preset)) cfg = preset_config(preset);
    try {
        apply_overrides(doc, cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(origin) + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string(origin) + ": " + e.what());
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path_or_preset) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), path_or_preset) != names.end()) return preset_config(path_or_preset);
    std::ifstream is(path_or_preset);
    if (!is) throw ConfigError("cannot open config '" + path_or_preset + "' (and it is not a preset name)");
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str(), path_or_preset);
}

std::string canonical_json(const ScenarioConfig& c) {
    json j;
    j["scenario"] = to_string(c.scenario);
    j["preset"] = c.preset;
    j["line"] = {{"g", c.line.g},
                 {"gamma_rad_s", c.line.gamma},
                 {"omega0_rad_s", c.line.omega0},
                 {"omega_carrier_rad_s", c.line.omega_carrier},
                 {"length_m", c.line.length}};
    j["operating_offset_hz"] = c.operating_offset_hz;
    j["source"] = {{"gain1", c.source.gain1},
                   {"seed_flux", c.source.seed_flux},
                   {"pair_bandwidth_hz", c.source.pair_bandwidth},
                   {"rolloff_hz", c.source.rolloff}};
    j["channel"] = {{"eta", c.channel.eta}, {"excess_noise_db", c.channel.excess_noise_db}};
    j["sampling"] = {{"rate_hz", c.sampling.rate_hz},
                     {"samples", c.sampling.samples},
                     {"traces", c.sampling.traces},
                     {"segment", c.sampling.segment}};
    j["detunings_hz"] = c.detunings_hz;
    j["band_hz"] = {c.band.lo, c.band.hi};
    j["full_band_hz"] = c.full_band_hz;
    j["detection_band_hz"] = {c.detection_band.lo, c.detection_band.hi};
    j["max_lag_s"] = c.max_lag_s;
    j["seed"] = c.seed;
    return j.dump();
}

std::string config_hash(const ScenarioConfig& config) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json(config))));
    return buf;
}

BeamMeans beam_means(const TwinBeamSource& source) {
    const double n0 = source.seed_flux;
    if (source.gain1 == 1.0) return {n0, n0};
    return {source.gain1 * n0, (source.gain1 - 1.0) * n0};
}

RunResult run_scenario(const ScenarioConfig& config) {
    config.validate();
    switch (config.scenario) {
    case ScenarioId::LineScan: return run_line_scan(config);
    case ScenarioId::DelayScan: return run_delay_scan(config);
    case ScenarioId::Xcorr: return run_xcorr(config);
    case ScenarioId::SelfTest: return run_selftest(config);
    }
    throw ConfigError("unknown scenario");
}

} // namespace fastlight
