#include "fastlight/trace.hpp"

#include "fastlight/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fastlight {

namespace {

constexpr std::array<char, 4> kMagic{'F', 'L', 'T', 'R'};
constexpr std::uint32_t kBinaryVersion = 1;

template <typename U>
void put_le(std::ostream& os, U value) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i)
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xffU);
    os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
    std::array<unsigned char, sizeof(U)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is) throw std::runtime_error("trace: truncated binary file");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Trace::Trace(double sample_rate, double mean_flux, std::vector<double> samples, std::string seed_tag)
    : sample_rate_(sample_rate), mean_flux_(mean_flux), samples_(std::move(samples)),
      seed_tag_(std::move(seed_tag)) {
    if (!(sample_rate_ > 0.0)) throw InvalidParameter("Trace: sample rate must be positive");
    if (!(mean_flux_ > 0.0)) throw InvalidParameter("Trace: mean flux must be positive");
    if (samples_.size() < 2 || !is_power_of_two(samples_.size()))
        throw InvalidParameter("Trace: sample count must be a power of two, got " +
                               std::to_string(samples_.size()));
}

void require_compatible(const Trace& a, const Trace& b) {
    if (a.size() != b.size())
        throw IncompatibleTraces("traces differ in length: " + std::to_string(a.size()) + " vs " +
                                 std::to_string(b.size()));
    if (a.sample_rate() != b.sample_rate()) throw IncompatibleTraces("traces differ in sample rate");
}

Trace difference(const Trace& a, const Trace& b) {
    require_compatible(a, b);
    std::vector<double> d(a.size());
    const auto xa = a.samples();
    const auto xb = b.samples();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = xa[i] - xb[i];
    return Trace(a.sample_rate(), a.mean_flux() + b.mean_flux(), std::move(d),
                 "(" + a.seed_tag() + ")-(" + b.seed_tag() + ")");
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << "# sample_rate_hz=" << format_double(trace.sample_rate()) << '\n';
    os << "# mean_flux=" << format_double(trace.mean_flux()) << '\n';
    os << "index,value\n";
    const auto x = trace.samples();
    for (std::size_t i = 0; i < x.size(); ++i) os << i << ',' << format_double(x[i]) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

Trace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    double rate = 0.0;
    double mean = 0.0;
    bool have_rate = false;
    bool have_mean = false;
    bool have_header = false;
    std::vector<double> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(1, eq - 1);
            const std::string value = line.substr(eq + 1);
            try {
                if (key.find("sample_rate_hz") != std::string::npos) {
                    rate = std::stod(value);
                    have_rate = true;
                } else if (key.find("mean_flux") != std::string::npos) {
                    mean = std::stod(value);
                    have_mean = true;
                }
            } catch (const std::exception&) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad metadata value");
            }
            continue;
        }
        if (!have_header) {
            if (line.rfind("index,value", 0) != 0)
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": expected header 'index,value'");
            have_header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": missing ','");
        try {
            samples.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad sample value");
        }
    }
    if (!have_rate || !have_mean)
        throw std::runtime_error(path.string() + ": missing sample_rate_hz or mean_flux metadata");
    return Trace(rate, mean, std::move(samples), "csv:" + path.filename().string());
}

void write_trace_binary(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(kMagic.data(), kMagic.size());
    put_le(os, kBinaryVersion);
    put_f64(os, trace.sample_rate());
    put_f64(os, trace.mean_flux());
    put_le(os, static_cast<std::uint64_t>(trace.size()));
    for (double v : trace.samples()) put_f64(os, v);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

Trace read_trace_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw std::runtime_error(path.string() + ": not a trace file (bad magic)");
    const auto version = get_le<std::uint32_t>(is);
    if (version != kBinaryVersion)
        throw std::runtime_error(path.string() + ": unsupported trace version " + std::to_string(version));
    const double rate = get_f64(is);
    const double mean = get_f64(is);
    const auto count = get_le<std::uint64_t>(is);
    if (count > (std::uint64_t{1} << 34)) throw std::runtime_error(path.string() + ": implausible sample count");
    std::vector<double> samples(static_cast<std::size_t>(count));
    for (auto& v : samples) v = get_f64(is);
    return Trace(rate, mean, std::move(samples), "bin:" + path.filename().string());
}

} // namespace fastlight
