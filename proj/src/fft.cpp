#include "fastlight/fft.hpp"

#include "fastlight/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

namespace fastlight::fft {

namespace {

enum class Kind { R2C, C2R, Forward, Backward };

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(Kind kind, std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find({kind, n});
        if (it != plans_.end()) return it->second;

        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        auto* real_buf = fftw_alloc_real(n);
        auto* cplx_buf = fftw_alloc_complex(n);
        fftw_plan plan = nullptr;
        switch (kind) {
        case Kind::R2C: plan = fftw_plan_dft_r2c_1d(len, real_buf, cplx_buf, flags); break;
        case Kind::C2R: plan = fftw_plan_dft_c2r_1d(len, cplx_buf, real_buf, flags); break;
        case Kind::Forward: plan = fftw_plan_dft_1d(len, cplx_buf, cplx_buf, FFTW_FORWARD, flags); break;
        case Kind::Backward: plan = fftw_plan_dft_1d(len, cplx_buf, cplx_buf, FFTW_BACKWARD, flags); break;
        }
        fftw_free(real_buf);
        fftw_free(cplx_buf);
        if (plan == nullptr) throw std::runtime_error("fft: FFTW failed to create a plan");
        plans_.emplace(std::make_pair(kind, n), plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<Kind, std::size_t>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void require_length(std::size_t n) {
    if (n < 2) throw InvalidParameter("fft: transform length must be at least 2");
}

} // namespace

std::vector<cplx> forward_real(std::span<const double> x) {
    require_length(x.size());
    // r2c plans are out-of-place and leave the input untouched, but the API takes
    // a non-const pointer.
    std::vector<double> in(x.begin(), x.end());
    std::vector<cplx> out(x.size() / 2 + 1);
    fftw_execute_dft_r2c(cache().get(Kind::R2C, x.size()), in.data(), as_fftw(out.data()));
    return out;
}

std::vector<double> inverse_real(std::span<const cplx> spectrum, std::size_t n) {
    require_length(n);
    if (spectrum.size() != n / 2 + 1)
        throw InvalidParameter("fft: half spectrum must have N/2 + 1 bins");
    // c2r destroys its input.
    std::vector<cplx> in(spectrum.begin(), spectrum.end());
    in.front().imag(0.0);
    if (n % 2 == 0) in.back().imag(0.0);
    std::vector<double> out(n);
    fftw_execute_dft_c2r(cache().get(Kind::C2R, n), as_fftw(in.data()), out.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= scale;
    return out;
}

std::vector<cplx> forward(std::span<const cplx> x) {
    require_length(x.size());
    std::vector<cplx> out(x.begin(), x.end());
    fftw_execute_dft(cache().get(Kind::Forward, x.size()), as_fftw(out.data()), as_fftw(out.data()));
    return out;
}

std::vector<cplx> inverse(std::span<const cplx> x) {
    require_length(x.size());
    std::vector<cplx> out(x.begin(), x.end());
    fftw_execute_dft(cache().get(Kind::Backward, x.size()), as_fftw(out.data()), as_fftw(out.data()));
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : out) v *= scale;
    return out;
}

std::vector<double> real_frequencies(std::size_t n, double sample_rate) {
    std::vector<double> f(n / 2 + 1);
    const double df = sample_rate / static_cast<double>(n);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = static_cast<double>(k) * df;
    return f;
}

const char* backend_version() { return fftw_version; }

} // namespace fastlight::fft
