// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "kcf/fft2d.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "core/error.hpp"

namespace iatrack::kcf {
namespace {

// FFTW plan creation is not thread safe; execution via the new-array API is.
// Plans are cached per (h, w, sign) and executed on per-call fftw buffers,
// which share the alignment of the buffers the plans were created with.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int h, int w, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        const Key key{h, w, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(h) * w);
        fftw_plan plan = fftw_plan_dft_2d(h, w, scratch, scratch, sign, FFTW_ESTIMATE);
        fftw_free(scratch);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    using Key = std::tuple<int, int, int>;
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
        if (ptr == nullptr) throw StateError("fftw allocation failed");
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* ptr;
};

Spectrum run(const std::complex<double>* in, int h, int w, int sign) {
    if (h < 1 || w < 1) throw StateError("fft dimensions must be >= 1");
    const std::size_t n = static_cast<std::size_t>(h) * w;
    FftwBuffer buf(n);
    for (std::size_t i = 0; i < n; ++i) {
        buf.ptr[i][0] = in[i].real();
        buf.ptr[i][1] = in[i].imag();
    }
    fftw_execute_dft(PlanCache::instance().get(h, w, sign), buf.ptr, buf.ptr);
    Spectrum out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {buf.ptr[i][0], buf.ptr[i][1]};
    return out;
}

}  // namespace

Spectrum fft2(const double* data, int h, int w) {
    const std::size_t n = static_cast<std::size_t>(h) * w;
    Spectrum in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = {data[i], 0.0};
    return run(in.data(), h, w, FFTW_FORWARD);
}

Spectrum ifft2(const Spectrum& spec, int h, int w) {
    Spectrum out = run(spec.data(), h, w, FFTW_BACKWARD);
    const double scale = 1.0 / (static_cast<double>(h) * w);
    for (auto& v : out) v *= scale;
    return out;
}

std::vector<double> ifft2_real(const Spectrum& spec, int h, int w) {
    const Spectrum full = ifft2(spec, h, w);
    std::vector<double> out(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) out[i] = full[i].real();
    return out;
}

}  // namespace iatrack::kcf
