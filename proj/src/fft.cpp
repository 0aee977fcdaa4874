#include "gearmr/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace gearmr {

namespace {

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::size_t smooth_fft_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t c = n;; ++c) {
        std::size_t r = c;
        for (std::size_t p : {2u, 3u, 5u, 7u})
            while (r % p == 0) r /= p;
        if (r == 1) return c;
    }
}

RealFft::RealFft(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("RealFft: zero length");
    real_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(n_ / 2 + 1);
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_,
                                static_cast<fftw_complex*>(spec_), FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), static_cast<fftw_complex*>(spec_),
                                real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& o) noexcept
    : n_(o.n_), real_(o.real_), spec_(o.spec_), fwd_(o.fwd_), inv_(o.inv_) {
    o.real_ = nullptr;
    o.spec_ = nullptr;
    o.fwd_ = nullptr;
    o.inv_ = nullptr;
}

RealFft& RealFft::operator=(RealFft&& o) noexcept {
    if (this != &o) {
        release();
        n_ = o.n_;
        std::swap(real_, o.real_);
        std::swap(spec_, o.spec_);
        std::swap(fwd_, o.fwd_);
        std::swap(inv_, o.inv_);
    }
    return *this;
}

void RealFft::release() noexcept {
    if (fwd_ || inv_) {
        std::lock_guard lock(planner_mutex());
        if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
        if (inv_) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    }
    if (real_) fftw_free(real_);
    if (spec_) fftw_free(spec_);
    real_ = nullptr;
    spec_ = nullptr;
    fwd_ = nullptr;
    inv_ = nullptr;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
    const std::size_t k = std::min(in.size(), n_);
    std::copy_n(in.data(), k, real_);
    std::fill(real_ + k, real_ + n_, 0.0);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    std::memcpy(out.data(), spec_, sizeof(fftw_complex) * (n_ / 2 + 1));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    std::memcpy(spec_, in.data(), sizeof(fftw_complex) * (n_ / 2 + 1));
    fftw_execute(static_cast<fftw_plan>(inv_));
    std::copy_n(real_, std::min(out.size(), n_), out.data());
}

ComplexFft::ComplexFft(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("ComplexFft: zero length");
    in_ = fftw_alloc_complex(n_);
    out_ = fftw_alloc_complex(n_);
    std::lock_guard lock(planner_mutex());
    auto* a = static_cast<fftw_complex*>(in_);
    auto* b = static_cast<fftw_complex*>(out_);
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n_), a, b, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(static_cast<int>(n_), a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft() {
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
        fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    }
    fftw_free(in_);
    fftw_free(out_);
}

void ComplexFft::forward(std::span<const std::complex<double>> in,
                         std::span<std::complex<double>> out) {
    std::memcpy(in_, in.data(), sizeof(fftw_complex) * n_);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    std::memcpy(out.data(), out_, sizeof(fftw_complex) * n_);
}

void ComplexFft::inverse(std::span<const std::complex<double>> in,
                         std::span<std::complex<double>> out) {
    std::memcpy(in_, in.data(), sizeof(fftw_complex) * n_);
    fftw_execute(static_cast<fftw_plan>(inv_));
    std::memcpy(out.data(), out_, sizeof(fftw_complex) * n_);
}

}  // namespace gearmr
