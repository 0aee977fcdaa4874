#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace gearmr {

/// Smallest n' >= n whose prime factors are all in {2, 3, 5, 7}.
std::size_t smooth_fft_size(std::size_t n);

/// Real-to-complex transform of fixed length backed by FFTW.
///
/// Plans are created with FFTW_ESTIMATE so that repeated runs execute the
/// same codelets and produce bitwise-identical output. An instance owns its
/// buffers and must not be shared between threads; separate instances may
/// run concurrently.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;

    std::size_t size() const noexcept { return n_; }
    std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

    /// `in` may be shorter than size(); the remainder is zero-padded.
    void forward(std::span<const double> in, std::span<std::complex<double>> out);
    /// Unnormalised inverse (result is size() times the true inverse).
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
    void release() noexcept;

    std::size_t n_ = 0;
    double* real_ = nullptr;
    void* spec_ = nullptr;
    void* fwd_ = nullptr;
    void* inv_ = nullptr;
};

/// Complex-to-complex transform of fixed length; same threading rules as RealFft.
class ComplexFft {
public:
    explicit ComplexFft(std::size_t n);
    ~ComplexFft();
    ComplexFft(const ComplexFft&) = delete;
    ComplexFft& operator=(const ComplexFft&) = delete;

    std::size_t size() const noexcept { return n_; }
    void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
    /// Unnormalised inverse.
    void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

private:
    std::size_t n_ = 0;
    void* in_ = nullptr;
    void* out_ = nullptr;
    void* fwd_ = nullptr;
    void* inv_ = nullptr;
};

}  // namespace gearmr
