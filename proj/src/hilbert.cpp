#include "gearmr/hilbert.hpp"

#include <cmath>
#include <numbers>

#include "gearmr/error.hpp"
#include "gearmr/fft.hpp"

namespace gearmr {

std::vector<std::complex<double>> analytic_signal(const TimeSeries& x) {
    const std::size_t n = x.size();
    if (n < 4) fail(ErrorKind::InsufficientSamples, "analytic signal needs at least 4 samples");
    ComplexFft fft(n);
    std::vector<std::complex<double>> buf(x.samples().begin(), x.samples().end());
    std::vector<std::complex<double>> bins(n);
    fft.forward(buf, bins);
    // Bins 1..ceil(n/2)-1 are strictly positive; for even n bin n/2 is Nyquist.
    const std::size_t half = n / 2;
    const std::size_t last_positive = (n % 2 == 0) ? half - 1 : half;
    for (std::size_t k = 1; k <= last_positive; ++k) bins[k] *= 2.0;
    for (std::size_t k = last_positive + 1 + (n % 2 == 0 ? 1 : 0); k < n; ++k) bins[k] = 0.0;
    fft.inverse(bins, buf);
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& z : buf) z *= scale;
    return buf;
}

std::vector<double> hilbert_transform(const TimeSeries& x) {
    const auto z = analytic_signal(x);
    std::vector<double> h(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) h[i] = z[i].imag();
    return h;
}

std::vector<double> unwrap(const std::vector<double>& phase) {
    std::vector<double> out(phase.size());
    if (phase.empty()) return out;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double offset = 0.0;
    out[0] = phase[0];
    for (std::size_t i = 1; i < phase.size(); ++i) {
        const double jump = phase[i] - phase[i - 1];
        if (jump > std::numbers::pi)
            offset -= two_pi * std::ceil((jump - std::numbers::pi) / two_pi);
        else if (jump < -std::numbers::pi)
            offset += two_pi * std::ceil((-jump - std::numbers::pi) / two_pi);
        out[i] = phase[i] + offset;
    }
    return out;
}

Envelope envelope(const TimeSeries& x) {
    const auto z = analytic_signal(x);
    Envelope env;
    env.dt = x.dt();
    env.t0 = x.t0();
    env.amplitude.resize(z.size());
    std::vector<double> wrapped(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        env.amplitude[i] = std::abs(z[i]);
        wrapped[i] = std::arg(z[i]);
    }
    env.phase = unwrap(wrapped);
    return env;
}

std::vector<double> Envelope::instantaneous_frequency() const {
    std::vector<double> f;
    if (phase.size() < 2) return f;
    f.resize(phase.size() - 1);
    for (std::size_t i = 0; i + 1 < phase.size(); ++i) f[i] = (phase[i + 1] - phase[i]) / dt;
    return f;
}

}  // namespace gearmr
