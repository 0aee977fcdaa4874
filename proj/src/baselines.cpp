#include "gearmr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "gearmr/error.hpp"
#include "gearmr/fft.hpp"
#include "gearmr/io.hpp"

namespace gearmr {

Spectrum fft_spectrum(const TimeSeries& x, double omega_mesh) {
    const std::size_t n = x.size();
    if (n < 8) fail(ErrorKind::InsufficientSamples, "spectrum needs at least 8 samples");
    RealFft fft(n);
    std::vector<std::complex<double>> spec(fft.spectrum_size());
    fft.forward(x.samples(), spec);
    Spectrum s;
    s.length = n;
    s.dt = x.dt();
    s.freqs.resize(spec.size());
    s.mags.resize(spec.size());
    const double step = 2.0 * std::numbers::pi / (static_cast<double>(n) * x.dt());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        s.freqs[k] = static_cast<double>(k) * step;
        s.mags[k] = std::abs(spec[k]);
    }
    for (int j = 1; j <= 10; ++j) s.markers.emplace_back(j, j * omega_mesh);
    return s;
}

double spectrum_energy(const Spectrum& s) {
    double e = 0.0;
    for (std::size_t k = 0; k < s.mags.size(); ++k) {
        const bool self_conjugate = k == 0 || (s.length % 2 == 0 && k == s.length / 2);
        e += (self_conjugate ? 1.0 : 2.0) * s.mags[k] * s.mags[k];
    }
    return e * s.dt / static_cast<double>(s.length);
}

std::size_t nearest_bin(const Spectrum& s, double w) {
    const double step = 2.0 * std::numbers::pi / (static_cast<double>(s.length) * s.dt);
    const auto k = static_cast<std::size_t>(std::max(0.0, std::round(w / step)));
    return std::min(k, s.freqs.size() - 1);
}

std::vector<double> marker_magnitudes(const Spectrum& s) {
    std::vector<double> out;
    for (const auto& [j, w] : s.markers) out.push_back(s.mags[nearest_bin(s, w)]);
    return out;
}

TimeSeries tsa(const TimeSeries& x, double period, std::optional<std::size_t> count) {
    const double dt = x.dt();
    if (!(period >= 2.0 * dt)) fail(ErrorKind::InvalidArgument, "TSA period must be at least 2 dt");
    const double duration = x.duration();
    const std::size_t n_periods =
        count ? *count : static_cast<std::size_t>(std::floor(duration / period * (1.0 + 1e-12)));
    if (n_periods == 0) fail(ErrorKind::InvalidArgument, "TSA needs at least one period (N >= 1)");
    if (static_cast<double>(n_periods) * period > duration * (1.0 + 1e-12))
        fail(ErrorKind::InvalidArgument, "TSA: N * T_r = " +
                                             std::to_string(static_cast<double>(n_periods) * period) +
                                             " exceeds the signal duration " + std::to_string(duration));
    const auto len = static_cast<std::size_t>(std::llround(period / dt));
    const double last = static_cast<double>(x.size() - 1);
    std::vector<double> out(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
        double acc = 0.0;
        for (std::size_t p = 0; p < n_periods; ++p) {
            const double pos =
                std::min(last, static_cast<double>(i) + static_cast<double>(p) * period / dt);
            const auto k = std::min(static_cast<std::size_t>(pos), x.size() - 2);
            const double f = pos - static_cast<double>(k);
            acc += x[k] + f * (x[k + 1] - x[k]);
        }
        out[i] = acc / static_cast<double>(n_periods);
    }
    return TimeSeries(std::move(out), dt, x.t0(), x.unit_label());
}

namespace {

struct Extrema {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;
};

Extrema find_extrema(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    Extrema e;
    for (std::size_t i = std::max<std::size_t>(lo, 1); i + 1 < hi && i + 1 < x.size(); ++i) {
        const double before = x[i] - x[i - 1];
        const double after = x[i + 1] - x[i];
        if (before > 0.0 && after <= 0.0) e.maxima.push_back(i);
        else if (before < 0.0 && after >= 0.0) e.minima.push_back(i);
    }
    return e;
}

// Natural cubic spline through (xs, ys), evaluated at 0, 1, ..., n-1.
std::vector<double> natural_spline(const std::vector<double>& xs, const std::vector<double>& ys,
                                   std::size_t n) {
    const std::size_t m = xs.size();
    std::vector<double> second(m, 0.0);
    if (m > 2) {
        std::vector<double> diag(m - 2), rhs(m - 2), upper(m - 2);
        for (std::size_t i = 1; i + 1 < m; ++i) {
            const double h0 = xs[i] - xs[i - 1];
            const double h1 = xs[i + 1] - xs[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < m - 2; ++i) {
            const double lower = xs[i + 1] - xs[i];
            const double w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        second[m - 2] = rhs[m - 3] / diag[m - 3];
        for (std::size_t i = m - 3; i-- > 0;)
            second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
    }
    std::vector<double> out(n);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k);
        while (seg + 2 < m && t > xs[seg + 1]) ++seg;
        const double h = xs[seg + 1] - xs[seg];
        const double a = (xs[seg + 1] - t) / h;
        const double b = (t - xs[seg]) / h;
        out[k] = a * ys[seg] + b * ys[seg + 1] +
                 ((a * a * a - a) * second[seg] + (b * b * b - b) * second[seg + 1]) * h * h / 6.0;
    }
    return out;
}

// Envelope through the extrema, with the two outermost extrema mirrored
// about each end sample.
std::vector<double> envelope_through(const std::vector<double>& x, const std::vector<std::size_t>& idx) {
    const std::size_t n = x.size();
    const double end = static_cast<double>(n - 1);
    std::vector<double> xs, ys;
    const std::size_t k = std::min<std::size_t>(2, idx.size());
    for (std::size_t i = k; i-- > 0;) {
        xs.push_back(-static_cast<double>(idx[i]));
        ys.push_back(x[idx[i]]);
    }
    for (std::size_t i : idx) {
        xs.push_back(static_cast<double>(i));
        ys.push_back(x[i]);
    }
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = idx[idx.size() - 1 - i];
        xs.push_back(2.0 * end - static_cast<double>(j));
        ys.push_back(x[j]);
    }
    return natural_spline(xs, ys, n);
}

double peak_to_peak(const std::vector<double>& x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

}  // namespace

std::size_t count_extrema(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    const auto e = find_extrema(x, lo, hi);
    return e.maxima.size() + e.minima.size();
}

std::size_t count_zero_crossings(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    std::size_t c = 0;
    for (std::size_t i = lo + 1; i < hi && i < x.size(); ++i)
        if ((x[i - 1] < 0.0 && x[i] >= 0.0) || (x[i - 1] > 0.0 && x[i] <= 0.0)) ++c;
    return c;
}

namespace {

// Extrema and zero crossings differ by at most one.
bool is_imf(const std::vector<double>& h) {
    const auto e = static_cast<long>(count_extrema(h, 0, h.size()));
    const auto z = static_cast<long>(count_zero_crossings(h, 0, h.size()));
    return std::abs(e - z) <= 1;
}

}  // namespace

ImfSet emd(const TimeSeries& x, const EmdOptions& options) {
    const std::size_t n = x.size();
    if (n < 16) fail(ErrorKind::InsufficientSamples, "EMD needs at least 16 samples");
    if (!(options.sd_threshold > 0.0) || options.max_sifts == 0)
        fail(ErrorKind::InvalidArgument, "EMD needs sd_threshold > 0 and max_sifts >= 1");
    ImfSet out;
    std::vector<double> r(x.samples().begin(), x.samples().end());
    const double input_range = peak_to_peak(r);
    while (out.imfs.size() < options.max_imfs) {
        const auto ext = find_extrema(r, 0, n);
        if (ext.maxima.size() + ext.minima.size() < 4 || ext.maxima.empty() || ext.minima.empty()) break;
        if (peak_to_peak(r) <= options.range_fraction * input_range) break;
        std::vector<double> h = r;
        std::size_t sifts = 0;
        for (;;) {
            const auto e = find_extrema(h, 0, n);
            if (e.maxima.empty() || e.minima.empty()) break;
            const auto upper = envelope_through(h, e.maxima);
            const auto lower = envelope_through(h, e.minima);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double mean = 0.5 * (upper[i] + lower[i]);
                num += mean * mean;
                den += h[i] * h[i];
                h[i] -= mean;
            }
            ++sifts;
            const double sd = den > 0.0 ? num / den : 0.0;
            if (sifts >= options.max_sifts) break;
            if (sd < options.sd_threshold && is_imf(h)) break;
        }
        for (std::size_t i = 0; i < n; ++i) r[i] -= h[i];
        out.imfs.emplace_back(std::move(h), x.dt(), x.t0(), x.unit_label());
        out.sift_counts.push_back(sifts);
    }
    out.residue.emplace(std::move(r), x.dt(), x.t0(), x.unit_label());
    return out;
}

std::string spectrum_csv(const Spectrum& s) {
    std::ostringstream out;
    out << "omega,magnitude\n";
    for (std::size_t k = 0; k < s.freqs.size(); ++k)
        out << format_double(s.freqs[k]) << ',' << format_double(s.mags[k]) << '\n';
    return out.str();
}

std::string series_csv(const TimeSeries& s, const std::string& column) {
    std::ostringstream out;
    out << "time," << column << '\n';
    for (std::size_t k = 0; k < s.size(); ++k)
        out << format_double(s.time_at(k)) << ',' << format_double(s[k]) << '\n';
    return out.str();
}

std::string imfs_csv(const ImfSet& set) {
    std::ostringstream out;
    out << "time";
    for (std::size_t j = 0; j < set.imfs.size(); ++j) out << ",imf" << j + 1;
    out << ",residue\n";
    const TimeSeries& ref = *set.residue;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        out << format_double(ref.time_at(k));
        for (const auto& imf : set.imfs) out << ',' << format_double(imf[k]);
        out << ',' << format_double(ref[k]) << '\n';
    }
    return out.str();
}

}  // namespace gearmr
