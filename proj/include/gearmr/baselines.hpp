#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gearmr/timeseries.hpp"

namespace gearmr {

struct Spectrum {
    std::vector<double> freqs;  // angular frequency, rad per unit time
    std::vector<double> mags;   // |X_k|, unnormalised DFT
    std::vector<std::pair<int, double>> markers;  // (j, j * omega_mesh)
    std::size_t length = 0;     // samples transformed
    double dt = 1.0;
};

/// One-sided magnitude spectrum without windowing; markers at the first ten
/// mesh harmonics.
Spectrum fft_spectrum(const TimeSeries& x, double omega_mesh = 0.5);

/// (dt / N) * sum_k w_k |X_k|^2 with one-sided weights; equals sum x^2 dt.
double spectrum_energy(const Spectrum& s);

/// Index of the bin nearest to angular frequency w.
std::size_t nearest_bin(const Spectrum& s, double w);

/// Magnitudes at the bins nearest to each marker.
std::vector<double> marker_magnitudes(const Spectrum& s);

/// Time-synchronous average over N periods of length T_r, one period long
/// (round(T_r / dt) samples). N defaults to floor(duration / T_r).
TimeSeries tsa(const TimeSeries& x, double period, std::optional<std::size_t> count = std::nullopt);

struct EmdOptions {
    double sd_threshold = 0.25;
    std::size_t max_sifts = 10;
    std::size_t max_imfs = 12;
    /// Stop extracting once the residue's peak-to-peak range falls to this
    /// fraction of the input's.
    double range_fraction = 1e-3;
};

struct ImfSet {
    std::vector<TimeSeries> imfs;
    std::optional<TimeSeries> residue;
    std::vector<std::size_t> sift_counts;
};

/// Empirical mode decomposition by cubic-spline sifting with mirrored ends.
ImfSet emd(const TimeSeries& x, const EmdOptions& options = {});

/// Local extrema count (strict neighbours, plateaus counted once).
std::size_t count_extrema(const std::vector<double>& x, std::size_t lo, std::size_t hi);
std::size_t count_zero_crossings(const std::vector<double>& x, std::size_t lo, std::size_t hi);

std::string spectrum_csv(const Spectrum& s);
std::string series_csv(const TimeSeries& s, const std::string& column = "value");
std::string imfs_csv(const ImfSet& set);

}  // namespace gearmr
