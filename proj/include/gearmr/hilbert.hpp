#pragma once

#include <complex>
#include <vector>

#include "gearmr/timeseries.hpp"

namespace gearmr {

struct Envelope {
    std::vector<double> amplitude;  // |z|
    std::vector<double> phase;      // unwrapped arg z, radians
    double dt = 1.0;
    double t0 = 0.0;                // time of the first sample

    /// Forward difference of the phase divided by dt (size - 1 entries).
    std::vector<double> instantaneous_frequency() const;
};

/// Discrete analytic signal by the frequency-domain method. Requires at least
/// four samples.
std::vector<std::complex<double>> analytic_signal(const TimeSeries& x);

/// Imaginary part of the analytic signal.
std::vector<double> hilbert_transform(const TimeSeries& x);

Envelope envelope(const TimeSeries& x);

/// Add multiples of 2 pi wherever consecutive values jump by more than pi.
std::vector<double> unwrap(const std::vector<double>& phase);

}  // namespace gearmr
