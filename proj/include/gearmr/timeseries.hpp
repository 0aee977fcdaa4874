#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gearmr {

/// Uniformly sampled scalar signal. Immutable after construction.
class TimeSeries {
public:
    /// Throws Error(InvalidArgument) unless samples.size() >= 2, dt > 0 and
    /// every sample is finite.
    TimeSeries(std::vector<double> samples, double dt, double t0 = 0.0,
               std::string unit_label = {});

    std::span<const double> samples() const noexcept { return samples_; }
    double operator[](std::size_t i) const noexcept { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }
    double dt() const noexcept { return dt_; }
    double t0() const noexcept { return t0_; }
    const std::string& unit_label() const noexcept { return unit_label_; }

    double time_at(std::size_t i) const noexcept {
        return t0_ + static_cast<double>(i) * dt_;
    }
    double duration() const noexcept {
        return static_cast<double>(samples_.size() - 1) * dt_;
    }

private:
    std::vector<double> samples_;
    double dt_;
    double t0_;
    std::string unit_label_;
};

/// Read a one- or two-column CSV signal (`value` or `time,value`).
///
/// With a time column the sample interval is inferred and every gap must
/// match the first one within a relative tolerance of 1e-6. If dt_override
/// is also given it must agree with the inferred step. One-column files
/// require dt_override.
TimeSeries load_csv(const std::filesystem::path& path,
                    std::optional<double> dt_override = std::nullopt);

/// Parse CSV text; same rules as load_csv. `source` names the input in
/// error messages.
TimeSeries parse_csv(const std::string& text, std::optional<double> dt_override,
                     const std::string& source = "<memory>");

/// Time-delay snapshot pair (Y, Ybar) over a scalar signal.
///
/// Column c of Y is the delay vector [x(c), ..., x(c+d)], and column c of
/// Ybar is column c+1 of Y. The matrices are never materialised here; the
/// pair only records the indexing contract over the shared sample buffer.
class DelayPair {
public:
    DelayPair(TimeSeries series, std::size_t delay, std::size_t columns);

    std::size_t delay() const noexcept { return delay_; }
    std::size_t rows() const noexcept { return delay_ + 1; }
    std::size_t columns() const noexcept { return columns_; }
    double dt() const noexcept { return series_.dt(); }
    double t_start() const noexcept { return series_.t0(); }
    const TimeSeries& series() const noexcept { return series_; }

    double y(std::size_t r, std::size_t c) const noexcept { return series_[c + r]; }
    double ybar(std::size_t r, std::size_t c) const noexcept { return series_[c + 1 + r]; }

    /// Delay vector ỹ(t_i) for 0 <= i <= columns (i == columns is the last
    /// column of Ybar).
    std::span<const double> snapshot(std::size_t i) const;

private:
    TimeSeries series_;
    std::size_t delay_;
    std::size_t columns_;
};

/// Build the delay pair. When `columns` is omitted the maximal count
/// (size - (d + 1)) is used. Throws InsufficientSamples when d + m + 1
/// exceeds the number of samples.
DelayPair delay_embed(const TimeSeries& series, std::size_t delay,
                      std::optional<std::size_t> columns = std::nullopt);

/// Sample index at which a shaft angle (degrees) is reached, given the shaft
/// angular rate in rad per unit time. Negative angles saturate to 0.
std::size_t angle_to_index(double angle_deg, double omega_shaft, double dt);

/// Shaft angle in degrees at time t.
double time_to_angle_deg(double t, double omega_shaft);

}  // namespace gearmr
