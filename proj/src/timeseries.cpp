#include "gearmr/timeseries.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gearmr/error.hpp"

namespace gearmr {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::NonuniformSampling: return "NonuniformSampling";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::DegenerateSnapshot: return "DegenerateSnapshot";
        case ErrorKind::StiffFailure: return "StiffFailure";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

TimeSeries::TimeSeries(std::vector<double> samples, double dt, double t0,
                       std::string unit_label)
    : samples_(std::move(samples)), dt_(dt), t0_(t0), unit_label_(std::move(unit_label)) {
    if (samples_.size() < 2)
        fail(ErrorKind::InsufficientSamples, "time series needs at least 2 samples");
    if (!(dt_ > 0.0) || !std::isfinite(dt_))
        fail(ErrorKind::InvalidArgument, "time series dt must be positive and finite");
    if (!std::isfinite(t0_))
        fail(ErrorKind::InvalidArgument, "time series t0 must be finite");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i]))
            fail(ErrorKind::InvalidArgument,
                 "time series sample " + std::to_string(i) + " is not finite");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

// A first line made of column names, e.g. "time,value" or "time_s,torque_nm".
bool is_header(std::string_view line) {
    line = trim(line);
    if (line.empty()) return false;
    const char c = line.front();
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '"';
}

}  // namespace

TimeSeries parse_csv(const std::string& text, std::optional<double> dt_override,
                     const std::string& source) {
    std::vector<double> times;
    std::vector<double> values;
    int columns = 0;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_content = true;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line = trim(std::string_view(text).substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;

        if (first_content) {
            first_content = false;
            if (is_header(line)) {
                columns = line.find(',') == std::string_view::npos ? 1 : 2;
                continue;
            }
        }

        const std::size_t comma = line.find(',');
        const int row_columns = comma == std::string_view::npos ? 1 : 2;
        if (row_columns == 2 && line.find(',', comma + 1) != std::string_view::npos)
            fail(ErrorKind::Parse, source + ":" + std::to_string(line_no) +
                                       ": expected one or two columns");
        if (columns == 0) columns = row_columns;
        if (row_columns != columns)
            fail(ErrorKind::Parse, source + ":" + std::to_string(line_no) +
                                       ": inconsistent column count");

        double v = 0.0;
        if (columns == 1) {
            if (!parse_double(line, v))
                fail(ErrorKind::Parse, source + ":" + std::to_string(line_no) +
                                           ": non-numeric value '" + std::string(line) + "'");
            values.push_back(v);
        } else {
            double t = 0.0;
            if (!parse_double(line.substr(0, comma), t) || !parse_double(line.substr(comma + 1), v))
                fail(ErrorKind::Parse, source + ":" + std::to_string(line_no) +
                                           ": non-numeric row '" + std::string(line) + "'");
            times.push_back(t);
            values.push_back(v);
        }
    }

    if (values.size() < 2)
        fail(ErrorKind::InsufficientSamples, source + ": fewer than 2 samples");

    if (columns == 1) {
        if (!dt_override)
            fail(ErrorKind::InvalidArgument,
                 source + ": one-column signal needs an explicit sample interval (--dt)");
        return TimeSeries(std::move(values), *dt_override, 0.0);
    }

    const double dt = times[1] - times[0];
    if (!(dt > 0.0))
        fail(ErrorKind::NonuniformSampling, source + ": time column is not increasing");
    for (std::size_t i = 2; i < times.size(); ++i) {
        const double gap = times[i] - times[i - 1];
        if (std::abs(gap - dt) > 1e-6 * dt)
            fail(ErrorKind::NonuniformSampling,
                 source + ": nonuniform sampling at row " + std::to_string(i) + " (gap " +
                     std::to_string(gap) + " vs " + std::to_string(dt) + ")");
    }
    if (dt_override && std::abs(*dt_override - dt) > 1e-6 * dt)
        fail(ErrorKind::InvalidArgument,
             source + ": --dt disagrees with the time column (" + std::to_string(dt) + ")");
    return TimeSeries(std::move(values), dt, times.front());
}

TimeSeries load_csv(const std::filesystem::path& path, std::optional<double> dt_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open signal file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), dt_override, path.string());
}

DelayPair::DelayPair(TimeSeries series, std::size_t delay, std::size_t columns)
    : series_(std::move(series)), delay_(delay), columns_(columns) {
    if (columns_ == 0) fail(ErrorKind::InvalidArgument, "delay pair needs at least one column");
    if (delay_ + columns_ + 1 > series_.size())
        fail(ErrorKind::InsufficientSamples,
             "delay " + std::to_string(delay_) + " with " + std::to_string(columns_) +
                 " columns needs " + std::to_string(delay_ + columns_ + 1) + " samples, have " +
                 std::to_string(series_.size()));
}

std::span<const double> DelayPair::snapshot(std::size_t i) const {
    if (i > columns_)
        fail(ErrorKind::InvalidArgument, "snapshot index " + std::to_string(i) + " out of range");
    return series_.samples().subspan(i, delay_ + 1);
}

DelayPair delay_embed(const TimeSeries& series, std::size_t delay,
                      std::optional<std::size_t> columns) {
    if (delay + 2 > series.size())
        fail(ErrorKind::InsufficientSamples,
             "delay " + std::to_string(delay) + " needs at least " + std::to_string(delay + 2) +
                 " samples, have " + std::to_string(series.size()));
    const std::size_t m = columns.value_or(series.size() - (delay + 1));
    return DelayPair(series, delay, m);
}

std::size_t angle_to_index(double angle_deg, double omega_shaft, double dt) {
    const double idx = std::round(angle_deg * (std::numbers::pi / 180.0) / (omega_shaft * dt));
    return idx <= 0.0 ? 0 : static_cast<std::size_t>(idx);
}

double time_to_angle_deg(double t, double omega_shaft) {
    return t * omega_shaft * 180.0 / std::numbers::pi;
}

}  // namespace gearmr
