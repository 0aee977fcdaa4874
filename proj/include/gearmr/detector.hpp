#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gearmr/dmd.hpp"
#include "gearmr/hilbert.hpp"
#include "gearmr/mrdmd.hpp"
#include "gearmr/timeseries.hpp"

namespace gearmr {

inline constexpr const char* kToolVersion = "0.1.0";

/// Which residuals r_i enter the decision.
struct ResidualSelection {
    enum class Kind { First, Cover, Stride };

    Kind kind = Kind::Cover;
    std::size_t stride = 0;  // Kind::Stride only

    /// r_0 alone.
    static ResidualSelection first() { return {Kind::First, 0}; }
    /// r_0, r_s, r_2s, ... with s = floor(0.9 (d + 1)), plus the last column,
    /// so that every sample lies in the interior of some residual window.
    static ResidualSelection cover() { return {Kind::Cover, 0}; }
    /// r_0, r_k, r_2k, ... below the column count.
    static ResidualSelection every(std::size_t k) { return {Kind::Stride, k}; }

    std::vector<std::size_t> indices(std::size_t delay, std::size_t columns) const;
    std::string name() const;
    /// Accepts "first", "cover" or "stride:<k>".
    static ResidualSelection parse(const std::string& text);
};

struct DetectorParams {
    std::size_t d = 16000;
    std::size_t L = 10;
    double rho = 1.0;
    RankPolicy rank_policy{};
    std::size_t min_bin_columns = 4;
    double kappa = 3.0;
    double window_deg = 5.0;
    std::size_t min_recurrences = 2;
    /// Fraction of each envelope excluded at either end.
    double edge_fraction = 0.05;
    ResidualSelection selection{};
    std::size_t threads = 0;
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;

    MrDmdParams mrdmd_params() const;
    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

struct ResidualTrace {
    std::size_t index = 0;
    Eigen::VectorXd residual;
    Envelope envelope;
};

struct Analysis {
    std::size_t delay = 0;
    std::size_t columns = 0;
    double dt = 1.0;
    double t_start = 0.0;
    std::vector<ResidualTrace> traces;  // traces[0] is r_0
    /// p^l_0 for l = 1..L.
    std::vector<Eigen::VectorXd> level_components;
    MrDmdTree tree;
};

/// Samples needed for (d, L, min_bin_columns).
std::size_t min_samples_for(const DetectorParams& params);

/// delay_embed, mrDMD, residuals and Hilbert envelopes.
Analysis analyze(const TimeSeries& x, const DetectorParams& params);

struct PeakGroup {
    double angle_deg = 0.0;  // angle of the largest ratio in the group
    double ratio = 0.0;
    double first_deg = 0.0;
    double last_deg = 0.0;
    std::size_t samples = 0;
};

struct DetectionReport {
    bool damaged = false;
    std::vector<PeakGroup> groups;
    double residual_norm = 0.0;
    DetectorParams params;
    std::string input;
    std::optional<std::uint64_t> seed;
    std::string tool_version = kToolVersion;

    std::vector<double> peak_angles_deg() const;
    std::vector<double> peak_ratios() const;
};

/// Peak-ratio decision over one envelope.
DetectionReport decide(const Envelope& env, double omega_shaft, const DetectorParams& params);
/// Supra-threshold samples of all envelopes are pooled by global shaft angle.
DetectionReport decide(std::span<const Envelope> envs, double omega_shaft,
                       const DetectorParams& params);

DetectionReport detect(const TimeSeries& x, double omega_shaft, const DetectorParams& params);

/// Amplitude divided by the median over the interior, per sample.
std::vector<double> peak_ratios(const Envelope& env, double edge_fraction);

std::string report_to_json(const DetectionReport& report);

/// Keys named after the DetectorParams fields; unknown keys are rejected.
std::string params_to_json(const DetectorParams& params);
DetectorParams params_from_json(const std::string& text);

}  // namespace gearmr
