#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "gearmr/snapshots.hpp"
#include "gearmr/timeseries.hpp"

namespace gearmr {

/// How many singular triplets of Y enter the reduced operator.
struct RankPolicy {
    struct Fixed {
        std::size_t r;
    };
    struct Energy {
        double threshold;  // fraction of sum sigma^2 to retain, in (0, 1]
    };
    struct HardCap {
        std::size_t r_max;
        double sv_floor;  // relative to sigma_1
    };

    std::variant<Fixed, Energy, HardCap> mode = HardCap{200, 1e-12};

    static RankPolicy fixed(std::size_t r) { return {Fixed{r}}; }
    static RankPolicy energy(double threshold) { return {Energy{threshold}}; }
    static RankPolicy hard_cap(std::size_t r_max, double sv_floor = 1e-12) {
        return {HardCap{r_max, sv_floor}};
    }

    /// Rank to attempt before singular-value inspection, bounded by
    /// min(rows, cols).
    std::size_t rank_bound(std::size_t rows, std::size_t cols) const;
    /// Relative floor below which singular values are always dropped.
    double sv_floor() const;
};

enum class SvdMethod { Automatic, Dense, Randomized };

struct DmdOptions {
    SvdMethod svd = SvdMethod::Automatic;
    /// Randomized range finder: extra columns and power iterations.
    std::size_t oversample = 20;
    std::size_t power_iterations = 2;
    /// Seed for the Gaussian test matrix; callers derive it per window so
    /// results do not depend on scheduling.
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

struct DmdResult {
    Eigen::MatrixXcd modes;        // n x M
    Eigen::VectorXcd eigenvalues;  // lambda_k
    Eigen::VectorXcd frequencies;  // omega_k = log(lambda_k) / dt
    Eigen::VectorXcd amplitudes;   // b = pinv(Phi) x_0
    Eigen::VectorXd singular_values;  // the sigma_1..sigma_r used
    Eigen::VectorXd first_snapshot;   // x_0, kept for amplitude refits
    std::vector<bool> zero_eigenvalue;  // lambda_k == 0, omega_k = -inf
    std::size_t rank_used = 0;
    bool rank_clamped = false;  // Fixed r exceeded min(rows, cols)
    double dt = 1.0;
    double t_start = 0.0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// Exact DMD of a delay-embedded signal.
DmdResult dmd(const DelayPair& pair, const RankPolicy& policy = {}, const DmdOptions& options = {});

/// Exact DMD of an explicit snapshot sequence (columns x_0..x_c).
DmdResult dmd(const Eigen::MatrixXd& snapshots, double dt, const RankPolicy& policy = {},
              const DmdOptions& options = {}, double t_start = 0.0);

/// Exact DMD through the operator interface.
DmdResult dmd(const SnapshotOperator& snapshots, double dt, const RankPolicy& policy,
              const DmdOptions& options, double t_start = 0.0);

/// Real reconstruction sum_k b_k phi_k exp(omega_k (t_i - t_start)).
struct Reconstruction {
    Eigen::MatrixXd values;   // n x |indices|
    double imaginary_norm = 0.0;  // Frobenius norm of the discarded imaginary part
};

Reconstruction reconstruct(const DmdResult& result, std::span<const std::size_t> step_indices);

/// Cycles per unit time |omega_k| / (2 pi).
double mode_speed(const DmdResult& result, std::size_t k);

/// Restrict to modes selected by `keep` and refit amplitudes to the first
/// snapshot by least squares.
DmdResult select_modes(const DmdResult& result, std::span<const std::size_t> keep);

namespace detail {

/// DMD quantities before modes are materialised.
///
/// Modes are basis * eigenvectors. Amplitude refits for any subset S solve
/// min || r_factor * eigenvectors[:, S] b - projected_x0 || which equals the
/// pseudoinverse fit against the materialised modes.
struct DmdFactors {
    Eigen::MatrixXd basis;          // Ybar V Sigma^-1, n x r
    Eigen::MatrixXcd eigenvectors;  // W, r x r
    Eigen::VectorXcd eigenvalues;
    Eigen::VectorXcd frequencies;
    Eigen::VectorXd singular_values;
    Eigen::MatrixXd r_factor;       // triangular factor of basis (with pivots applied)
    Eigen::VectorXd projected_x0;   // Q^T x_0, length r
    Eigen::VectorXd first_snapshot;
    std::vector<bool> zero_eigenvalue;
    bool rank_clamped = false;
    double dt = 1.0;
};

struct Svd {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
    bool rank_clamped = false;
};

/// Truncated SVD of Y per policy; throws DegenerateSnapshot when nothing
/// survives the singular-value floor.
Svd truncated_svd(const SnapshotOperator& snapshots, const RankPolicy& policy,
                  const DmdOptions& options);

DmdFactors dmd_factors(const SnapshotOperator& snapshots, double dt, const RankPolicy& policy,
                       const DmdOptions& options);

/// Modes and refitted amplitudes for a subset of eigenpairs.
DmdResult materialize(const DmdFactors& factors, std::span<const std::size_t> keep,
                      double t_start);

}  // namespace detail

}  // namespace gearmr
