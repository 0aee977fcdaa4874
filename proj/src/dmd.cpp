#include "gearmr/dmd.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gearmr/error.hpp"

namespace gearmr {

std::size_t RankPolicy::rank_bound(std::size_t rows, std::size_t cols) const {
    const std::size_t full = std::min(rows, cols);
    if (const auto* f = std::get_if<Fixed>(&mode)) return std::min(f->r, full);
    if (const auto* h = std::get_if<HardCap>(&mode)) return std::min(h->r_max, full);
    return full;
}

double RankPolicy::sv_floor() const {
    if (const auto* h = std::get_if<HardCap>(&mode)) return h->sv_floor;
    return 1e-12;
}

namespace detail {

namespace {

void validate(const RankPolicy& policy) {
    if (const auto* f = std::get_if<RankPolicy::Fixed>(&policy.mode); f && f->r == 0)
        fail(ErrorKind::InvalidArgument, "fixed rank must be positive");
    if (const auto* e = std::get_if<RankPolicy::Energy>(&policy.mode);
        e && !(e->threshold > 0.0 && e->threshold <= 1.0))
        fail(ErrorKind::InvalidArgument, "energy threshold must lie in (0, 1]");
    if (const auto* h = std::get_if<RankPolicy::HardCap>(&policy.mode);
        h && (h->r_max == 0 || !(h->sv_floor >= 0.0)))
        fail(ErrorKind::InvalidArgument, "hard cap needs r_max > 0 and sv_floor >= 0");
}

/// Number of leading singular values kept by the policy and the floor.
std::size_t choose_rank(const Eigen::VectorXd& s, const RankPolicy& policy, std::size_t bound) {
    std::size_t r = std::min<std::size_t>(bound, static_cast<std::size_t>(s.size()));
    if (const auto* e = std::get_if<RankPolicy::Energy>(&policy.mode)) {
        const double total = s.squaredNorm();
        double acc = 0.0;
        std::size_t k = 0;
        while (k < static_cast<std::size_t>(s.size())) {
            acc += s[static_cast<Eigen::Index>(k)] * s[static_cast<Eigen::Index>(k)];
            ++k;
            if (acc >= e->threshold * total) break;
        }
        r = std::min(r, k);
    }
    const double floor = policy.sv_floor() * (s.size() > 0 ? s[0] : 0.0);
    std::size_t kept = 0;
    while (kept < r && s[static_cast<Eigen::Index>(kept)] > floor &&
           s[static_cast<Eigen::Index>(kept)] > 0.0)
        ++kept;
    return kept;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& a) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    q.applyOnTheLeft(qr.householderQ());
    return q;
}

Svd dense_svd(const SnapshotOperator& op) {
    const Eigen::MatrixXd x = op.dense();
    const auto c = static_cast<Eigen::Index>(op.columns());
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x.leftCols(c), Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV(), false};
}

// Rayleigh-Ritz on an approximate row space: with V = Qc W and B = Y Qc = U S W^T
// the delivered triplets satisfy Y v = sigma u to rounding.
Svd randomized_svd(const SnapshotOperator& op, std::size_t k, const DmdOptions& opt) {
    const std::size_t n = op.rows();
    const std::size_t c = op.columns();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd omega(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (Eigen::Index j = 0; j < omega.cols(); ++j)
        for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = normal(rng);

    Eigen::MatrixXd qc = orthonormalize(op.multiply_transpose(0, c, omega));
    for (std::size_t it = 0; it < opt.power_iterations; ++it) {
        const Eigen::MatrixXd left = orthonormalize(op.multiply(0, qc));
        qc = orthonormalize(op.multiply_transpose(0, c, left));
    }
    const Eigen::MatrixXd b = op.multiply(0, qc);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), qc * svd.matrixV(), false};
}

}  // namespace

Svd truncated_svd(const SnapshotOperator& op, const RankPolicy& policy, const DmdOptions& options) {
    validate(policy);
    const std::size_t n = op.rows();
    const std::size_t c = op.columns();
    const std::size_t full = std::min(n, c);
    const std::size_t bound = policy.rank_bound(n, c);

    bool clamped = false;
    if (const auto* f = std::get_if<RankPolicy::Fixed>(&policy.mode); f && f->r > full)
        clamped = true;

    SvdMethod method = options.svd;
    if (method == SvdMethod::Automatic)
        method = (n * c >= (std::size_t{1} << 22) && full > 2 * (bound + options.oversample))
                     ? SvdMethod::Randomized
                     : SvdMethod::Dense;

    Svd svd = method == SvdMethod::Randomized
                  ? randomized_svd(op, std::min(bound + options.oversample, full), options)
                  : dense_svd(op);
    svd.rank_clamped = clamped;

    const std::size_t r = choose_rank(svd.s, policy, bound);
    if (r == 0)
        fail(ErrorKind::DegenerateSnapshot, "all singular values are below the floor");
    const auto ri = static_cast<Eigen::Index>(r);
    svd.u = svd.u.leftCols(ri).eval();
    svd.s = svd.s.head(ri).eval();
    svd.v = svd.v.leftCols(ri).eval();
    return svd;
}

DmdFactors dmd_factors(const SnapshotOperator& op, double dt, const RankPolicy& policy,
                       const DmdOptions& options) {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
    const Svd svd = truncated_svd(op, policy, options);
    const auto r = svd.s.size();

    DmdFactors f;
    f.dt = dt;
    f.rank_clamped = svd.rank_clamped;
    f.singular_values = svd.s;
    f.basis = op.multiply(1, svd.v) * svd.s.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd atilde = svd.u.transpose() * f.basis;

    Eigen::EigenSolver<Eigen::MatrixXd> es(atilde, true);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::DegenerateSnapshot, "eigendecomposition of the reduced operator failed");
    f.eigenvalues = es.eigenvalues();
    f.eigenvectors = es.eigenvectors();
    f.frequencies.resize(r);
    f.zero_eigenvalue.assign(static_cast<std::size_t>(r), false);
    for (Eigen::Index k = 0; k < r; ++k) {
        const std::complex<double> lambda = f.eigenvalues[k];
        if (lambda == std::complex<double>(0.0, 0.0)) {
            f.frequencies[k] = {-std::numeric_limits<double>::infinity(), 0.0};
            f.zero_eigenvalue[static_cast<std::size_t>(k)] = true;
        } else {
            f.frequencies[k] = std::log(lambda) / dt;
        }
    }

    f.first_snapshot = op.column(0);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(f.basis);
    const Eigen::MatrixXd rtop =
        qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    f.r_factor = rtop * qr.colsPermutation().transpose();
    Eigen::VectorXd qx = f.first_snapshot;
    qx.applyOnTheLeft(qr.householderQ().adjoint());
    f.projected_x0 = qx.head(r);
    return f;
}

DmdResult materialize(const DmdFactors& f, std::span<const std::size_t> keep, double t_start) {
    const auto m = static_cast<Eigen::Index>(keep.size());
    const auto r = f.eigenvectors.rows();
    Eigen::MatrixXcd w(r, m);
    DmdResult out;
    out.eigenvalues.resize(m);
    out.frequencies.resize(m);
    out.zero_eigenvalue.resize(keep.size());
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto k = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)]);
        w.col(j) = f.eigenvectors.col(k);
        out.eigenvalues[j] = f.eigenvalues[k];
        out.frequencies[j] = f.frequencies[k];
        out.zero_eigenvalue[static_cast<std::size_t>(j)] = f.zero_eigenvalue[static_cast<std::size_t>(k)];
    }
    out.modes.resize(f.basis.rows(), m);
    if (m > 0) {
        out.modes.real() = f.basis * w.real();
        out.modes.imag() = f.basis * w.imag();
        const Eigen::MatrixXcd system = f.r_factor.cast<std::complex<double>>() * w;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(system);
        out.amplitudes = cod.solve(f.projected_x0.cast<std::complex<double>>());
    } else {
        out.amplitudes.resize(0);
    }
    out.singular_values = f.singular_values;
    out.first_snapshot = f.first_snapshot;
    out.rank_used = static_cast<std::size_t>(f.singular_values.size());
    out.rank_clamped = f.rank_clamped;
    out.dt = f.dt;
    out.t_start = t_start;
    return out;
}

}  // namespace detail

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

DmdResult dmd(const SnapshotOperator& snapshots, double dt, const RankPolicy& policy,
              const DmdOptions& options, double t_start) {
    const detail::DmdFactors f = detail::dmd_factors(snapshots, dt, policy, options);
    const auto idx = all_indices(static_cast<std::size_t>(f.eigenvalues.size()));
    return detail::materialize(f, idx, t_start);
}

DmdResult dmd(const DelayPair& pair, const RankPolicy& policy, const DmdOptions& options) {
    const HankelSnapshots op(pair.series().samples(), pair.rows(), 0, pair.columns());
    return dmd(op, pair.dt(), policy, options, pair.t_start());
}

DmdResult dmd(const Eigen::MatrixXd& snapshots, double dt, const RankPolicy& policy,
              const DmdOptions& options, double t_start) {
    const DenseSnapshots op(snapshots);
    return dmd(op, dt, policy, options, t_start);
}

Reconstruction reconstruct(const DmdResult& result, std::span<const std::size_t> step_indices) {
    Reconstruction out;
    const auto n = result.modes.rows();
    out.values.resize(n, static_cast<Eigen::Index>(step_indices.size()));
    double imag_sq = 0.0;
    Eigen::VectorXcd w(result.amplitudes.size());
    for (std::size_t j = 0; j < step_indices.size(); ++j) {
        const auto steps = static_cast<double>(step_indices[j]);
        for (Eigen::Index k = 0; k < w.size(); ++k)
            w[k] = result.amplitudes[k] * modal_weight(result.frequencies[k], steps, result.dt);
        const Eigen::VectorXcd col =
            w.size() > 0 ? Eigen::VectorXcd(result.modes * w) : Eigen::VectorXcd::Zero(n);
        out.values.col(static_cast<Eigen::Index>(j)) = col.real();
        imag_sq += col.imag().squaredNorm();
    }
    out.imaginary_norm = std::sqrt(imag_sq);
    return out;
}

double mode_speed(const DmdResult& result, std::size_t k) {
    if (k >= result.size()) fail(ErrorKind::InvalidArgument, "mode index out of range");
    return std::abs(result.frequencies[static_cast<Eigen::Index>(k)]) / (2.0 * std::numbers::pi);
}

DmdResult select_modes(const DmdResult& result, std::span<const std::size_t> keep) {
    DmdResult out;
    const auto m = static_cast<Eigen::Index>(keep.size());
    out.modes.resize(result.modes.rows(), m);
    out.eigenvalues.resize(m);
    out.frequencies.resize(m);
    out.zero_eigenvalue.resize(keep.size());
    for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t k = keep[static_cast<std::size_t>(j)];
        if (k >= result.size()) fail(ErrorKind::InvalidArgument, "mode index out of range");
        const auto ki = static_cast<Eigen::Index>(k);
        out.modes.col(j) = result.modes.col(ki);
        out.eigenvalues[j] = result.eigenvalues[ki];
        out.frequencies[j] = result.frequencies[ki];
        out.zero_eigenvalue[static_cast<std::size_t>(j)] = result.zero_eigenvalue[k];
    }
    if (m > 0) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(out.modes);
        out.amplitudes = cod.solve(result.first_snapshot.cast<std::complex<double>>());
    } else {
        out.amplitudes.resize(0);
    }
    out.singular_values = result.singular_values;
    out.first_snapshot = result.first_snapshot;
    out.rank_used = result.rank_used;
    out.rank_clamped = result.rank_clamped;
    out.dt = result.dt;
    out.t_start = result.t_start;
    return out;
}

}  // namespace gearmr
