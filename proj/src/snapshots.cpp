#include "gearmr/snapshots.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "gearmr/error.hpp"
#include "gearmr/fft.hpp"

namespace gearmr {

namespace {

// Below this many columns a direct O(n * count) sum beats the FFT round trip.
constexpr std::size_t kDirectColumnLimit = 24;

void check_block(std::size_t first, std::size_t count, std::size_t columns) {
    if (first + count > columns + 1)
        fail(ErrorKind::InvalidArgument, "snapshot column block out of range");
}

}  // namespace

DenseSnapshots::DenseSnapshots(Eigen::MatrixXd x) : x_(std::move(x)) {
    if (x_.cols() < 2 || x_.rows() < 1)
        fail(ErrorKind::InvalidArgument, "snapshot matrix needs at least two columns");
    if (!x_.allFinite()) fail(ErrorKind::InvalidArgument, "snapshot matrix has non-finite entries");
}

Eigen::MatrixXd DenseSnapshots::multiply(std::size_t first, const Eigen::MatrixXd& v) const {
    const auto count = static_cast<std::size_t>(v.rows());
    check_block(first, count, columns());
    return x_.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) * v;
}

Eigen::MatrixXd DenseSnapshots::multiply_transpose(std::size_t first, std::size_t count,
                                                   const Eigen::MatrixXd& u) const {
    check_block(first, count, columns());
    return x_.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count))
               .transpose() *
           u;
}

Eigen::VectorXd DenseSnapshots::column(std::size_t j) const {
    check_block(j, 1, columns());
    return x_.col(static_cast<Eigen::Index>(j));
}

std::complex<double> modal_weight(std::complex<double> omega, double steps, double dt) {
    if (std::isinf(omega.real()) && omega.real() < 0.0)
        return steps == 0.0 ? std::complex<double>(1.0, 0.0) : std::complex<double>(0.0, 0.0);
    return std::exp(omega * (steps * dt));
}

Eigen::VectorXcd ModalTerm::weights(std::size_t g) const {
    const double steps = static_cast<double>(g) - static_cast<double>(origin);
    Eigen::VectorXcd w(amplitudes.size());
    for (Eigen::Index k = 0; k < amplitudes.size(); ++k)
        w[k] = amplitudes[k] * modal_weight(frequencies[k], steps, dt);
    return w;
}

Eigen::VectorXd ModalTerm::evaluate(std::size_t g) const {
    if (amplitudes.size() == 0) return Eigen::VectorXd::Zero(modes.rows());
    return (modes * weights(g)).real();
}

struct HankelSnapshots::Fft {
    explicit Fft(std::size_t n) : fft(n), spectrum(fft.spectrum_size()), work(fft.spectrum_size()),
                                  in(n), out(n) {}
    RealFft fft;
    std::vector<std::complex<double>> spectrum;  // transform of the sample segment
    std::vector<std::complex<double>> work;
    std::vector<double> in;
    std::vector<double> out;
};

HankelSnapshots::HankelSnapshots(std::span<const double> samples, std::size_t rows,
                                 std::size_t first_column, std::size_t columns,
                                 std::vector<std::shared_ptr<const ModalTerm>> terms)
    : rows_(rows), first_(first_column), columns_(columns), terms_(std::move(terms)) {
    if (rows_ == 0 || columns_ == 0)
        fail(ErrorKind::InvalidArgument, "Hankel snapshots need positive dimensions");
    if (first_ + columns_ + rows_ > samples.size())
        fail(ErrorKind::InsufficientSamples, "Hankel snapshot block exceeds the sample buffer");
    segment_ = samples.subspan(first_, rows_ + columns_);
    for (const auto& t : terms_) {
        if (!t || static_cast<std::size_t>(t->modes.rows()) != rows_)
            fail(ErrorKind::InvalidArgument, "modal term does not match snapshot rows");
    }
    p_ = correction_rows();
    if (columns_ + 1 > kDirectColumnLimit) {
        fft_ = std::make_unique<Fft>(smooth_fft_size(rows_ + columns_));
        fft_->fft.forward(segment_, fft_->spectrum);
    }
}

HankelSnapshots::~HankelSnapshots() = default;

Eigen::MatrixXd HankelSnapshots::correction_rows() const {
    Eigen::Index q = 0;
    for (const auto& t : terms_) q += 2 * static_cast<Eigen::Index>(t->size());
    Eigen::MatrixXd p(static_cast<Eigen::Index>(rows_), q);
    Eigen::Index at = 0;
    for (const auto& t : terms_) {
        const auto m = static_cast<Eigen::Index>(t->size());
        p.middleCols(at, m) = t->modes.real();
        p.middleCols(at + m, m) = -t->modes.imag();
        at += 2 * m;
    }
    return p;
}

Eigen::MatrixXd HankelSnapshots::correction_cols(std::size_t first, std::size_t count) const {
    Eigen::MatrixXd q(p_.cols(), static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
        Eigen::Index at = 0;
        for (const auto& t : terms_) {
            const auto m = static_cast<Eigen::Index>(t->size());
            const Eigen::VectorXcd w = t->weights(first_ + first + j);
            q.col(static_cast<Eigen::Index>(j)).segment(at, m) = w.real();
            q.col(static_cast<Eigen::Index>(j)).segment(at + m, m) = w.imag();
            at += 2 * m;
        }
    }
    return q;
}

Eigen::MatrixXd HankelSnapshots::multiply(std::size_t first, const Eigen::MatrixXd& v) const {
    const auto count = static_cast<std::size_t>(v.rows());
    check_block(first, count, columns_);
    const auto n = static_cast<Eigen::Index>(rows_);
    Eigen::MatrixXd y(n, v.cols());

    if (!fft_ || count <= kDirectColumnLimit) {
        for (Eigen::Index k = 0; k < v.cols(); ++k) {
            for (Eigen::Index r = 0; r < n; ++r) {
                double acc = 0.0;
                for (std::size_t j = 0; j < count; ++j)
                    acc += segment_[first + j + static_cast<std::size_t>(r)] *
                           v(static_cast<Eigen::Index>(j), k);
                y(r, k) = acc;
            }
        }
    } else {
        // y[r] = sum_j seg[r + j'] u[j'] with u = v placed at [first, first+count).
        // Reversing u over [0, c] turns the correlation into a convolution
        // read out at indices c .. c+n-1.
        auto& f = *fft_;
        const std::size_t big_n = f.fft.size();
        const double scale = 1.0 / static_cast<double>(big_n);
        for (Eigen::Index k = 0; k < v.cols(); ++k) {
            std::fill(f.in.begin(), f.in.end(), 0.0);
            for (std::size_t j = 0; j < count; ++j)
                f.in[columns_ - (first + j)] = v(static_cast<Eigen::Index>(j), k);
            f.fft.forward(f.in, f.work);
            for (std::size_t i = 0; i < f.work.size(); ++i) f.work[i] *= f.spectrum[i];
            f.fft.inverse(f.work, f.out);
            for (Eigen::Index r = 0; r < n; ++r)
                y(r, k) = f.out[columns_ + static_cast<std::size_t>(r)] * scale;
        }
    }

    if (p_.cols() > 0) y.noalias() -= p_ * (correction_cols(first, count) * v);
    return y;
}

Eigen::MatrixXd HankelSnapshots::multiply_transpose(std::size_t first, std::size_t count,
                                                    const Eigen::MatrixXd& u) const {
    check_block(first, count, columns_);
    if (static_cast<std::size_t>(u.rows()) != rows_)
        fail(ErrorKind::InvalidArgument, "transpose product: row mismatch");
    const auto cnt = static_cast<Eigen::Index>(count);
    Eigen::MatrixXd x(cnt, u.cols());

    if (!fft_ || count <= kDirectColumnLimit) {
        for (Eigen::Index k = 0; k < u.cols(); ++k) {
            for (Eigen::Index j = 0; j < cnt; ++j) {
                const double* seg = segment_.data() + first + static_cast<std::size_t>(j);
                double acc = 0.0;
                for (std::size_t r = 0; r < rows_; ++r)
                    acc += seg[r] * u(static_cast<Eigen::Index>(r), k);
                x(j, k) = acc;
            }
        }
    } else {
        // x[j'] = sum_r seg[r + j'] u[r]; reverse u over [0, n) and read the
        // convolution at n-1+j'.
        auto& f = *fft_;
        const std::size_t big_n = f.fft.size();
        const double scale = 1.0 / static_cast<double>(big_n);
        for (Eigen::Index k = 0; k < u.cols(); ++k) {
            std::fill(f.in.begin(), f.in.end(), 0.0);
            for (std::size_t r = 0; r < rows_; ++r)
                f.in[rows_ - 1 - r] = u(static_cast<Eigen::Index>(r), k);
            f.fft.forward(f.in, f.work);
            for (std::size_t i = 0; i < f.work.size(); ++i) f.work[i] *= f.spectrum[i];
            f.fft.inverse(f.work, f.out);
            for (Eigen::Index j = 0; j < cnt; ++j)
                x(j, k) = f.out[rows_ - 1 + first + static_cast<std::size_t>(j)] * scale;
        }
    }

    if (p_.cols() > 0)
        x.noalias() -= correction_cols(first, count).transpose() * (p_.transpose() * u);
    return x;
}

Eigen::VectorXd HankelSnapshots::column(std::size_t j) const {
    check_block(j, 1, columns_);
    Eigen::VectorXd x(static_cast<Eigen::Index>(rows_));
    for (std::size_t r = 0; r < rows_; ++r) x[static_cast<Eigen::Index>(r)] = segment_[j + r];
    if (p_.cols() > 0) x.noalias() -= p_ * correction_cols(j, 1).col(0);
    return x;
}

Eigen::MatrixXd HankelSnapshots::dense() const {
    const auto n = static_cast<Eigen::Index>(rows_);
    const auto c = static_cast<Eigen::Index>(columns_ + 1);
    Eigen::MatrixXd x(n, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index r = 0; r < n; ++r)
            x(r, j) = segment_[static_cast<std::size_t>(j + r)];
    if (p_.cols() > 0) x.noalias() -= p_ * correction_cols(0, columns_ + 1);
    return x;
}

}  // namespace gearmr
