#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace gearmr {

/// Snapshot sequence X = [x_0, ..., x_c] of n-dimensional columns, seen as
/// the DMD pair Y = X[:, 0..c-1] and Ybar = X[:, 1..c].
///
/// Implementations only need to provide products with contiguous column
/// blocks of X and single-column extraction; the SVD backends choose between
/// materialising X and working through products.
class SnapshotOperator {
public:
    virtual ~SnapshotOperator() = default;

    virtual std::size_t rows() const = 0;
    /// Number of columns of Y (X has one more).
    virtual std::size_t columns() const = 0;

    /// X[:, first .. first+V.rows()-1] * V
    virtual Eigen::MatrixXd multiply(std::size_t first, const Eigen::MatrixXd& v) const = 0;
    /// X[:, first .. first+count-1]^T * U
    virtual Eigen::MatrixXd multiply_transpose(std::size_t first, std::size_t count,
                                               const Eigen::MatrixXd& u) const = 0;
    virtual Eigen::VectorXd column(std::size_t j) const = 0;
    /// Materialise X (rows x columns+1).
    virtual Eigen::MatrixXd dense() const = 0;
};

/// Explicit snapshot matrix.
class DenseSnapshots final : public SnapshotOperator {
public:
    /// `x` holds all c+1 snapshots as columns.
    explicit DenseSnapshots(Eigen::MatrixXd x);

    std::size_t rows() const override { return static_cast<std::size_t>(x_.rows()); }
    std::size_t columns() const override { return static_cast<std::size_t>(x_.cols()) - 1; }
    Eigen::MatrixXd multiply(std::size_t first, const Eigen::MatrixXd& v) const override;
    Eigen::MatrixXd multiply_transpose(std::size_t first, std::size_t count,
                                       const Eigen::MatrixXd& u) const override;
    Eigen::VectorXd column(std::size_t j) const override;
    Eigen::MatrixXd dense() const override { return x_; }

private:
    Eigen::MatrixXd x_;
};

/// Retained modal content of one mrDMD node, evaluated at any global
/// snapshot column g as Re(sum_k b_k phi_k exp(omega_k (g - origin) dt)).
struct ModalTerm {
    Eigen::MatrixXcd modes;       // n x M
    Eigen::VectorXcd amplitudes;  // M
    Eigen::VectorXcd frequencies; // M, continuous-time omega
    double dt = 1.0;
    std::size_t origin = 0;       // global column where the exponentials are 1

    std::size_t size() const noexcept { return static_cast<std::size_t>(amplitudes.size()); }

    /// Complex temporal weights b_k exp(omega_k (g - origin) dt) for one column.
    Eigen::VectorXcd weights(std::size_t g) const;
    /// Real reconstruction at column g (n entries).
    Eigen::VectorXd evaluate(std::size_t g) const;
};

/// Temporal factor exp(omega * steps * dt) with the lambda = 0 convention
/// (omega real part -inf): 1 at zero steps, 0 afterwards.
std::complex<double> modal_weight(std::complex<double> omega, double steps, double dt);

/// Delay-embedded scalar signal minus a sum of modal terms.
///
/// Column j (0 <= j <= c) of X is samples[first + j .. first + j + n - 1]
/// minus the evaluation of every term at global column first + j. Products
/// with the Hankel part use FFT correlation against a precomputed transform
/// of the covering sample segment, so one matvec costs O((n + c) log(n + c)).
class HankelSnapshots final : public SnapshotOperator {
public:
    HankelSnapshots(std::span<const double> samples, std::size_t rows, std::size_t first_column,
                    std::size_t columns, std::vector<std::shared_ptr<const ModalTerm>> terms = {});
    ~HankelSnapshots() override;

    std::size_t rows() const override { return rows_; }
    std::size_t columns() const override { return columns_; }
    std::size_t first_column() const noexcept { return first_; }
    Eigen::MatrixXd multiply(std::size_t first, const Eigen::MatrixXd& v) const override;
    Eigen::MatrixXd multiply_transpose(std::size_t first, std::size_t count,
                                       const Eigen::MatrixXd& u) const override;
    Eigen::VectorXd column(std::size_t j) const override;
    Eigen::MatrixXd dense() const override;

private:
    struct Fft;
    /// Stacked real factors of all terms: X_corr[:, j] = P * Q(:, j).
    Eigen::MatrixXd correction_rows() const;                             // n x q
    Eigen::MatrixXd correction_cols(std::size_t first, std::size_t count) const;  // q x count

    std::span<const double> segment_;  // n + c samples covering X
    std::size_t rows_;
    std::size_t first_;
    std::size_t columns_;
    std::vector<std::shared_ptr<const ModalTerm>> terms_;
    Eigen::MatrixXd p_;  // cached correction_rows()
    std::unique_ptr<Fft> fft_;
};

}  // namespace gearmr
