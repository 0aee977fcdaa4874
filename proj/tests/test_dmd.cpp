#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "gearmr/dmd.hpp"
#include "gearmr/error.hpp"
#include "gearmr/snapshots.hpp"

using namespace gearmr;
using cd = std::complex<double>;

namespace {

std::vector<cd> sorted(const Eigen::VectorXcd& v) {
    std::vector<cd> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](cd a, cd b) {
        if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

Eigen::MatrixXd rotation_data(int steps) {
    const double a = std::numbers::pi / 8.0;
    Eigen::Matrix2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    Eigen::MatrixXd x(2, steps);
    x.col(0) << 1.0, 0.3;
    for (int k = 1; k < steps; ++k) x.col(k) = r * x.col(k - 1);
    return x;
}

}  // namespace

TEST_CASE("constant signal has a single unit eigenvalue") {
    const auto pair = delay_embed(TimeSeries({2.5, 2.5, 2.5, 2.5}, 1.0), 1);
    const auto res = dmd(pair);
    REQUIRE(res.size() == 1);
    CHECK(std::abs(res.eigenvalues[0] - cd(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(res.frequencies[0]) < 1e-12);
    const std::vector<std::size_t> idx{0, 1, 2};
    const auto rec = reconstruct(res, idx);
    CHECK((rec.values.array() - 2.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("geometric decay") {
    std::vector<double> s(8);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::pow(0.5, static_cast<double>(k));
    const auto res = dmd(delay_embed(TimeSeries(s, 1.0), 1));
    REQUIRE(res.size() == 1);
    CHECK(std::abs(res.eigenvalues[0] - cd(0.5, 0.0)) < 1e-12);
    CHECK(res.frequencies[0].real() == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(mode_speed(res, 0) == doctest::Approx(0.1103).epsilon(1e-3));
    const std::vector<std::size_t> idx{0, 1, 2, 3};
    const auto rec = reconstruct(res, idx);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(rec.values(0, i) - std::pow(0.5, i)) < 1e-10);
}

TEST_CASE("planar rotation eigenvalues and first snapshot") {
    const auto x = rotation_data(64);
    const auto res = dmd(x, 1.0);
    REQUIRE(res.size() == 2);
    const auto ev = sorted(res.eigenvalues);
    const double a = std::numbers::pi / 8.0;
    CHECK(std::abs(ev[0] - std::polar(1.0, -a)) < 1e-10);
    CHECK(std::abs(ev[1] - std::polar(1.0, a)) < 1e-10);
    for (Eigen::Index k = 0; k < 2; ++k) {
        CHECK(std::abs(res.frequencies[k].real()) < 1e-10);
        CHECK(std::abs(std::abs(res.frequencies[k].imag()) - a) < 1e-10);
        CHECK(mode_speed(res, static_cast<std::size_t>(k)) == doctest::Approx(0.0625).epsilon(1e-10));
    }
    const std::vector<std::size_t> idx{0};
    const auto rec = reconstruct(res, idx);
    CHECK((rec.values.col(0) - x.col(0)).norm() < 1e-10);
    CHECK(rec.imaginary_norm <= 1e-8 * x.norm());
}

TEST_CASE("stationary mode has zero speed") {
    DmdResult r;
    r.frequencies = Eigen::VectorXcd::Zero(1);
    r.eigenvalues = Eigen::VectorXcd::Ones(1);
    CHECK(mode_speed(r, 0) == 0.0);
    CHECK_THROWS_AS(mode_speed(r, 1), Error);
}

TEST_CASE("random diagonalizable linear systems are recovered exactly") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> nd(1, 12);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = nd(rng);
        const int steps = std::uniform_int_distribution<int>(2 * n + 1, 100)(rng);
        // Real eigenvalues and conjugate pairs inside the annulus 0.7..1.
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
        int i = 0;
        while (i < n) {
            const double rad = 0.7 + 0.3 * std::abs(u(rng));
            if (i + 1 < n && u(rng) > 0.0) {
                const double th = 0.2 + 2.5 * std::abs(u(rng));
                block(i, i) = rad * std::cos(th);
                block(i, i + 1) = -rad * std::sin(th);
                block(i + 1, i) = rad * std::sin(th);
                block(i + 1, i + 1) = rad * std::cos(th);
                i += 2;
            } else {
                block(i, i) = (u(rng) > 0 ? 1.0 : -1.0) * rad;
                i += 1;
            }
        }
        Eigen::MatrixXd s(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) s(a, b) = u(rng);
        s += 2.0 * Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd a = s * block * s.inverse();
        Eigen::MatrixXd x(n, steps);
        for (int r = 0; r < n; ++r) x(r, 0) = u(rng);
        for (int k = 1; k < steps; ++k) x.col(k) = a * x.col(k - 1);

        const auto res = dmd(x, 0.5, RankPolicy::fixed(static_cast<std::size_t>(n)));
        REQUIRE(res.size() == static_cast<std::size_t>(n));
        const Eigen::VectorXcd oracle = Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues();
        const auto got = sorted(res.eigenvalues);
        const auto want = sorted(oracle);
        for (int k = 0; k < n; ++k) CHECK(std::abs(got[k] - want[k]) < 1e-8);

        std::vector<std::size_t> idx(static_cast<std::size_t>(steps));
        for (int k = 0; k < steps; ++k) idx[static_cast<std::size_t>(k)] = static_cast<std::size_t>(k);
        const auto rec = reconstruct(res, idx);
        CHECK((rec.values - x).norm() <= 1e-8 * x.norm());
    }
}

TEST_CASE("delay embedding is needed for a scalar sine") {
    const double w = 0.7;
    const double dt = 0.1;
    std::vector<double> s(200);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::sin(w * dt * static_cast<double>(k));
    const TimeSeries ts(s, dt);

    const auto res = dmd(delay_embed(ts, 1));
    REQUIRE(res.size() == 2);
    const auto ev = sorted(res.eigenvalues);
    CHECK(std::abs(ev[0] - std::polar(1.0, -w * dt)) < 1e-8);
    CHECK(std::abs(ev[1] - std::polar(1.0, w * dt)) < 1e-8);

    const auto flat = dmd(delay_embed(ts, 0));
    REQUIRE(flat.size() == 1);
    CHECK(std::abs(flat.eigenvalues[0].imag()) == 0.0);
    std::vector<std::size_t> idx(150);
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    const auto rec = reconstruct(flat, idx);
    double err = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        err += std::pow(rec.values(0, static_cast<Eigen::Index>(k)) - s[k], 2);
        norm += s[k] * s[k];
    }
    CHECK(std::sqrt(err / norm) > 0.5);
}

TEST_CASE("real data gives conjugate-closed spectra") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> s(400);
    for (auto& v : s) v = g(rng);
    const auto res = dmd(delay_embed(TimeSeries(s, 1.0), 30));
    for (Eigen::Index k = 0; k < res.eigenvalues.size(); ++k) {
        double best = 1e300;
        for (Eigen::Index j = 0; j < res.eigenvalues.size(); ++j)
            best = std::min(best, std::abs(res.eigenvalues[j] - std::conj(res.eigenvalues[k])));
        CHECK(best < 1e-10);
    }
}

TEST_CASE("rank policies") {
    const auto x = rotation_data(20);
    auto res = dmd(x, 1.0, RankPolicy::fixed(5));
    CHECK(res.rank_clamped);
    CHECK(res.rank_used == 2);
    res = dmd(x, 1.0, RankPolicy::energy(0.5));
    CHECK(res.rank_used == 1);
    res = dmd(x, 1.0, RankPolicy::hard_cap(1));
    CHECK(res.rank_used == 1);
    CHECK_THROWS_AS(dmd(Eigen::MatrixXd::Zero(3, 5), 1.0), Error);
    CHECK_THROWS_AS(dmd(x, 1.0, RankPolicy::energy(1.5)), Error);
}

TEST_CASE("zero eigenvalue is flagged with -inf growth") {
    Eigen::MatrixXd x(2, 3);
    x << 1, 0, 0, 2, 0, 0;
    const auto res = dmd(x, 1.0);
    bool flagged = false;
    for (std::size_t k = 0; k < res.size(); ++k) {
        if (res.zero_eigenvalue[k]) {
            flagged = true;
            CHECK(std::isinf(res.frequencies[static_cast<Eigen::Index>(k)].real()));
            CHECK(res.frequencies[static_cast<Eigen::Index>(k)].imag() == 0.0);
        }
    }
    CHECK(flagged);
}

TEST_CASE("select_modes refits amplitudes to the first snapshot") {
    const auto x = rotation_data(32);
    const auto res = dmd(x, 1.0);
    const std::vector<std::size_t> keep{0};
    const auto sub = select_modes(res, keep);
    REQUIRE(sub.size() == 1);
    const Eigen::VectorXcd fit = sub.modes.col(0) * sub.amplitudes[0];
    const Eigen::VectorXcd x0 = x.col(0).cast<cd>();
    // Least-squares optimality: residual orthogonal to the mode.
    CHECK(std::abs(sub.modes.col(0).dot(x0 - fit)) < 1e-10);
}

TEST_CASE("Hankel operator products match the dense matrix") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> s(700);
    for (auto& v : s) v = g(rng);
    ModalTerm t;
    t.modes = Eigen::MatrixXcd::Random(101, 3);
    t.amplitudes = Eigen::VectorXcd::Random(3);
    t.frequencies = Eigen::VectorXcd::Random(3) * 0.1;
    t.dt = 0.2;
    t.origin = 40;
    auto term = std::make_shared<const ModalTerm>(t);
    for (std::size_t cols : {10u, 300u}) {
        const HankelSnapshots op(s, 101, 50, cols, {term});
        Eigen::MatrixXd dense(101, static_cast<Eigen::Index>(cols + 1));
        for (std::size_t j = 0; j <= cols; ++j)
            dense.col(static_cast<Eigen::Index>(j)) =
                Eigen::Map<const Eigen::VectorXd>(s.data() + 50 + j, 101) - term->evaluate(50 + j);
        CHECK((op.dense() - dense).norm() < 1e-10 * dense.norm());
        const Eigen::MatrixXd v = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(cols), 4);
        CHECK((op.multiply(1, v) - dense.rightCols(static_cast<Eigen::Index>(cols)) * v).norm() <
              1e-10 * dense.norm() * v.norm());
        const Eigen::MatrixXd uu = Eigen::MatrixXd::Random(101, 3);
        CHECK((op.multiply_transpose(0, cols, uu) -
               dense.leftCols(static_cast<Eigen::Index>(cols)).transpose() * uu)
                  .norm() < 1e-10 * dense.norm() * uu.norm());
        CHECK((op.column(cols) - dense.col(static_cast<Eigen::Index>(cols))).norm() < 1e-12 * dense.norm());
    }
}

TEST_CASE("randomized SVD delivers accurate triplets and is seed-deterministic") {
    std::vector<double> s(6000);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (std::size_t k = 0; k < s.size(); ++k)
        s[k] = std::sin(0.01 * static_cast<double>(k)) + 0.3 * std::cos(0.37 * static_cast<double>(k)) +
               0.01 * g(rng);
    const HankelSnapshots op(s, 4500, 0, 1499);
    DmdOptions opt;
    opt.svd = SvdMethod::Randomized;
    const auto policy = RankPolicy::hard_cap(30);
    const auto a = detail::truncated_svd(op, policy, opt);
    const auto b = detail::truncated_svd(op, policy, opt);
    CHECK(a.s == b.s);
    CHECK(a.u == b.u);
    const Eigen::MatrixXd yv = op.multiply(0, a.v);
    for (Eigen::Index k = 0; k < a.s.size(); ++k)
        CHECK((yv.col(k) - a.s[k] * a.u.col(k)).norm() <= 1e-10 * a.s[0]);

    opt.svd = SvdMethod::Dense;
    const auto d = detail::truncated_svd(op, policy, opt);
    for (Eigen::Index k = 0; k < 4; ++k) CHECK(std::abs(a.s[k] - d.s[k]) < 1e-8 * d.s[0]);
}
