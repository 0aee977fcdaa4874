#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gearmr/error.hpp"
#include "gearmr/mrdmd.hpp"

using namespace gearmr;

namespace {

TimeSeries damped_quarter_cycle(std::size_t len, double dt) {
    const double span = static_cast<double>(len - 1) * dt;
    std::vector<double> s(len);
    for (std::size_t k = 0; k < len; ++k) {
        const double t = static_cast<double>(k) * dt;
        s[k] = std::exp(-0.3 * t / span) * std::cos(2.0 * std::numbers::pi * 0.25 * t / span + 0.4);
    }
    return TimeSeries(s, dt);
}

TimeSeries noise(std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> s(len);
    for (auto& v : s) v = g(rng);
    return TimeSeries(s, 0.05);
}

Eigen::VectorXd snap(const DelayPair& p, std::size_t i) {
    const auto s = p.snapshot(i);
    return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

void check_cycle_bound(const MrDmdTree& tree) {
    for (const auto& n : tree.nodes()) {
        const double duration = n.t_hi - n.t_lo;
        for (std::size_t k = 0; k < n.retained.size(); ++k) {
            const double cycles = std::abs(n.retained.frequencies[static_cast<Eigen::Index>(k)].imag()) /
                                  (2.0 * std::numbers::pi) * duration;
            CHECK(cycles <= tree.params().rho * (1.0 + 1e-12));
        }
    }
}

bool same_nodes(const MrDmdNode& a, const MrDmdNode& b) {
    return a.level == b.level && a.bin == b.bin && a.column_begin == b.column_begin &&
           a.column_end == b.column_end && a.retained.eigenvalues == b.retained.eigenvalues &&
           a.retained.amplitudes == b.retained.amplitudes && a.retained.modes == b.retained.modes;
}

}  // namespace

TEST_CASE("slow decaying oscillation is captured at the first level") {
    const auto ts = damped_quarter_cycle(400, 0.1);
    const auto pair = delay_embed(ts, 20);
    MrDmdParams params;
    params.levels = 2;
    const auto tree = mrdmd(pair, params);
    REQUIRE(tree.nodes().size() == 3);

    // The first node equals a plain DMD restricted to slow modes.
    const auto plain = dmd(pair, params.rank_policy);
    const auto slow = slow_filter(plain, static_cast<double>(pair.columns()) * pair.dt(), 1.0);
    const auto& root = tree.nodes().front();
    REQUIRE(root.retained.size() == slow.size());
    CHECK((root.retained.modes * root.retained.amplitudes.asDiagonal() -
           slow.modes * slow.amplitudes.asDiagonal()).norm() < 1e-8 * snap(pair, 0).norm());

    double worst = 0.0;
    for (std::size_t i = 0; i < pair.columns(); i += 7) {
        const auto y = snap(pair, i);
        worst = std::max(worst, residual(tree, pair, i).norm() / y.norm());
        CHECK(level_component(tree, 2, i).norm() <= 1e-6 * y.norm());
    }
    CHECK(worst <= 1e-6);
    const std::vector<std::size_t> all{1, 2};
    CHECK((partial_reconstruction(tree, all, 0) - snap(pair, 0)).norm() <= 1e-6 * snap(pair, 0).norm());
}

TEST_CASE("single level tree is one filtered DMD") {
    const auto pair = delay_embed(noise(300, 2), 40);
    MrDmdParams params;
    const auto tree = mrdmd(pair, params);
    REQUIRE(tree.nodes().size() == 1);
    const auto slow = slow_filter(dmd(pair), static_cast<double>(pair.columns()) * pair.dt(), 1.0);
    const auto& root = tree.nodes().front();
    REQUIRE(root.retained.size() == slow.size());
    const std::vector<std::size_t> idx{0};
    const Eigen::VectorXd expect = reconstruct(slow, idx).values.col(0);
    CHECK((level_component(tree, 1, 0) - expect).norm() <= 1e-9 * expect.norm() + 1e-12);
    CHECK((residual(tree, pair, 0) - (snap(pair, 0) - expect)).norm() <= 1e-9 * snap(pair, 0).norm());
}

TEST_CASE("white noise tree structure and cycle bound") {
    const auto pair = delay_embed(noise(500, 4), 30);
    MrDmdParams params;
    params.levels = 3;
    const auto tree = mrdmd(pair, params);
    CHECK(tree.nodes().size() == 7);
    CHECK(tree.complete());
    check_cycle_bound(tree);
    // Bins partition the columns at each level, odd splits favour the right.
    for (std::size_t l = 1; l <= 3; ++l) {
        std::size_t covered = 0;
        for (const auto& n : tree.nodes())
            if (n.level == l) covered += n.columns();
        CHECK(covered == pair.columns());
    }
    const auto* left = tree.find(2, 1);
    const auto* right = tree.find(2, 2);
    REQUIRE(left);
    REQUIRE(right);
    CHECK(left->columns() == pair.columns() / 2);
    CHECK(right->columns() == pair.columns() - pair.columns() / 2);
}

TEST_CASE("slow_filter bounds") {
    const double duration = 8.0;
    DmdResult r;
    r.modes = Eigen::MatrixXcd::Identity(3, 3);
    r.first_snapshot = Eigen::VectorXd::Ones(3);
    r.eigenvalues = Eigen::VectorXcd::Ones(3);
    r.frequencies.resize(3);
    const double unit = 2.0 * std::numbers::pi / duration;
    r.frequencies << std::complex<double>(0.0, 0.5 * unit), std::complex<double>(0.0, 3.0 * unit),
        std::complex<double>(-0.1, 1.0 * unit);
    r.amplitudes = Eigen::VectorXcd::Ones(3);
    r.zero_eigenvalue.assign(3, false);
    const auto kept = slow_filter(r, duration, 1.0);
    REQUIRE(kept.size() == 2);
    CHECK(kept.frequencies[0] == r.frequencies[0]);
    CHECK(kept.frequencies[1] == r.frequencies[2]);
    CHECK(slow_filter(r, duration, 0.1).size() == 0);
}

TEST_CASE("empty node contributes zero") {
    // A constant signal is fully captured at level 1; deeper bins see only
    // rounding noise or nothing.
    const auto pair = delay_embed(TimeSeries(std::vector<double>(200, 1.5), 0.1), 10);
    MrDmdParams params;
    params.levels = 1;
    const auto tree = mrdmd(pair, params);
    const std::vector<std::size_t> none;
    CHECK(partial_reconstruction(tree, none, 3).norm() == 0.0);

    const auto zero = delay_embed(TimeSeries(std::vector<double>(200, 0.0), 0.1), 10);
    const auto ztree = mrdmd(zero, params);
    CHECK(ztree.nodes().front().degenerate);
    CHECK(level_component(ztree, 1, 0).norm() == 0.0);
}

TEST_CASE("conservation on random signals and parameters") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t len = std::uniform_int_distribution<std::size_t>(300, 900)(rng);
        const std::size_t d = std::uniform_int_distribution<std::size_t>(5, 60)(rng);
        const auto pair = delay_embed(noise(len, rng()), d);
        MrDmdParams params;
        params.levels = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        params.rho = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
        params.rank_policy = RankPolicy::hard_cap(std::uniform_int_distribution<std::size_t>(5, 40)(rng));
        const auto tree = mrdmd(pair, params);
        check_cycle_bound(tree);
        for (std::size_t i = 0; i < pair.columns(); ++i) {
            Eigen::VectorXd sum = residual(tree, pair, i);
            for (std::size_t l = 1; l <= params.levels; ++l) sum += level_component(tree, l, i);
            CHECK((sum - snap(pair, i)).norm() <= 1e-10 * snap(pair, i).norm());
        }
    }
}

TEST_CASE("threaded, sequential and pruned trees agree bitwise") {
    const auto pair = delay_embed(noise(5200, 8), 4200);
    MrDmdParams params;
    params.levels = 4;
    params.rank_policy = RankPolicy::hard_cap(40);
    params.threads = 1;
    const auto seq = mrdmd(pair, params);
    params.threads = 4;
    const auto par = mrdmd(pair, params);
    REQUIRE(seq.nodes().size() == par.nodes().size());
    for (std::size_t k = 0; k < seq.nodes().size(); ++k) CHECK(same_nodes(seq.nodes()[k], par.nodes()[k]));

    const std::vector<std::size_t> only{0, 700};
    const auto pruned = mrdmd(pair, params, only);
    CHECK_FALSE(pruned.complete());
    for (const auto& n : pruned.nodes()) {
        const auto* full = seq.find(n.level, n.bin);
        REQUIRE(full);
        CHECK(same_nodes(n, *full));
    }
    CHECK(residual(pruned, pair, 700) == residual(seq, pair, 700));
    CHECK_THROWS_AS(level_component(pruned, 4, 400), Error);
}

TEST_CASE("parameter validation names min_bin_columns") {
    const auto pair = delay_embed(noise(300, 1), 100);
    MrDmdParams params;
    params.levels = 20;
    try {
        (void)mrdmd(pair, params);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
        CHECK(std::string(e.what()).find("min_bin_columns") != std::string::npos);
    }
}

TEST_CASE("tree export lists every node") {
    const auto pair = delay_embed(noise(200, 3), 10);
    MrDmdParams params;
    params.levels = 2;
    const auto json = tree_to_json(mrdmd(pair, params));
    CHECK(json.find("\"eigenvalues\"") != std::string::npos);
    CHECK(json.find("\"omega_abs\"") != std::string::npos);
    std::size_t count = 0;
    for (std::size_t at = json.find("\"level\""); at != std::string::npos; at = json.find("\"level\"", at + 1))
        ++count;
    CHECK(count == 3);
}
