#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include "gearmr/error.hpp"
#include "gearmr/timeseries.hpp"

using namespace gearmr;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

}  // namespace

TEST_CASE("parse_csv reads a two-column signal and infers dt") {
    const auto ts = parse_csv("0,1.0\n0.015,2.0\n0.030,3.0", std::nullopt);
    REQUIRE(ts.size() == 3);
    CHECK(ts[0] == 1.0);
    CHECK(ts[2] == 3.0);
    CHECK(ts.dt() == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(ts.t0() == 0.0);
}

TEST_CASE("parse_csv one-column file uses dt override") {
    const auto ts = parse_csv("1\n2\n3\n", 0.5);
    CHECK(ts.size() == 3);
    CHECK(ts.dt() == 0.5);
    CHECK(kind_of([] { (void)parse_csv("1\n2\n3\n", std::nullopt); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("parse_csv accepts headers and CRLF") {
    const auto a = parse_csv("time,value\r\n0,4\r\n0.5,5\r\n", std::nullopt);
    CHECK(a.size() == 2);
    CHECK(a.dt() == 0.5);
    const auto b = parse_csv("value\n7\n8\n", 2.0);
    CHECK(b[1] == 8.0);
}

TEST_CASE("parse_csv rejects irregular, short and malformed input") {
    CHECK(kind_of([] { (void)parse_csv("0,1\n0.015,2\n0.031,3\n", std::nullopt); }) ==
          ErrorKind::NonuniformSampling);
    CHECK(kind_of([] { (void)parse_csv("0,1\n", std::nullopt); }) ==
          ErrorKind::InsufficientSamples);
    CHECK(kind_of([] { (void)parse_csv("0,1\n0.5,abc\n", std::nullopt); }) == ErrorKind::Parse);
    CHECK(kind_of([] { (void)parse_csv("0,1\n0.5,2\n", 0.25); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("load_csv reads from disk and reports missing files") {
    const auto path = std::filesystem::temp_directory_path() / "gearmr_ts_test.csv";
    {
        std::ofstream out(path);
        out << "0,1\n0.25,2\n0.5,3\n";
    }
    const auto ts = load_csv(path);
    CHECK(ts.size() == 3);
    CHECK(ts.dt() == 0.25);
    std::filesystem::remove(path);
    CHECK(kind_of([&] { (void)load_csv(path); }) == ErrorKind::Io);
}

TEST_CASE("TimeSeries validates its invariants") {
    CHECK_THROWS_AS(TimeSeries({1.0}, 1.0), Error);
    CHECK_THROWS_AS(TimeSeries({1.0, 2.0}, 0.0), Error);
    CHECK_THROWS_AS(TimeSeries({1.0, std::nan("")}, 1.0), Error);
}

TEST_CASE("delay_embed follows the Hankel indexing contract") {
    const TimeSeries ts({0, 1, 2, 3, 4}, 1.0);
    const auto p = delay_embed(ts, 2, 2);
    REQUIRE(p.rows() == 3);
    REQUIRE(p.columns() == 2);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t r = 0; r < 3; ++r) {
            CHECK(p.y(r, c) == static_cast<double>(c + r));
            CHECK(p.ybar(r, c) == static_cast<double>(c + 1 + r));
        }
    CHECK(delay_embed(ts, 2).columns() == 2);
    CHECK(kind_of([&] { (void)delay_embed(ts, 2, 3); }) == ErrorKind::InsufficientSamples);
}

TEST_CASE("delay_embed maximal column count for long signals") {
    std::vector<double> s(40201);
    std::iota(s.begin(), s.end(), 0.0);
    const auto p = delay_embed(TimeSeries(std::move(s), 0.015), 32000);
    CHECK(p.columns() == 40201 - 32001);
}

TEST_CASE("Hankel pair reproduces the sample stream") {
    std::vector<double> s(50);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(0.3 * static_cast<double>(i));
    const TimeSeries ts(s, 0.1);
    const auto p = delay_embed(ts, 7);
    std::vector<double> rebuilt;
    for (std::size_t c = 0; c < p.columns(); ++c) rebuilt.push_back(p.y(0, c));
    for (std::size_t r = 0; r < p.rows(); ++r) rebuilt.push_back(p.ybar(r, p.columns() - 1));
    CHECK(rebuilt == s);
    const auto last = p.snapshot(p.columns());
    CHECK(last.front() == s[p.columns()]);
}

TEST_CASE("angle_to_index") {
    const double w = 0.5 / 16.0;
    CHECK(angle_to_index(360.0, w, 0.015) == 13404);
    CHECK(angle_to_index(0.0, w, 0.015) == 0);
    // 67 deg is 2494.66 samples, which rounds to 2495.
    const double exact = 67.0 * std::numbers::pi / 180.0 / (w * 0.015);
    CHECK(exact == doctest::Approx(2494.657).epsilon(1e-6));
    CHECK(angle_to_index(67.0, w, 0.015) == 2495);
    CHECK(angle_to_index(-5.0, w, 0.015) == 0);
    std::size_t prev = 0;
    for (double a = 0.0; a < 720.0; a += 0.37) {
        const auto k = angle_to_index(a, w, 0.015);
        CHECK(k >= prev);
        prev = k;
    }
}
