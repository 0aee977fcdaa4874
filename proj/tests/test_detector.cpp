#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "gearmr/detector.hpp"
#include "gearmr/error.hpp"

using namespace gearmr;

namespace {

constexpr double kDt = 0.015;
constexpr double kShaft = 0.5 / 16.0;

// Flat envelope over three revolutions with optional spikes at given angles.
Envelope spiked(std::vector<double> angles, double height, double base = 1.0) {
    Envelope env;
    env.dt = kDt;
    env.t0 = 0.0;
    env.amplitude.assign(40213, base);
    for (double a : angles) env.amplitude[angle_to_index(a, kShaft, kDt)] = height * base;
    env.phase.assign(env.amplitude.size(), 0.0);
    return env;
}

DetectorParams small_params() {
    DetectorParams p;
    p.d = 60;
    p.L = 3;
    p.rank_policy = RankPolicy::hard_cap(20);
    return p;
}

TimeSeries test_signal(std::size_t n) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 0.01);
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * 0.05;
        s[k] = std::sin(0.7 * t) + 0.3 * std::cos(2.9 * t) + g(rng);
    }
    return TimeSeries(s, 0.05);
}

}  // namespace

TEST_CASE("constant envelope has no peaks") {
    const auto r = decide(spiked({}, 1.0), kShaft, DetectorParams{});
    CHECK_FALSE(r.damaged);
    CHECK(r.groups.empty());
}

TEST_CASE("spikes one revolution apart are flagged") {
    const auto r = decide(spiked({67.0, 427.0}, 10.0), kShaft, DetectorParams{});
    CHECK(r.damaged);
    REQUIRE(r.groups.size() == 2);
    CHECK(r.groups[0].ratio == doctest::Approx(10.0));
    CHECK(r.groups[1].ratio == doctest::Approx(10.0));
    CHECK(std::abs(r.groups[0].angle_deg - 67.0) < 0.05);
    CHECK(std::abs(r.groups[1].angle_deg - 427.0) < 0.05);
}

TEST_CASE("single spike does not recur") {
    const auto r = decide(spiked({67.0}, 10.0), kShaft, DetectorParams{});
    CHECK_FALSE(r.damaged);
    CHECK(r.groups.size() == 1);
}

TEST_CASE("spikes not congruent modulo 360 are not flagged") {
    const auto r = decide(spiked({67.0, 447.0}, 10.0), kShaft, DetectorParams{});
    CHECK_FALSE(r.damaged);
    CHECK(r.groups.size() == 2);
}

TEST_CASE("groups are centred on their strongest hit") {
    auto env = spiked({}, 1.0);
    const std::pair<double, double> spikes[] = {{55.0, 4.0}, {59.4, 15.0}, {64.6, 13.0}};
    for (const auto& [angle, height] : spikes) env.amplitude[angle_to_index(angle, kShaft, kDt)] = height;
    const auto r = decide(env, kShaft, DetectorParams{});
    REQUIRE(r.groups.size() == 2);
    CHECK(std::abs(r.groups[0].angle_deg - 59.4) < 0.05);
    CHECK(r.groups[0].samples == 2);
    CHECK(std::abs(r.groups[1].angle_deg - 64.6) < 0.05);
    CHECK(r.groups[1].ratio == doctest::Approx(13.0));
    for (const auto& g : r.groups) CHECK(g.last_deg - g.first_deg <= 10.0);
}

TEST_CASE("spikes inside the edge margin are ignored") {
    // 40213 samples span 1080 degrees; the last 5% start near 1026 degrees.
    const auto r = decide(spiked({10.0, 1070.0}, 10.0), kShaft, DetectorParams{});
    CHECK(r.groups.empty());
}

TEST_CASE("decision is invariant under positive scaling") {
    const auto a = decide(spiked({67.0, 427.0, 787.0}, 5.0), kShaft, DetectorParams{});
    const auto b = decide(spiked({67.0, 427.0, 787.0}, 5.0, 123.5), kShaft, DetectorParams{});
    CHECK(a.damaged == b.damaged);
    CHECK(a.peak_angles_deg() == b.peak_angles_deg());
    REQUIRE(a.groups.size() == b.groups.size());
    for (std::size_t k = 0; k < a.groups.size(); ++k)
        CHECK(a.groups[k].ratio == doctest::Approx(b.groups[k].ratio).epsilon(1e-14));
}

TEST_CASE("raising kappa never turns a negative into a positive") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1080.0);
    std::lognormal_distribution<double> amp(0.0, 0.6);
    for (int trial = 0; trial < 20; ++trial) {
        Envelope env = spiked({}, 1.0);
        for (auto& a : env.amplitude) a = amp(rng);
        for (int s = 0; s < 6; ++s) env.amplitude[angle_to_index(u(rng), kShaft, kDt)] = 4.0 + s;
        bool seen_negative = false;
        for (double kappa = 1.5; kappa < 12.0; kappa += 0.5) {
            DetectorParams p;
            p.kappa = kappa;
            const bool damaged = decide(env, kShaft, p).damaged;
            if (seen_negative) CHECK_FALSE(damaged);
            seen_negative = seen_negative || !damaged;
        }
    }
}

TEST_CASE("pooled envelopes use global shaft angle") {
    // Two short envelopes, each containing one spike at 67 mod 360.
    Envelope a = spiked({67.0}, 8.0);
    a.amplitude.resize(16001);
    Envelope b = a;
    b.t0 = 14400 * kDt;
    b.amplitude.assign(16001, 1.0);
    b.amplitude[angle_to_index(427.0, kShaft, kDt) - 14400] = 8.0;
    const std::vector<Envelope> both{a, b};
    CHECK_FALSE(decide(a, kShaft, DetectorParams{}).damaged);
    const auto r = decide(both, kShaft, DetectorParams{});
    CHECK(r.damaged);
    REQUIRE(r.groups.size() == 2);
    CHECK(std::abs(r.groups[1].angle_deg - 427.0) < 0.05);
}

TEST_CASE("parameter validation") {
    DetectorParams p;
    p.kappa = 1.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.window_deg = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.min_recurrences = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK_NOTHROW(DetectorParams{}.validate());
}

TEST_CASE("residual selection indices") {
    CHECK(ResidualSelection::first().indices(16000, 24212) == std::vector<std::size_t>{0});
    CHECK(ResidualSelection::cover().indices(16000, 24212) ==
          std::vector<std::size_t>{0, 14400, 24211});
    CHECK(ResidualSelection::every(10000).indices(16000, 24212) ==
          std::vector<std::size_t>{0, 10000, 20000});
    CHECK(ResidualSelection::parse("stride:7").stride == 7);
    CHECK(ResidualSelection::parse("cover").kind == ResidualSelection::Kind::Cover);
    CHECK_THROWS_AS(ResidualSelection::parse("stride:0"), Error);
    CHECK_THROWS_AS(ResidualSelection::parse("all"), Error);
}

TEST_CASE("short signal error names the minimum sample count") {
    DetectorParams p;
    p.d = 100;
    p.L = 5;
    try {
        analyze(test_signal(150), p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientSamples);
        CHECK(std::string(e.what()).find("165") != std::string::npos);
    }
    CHECK(min_samples_for(p) == 165);
}

TEST_CASE("analyze conserves each residual snapshot and is deterministic") {
    const DetectorParams p = small_params();
    const TimeSeries x = test_signal(400);
    const Analysis a = analyze(x, p);
    CHECK(a.columns == 400 - 61);
    CHECK(a.level_components.size() == 3);
    REQUIRE(a.traces.size() == 8);
    CHECK(a.traces[1].index == 54);
    CHECK(a.traces.back().index == a.columns - 1);
    const DelayPair pair = delay_embed(x, p.d);
    for (const auto& tr : a.traces) {
        const auto snap = pair.snapshot(tr.index);
        Eigen::VectorXd total = tr.residual;
        for (std::size_t l = 1; l <= p.L; ++l) total += level_component(a.tree, l, tr.index);
        for (std::size_t r = 0; r < snap.size(); ++r) CHECK(total[r] == doctest::Approx(snap[r]).epsilon(1e-10));
        CHECK(tr.envelope.t0 == doctest::Approx(static_cast<double>(tr.index) * 0.05));
    }
    const Analysis b = analyze(x, p);
    for (std::size_t k = 0; k < a.traces.size(); ++k)
        CHECK((a.traces[k].residual.array() == b.traces[k].residual.array()).all());
}

TEST_CASE("report JSON carries the documented fields") {
    DetectionReport r = decide(spiked({67.0, 427.0}, 10.0), kShaft, DetectorParams{});
    r.input = "s.csv";
    r.seed = 7;
    const std::string js = report_to_json(r);
    for (const char* key : {"\"damaged\"", "\"peak_angles_deg\"", "\"peak_ratios\"", "\"residual_norm\"",
                            "\"params\"", "\"provenance\"", "\"tool_version\"", "\"kappa\""})
        CHECK(js.find(key) != std::string::npos);
}

TEST_CASE("detector params JSON round trip") {
    DetectorParams p;
    p.d = 32000;
    p.L = 11;
    p.kappa = 4.5;
    p.rank_policy = RankPolicy::hard_cap(150);
    p.selection = ResidualSelection::every(5000);
    const DetectorParams q = params_from_json(params_to_json(p));
    CHECK(q.d == 32000);
    CHECK(q.L == 11);
    CHECK(q.kappa == 4.5);
    CHECK(std::get<RankPolicy::HardCap>(q.rank_policy.mode).r_max == 150);
    CHECK(q.selection.name() == "stride:5000");
    CHECK_THROWS_AS(params_from_json("{\"delay\": 3}"), Error);
    CHECK_THROWS_AS(params_from_json("{\"kappa\": 0.5}"), Error);
}
