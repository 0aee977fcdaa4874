#include "gearmr/detector.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <variant>

#include "gearmr/error.hpp"

namespace gearmr {

std::vector<std::size_t> ResidualSelection::indices(std::size_t delay, std::size_t columns) const {
    if (columns == 0) fail(ErrorKind::InvalidArgument, "residual selection needs at least one column");
    std::vector<std::size_t> out{0};
    std::size_t step = 0;
    switch (kind) {
        case Kind::First:
            return out;
        case Kind::Cover:
            step = std::max<std::size_t>(1, static_cast<std::size_t>(0.9 * static_cast<double>(delay + 1)));
            break;
        case Kind::Stride:
            step = stride;
            break;
    }
    if (step == 0) fail(ErrorKind::InvalidArgument, "residual stride must be positive");
    for (std::size_t i = step; i < columns; i += step) out.push_back(i);
    if (kind == Kind::Cover && out.back() != columns - 1) out.push_back(columns - 1);
    return out;
}

std::string ResidualSelection::name() const {
    switch (kind) {
        case Kind::First: return "first";
        case Kind::Cover: return "cover";
        case Kind::Stride: return "stride:" + std::to_string(stride);
    }
    return {};
}

ResidualSelection ResidualSelection::parse(const std::string& text) {
    if (text == "first") return first();
    if (text == "cover") return cover();
    if (text.starts_with("stride:")) {
        const std::string num = text.substr(7);
        std::size_t pos = 0;
        unsigned long long k = 0;
        try {
            k = std::stoull(num, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == num.size() && pos > 0 && k > 0) return every(static_cast<std::size_t>(k));
    }
    fail(ErrorKind::InvalidArgument,
         "residual selection '" + text + "' is not one of first, cover, stride:<k>");
}

MrDmdParams DetectorParams::mrdmd_params() const {
    MrDmdParams p;
    p.levels = L;
    p.rho = rho;
    p.rank_policy = rank_policy;
    p.min_bin_columns = min_bin_columns;
    p.threads = threads;
    p.dmd_options.seed = seed;
    return p;
}

void DetectorParams::validate() const {
    if (d == 0) fail(ErrorKind::InvalidArgument, "delay d must be at least 1");
    if (L == 0) fail(ErrorKind::InvalidArgument, "levels L must be at least 1");
    if (!(rho > 0.0)) fail(ErrorKind::InvalidArgument, "rho must be positive");
    if (!(kappa > 1.0)) fail(ErrorKind::InvalidArgument, "kappa must exceed 1");
    if (!(window_deg > 0.0) || window_deg >= 60.0)
        fail(ErrorKind::InvalidArgument, "window_deg must lie in (0, 60)");
    if (min_recurrences == 0) fail(ErrorKind::InvalidArgument, "min_recurrences must be at least 1");
    if (!(edge_fraction >= 0.0 && edge_fraction < 0.5))
        fail(ErrorKind::InvalidArgument, "edge_fraction must lie in [0, 0.5)");
    if (selection.kind == ResidualSelection::Kind::Stride && selection.stride == 0)
        fail(ErrorKind::InvalidArgument, "residual stride must be positive");
}

std::size_t min_samples_for(const DetectorParams& params) {
    return params.d + 1 + min_columns_for(params.L, params.min_bin_columns);
}

Analysis analyze(const TimeSeries& x, const DetectorParams& params) {
    params.validate();
    const std::size_t needed = min_samples_for(params);
    if (x.size() < needed)
        fail(ErrorKind::InsufficientSamples,
             "signal has " + std::to_string(x.size()) + " samples; d = " + std::to_string(params.d) +
                 " and L = " + std::to_string(params.L) + " with min_bin_columns = " +
                 std::to_string(params.min_bin_columns) + " need at least " + std::to_string(needed));
    const DelayPair pair = delay_embed(x, params.d);
    const MrDmdParams mp = params.mrdmd_params();
    check_mrdmd_params(mp, pair.columns());
    const auto indices = params.selection.indices(params.d, pair.columns());
    MrDmdTree tree = mrdmd(pair, mp, indices);

    std::vector<ResidualTrace> traces;
    for (std::size_t i : indices) {
        ResidualTrace tr;
        tr.index = i;
        tr.residual = residual(tree, pair, i);
        const double t0 = x.t0() + static_cast<double>(i) * x.dt();
        TimeSeries r(std::vector<double>(tr.residual.begin(), tr.residual.end()), x.dt(), t0,
                     x.unit_label());
        tr.envelope = envelope(r);
        traces.push_back(std::move(tr));
    }
    std::vector<Eigen::VectorXd> levels;
    for (std::size_t l = 1; l <= params.L; ++l) levels.push_back(level_component(tree, l, 0));
    return Analysis{params.d,         pair.columns(),    x.dt(), x.t0(), std::move(traces),
                    std::move(levels), std::move(tree)};
}

std::vector<double> peak_ratios(const Envelope& env, double edge_fraction) {
    const std::size_t n = env.amplitude.size();
    const auto edge = static_cast<std::size_t>(edge_fraction * static_cast<double>(n));
    std::vector<double> out(n, 0.0);
    if (n == 0 || 2 * edge >= n) return out;
    std::vector<double> interior(env.amplitude.begin() + static_cast<std::ptrdiff_t>(edge),
                                 env.amplitude.end() - static_cast<std::ptrdiff_t>(edge));
    const std::size_t k = interior.size();
    std::nth_element(interior.begin(), interior.begin() + static_cast<std::ptrdiff_t>(k / 2),
                     interior.end());
    double median = interior[k / 2];
    if (k % 2 == 0) {
        const double below = *std::max_element(interior.begin(),
                                               interior.begin() + static_cast<std::ptrdiff_t>(k / 2));
        median = 0.5 * (median + below);
    }
    if (!(median > 0.0)) return out;
    for (std::size_t j = edge; j < n - edge; ++j) out[j] = env.amplitude[j] / median;
    return out;
}

namespace {

struct Hit {
    double angle;
    double ratio;
};

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Strongest unclaimed hit first; each group claims the unclaimed hits
// within window_deg of its peak. Hits must be sorted by angle.
std::vector<PeakGroup> group_hits(const std::vector<Hit>& hits, double window_deg) {
    std::vector<std::size_t> order(hits.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return hits[a].ratio > hits[b].ratio; });
    std::vector<bool> claimed(hits.size(), false);
    std::vector<PeakGroup> groups;
    for (std::size_t k : order) {
        if (claimed[k]) continue;
        const Hit& peak = hits[k];
        PeakGroup g{peak.angle, peak.ratio, peak.angle, peak.angle, 0};
        auto lo = std::lower_bound(hits.begin(), hits.end(), peak.angle - window_deg,
                                   [](const Hit& h, double a) { return h.angle < a; });
        for (auto it = lo; it != hits.end() && it->angle <= peak.angle + window_deg; ++it) {
            const auto j = static_cast<std::size_t>(it - hits.begin());
            if (claimed[j]) continue;
            claimed[j] = true;
            g.first_deg = std::min(g.first_deg, it->angle);
            g.last_deg = std::max(g.last_deg, it->angle);
            ++g.samples;
        }
        groups.push_back(g);
    }
    std::sort(groups.begin(), groups.end(),
              [](const PeakGroup& a, const PeakGroup& b) { return a.angle_deg < b.angle_deg; });
    return groups;
}

// Largest number of distinct revolutions whose hits fit in one arc of
// window_deg modulo 360.
std::size_t max_recurrences(const std::vector<Hit>& hits, double window_deg) {
    const std::size_t n = hits.size();
    std::vector<std::pair<double, double>> by_phase;  // (phase, angle)
    by_phase.reserve(2 * n);
    for (const Hit& h : hits) {
        const double phase = h.angle - 360.0 * std::floor(h.angle / 360.0);
        by_phase.emplace_back(phase, h.angle);
    }
    std::sort(by_phase.begin(), by_phase.end());
    for (std::size_t k = 0; k < n; ++k)
        by_phase.emplace_back(by_phase[k].first + 360.0, by_phase[k].second);
    std::size_t best = 0;
    std::size_t end = 0;
    std::set<long long> revs;
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = by_phase[k].first;
        const double anchor = by_phase[k].second;
        end = std::max(end, k);
        while (end < 2 * n && by_phase[end].first - lo <= window_deg) ++end;
        revs.clear();
        for (std::size_t j = k; j < end; ++j)
            revs.insert(std::llround((by_phase[j].second - anchor - (by_phase[j].first - lo)) / 360.0));
        best = std::max(best, revs.size());
    }
    return best;
}

}  // namespace

DetectionReport decide(std::span<const Envelope> envs, double omega_shaft,
                       const DetectorParams& params) {
    params.validate();
    std::vector<Hit> hits;
    for (const Envelope& env : envs) {
        const auto ratio = peak_ratios(env, params.edge_fraction);
        for (std::size_t j = 0; j < ratio.size(); ++j) {
            if (ratio[j] < params.kappa) continue;
            const double t = env.t0 + static_cast<double>(j) * env.dt;
            hits.push_back({t * omega_shaft * kRadToDeg, ratio[j]});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.angle < b.angle || (a.angle == b.angle && a.ratio > b.ratio);
    });
    DetectionReport report;
    report.params = params;
    report.groups = group_hits(hits, params.window_deg);
    report.damaged = max_recurrences(hits, params.window_deg) >= params.min_recurrences;
    return report;
}

DetectionReport decide(const Envelope& env, double omega_shaft, const DetectorParams& params) {
    return decide(std::span<const Envelope>(&env, 1), omega_shaft, params);
}

DetectionReport detect(const TimeSeries& x, double omega_shaft, const DetectorParams& params) {
    const Analysis a = analyze(x, params);
    std::vector<Envelope> envs;
    for (const auto& tr : a.traces) envs.push_back(tr.envelope);
    DetectionReport report = decide(envs, omega_shaft, params);
    report.residual_norm = a.traces.front().residual.norm();
    return report;
}

std::vector<double> DetectionReport::peak_angles_deg() const {
    std::vector<double> out;
    for (const auto& g : groups) out.push_back(g.angle_deg);
    return out;
}

std::vector<double> DetectionReport::peak_ratios() const {
    std::vector<double> out;
    for (const auto& g : groups) out.push_back(g.ratio);
    return out;
}

namespace {

nlohmann::json rank_policy_json(const RankPolicy& p) {
    return std::visit(
        [](const auto& m) -> nlohmann::json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, RankPolicy::Fixed>)
                return {{"kind", "fixed"}, {"r", m.r}};
            else if constexpr (std::is_same_v<T, RankPolicy::Energy>)
                return {{"kind", "energy"}, {"threshold", m.threshold}};
            else
                return {{"kind", "hard_cap"}, {"r_max", m.r_max}, {"sv_floor", m.sv_floor}};
        },
        p.mode);
}

RankPolicy rank_policy_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "fixed") return RankPolicy::fixed(j.at("r").get<std::size_t>());
    if (kind == "energy") return RankPolicy::energy(j.at("threshold").get<double>());
    if (kind == "hard_cap")
        return RankPolicy::hard_cap(j.at("r_max").get<std::size_t>(), j.value("sv_floor", 1e-12));
    fail(ErrorKind::Parse, "rank_policy kind '" + kind + "' is not fixed, energy or hard_cap");
}

nlohmann::json params_json(const DetectorParams& p) {
    return {{"d", p.d},
            {"L", p.L},
            {"rho", p.rho},
            {"rank_policy", rank_policy_json(p.rank_policy)},
            {"min_bin_columns", p.min_bin_columns},
            {"kappa", p.kappa},
            {"window_deg", p.window_deg},
            {"min_recurrences", p.min_recurrences},
            {"edge_fraction", p.edge_fraction},
            {"residual_selection", p.selection.name()},
            {"seed", p.seed}};
}

}  // namespace

std::string params_to_json(const DetectorParams& params) { return params_json(params).dump(2) + "\n"; }

DetectorParams params_from_json(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Parse, std::string("detector config: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Parse, "detector config must be a JSON object");
    DetectorParams p;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "d") p.d = v.get<std::size_t>();
            else if (key == "L") p.L = v.get<std::size_t>();
            else if (key == "rho") p.rho = v.get<double>();
            else if (key == "rank_policy") p.rank_policy = rank_policy_from_json(v);
            else if (key == "min_bin_columns") p.min_bin_columns = v.get<std::size_t>();
            else if (key == "kappa") p.kappa = v.get<double>();
            else if (key == "window_deg") p.window_deg = v.get<double>();
            else if (key == "min_recurrences") p.min_recurrences = v.get<std::size_t>();
            else if (key == "edge_fraction") p.edge_fraction = v.get<double>();
            else if (key == "residual_selection") p.selection = ResidualSelection::parse(v.get<std::string>());
            else if (key == "threads") p.threads = v.get<std::size_t>();
            else if (key == "seed") p.seed = v.get<std::uint64_t>();
            else fail(ErrorKind::Parse, "detector config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("detector config: ") + e.what());
    }
    p.validate();
    return p;
}

std::string report_to_json(const DetectionReport& report) {
    using nlohmann::json;
    json doc;
    doc["damaged"] = report.damaged;
    doc["peak_angles_deg"] = report.peak_angles_deg();
    doc["peak_ratios"] = report.peak_ratios();
    doc["residual_norm"] = report.residual_norm;
    doc["params"] = params_json(report.params);
    json prov;
    prov["input"] = report.input;
    prov["seed"] = report.seed ? json(*report.seed) : json(nullptr);
    prov["tool_version"] = report.tool_version;
    doc["provenance"] = std::move(prov);
    return doc.dump(2) + "\n";
}

}  // namespace gearmr
