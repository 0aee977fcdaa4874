#include "gearmr/gearbox.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gearmr/error.hpp"

namespace gearmr {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Segment {
    double fvar = 0.0;
    bool cracked = false;
};

struct State {
    double x = 0.0;
    double v = 0.0;
};

class Model {
public:
    explicit Model(const GearboxConfig& cfg) : cfg_(cfg) {}

    double stiffness(double t, bool cracked) const {
        double k = 1.0;
        for (std::size_t j = 0; j < cfg_.K_harmonics.size(); ++j)
            k -= cfg_.K_harmonics[j] * std::cos(static_cast<double>(j + 1) * cfg_.Omega_mesh * t);
        if (cracked) k *= 1.0 - cfg_.crack->stiffness_drop;
        return k;
    }

    double accel(double t, const State& s, const Segment& seg) const {
        return cfg_.F_m + internal_excitation(t, cfg_) + seg.fvar - 2.0 * cfg_.z * s.v -
               stiffness(t, seg.cracked) * backlash(s.x);
    }

    State deriv(double t, const State& s, const Segment& seg) const { return {s.v, accel(t, s, seg)}; }

private:
    const GearboxConfig& cfg_;
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, State>> terms) {
    State out = y;
    for (const auto& [c, k] : terms) {
        out.x += h * c * k.x;
        out.v += h * c * k.v;
    }
    return out;
}

// Dormand-Prince 5(4) with step-size control; integrates exactly to `b`.
class Rk45 {
public:
    Rk45(const Model& m, double rtol, double atol) : m_(m), rtol_(rtol), atol_(atol) {}

    void advance(double a, double b, State& y, const Segment& seg) {
        double t = a;
        State k1 = m_.deriv(t, y, seg);
        while (t < b) {
            const double remaining = b - t;
            bool last = h_ >= remaining * (1.0 - 1e-12);
            double h = last ? remaining : h_;
            for (;;) {
                if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
                    fail(ErrorKind::StiffFailure,
                         "step size underflow at t=" + std::to_string(t));
                const State k2 = m_.deriv(t + h / 5.0, axpy(y, h, {{1.0 / 5, k1}}), seg);
                const State k3 = m_.deriv(t + 3.0 * h / 10.0, axpy(y, h, {{3.0 / 40, k1}, {9.0 / 40, k2}}), seg);
                const State k4 = m_.deriv(t + 4.0 * h / 5.0,
                                          axpy(y, h, {{44.0 / 45, k1}, {-56.0 / 15, k2}, {32.0 / 9, k3}}), seg);
                const State k5 = m_.deriv(t + 8.0 * h / 9.0,
                                          axpy(y, h,
                                               {{19372.0 / 6561, k1},
                                                {-25360.0 / 2187, k2},
                                                {64448.0 / 6561, k3},
                                                {-212.0 / 729, k4}}),
                                          seg);
                const State k6 = m_.deriv(t + h,
                                          axpy(y, h,
                                               {{9017.0 / 3168, k1},
                                                {-355.0 / 33, k2},
                                                {46732.0 / 5247, k3},
                                                {49.0 / 176, k4},
                                                {-5103.0 / 18656, k5}}),
                                          seg);
                const State y5 = axpy(y, h,
                                      {{35.0 / 384, k1},
                                       {500.0 / 1113, k3},
                                       {125.0 / 192, k4},
                                       {-2187.0 / 6784, k5},
                                       {11.0 / 84, k6}});
                const State k7 = m_.deriv(t + h, y5, seg);
                const State err = axpy(State{}, h,
                                       {{71.0 / 57600, k1},
                                        {-71.0 / 16695, k3},
                                        {71.0 / 1920, k4},
                                        {-17253.0 / 339200, k5},
                                        {22.0 / 525, k6},
                                        {-1.0 / 40, k7}});
                const double sx = atol_ + rtol_ * std::max(std::abs(y.x), std::abs(y5.x));
                const double sv = atol_ + rtol_ * std::max(std::abs(y.v), std::abs(y5.v));
                const double e = std::sqrt(0.5 * ((err.x / sx) * (err.x / sx) + (err.v / sv) * (err.v / sv)));
                if (e <= 1.0) {
                    const double grow = e == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(e, -0.2)));
                    // A step shortened to land on b must not shrink the proposal.
                    h_ = last ? std::max(h_, h * grow) : h * grow;
                    t = last ? b : t + h;
                    y = y5;
                    k1 = k7;
                    break;
                }
                h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
                h_ = h;
                last = false;
            }
        }
    }

private:
    const Model& m_;
    double rtol_;
    double atol_;
    double h_ = 0.01;
};

void rk4_advance(const Model& m, double a, double b, double step, State& y, const Segment& seg) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / step - 1e-9)));
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = a + static_cast<double>(i) * h;
        const State k1 = m.deriv(t, y, seg);
        const State k2 = m.deriv(t + h / 2, axpy(y, h, {{0.5, k1}}), seg);
        const State k3 = m.deriv(t + h / 2, axpy(y, h, {{0.5, k2}}), seg);
        const State k4 = m.deriv(t + h, axpy(y, h, {{1.0, k3}}), seg);
        y = axpy(y, h, {{1.0 / 6, k1}, {1.0 / 3, k2}, {1.0 / 3, k3}, {1.0 / 6, k4}});
    }
}

// Times in (0, t_end) where the crack indicator switches.
std::vector<double> crack_edges(const GearboxConfig& cfg, double t_end) {
    std::vector<double> edges;
    if (!cfg.crack) return edges;
    const double per_deg = kDegToRad / cfg.omega_shaft();
    const double start = cfg.crack->center_deg - cfg.crack->window_deg / 2.0;
    const double turns = std::ceil(cfg.revolutions) + 2.0;
    for (double k = -2.0; k <= turns; k += 1.0) {
        for (double deg : {start + 360.0 * k, start + cfg.crack->window_deg + 360.0 * k}) {
            const double t = deg * per_deg;
            if (t > 0.0 && t < t_end) edges.push_back(t);
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

std::vector<double> external_wind(std::size_t n, double dt, const WindSpec& spec,
                                  const PhysicalParams& physical) {
    const TimeSeries torque = load_csv(spec.path);
    double mean = 0.0;
    for (double v : torque.samples()) mean += v;
    mean /= static_cast<double>(torque.size());
    const auto scales = nondimensionalize(physical);
    const double needed = static_cast<double>(n - 1) * dt / scales.w_n;
    if (needed > torque.duration() * (1.0 + 1e-12))
        fail(ErrorKind::InsufficientSamples,
             "external torque " + spec.path.string() + " covers " + std::to_string(torque.duration()) +
                 " s but the simulation needs " + std::to_string(needed) + " s");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double pos = static_cast<double>(k) * dt / scales.w_n / torque.dt();
        const auto i = std::min(static_cast<std::size_t>(pos), torque.size() - 2);
        const double frac = pos - static_cast<double>(i);
        const double t_var = torque[i] + frac * (torque[i + 1] - torque[i]) - mean;
        out[k] = scales.force(t_var / (spec.normalization * physical.r1));
    }
    return out;
}

}  // namespace

WindSpec WindSpec::synthetic_preset(const std::string& name) {
    WindSpec s;
    s.kind = Kind::Synthetic;
    s.preset = name;
    if (name == "5mps") {
        s.sigma = 0.02;
        s.tau = 50.0;
    } else if (name == "13mps") {
        s.sigma = 0.06;
        s.tau = 30.0;
    } else {
        fail(ErrorKind::InvalidArgument, "unknown wind preset '" + name + "' (expected 5mps or 13mps)");
    }
    return s;
}

WindSpec WindSpec::synthetic(double sigma, double tau) {
    WindSpec s;
    s.kind = Kind::Synthetic;
    s.sigma = sigma;
    s.tau = tau;
    return s;
}

WindSpec WindSpec::external(std::filesystem::path path, double normalization) {
    WindSpec s;
    s.kind = Kind::External;
    s.path = std::move(path);
    s.normalization = normalization;
    return s;
}

double PhysicalParams::equivalent_mass(double I1, double I2, double r1, double r2) {
    return I1 * I2 / (I1 * r2 * r2 + I2 * r1 * r1);
}

void PhysicalParams::validate() const {
    for (double v : {I1, I2, r1, r2, m_c, K_m_bar, b_g, C_bar})
        if (!(v > 0.0) || !std::isfinite(v))
            fail(ErrorKind::InvalidArgument, "physical parameters must be positive and finite");
}

DimensionlessScales nondimensionalize(const PhysicalParams& p) {
    p.validate();
    const double w_n = std::sqrt(p.K_m_bar / p.m_c);
    return {w_n, p.C_bar / (2.0 * std::sqrt(p.m_c * p.K_m_bar)), p.b_g, p.m_c * p.b_g * w_n * w_n};
}

std::size_t GearboxConfig::output_length() const {
    const double span = revolutions * 2.0 * std::numbers::pi / omega_shaft();
    return static_cast<std::size_t>(std::floor(span / dt_out)) + 1;
}

void GearboxConfig::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        fail(ErrorKind::InvalidArgument, "config field " + field + ": " + why);
    };
    double ksum = 0.0;
    for (double k : K_harmonics) ksum += std::abs(k);
    if (!(ksum < 1.0)) bad("K_harmonics", "sum of |K_j| must be below 1");
    if (!(Omega_mesh > 0.0)) bad("Omega_mesh", "must be positive");
    if (n_teeth < 1) bad("n_teeth", "must be positive");
    if (!(dt_out > 0.0)) bad("dt_out", "must be positive");
    if (!(revolutions > 0.0)) bad("revolutions", "must be positive");
    if (!(z >= 0.0)) bad("z", "must be nonnegative");
    if (!std::isfinite(F_m)) bad("F_m", "must be finite");
    if (crack) {
        if (!(crack->stiffness_drop > 0.0 && crack->stiffness_drop < 1.0))
            bad("crack.stiffness_drop", "must lie in (0, 1)");
        if (!(crack->window_deg > 0.0 && crack->window_deg < 360.0))
            bad("crack.window_deg", "must lie in (0, 360)");
        if (!std::isfinite(crack->center_deg)) bad("crack.center_deg", "must be finite");
    }
    if (wind.kind == WindSpec::Kind::Synthetic) {
        if (!(wind.sigma >= 0.0)) bad("wind.sigma", "must be nonnegative");
        if (!(wind.tau > 0.0)) bad("wind.tau", "must be positive");
    }
    if (wind.kind == WindSpec::Kind::External && !(wind.normalization > 0.0))
        bad("wind.normalization", "must be positive");
    if (!(rtol > 0.0) || !(atol > 0.0)) bad("rtol/atol", "must be positive");
    if (!(rk4_step > 0.0)) bad("rk4_step", "must be positive");
    physical.validate();
}

double backlash(double x) {
    if (x >= 1.0) return x - 1.0;
    if (x <= -1.0) return x + 1.0;
    return 0.0;
}

bool in_crack_window(double t, const GearboxConfig& cfg) {
    if (!cfg.crack) return false;
    const double deg = cfg.omega_shaft() * t / kDegToRad;
    double rel = std::fmod(deg - (cfg.crack->center_deg - cfg.crack->window_deg / 2.0), 360.0);
    if (rel < 0.0) rel += 360.0;
    return rel < cfg.crack->window_deg;
}

double mesh_stiffness(double t, const GearboxConfig& cfg) {
    return Model(cfg).stiffness(t, in_crack_window(t, cfg));
}

double internal_excitation(double t, const GearboxConfig& cfg) {
    double f = 0.0;
    for (std::size_t j = 0; j < cfg.F_te.size(); ++j) {
        const double w = static_cast<double>(j + 1) * cfg.Omega_mesh;
        f -= cfg.F_te[j] * w * w * std::cos(w * t);
    }
    return f;
}

std::vector<double> wind_force(std::size_t n, double dt, const WindSpec& spec, std::uint64_t seed,
                               const PhysicalParams& physical) {
    switch (spec.kind) {
        case WindSpec::Kind::None:
            return std::vector<double>(n, 0.0);
        case WindSpec::Kind::External:
            return external_wind(n, dt, spec, physical);
        case WindSpec::Kind::Synthetic:
            break;
    }
    if (!(spec.tau > 0.0) || !(spec.sigma >= 0.0))
        fail(ErrorKind::InvalidArgument, "wind requires sigma >= 0 and tau > 0");
    std::vector<double> out(n);
    if (n == 0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const double a = std::exp(-dt / spec.tau);
    const double kick = spec.sigma * std::sqrt(1.0 - a * a);
    out[0] = spec.sigma * g(rng);
    for (std::size_t k = 1; k < n; ++k) out[k] = a * out[k - 1] + kick * g(rng);
    return out;
}

Trajectory integrate(const GearboxConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.output_length();
    const auto fvar = wind_force(n, cfg.dt_out, cfg.wind, cfg.seed, cfg.physical);
    const double t_end = static_cast<double>(n - 1) * cfg.dt_out;
    const auto edges = crack_edges(cfg, t_end);
    const Model model(cfg);
    Rk45 rk45(model, cfg.rtol, cfg.atol);

    Trajectory out;
    out.dt = cfg.dt_out;
    out.x.resize(n);
    out.v.resize(n);
    out.a.resize(n);
    State y;
    std::size_t next_edge = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * cfg.dt_out;
        out.x[k] = y.x;
        out.v[k] = y.v;
        out.a[k] = model.accel(t, y, Segment{fvar[k], in_crack_window(t, cfg)});
        if (k + 1 == n) break;

        const double t_next = static_cast<double>(k + 1) * cfg.dt_out;
        double a = t;
        while (a < t_next) {
            while (next_edge < edges.size() && edges[next_edge] <= a + 1e-12) ++next_edge;
            double b = t_next;
            if (next_edge < edges.size() && edges[next_edge] < t_next - 1e-12) b = edges[next_edge];
            const Segment seg{fvar[k], in_crack_window(0.5 * (a + b), cfg)};
            if (cfg.integrator == Integrator::Rk45)
                rk45.advance(a, b, y, seg);
            else
                rk4_advance(model, a, b, cfg.rk4_step, y, seg);
            if (!std::isfinite(y.x) || !std::isfinite(y.v))
                fail(ErrorKind::StiffFailure, "integration diverged at t=" + std::to_string(b));
            a = b;
        }
    }
    return out;
}

TimeSeries simulate(const GearboxConfig& cfg) {
    auto traj = integrate(cfg);
    return TimeSeries(std::move(traj.a), cfg.dt_out, 0.0, "dimensionless acceleration");
}

std::string config_to_json(const GearboxConfig& cfg) {
    using nlohmann::json;
    json j;
    j["F_m"] = cfg.F_m;
    j["F_te"] = cfg.F_te;
    j["K_harmonics"] = cfg.K_harmonics;
    j["z"] = cfg.z;
    j["Omega_mesh"] = cfg.Omega_mesh;
    j["n_teeth"] = cfg.n_teeth;
    j["dt_out"] = cfg.dt_out;
    j["revolutions"] = cfg.revolutions;
    if (cfg.crack)
        j["crack"] = {{"stiffness_drop", cfg.crack->stiffness_drop},
                      {"window_deg", cfg.crack->window_deg},
                      {"center_deg", cfg.crack->center_deg}};
    else
        j["crack"] = nullptr;
    json w;
    switch (cfg.wind.kind) {
        case WindSpec::Kind::None: w["kind"] = "none"; break;
        case WindSpec::Kind::Synthetic:
            w["kind"] = "synthetic";
            if (!cfg.wind.preset.empty()) w["preset"] = cfg.wind.preset;
            w["sigma"] = cfg.wind.sigma;
            w["tau"] = cfg.wind.tau;
            break;
        case WindSpec::Kind::External:
            w["kind"] = "external";
            w["path"] = cfg.wind.path.string();
            w["normalization"] = cfg.wind.normalization;
            break;
    }
    j["wind"] = w;
    j["seed"] = cfg.seed;
    j["integrator"] = cfg.integrator == Integrator::Rk45 ? "rk45" : "rk4";
    j["rtol"] = cfg.rtol;
    j["atol"] = cfg.atol;
    j["rk4_step"] = cfg.rk4_step;
    const auto& p = cfg.physical;
    j["physical"] = {{"I1", p.I1},   {"I2", p.I2},           {"r1", p.r1},   {"r2", p.r2},
                     {"m_c", p.m_c}, {"K_m_bar", p.K_m_bar}, {"b_g", p.b_g}, {"C_bar", p.C_bar}};
    return j.dump(2) + "\n";
}

namespace {

template <class T>
void read_key(const nlohmann::json& obj, const char* key, T& dst, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::Parse, "config key " + where + key + " has the wrong type");
    }
}

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
        if (!ok) fail(ErrorKind::Parse, "unknown config key " + where + it.key());
    }
}

}  // namespace

GearboxConfig config_from_json(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Parse, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Parse, "config must be a JSON object");
    reject_unknown(j,
                   {"F_m", "F_te", "K_harmonics", "z", "Omega_mesh", "n_teeth", "dt_out", "revolutions",
                    "crack", "wind", "seed", "integrator", "rtol", "atol", "rk4_step", "physical"},
                   "");
    GearboxConfig cfg;
    read_key(j, "F_m", cfg.F_m, "");
    read_key(j, "F_te", cfg.F_te, "");
    read_key(j, "K_harmonics", cfg.K_harmonics, "");
    read_key(j, "z", cfg.z, "");
    read_key(j, "Omega_mesh", cfg.Omega_mesh, "");
    read_key(j, "n_teeth", cfg.n_teeth, "");
    read_key(j, "dt_out", cfg.dt_out, "");
    read_key(j, "revolutions", cfg.revolutions, "");
    read_key(j, "seed", cfg.seed, "");
    read_key(j, "rtol", cfg.rtol, "");
    read_key(j, "atol", cfg.atol, "");
    read_key(j, "rk4_step", cfg.rk4_step, "");
    if (j.contains("integrator")) {
        std::string name;
        read_key(j, "integrator", name, "");
        if (name == "rk45") cfg.integrator = Integrator::Rk45;
        else if (name == "rk4") cfg.integrator = Integrator::Rk4;
        else fail(ErrorKind::Parse, "config key integrator must be rk45 or rk4");
    }
    if (j.contains("crack") && !j["crack"].is_null()) {
        const auto& c = j["crack"];
        if (!c.is_object()) fail(ErrorKind::Parse, "config key crack must be an object or null");
        reject_unknown(c, {"stiffness_drop", "window_deg", "center_deg"}, "crack.");
        CrackSpec spec;
        read_key(c, "stiffness_drop", spec.stiffness_drop, "crack.");
        read_key(c, "window_deg", spec.window_deg, "crack.");
        read_key(c, "center_deg", spec.center_deg, "crack.");
        cfg.crack = spec;
    }
    if (j.contains("wind")) {
        const auto& w = j["wind"];
        if (!w.is_object()) fail(ErrorKind::Parse, "config key wind must be an object");
        reject_unknown(w, {"kind", "preset", "sigma", "tau", "path", "normalization"}, "wind.");
        std::string kind = "none";
        read_key(w, "kind", kind, "wind.");
        if (kind == "none") {
            cfg.wind = WindSpec::none();
        } else if (kind == "synthetic") {
            std::string preset;
            read_key(w, "preset", preset, "wind.");
            if (!preset.empty()) {
                cfg.wind = WindSpec::synthetic_preset(preset);
            } else {
                if (!w.contains("sigma") || !w.contains("tau"))
                    fail(ErrorKind::Parse, "synthetic wind needs a preset or both sigma and tau");
                cfg.wind = WindSpec::synthetic(0.0, 1.0);
                read_key(w, "sigma", cfg.wind.sigma, "wind.");
                read_key(w, "tau", cfg.wind.tau, "wind.");
            }
        } else if (kind == "external") {
            std::string path;
            read_key(w, "path", path, "wind.");
            if (path.empty()) fail(ErrorKind::Parse, "external wind needs wind.path");
            cfg.wind = WindSpec::external(path);
            read_key(w, "normalization", cfg.wind.normalization, "wind.");
        } else {
            fail(ErrorKind::Parse, "config key wind.kind must be none, synthetic or external");
        }
    }
    if (j.contains("physical")) {
        const auto& p = j["physical"];
        if (!p.is_object()) fail(ErrorKind::Parse, "config key physical must be an object");
        reject_unknown(p, {"I1", "I2", "r1", "r2", "m_c", "K_m_bar", "b_g", "C_bar"}, "physical.");
        read_key(p, "I1", cfg.physical.I1, "physical.");
        read_key(p, "I2", cfg.physical.I2, "physical.");
        read_key(p, "r1", cfg.physical.r1, "physical.");
        read_key(p, "r2", cfg.physical.r2, "physical.");
        read_key(p, "m_c", cfg.physical.m_c, "physical.");
        read_key(p, "K_m_bar", cfg.physical.K_m_bar, "physical.");
        read_key(p, "b_g", cfg.physical.b_g, "physical.");
        read_key(p, "C_bar", cfg.physical.C_bar, "physical.");
    }
    cfg.validate();
    return cfg;
}

}  // namespace gearmr
