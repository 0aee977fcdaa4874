#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gearmr/baselines.hpp"
#include "gearmr/detector.hpp"
#include "gearmr/error.hpp"
#include "gearmr/gearbox.hpp"
#include "gearmr/io.hpp"
#include "gearmr/mrdmd.hpp"
#include "gearmr/timeseries.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace gearmr;
using gearmr::cli::Chart;
using gearmr::cli::Series;

namespace {

// Bad flags or flag combinations: exit 1, nothing written.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Files are staged in memory and only written once the command succeeded.
class Outputs {
public:
    void add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

    void commit() {
        std::vector<fs::path> created_dirs;
        std::vector<fs::path> temps;
        auto cleanup = [&] {
            std::error_code ec;
            for (const auto& t : temps) fs::remove(t, ec);
            for (auto it = created_dirs.rbegin(); it != created_dirs.rend(); ++it) fs::remove(*it, ec);
        };
        try {
            for (const auto& [path, content] : files_) {
                const fs::path parent = path.parent_path();
                if (!parent.empty() && !fs::exists(parent)) {
                    std::vector<fs::path> chain;
                    for (fs::path p = parent; !p.empty() && !fs::exists(p); p = p.parent_path()) chain.push_back(p);
                    fs::create_directories(parent);
                    created_dirs.insert(created_dirs.end(), chain.rbegin(), chain.rend());
                }
                const fs::path tmp = path.string() + ".tmp";
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                if (!out) fail(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
                temps.push_back(tmp);
                out.write(content.data(), static_cast<std::streamsize>(content.size()));
                out.flush();
                if (!out) fail(ErrorKind::Io, "write to " + tmp.string() + " failed");
            }
            for (const auto& [path, content] : files_) {
                std::error_code ec;
                fs::rename(path.string() + ".tmp", path, ec);
                if (ec) fail(ErrorKind::Io, "cannot move output into place at " + path.string());
            }
        } catch (const fs::filesystem_error& e) {
            cleanup();
            fail(ErrorKind::Io, e.what());
        } catch (...) {
            cleanup();
            throw;
        }
    }

private:
    std::vector<std::pair<fs::path, std::string>> files_;
};

std::string read_text(const fs::path& path, const std::string& flag) {
    if (!fs::is_regular_file(path)) fail(ErrorKind::Io, flag + ": cannot read " + path.string());
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in && !in.eof()) fail(ErrorKind::Io, flag + ": cannot read " + path.string());
    return ss.str();
}

// The nearest existing ancestor must be a directory; the target itself must
// not be a directory when a file is expected.
void check_output_path(const fs::path& path, const std::string& flag, bool directory) {
    if (path.empty()) throw UsageError(flag + " must not be empty");
    std::error_code ec;
    if (fs::exists(path, ec)) {
        if (directory && !fs::is_directory(path)) throw UsageError(flag + ": " + path.string() + " is not a directory");
        if (!directory && fs::is_directory(path)) throw UsageError(flag + ": " + path.string() + " is a directory");
    }
    fs::path p = fs::absolute(path).parent_path();
    while (!p.empty() && !fs::exists(p, ec)) p = p.parent_path();
    if (!p.empty() && !fs::is_directory(p)) throw UsageError(flag + ": " + p.string() + " is not a directory");
}

TimeSeries load_input(const fs::path& path, std::optional<double> dt) {
    if (!fs::is_regular_file(path)) fail(ErrorKind::Io, "--in: cannot read " + path.string());
    return load_csv(path, dt);
}

fs::path with_extension(fs::path p, const std::string& ext) {
    p.replace_extension(ext);
    return p;
}

std::vector<double> times_of(const TimeSeries& x) {
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = x.time_at(i);
    return t;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    fs::path out;
    std::string config;
    std::string wind;
    std::optional<std::uint64_t> seed;
    bool damaged = false;
    std::optional<double> revolutions;
    std::optional<double> crack_angle;
    std::optional<double> crack_drop;
    bool drop_first_rev = false;
    std::string integrator;
    bool plot = false;
};

WindSpec parse_wind(const std::string& text) {
    if (text == "none") return WindSpec::none();
    if (text == "5mps" || text == "13mps") return WindSpec::synthetic_preset(text);
    if (text.starts_with("external:")) {
        const fs::path p = text.substr(9);
        if (p.empty()) throw UsageError("--wind external: needs a file path");
        if (!fs::is_regular_file(p)) fail(ErrorKind::Io, "--wind: cannot read external torque file " + p.string());
        return WindSpec::external(p);
    }
    throw UsageError("--wind must be none, 5mps, 13mps or external:<path>, got '" + text + "'");
}

void run_simulate(const SimulateArgs& a) {
    check_output_path(a.out, "--out", false);
    GearboxConfig cfg;
    if (!a.config.empty()) cfg = config_from_json(read_text(a.config, "--config"));
    if (!a.wind.empty()) cfg.wind = parse_wind(a.wind);
    if (cfg.wind.kind != WindSpec::Kind::None && !a.seed)
        throw UsageError("--seed is required when wind is enabled");
    if (a.seed) cfg.seed = *a.seed;
    if (a.damaged && !cfg.crack) cfg.crack = CrackSpec{};
    if ((a.crack_angle || a.crack_drop) && !cfg.crack)
        throw UsageError("--crack-angle/--crack-drop need --damaged or a crack in --config");
    if (a.crack_angle) cfg.crack->center_deg = *a.crack_angle;
    if (a.crack_drop) cfg.crack->stiffness_drop = *a.crack_drop;
    if (a.revolutions) cfg.revolutions = *a.revolutions;
    if (a.integrator == "rk4") cfg.integrator = Integrator::Rk4;
    else if (a.integrator == "rk45") cfg.integrator = Integrator::Rk45;
    else if (!a.integrator.empty()) throw UsageError("--integrator must be rk45 or rk4");
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    const std::size_t n = cfg.output_length();
    TimeSeries x = [&] {
        if (!a.drop_first_rev) return simulate(cfg);
        GearboxConfig longer = cfg;
        longer.revolutions += 1.0;
        const TimeSeries full = simulate(longer);
        const auto k0 = static_cast<std::size_t>(
            std::floor(2.0 * std::numbers::pi / (cfg.omega_shaft() * cfg.dt_out)));
        std::vector<double> kept(full.samples().begin() + static_cast<std::ptrdiff_t>(k0),
                                 full.samples().begin() + static_cast<std::ptrdiff_t>(k0 + n));
        return TimeSeries(std::move(kept), full.dt(), full.time_at(k0), full.unit_label());
    }();

    Outputs out;
    out.add(a.out, series_csv(x, "acceleration"));
    if (a.plot) {
        Chart c{"Simulated acceleration", "time (dimensionless)", "acceleration", {}, {}, false};
        c.series.push_back({"acceleration", times_of(x), {x.samples().begin(), x.samples().end()}});
        out.add(with_extension(a.out, ".svg"), render_svg(c));
    }
    out.commit();
}

// ---------------------------------------------------------------- analyze / detect

struct AnalysisArgs {
    fs::path in;
    std::optional<double> dt;
    std::string config;
    std::optional<std::size_t> delay;
    std::optional<std::size_t> levels;
    std::optional<double> rho;
    std::optional<std::size_t> rank_cap;
    std::optional<double> kappa;
    std::optional<double> window_deg;
    std::optional<std::size_t> min_recurrences;
    std::string residuals;
    std::optional<std::size_t> threads;
    std::optional<std::uint64_t> seed;
    double shaft_rate = 0.5 / 16.0;
    fs::path out_dir;
    fs::path report;
    bool plot = false;
};

DetectorParams detector_params(const AnalysisArgs& a) {
    DetectorParams p;
    if (!a.config.empty()) p = params_from_json(read_text(a.config, "--config"));
    if (a.delay) p.d = *a.delay;
    if (a.levels) p.L = *a.levels;
    if (a.rho) p.rho = *a.rho;
    if (a.rank_cap) p.rank_policy = RankPolicy::hard_cap(*a.rank_cap);
    if (a.kappa) p.kappa = *a.kappa;
    if (a.window_deg) p.window_deg = *a.window_deg;
    if (a.min_recurrences) p.min_recurrences = *a.min_recurrences;
    if (a.threads) p.threads = *a.threads;
    if (a.seed) p.seed = *a.seed;
    try {
        if (!a.residuals.empty()) p.selection = ResidualSelection::parse(a.residuals);
        p.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    if (!(a.shaft_rate > 0.0)) throw UsageError("--shaft-rate must be positive");
    return p;
}

// Parameter checks that depend on the input length.
void check_depth(const DetectorParams& p, std::size_t samples) {
    const std::size_t need = min_samples_for(p);
    if (samples < need) {
        throw UsageError("--delay " + std::to_string(p.d) + " with --levels " + std::to_string(p.L) +
                         " violates min_bin_columns = " + std::to_string(p.min_bin_columns) + ": every level-" +
                         std::to_string(p.L) + " bin needs " + std::to_string(p.min_bin_columns) +
                         " columns, so at least " + std::to_string(need) + " samples are required; --in has " +
                         std::to_string(samples));
    }
}

void add_analysis_outputs(Outputs& out, const Analysis& an, const DetectorParams& p, double shaft_rate,
                          const fs::path& dir, bool plot) {
    constexpr double kDeg = 180.0 / std::numbers::pi;
    const ResidualTrace& r0 = an.traces.front();
    {
        std::ostringstream s;
        s << "time,residual\n";
        for (Eigen::Index k = 0; k < r0.residual.size(); ++k)
            s << format_double(an.t_start + static_cast<double>(k) * an.dt) << ','
              << format_double(r0.residual[k]) << '\n';
        out.add(dir / "residual.csv", s.str());
    }
    std::vector<std::vector<double>> ratios;
    {
        std::ostringstream s;
        s << "index,time,angle_deg,residual,amplitude,ratio\n";
        for (const auto& tr : an.traces) {
            ratios.push_back(peak_ratios(tr.envelope, p.edge_fraction));
            for (std::size_t k = 0; k < tr.envelope.amplitude.size(); ++k) {
                const double t = tr.envelope.t0 + static_cast<double>(k) * tr.envelope.dt;
                s << tr.index << ',' << format_double(t) << ',' << format_double(t * shaft_rate * kDeg) << ','
                  << format_double(tr.residual[static_cast<Eigen::Index>(k)]) << ','
                  << format_double(tr.envelope.amplitude[k]) << ',' << format_double(ratios.back()[k]) << '\n';
            }
        }
        out.add(dir / "envelope.csv", s.str());
    }
    {
        std::ostringstream s;
        s << "time";
        for (std::size_t l = 1; l <= an.level_components.size(); ++l) s << ",p" << l;
        s << '\n';
        for (Eigen::Index k = 0; k < r0.residual.size(); ++k) {
            s << format_double(an.t_start + static_cast<double>(k) * an.dt);
            for (const auto& pl : an.level_components) s << ',' << format_double(pl[k]);
            s << '\n';
        }
        out.add(dir / "levels.csv", s.str());
    }
    out.add(dir / "tree.json", tree_to_json(an.tree));
    if (!plot) return;

    Chart env{"Residual envelope ratio", "shaft angle (deg)", "amplitude / median", {}, {}, false};
    for (std::size_t k = 0; k < an.traces.size(); ++k) {
        const auto& tr = an.traces[k];
        Series s{"r_" + std::to_string(tr.index), {}, {}};
        for (std::size_t j = 0; j < ratios[k].size(); ++j) {
            if (ratios[k][j] == 0.0) continue;
            s.x.push_back((tr.envelope.t0 + static_cast<double>(j) * tr.envelope.dt) * shaft_rate * kDeg);
            s.y.push_back(ratios[k][j]);
        }
        env.series.push_back(std::move(s));
    }
    for (double m = 0.0; m <= 1440.0; m += 360.0) env.markers.push_back(m);
    out.add(dir / "envelope.svg", render_svg(env));

    Chart res{"Residual r_0", "shaft angle (deg)", "residual", {}, {}, false};
    Series rs{"r_0", {}, {}};
    for (Eigen::Index k = 0; k < r0.residual.size(); ++k) {
        rs.x.push_back((an.t_start + static_cast<double>(k) * an.dt) * shaft_rate * kDeg);
        rs.y.push_back(r0.residual[k]);
    }
    res.series.push_back(std::move(rs));
    out.add(dir / "residual.svg", render_svg(res));

    Chart lv{"Level components at the first snapshot", "time", "p^l_0", {}, {}, false};
    for (std::size_t l = 0; l < an.level_components.size(); ++l) {
        Series s{"level " + std::to_string(l + 1), {}, {}};
        for (Eigen::Index k = 0; k < an.level_components[l].size(); ++k) {
            s.x.push_back(an.t_start + static_cast<double>(k) * an.dt);
            s.y.push_back(an.level_components[l][k]);
        }
        lv.series.push_back(std::move(s));
    }
    out.add(dir / "levels.svg", render_svg(lv));
}

void run_analyze(const AnalysisArgs& a) {
    check_output_path(a.out_dir, "--out-dir", true);
    const DetectorParams p = detector_params(a);
    const TimeSeries x = load_input(a.in, a.dt);
    check_depth(p, x.size());
    const Analysis an = analyze(x, p);
    Outputs out;
    add_analysis_outputs(out, an, p, a.shaft_rate, a.out_dir, a.plot);
    out.commit();
}

void run_detect(const AnalysisArgs& a) {
    check_output_path(a.report, "--report", false);
    if (!a.out_dir.empty()) check_output_path(a.out_dir, "--out-dir", true);
    if (a.plot && a.out_dir.empty()) throw UsageError("--plot needs --out-dir");
    const DetectorParams p = detector_params(a);
    const TimeSeries x = load_input(a.in, a.dt);
    check_depth(p, x.size());
    const Analysis an = analyze(x, p);
    std::vector<Envelope> envs;
    for (const auto& tr : an.traces) envs.push_back(tr.envelope);
    DetectionReport report = decide(envs, a.shaft_rate, p);
    report.residual_norm = an.traces.front().residual.norm();
    report.input = a.in.string();
    report.seed = a.seed;
    Outputs out;
    out.add(a.report, report_to_json(report));
    if (!a.out_dir.empty()) add_analysis_outputs(out, an, p, a.shaft_rate, a.out_dir, a.plot);
    out.commit();
    std::cout << (report.damaged ? "damaged" : "healthy");
    for (const auto& g : report.groups) std::cout << ' ' << format_double(g.angle_deg) << ':' << format_double(g.ratio);
    std::cout << '\n';
}

// ---------------------------------------------------------------- baselines

struct BaselineArgs {
    fs::path in;
    fs::path out;
    std::optional<double> dt;
    bool plot = false;
    double omega_mesh = 0.5;
    double period = 2.0;
    double harmonic = 1.0;
    std::optional<std::size_t> count;
    EmdOptions emd;
};

void run_fft(const BaselineArgs& a) {
    check_output_path(a.out, "--out", false);
    if (!(a.omega_mesh > 0.0)) throw UsageError("--omega-mesh must be positive");
    const TimeSeries x = load_input(a.in, a.dt);
    const Spectrum s = fft_spectrum(x, a.omega_mesh);
    Outputs out;
    out.add(a.out, spectrum_csv(s));
    if (a.plot) {
        Chart c{"Magnitude spectrum", "angular frequency", "|X|", {}, {}, true};
        c.series.push_back({"spectrum", s.freqs, s.mags});
        for (const auto& [j, w] : s.markers) c.markers.push_back(w);
        out.add(with_extension(a.out, ".svg"), render_svg(c));
    }
    out.commit();
}

void run_tsa(const BaselineArgs& a) {
    check_output_path(a.out, "--out", false);
    if (!(a.period > 0.0)) throw UsageError("--period must be positive");
    if (!(a.harmonic > 0.0)) throw UsageError("--harmonic must be positive");
    if (a.count && *a.count == 0) throw UsageError("--count must be at least 1");
    const TimeSeries x = load_input(a.in, a.dt);
    const TimeSeries y = tsa(x, a.period / a.harmonic, a.count);
    Outputs out;
    out.add(a.out, series_csv(y, "average"));
    if (a.plot) {
        Chart c{"Time synchronous average", "time", "average", {}, {}, false};
        c.series.push_back({"average", times_of(y), {y.samples().begin(), y.samples().end()}});
        out.add(with_extension(a.out, ".svg"), render_svg(c));
    }
    out.commit();
}

void run_emd(const BaselineArgs& a) {
    check_output_path(a.out, "--out", false);
    if (!(a.emd.sd_threshold > 0.0)) throw UsageError("--sd must be positive");
    if (a.emd.max_sifts == 0) throw UsageError("--max-sifts must be at least 1");
    const TimeSeries x = load_input(a.in, a.dt);
    const ImfSet set = emd(x, a.emd);
    Outputs out;
    out.add(a.out, imfs_csv(set));
    if (a.plot) {
        Chart c{"Empirical mode decomposition", "time", "value", {}, {}, false};
        const auto t = times_of(x);
        for (std::size_t j = 0; j < set.imfs.size(); ++j)
            c.series.push_back({"imf" + std::to_string(j + 1), t,
                                {set.imfs[j].samples().begin(), set.imfs[j].samples().end()}});
        c.series.push_back({"residue", t, {set.residue->samples().begin(), set.residue->samples().end()}});
        out.add(with_extension(a.out, ".svg"), render_svg(c));
    }
    out.commit();
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
    fs::path in;
    fs::path out;
    std::string x_column;
    std::vector<std::string> columns;
    std::string title;
    bool log_y = false;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

void run_plot(const PlotArgs& a) {
    check_output_path(a.out, "--out", false);
    const std::string text = read_text(a.in, "--in");
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, a.in.string() + ": empty file");
    const auto header = split(line);
    auto column_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return k;
        throw UsageError("column '" + name + "' not found in " + a.in.string());
    };
    const std::size_t xc = a.x_column.empty() ? 0 : column_index(a.x_column);
    std::vector<std::size_t> ycs;
    for (const auto& c : a.columns) ycs.push_back(column_index(c));
    if (ycs.empty())
        for (std::size_t k = 0; k < header.size(); ++k)
            if (k != xc) ycs.push_back(k);
    if (ycs.empty()) fail(ErrorKind::Parse, a.in.string() + ": no data columns");

    Chart c{a.title.empty() ? a.in.filename().string() : a.title, header[xc], "", {}, {}, a.log_y};
    for (std::size_t k : ycs) c.series.push_back({header[k], {}, {}});
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        auto value = [&](std::size_t k) {
            if (k >= f.size())
                fail(ErrorKind::Parse, a.in.string() + ":" + std::to_string(line_no) + ": missing column");
            try {
                std::size_t pos = 0;
                const double v = std::stod(f[k], &pos);
                if (pos != f[k].size()) throw std::invalid_argument(f[k]);
                return v;
            } catch (const std::logic_error&) {
                fail(ErrorKind::Parse,
                     a.in.string() + ":" + std::to_string(line_no) + ": non-numeric value '" + f[k] + "'");
            }
        };
        const double xv = value(xc);
        for (std::size_t s = 0; s < ycs.size(); ++s) {
            c.series[s].x.push_back(xv);
            c.series[s].y.push_back(value(ycs[s]));
        }
    }
    if (ycs.size() == 1) c.y_label = header[ycs[0]];
    Outputs out;
    out.add(a.out, render_svg(c));
    out.commit();
}

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::InvalidArgument ? 1 : 2; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-resolution DMD gear fault analysis"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the gearbox acceleration signal");
    simulate_cmd->add_option("--out", sim.out, "Output CSV (time,acceleration)")->required();
    simulate_cmd->add_option("--config", sim.config, "GearboxConfig JSON");
    simulate_cmd->add_option("--wind", sim.wind, "none | 5mps | 13mps | external:<path>");
    simulate_cmd->add_option("--seed", sim.seed, "Random seed (required with wind)");
    simulate_cmd->add_flag("--damaged", sim.damaged, "Add the cracked tooth");
    simulate_cmd->add_option("--revolutions", sim.revolutions, "Shaft revolutions (default 3)");
    simulate_cmd->add_option("--crack-angle", sim.crack_angle, "Crack window center in degrees");
    simulate_cmd->add_option("--crack-drop", sim.crack_drop, "Fractional stiffness drop");
    simulate_cmd->add_flag("--drop-first-rev", sim.drop_first_rev, "Discard one leading revolution");
    simulate_cmd->add_option("--integrator", sim.integrator, "rk45 (default) or rk4");
    simulate_cmd->add_flag("--plot", sim.plot, "Also write an SVG next to --out");

    AnalysisArgs an;
    auto add_analysis_flags = [&](CLI::App* cmd) {
        cmd->add_option("--in", an.in, "Input signal CSV")->required();
        cmd->add_option("--dt", an.dt, "Sample interval for one-column input");
        cmd->add_option("--config", an.config, "DetectorParams JSON");
        cmd->add_option("--delay", an.delay, "Delay length d");
        cmd->add_option("--levels", an.levels, "Decomposition levels L");
        cmd->add_option("--rho", an.rho, "Slow-mode cycle bound");
        cmd->add_option("--rank-cap", an.rank_cap, "Maximum SVD rank per bin");
        cmd->add_option("--kappa", an.kappa, "Peak-ratio threshold");
        cmd->add_option("--window-deg", an.window_deg, "Angular grouping half-width");
        cmd->add_option("--min-recurrences", an.min_recurrences, "Revolutions a peak must recur in");
        cmd->add_option("--residuals", an.residuals, "first | cover | stride:<k>");
        cmd->add_option("--threads", an.threads, "Worker threads (0: all cores)");
        cmd->add_option("--seed", an.seed, "Seed for randomized SVD sketches");
        cmd->add_option("--shaft-rate", an.shaft_rate, "Shaft angular rate (rad per unit time)");
        cmd->add_flag("--plot", an.plot, "Write SVG charts");
    };
    auto* analyze_cmd = app.add_subcommand("analyze", "Residuals, envelopes and level components");
    add_analysis_flags(analyze_cmd);
    analyze_cmd->add_option("--out-dir", an.out_dir, "Output directory")->required();
    auto* detect_cmd = app.add_subcommand("detect", "Damage decision report");
    add_analysis_flags(detect_cmd);
    detect_cmd->add_option("--report", an.report, "Report JSON path")->required();
    detect_cmd->add_option("--out-dir", an.out_dir, "Also write analysis outputs here");

    BaselineArgs bl;
    auto* baseline_cmd = app.add_subcommand("baseline", "FFT, TSA or EMD baselines");
    baseline_cmd->require_subcommand(1);
    auto add_baseline_flags = [&](CLI::App* cmd) {
        cmd->add_option("--in", bl.in, "Input signal CSV")->required();
        cmd->add_option("--out", bl.out, "Output CSV")->required();
        cmd->add_option("--dt", bl.dt, "Sample interval for one-column input");
        cmd->add_flag("--plot", bl.plot, "Also write an SVG next to --out");
    };
    auto* fft_cmd = baseline_cmd->add_subcommand("fft", "One-sided magnitude spectrum");
    add_baseline_flags(fft_cmd);
    fft_cmd->add_option("--omega-mesh", bl.omega_mesh, "Mesh frequency for markers");
    auto* tsa_cmd = baseline_cmd->add_subcommand("tsa", "Time synchronous average");
    add_baseline_flags(tsa_cmd);
    tsa_cmd->add_option("--period", bl.period, "Averaging period T_r")->capture_default_str();
    tsa_cmd->add_option("--harmonic", bl.harmonic, "Average over T_r / m");
    tsa_cmd->add_option("--count", bl.count, "Number of periods N");
    auto* emd_cmd = baseline_cmd->add_subcommand("emd", "Empirical mode decomposition");
    add_baseline_flags(emd_cmd);
    emd_cmd->add_option("--sd", bl.emd.sd_threshold, "Sifting SD threshold");
    emd_cmd->add_option("--max-sifts", bl.emd.max_sifts, "Sifts per IMF");
    emd_cmd->add_option("--max-imfs", bl.emd.max_imfs, "Maximum IMF count");

    PlotArgs pl;
    auto* plot_cmd = app.add_subcommand("plot", "Render a CSV as an SVG line chart");
    plot_cmd->add_option("--in", pl.in, "Input CSV with a header row")->required();
    plot_cmd->add_option("--out", pl.out, "Output SVG")->required();
    plot_cmd->add_option("--x-column", pl.x_column, "Column for the x axis (default first)");
    plot_cmd->add_option("--columns", pl.columns, "Columns to draw (default all others)")->delimiter(',');
    plot_cmd->add_option("--title", pl.title, "Chart title");
    plot_cmd->add_flag("--log-y", pl.log_y, "Logarithmic y axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*simulate_cmd) run_simulate(sim);
        else if (*analyze_cmd) run_analyze(an);
        else if (*detect_cmd) run_detect(an);
        else if (*fft_cmd) run_fft(bl);
        else if (*tsa_cmd) run_tsa(bl);
        else if (*emd_cmd) run_emd(bl);
        else if (*plot_cmd) run_plot(pl);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
