#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gearmr/timeseries.hpp"

namespace gearmr {

/// Cracked tooth: stiffness reduced by `stiffness_drop` while the shaft angle
/// lies in [center - window/2, center + window/2) modulo 360 degrees.
struct CrackSpec {
    double stiffness_drop = 0.13;
    double window_deg = 5.0;
    double center_deg = 67.0;
};

struct WindSpec {
    enum class Kind { None, Synthetic, External };

    Kind kind = Kind::None;
    std::string preset;  // "5mps", "13mps", or empty for custom sigma/tau
    double sigma = 0.0;  // stationary standard deviation (dimensionless force)
    double tau = 1.0;    // correlation time (dimensionless time)
    std::filesystem::path path;  // external torque CSV (time_s, torque_nm)
    double normalization = 10.0;

    static WindSpec none() { return {}; }
    /// Throws InvalidArgument for unknown preset names.
    static WindSpec synthetic_preset(const std::string& name);
    static WindSpec synthetic(double sigma, double tau);
    static WindSpec external(std::filesystem::path path, double normalization = 10.0);
};

/// Dimensional gear-pair parameters used to scale external torque data.
struct PhysicalParams {
    double I1 = 0.00115;   // kg m^2
    double I2 = 0.00115;
    double r1 = 0.05;      // m
    double r2 = 0.05;
    double m_c = 0.23;     // kg
    double K_m_bar = 3.8e8;  // N/m
    double b_g = 1e-4;     // m, half backlash
    double C_bar = 2.0 * 0.05 * std::sqrt(0.23 * 3.8e8);  // N s/m, gives z = 0.05

    /// m_c = I1 I2 / (I1 r2^2 + I2 r1^2).
    static double equivalent_mass(double I1, double I2, double r1, double r2);
    void validate() const;
};

struct DimensionlessScales {
    double w_n;          // rad/s
    double z;
    double length_scale;  // b_g
    double force_scale;   // m_c b_g w_n^2

    double displacement(double x_bar) const { return x_bar / length_scale; }
    double time(double t_bar) const { return w_n * t_bar; }
    double frequency(double omega_bar) const { return omega_bar / w_n; }
    double force(double f_bar) const { return f_bar / force_scale; }
};

DimensionlessScales nondimensionalize(const PhysicalParams& p);

enum class Integrator { Rk45, Rk4 };

struct GearboxConfig {
    double F_m = 0.1;
    std::vector<double> F_te{0.01, 0.004, 0.002};
    std::vector<double> K_harmonics{0.2, 0.1, 0.05};
    double z = 0.05;
    double Omega_mesh = 0.5;
    int n_teeth = 16;
    double dt_out = 0.015;
    double revolutions = 3.0;
    std::optional<CrackSpec> crack;
    WindSpec wind;
    std::uint64_t seed = 0;
    PhysicalParams physical;

    Integrator integrator = Integrator::Rk45;
    double rtol = 1e-8;
    double atol = 1e-10;
    double rk4_step = 0.0015;

    double omega_shaft() const { return Omega_mesh / static_cast<double>(n_teeth); }
    /// floor(revolutions 2 pi / (omega_shaft dt_out)) + 1.
    std::size_t output_length() const;
    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

/// Dead zone of half-width 1.
double backlash(double x);

/// K(t) including the crack reduction when configured.
double mesh_stiffness(double t, const GearboxConfig& cfg);
/// Whether the shaft angle at time t falls inside the crack window.
bool in_crack_window(double t, const GearboxConfig& cfg);

/// F_te(t) = -sum_j F_te_j (j Omega_mesh)^2 cos(j Omega_mesh t).
double internal_excitation(double t, const GearboxConfig& cfg);

/// Wind force samples on the grid k dt, k < n.
std::vector<double> wind_force(std::size_t n, double dt, const WindSpec& spec, std::uint64_t seed,
                               const PhysicalParams& physical = {});

struct Trajectory {
    std::vector<double> x;
    std::vector<double> v;
    std::vector<double> a;
    double dt = 0.0;
};

/// Integrate from rest and sample at multiples of dt_out.
Trajectory integrate(const GearboxConfig& cfg);

/// Acceleration signal of length cfg.output_length().
TimeSeries simulate(const GearboxConfig& cfg);

/// JSON with keys named after the GearboxConfig fields.
std::string config_to_json(const GearboxConfig& cfg);
/// Unknown keys are rejected. Missing keys keep their defaults.
GearboxConfig config_from_json(const std::string& text);

}  // namespace gearmr
