#include "thermaval/solar.hpp"

#include <algorithm>
#include <cmath>

namespace thermaval::solar {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

}  // namespace

SolarPosition solar_position(double latitude, double longitude,
                             const Timestamp& t, const SolarOptions& opt) {
    // Fourier fits in the fractional-year angle (Spencer's series).
    double gamma = 2.0 * kPi * (day_of_year(t) - 1) / 365.0;
    double decl = 0.006918 - 0.399912 * std::cos(gamma) + 0.070257 * std::sin(gamma)
                - 0.006758 * std::cos(2 * gamma) + 0.000907 * std::sin(2 * gamma)
                - 0.002697 * std::cos(3 * gamma) + 0.001480 * std::sin(3 * gamma);

    double solar_hours = clock_hours(t)
        + (longitude / kDegToRad - 15.0 * opt.utc_offset_hours) / 15.0;
    if (opt.equation_of_time) {
        double eot_min = 229.18 * (0.000075 + 0.001868 * std::cos(gamma)
                                 - 0.032077 * std::sin(gamma)
                                 - 0.014615 * std::cos(2 * gamma)
                                 - 0.040890 * std::sin(2 * gamma));
        solar_hours += eot_min / 60.0;
    }
    double omega = (solar_hours - 12.0) * 15.0 * kDegToRad;

    double sin_el = std::sin(latitude) * std::sin(decl)
                  + std::cos(latitude) * std::cos(decl) * std::cos(omega);
    sin_el = std::clamp(sin_el, -1.0, 1.0);

    SolarPosition pos;
    pos.declination = decl;
    pos.hour_angle = omega;
    pos.elevation = std::asin(sin_el);
    pos.azimuth = std::atan2(std::sin(omega),
                             std::cos(omega) * std::sin(latitude)
                             - std::tan(decl) * std::cos(latitude));
    return pos;
}

BeamSplit split_beam(double global_h, double diffuse_h, double elevation,
                     const SolarOptions& opt) {
    BeamSplit out;
    if (diffuse_h < 0.0 || global_h < diffuse_h) {
        out.inconsistent = true;
        return out;
    }
    double direct_h = global_h - diffuse_h;
    if (direct_h <= 0.0) return out;
    if (elevation <= opt.elevation_min_deg * kDegToRad) {
        out.low_sun = true;
        return out;
    }
    out.beam_normal = direct_h / std::sin(elevation);
    return out;
}

double incidence_angle(const SolarPosition& pos, double surface_azimuth,
                       double tilt) {
    double c = std::cos(tilt) * std::sin(pos.elevation)
             + std::sin(tilt) * std::cos(pos.elevation)
               * std::cos(pos.azimuth - surface_azimuth);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

IrradianceComponents tilt_irradiance_isotropic(double beam_n, double diffuse_h,
                                               double global_h, double albedo,
                                               double tilt, double incidence) {
    IrradianceComponents out;
    out.beam_on_surface = beam_n * std::max(std::cos(incidence), 0.0);
    out.diffuse_sky = diffuse_h * (1.0 + std::cos(tilt)) / 2.0;
    out.diffuse_ground = albedo * global_h * (1.0 - std::cos(tilt)) / 2.0;
    return out;
}

WindowGain window_gain(const IrradianceComponents& components, double sunlit,
                       double blocked, double transmittance, double area) {
    WindowGain out;
    out.exterior_flux = components.beam_on_surface * sunlit
                      + components.diffuse_total() * (1.0 - blocked);
    out.transmitted_power = transmittance * out.exterior_flux * area;
    return out;
}

}  // namespace thermaval::solar
