#pragma once

#include "thermaval/timestamp.hpp"

namespace thermaval::solar {

// Angles in radians. Azimuth convention: south = 0, west positive.
struct SolarPosition {
    double declination = 0;
    double hour_angle = 0;
    double elevation = 0;
    double azimuth = 0;
};

struct IrradianceComponents {
    double beam_on_surface = 0;   // W/m^2
    double diffuse_sky = 0;       // W/m^2
    double diffuse_ground = 0;    // W/m^2

    double diffuse_total() const { return diffuse_sky + diffuse_ground; }
};

struct SolarOptions {
    // Timestamps are civil time; solar time is recovered from the longitude
    // against the zone meridian. The equation of time matters less than the
    // half-hour data resolution, so it stays off unless asked for.
    double utc_offset_hours = 0;
    bool equation_of_time = false;
    double elevation_min_deg = 3.0;  // beam split clamps to 0 below this
};

SolarPosition solar_position(double latitude, double longitude,
                             const Timestamp& t, const SolarOptions& opt = {});

struct BeamSplit {
    double beam_normal = 0;  // W/m^2 along the sun direction
    bool low_sun = false;    // elevation below the clamp, beam forced to 0
    bool inconsistent = false;  // diffuse exceeded global; beam forced to 0
};

BeamSplit split_beam(double global_h, double diffuse_h, double elevation,
                     const SolarOptions& opt = {});

// Angle between the sun direction and the surface normal. Tilt 0 is
// horizontal (normal up), pi/2 vertical; surface_azimuth uses the same
// south = 0, west positive convention.
double incidence_angle(const SolarPosition& pos, double surface_azimuth,
                       double tilt);

IrradianceComponents tilt_irradiance_isotropic(double beam_n, double diffuse_h,
                                               double global_h, double albedo,
                                               double tilt, double incidence);

struct WindowGain {
    double exterior_flux = 0;      // W/m^2 on the glazing after shading
    double transmitted_power = 0;  // W entering the zone
};

WindowGain window_gain(const IrradianceComponents& components, double sunlit,
                       double blocked, double transmittance, double area);

}  // namespace thermaval::solar
