#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "thermaval/geometry.hpp"
#include "thermaval/solar.hpp"
#include "thermaval/weather.hpp"

namespace thermaval::thermal {

struct Layer {
    double thickness = 0;      // m
    double conductivity = 0;   // W/mK
    double density = 0;        // kg/m^3
    double specific_heat = 0;  // J/kgK
};

// Tilt 0 = horizontal facing up, 90 = vertical, 180 = facing down.
// Azimuth: south = 0, west positive (the solar module's convention, in
// degrees here so building files round-trip exactly).
struct Orientation {
    double tilt_deg = 90;
    double azimuth_deg = 0;
};

struct Boundary {
    enum class Kind { Zone, Exterior };
    Kind kind = Kind::Exterior;
    std::string zone;  // set when kind == Zone

    static Boundary exterior() { return {Kind::Exterior, {}}; }
    static Boundary to_zone(std::string name) { return {Kind::Zone, std::move(name)}; }
};

struct Wall {
    std::string name;
    std::vector<Layer> layers;  // ordered side_a -> side_b
    double area = 0;            // m^2
    Boundary side_a, side_b;    // orientation describes side_b's outward face
    Orientation orientation;
    double absorptance = 0.6;   // shortwave, exterior face
    double h_sky = -1;          // W/m^2K; negative means use the run default
};

struct Window {
    std::string name;
    std::string zone;
    double width = 0;   // m; zero when the window was built from area alone
    double height = 0;  // m
    double area = 0;    // m^2
    double transmittance = 0.85;
    Orientation orientation;
    std::optional<geometry::ShadeAssembly> shade;
};

struct Zone {
    std::string name;
    double volume = 0;           // m^3
    double air_capacitance = 0;  // J/K; 0 means derive from volume
    // Wall whose interior surface absorbs the mass share of window solar;
    // empty picks the largest wall adjacent to the zone.
    std::string solar_mass_wall;
};

struct Site {
    double latitude_deg = 0;
    double longitude_deg = 0;
    double utc_offset_hours = 0;
    double albedo = 0.2;
};

struct BuildingModel {
    Site site;
    std::vector<Zone> zones;
    std::vector<Wall> walls;
    std::vector<Window> windows;

    void validate() const;
    int zone_index(const std::string& name) const;  // -1 when absent
};

struct SimOptions {
    double h_interior = 8.0;    // W/m^2K film coefficient
    double h_exterior = 17.0;   // W/m^2K
    double h_sky_default = 5.0; // W/m^2K linearized sky exchange
    int layer_subdivision = 1;  // capacitive nodes per layer
    double solar_mass_fraction = 0.6;  // window gain share sent to mass
    double warmup_tolerance = 0.01;    // K between day-1 repeats
    int warmup_max_repeats = 50;
    solar::SolarOptions solar;
    // Validation experiments: drop shading entirely, or force a fixed
    // diffuse blocked fraction on every shaded window.
    bool ignore_shading = false;
    std::optional<double> blocked_override;
};

// Assembled resistance-capacitance network. Node order: zone air nodes
// first (model order), then per wall: interior-side surface, mass nodes
// side_a -> side_b, exterior-side surface. Surface nodes are massless.
struct BoundaryLink {
    enum class Target { ExteriorAir, Sky };
    int node = 0;
    double conductance = 0;  // W/K
    Target target = Target::ExteriorAir;
};

struct SolarAbsorption {
    int node = 0;
    int wall = 0;          // index into model.walls
    double gain_per_flux;  // W per W/m^2 of exterior flux on that face
};

struct WallNodeRange {
    int first = 0;  // node index of the side_a surface
    int count = 0;  // surfaces + mass nodes
};

struct NodalSystem {
    Eigen::VectorXd capacitance;  // J/K, zero on surface nodes
    Eigen::MatrixXd conductance;  // W/K, Laplacian plus boundary diagonal
    std::vector<BoundaryLink> links;
    std::vector<SolarAbsorption> absorption;
    std::vector<int> zone_node;            // per zone
    std::vector<WallNodeRange> wall_nodes; // per wall
    std::vector<int> mass_node;            // per zone: window-gain mass target

    int size() const { return static_cast<int>(capacitance.size()); }
};

NodalSystem build_network(const BuildingModel& model, const SimOptions& opt = {});

struct BoundaryState {
    double t_exterior_c = 0;
    double t_sky_c = 0;
    Eigen::VectorXd node_gains;  // W injected per node; may be empty for none
};

// One backward-Euler step with a fresh factorization.
Eigen::VectorXd step(const NodalSystem& sys, const Eigen::VectorXd& state,
                     const BoundaryState& boundary, double dt_s);

// Factor once, step many times with the same dt.
class StepSolver {
  public:
    StepSolver(const NodalSystem& sys, double dt_s);
    Eigen::VectorXd advance(const Eigen::VectorXd& state,
                            const BoundaryState& boundary) const;

  private:
    const NodalSystem* sys_;
    double dt_s_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct WindowOutput {
    std::string name;
    double sunlit_mean = 0;   // time-average of the direct sunlit fraction
    double blocked = 0;       // diffuse blocked fraction used
    std::vector<double> exterior_flux;      // W/m^2 after shading
    std::vector<double> transmitted_power;  // W
};

struct SimulationResult {
    std::vector<Timestamp> time;
    std::vector<std::string> zone_names;
    std::vector<std::vector<double>> zone_temp_c;  // [zone][step]
    std::vector<WindowOutput> windows;
    int warmup_repeats = 0;
    bool weather_flagged = false;
};

SimulationResult simulate(const BuildingModel& model,
                          const weather::WeatherSeries& weather,
                          const SimOptions& opt = {});

}  // namespace thermaval::thermal
