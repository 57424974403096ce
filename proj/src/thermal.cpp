#include "thermaval/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "thermaval/errors.hpp"

namespace thermaval::thermal {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kAirHeatPerVolume = 1.2 * 1006.0;  // J/m^3K

geometry::Vec3 orientation_normal(const Orientation& o) {
    double tilt = o.tilt_deg * kDegToRad;
    double az = o.azimuth_deg * kDegToRad;
    return {-std::sin(tilt) * std::sin(az), -std::sin(tilt) * std::cos(az),
            std::cos(tilt)};
}

}  // namespace

int BuildingModel::zone_index(const std::string& name) const {
    for (std::size_t i = 0; i < zones.size(); ++i)
        if (zones[i].name == name) return static_cast<int>(i);
    return -1;
}

void BuildingModel::validate() const {
    if (zones.empty()) throw ModelError("model has no zones");

    std::set<std::string> names;
    for (const Zone& z : zones) {
        if (!names.insert(z.name).second)
            throw ModelError("duplicate zone name '" + z.name + "'");
        if (!(z.volume > 0.0))
            throw ModelError("zone '" + z.name + "': volume must be positive");
        if (z.air_capacitance < 0.0)
            throw ModelError("zone '" + z.name + "': negative air capacitance");
    }

    auto check_boundary = [&](const Boundary& b, const std::string& owner) {
        if (b.kind == Boundary::Kind::Zone && zone_index(b.zone) < 0)
            throw ModelError(owner + " references unknown zone '" + b.zone + "'");
    };

    names.clear();
    for (const Wall& w : walls) {
        if (!names.insert(w.name).second)
            throw ModelError("duplicate wall name '" + w.name + "'");
        if (w.layers.empty())
            throw ModelError("wall '" + w.name + "' has no layers");
        for (const Layer& l : w.layers)
            if (!(l.thickness > 0.0) || !(l.conductivity > 0.0) ||
                !(l.density > 0.0) || !(l.specific_heat > 0.0))
                throw ModelError("wall '" + w.name + "': layer properties must be positive");
        if (!(w.area > 0.0))
            throw ModelError("wall '" + w.name + "': area must be positive");
        if (w.absorptance < 0.0 || w.absorptance > 1.0)
            throw ModelError("wall '" + w.name + "': absorptance outside [0,1]");
        check_boundary(w.side_a, "wall '" + w.name + "' side_a");
        check_boundary(w.side_b, "wall '" + w.name + "' side_b");
        if (w.side_a.kind == Boundary::Kind::Exterior &&
            w.side_b.kind == Boundary::Kind::Zone)
            throw ModelError("wall '" + w.name +
                             "': orient the exterior boundary as side_b");
    }

    names.clear();
    for (const Window& w : windows) {
        if (!names.insert(w.name).second)
            throw ModelError("duplicate window name '" + w.name + "'");
        if (zone_index(w.zone) < 0)
            throw ModelError("window '" + w.name + "' references unknown zone '" +
                             w.zone + "'");
        if (!(w.area > 0.0))
            throw ModelError("window '" + w.name + "': area must be positive");
        if (w.width > 0.0 && w.height > 0.0 &&
            std::abs(w.width * w.height - w.area) > 1e-6 * std::max(1.0, w.area))
            throw ModelError("window '" + w.name +
                             "': width x height disagrees with area");
        if (w.transmittance < 0.0 || w.transmittance > 1.0)
            throw ModelError("window '" + w.name + "': transmittance outside [0,1]");
        if (w.shade) {
            w.shade->validate();
            double rect_area = w.shade->window.area();
            if (std::abs(rect_area - w.area) > 1e-6 * std::max(1.0, w.area))
                throw ModelError("window '" + w.name +
                                 "': shade frame area disagrees with window area");
            geometry::Vec3 n = w.shade->window.normal();
            geometry::Vec3 expect = orientation_normal(w.orientation);
            if (n.dot(expect) < 0.999)
                throw ModelError("window '" + w.name +
                                 "': shade frame normal disagrees with orientation");
        }
    }
}

namespace {

struct MeshLayer {
    double thickness, conductivity, density, specific_heat;
};

// Sub-slabs for one wall; at least two so every wall owns interior mass.
std::vector<MeshLayer> mesh_wall(const Wall& w, int subdivision) {
    std::vector<MeshLayer> out;
    int per_layer = std::max(1, subdivision);
    if (w.layers.size() * per_layer < 2) per_layer = 2;
    for (const Layer& l : w.layers) {
        MeshLayer m{l.thickness / per_layer, l.conductivity, l.density,
                    l.specific_heat};
        for (int i = 0; i < per_layer; ++i) out.push_back(m);
    }
    return out;
}

void couple(Eigen::MatrixXd& g, int i, int j, double cond) {
    g(i, i) += cond;
    g(j, j) += cond;
    g(i, j) -= cond;
    g(j, i) -= cond;
}

}  // namespace

NodalSystem build_network(const BuildingModel& model, const SimOptions& opt) {
    model.validate();

    const int nz = static_cast<int>(model.zones.size());
    std::vector<std::vector<MeshLayer>> meshes;
    int n_nodes = nz;
    for (const Wall& w : model.walls) {
        meshes.push_back(mesh_wall(w, opt.layer_subdivision));
        n_nodes += static_cast<int>(meshes.back().size()) + 2;
    }

    NodalSystem sys;
    sys.capacitance = Eigen::VectorXd::Zero(n_nodes);
    sys.conductance = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
    sys.zone_node.resize(nz);
    for (int z = 0; z < nz; ++z) {
        sys.zone_node[z] = z;
        const Zone& zone = model.zones[z];
        sys.capacitance(z) = zone.air_capacitance > 0.0
                                 ? zone.air_capacitance
                                 : zone.volume * kAirHeatPerVolume;
    }

    int next = nz;
    for (std::size_t wi = 0; wi < model.walls.size(); ++wi) {
        const Wall& w = model.walls[wi];
        const auto& mesh = meshes[wi];
        const int m = static_cast<int>(mesh.size());
        const int surf_a = next;
        const int first_mass = next + 1;
        const int surf_b = next + m + 1;
        next = surf_b + 1;
        sys.wall_nodes.push_back({surf_a, m + 2});

        for (int i = 0; i < m; ++i)
            sys.capacitance(first_mass + i) =
                mesh[i].density * mesh[i].specific_heat * mesh[i].thickness * w.area;

        auto half_res = [&](int i) {
            return mesh[i].thickness / (2.0 * mesh[i].conductivity * w.area);
        };
        couple(sys.conductance, surf_a, first_mass, 1.0 / half_res(0));
        for (int i = 0; i + 1 < m; ++i)
            couple(sys.conductance, first_mass + i, first_mass + i + 1,
                   1.0 / (half_res(i) + half_res(i + 1)));
        couple(sys.conductance, first_mass + m - 1, surf_b, 1.0 / half_res(m - 1));

        auto attach = [&](const Boundary& side, int surf) {
            if (side.kind == Boundary::Kind::Zone) {
                int z = model.zone_index(side.zone);
                couple(sys.conductance, surf, sys.zone_node[z],
                       opt.h_interior * w.area);
            } else {
                double g = opt.h_exterior * w.area;
                sys.conductance(surf, surf) += g;
                sys.links.push_back({surf, g, BoundaryLink::Target::ExteriorAir});
            }
        };
        attach(w.side_a, surf_a);
        attach(w.side_b, surf_b);

        if (w.side_b.kind == Boundary::Kind::Exterior) {
            double h_sky = w.h_sky < 0.0 ? opt.h_sky_default : w.h_sky;
            if (h_sky > 0.0) {
                double g = h_sky * w.area;
                sys.conductance(surf_b, surf_b) += g;
                sys.links.push_back({surf_b, g, BoundaryLink::Target::Sky});
            }
            if (w.absorptance > 0.0)
                sys.absorption.push_back(
                    {surf_b, static_cast<int>(wi), w.absorptance * w.area});
        }
    }

    // Window mass targets: the interior surface of the chosen wall per zone.
    sys.mass_node.assign(nz, -1);
    for (int z = 0; z < nz; ++z) {
        const Zone& zone = model.zones[z];
        int chosen = -1;
        double best_area = -1.0;
        for (std::size_t wi = 0; wi < model.walls.size(); ++wi) {
            const Wall& w = model.walls[wi];
            bool a = w.side_a.kind == Boundary::Kind::Zone && w.side_a.zone == zone.name;
            bool b = w.side_b.kind == Boundary::Kind::Zone && w.side_b.zone == zone.name;
            if (!a && !b) continue;
            if (!zone.solar_mass_wall.empty()) {
                if (w.name == zone.solar_mass_wall) chosen = static_cast<int>(wi);
            } else if (w.area > best_area) {
                best_area = w.area;
                chosen = static_cast<int>(wi);
            }
        }
        if (!zone.solar_mass_wall.empty() && chosen < 0)
            throw ModelError("zone '" + zone.name + "': solar_mass_wall '" +
                             zone.solar_mass_wall + "' is not adjacent");
        if (chosen >= 0) {
            const Wall& w = model.walls[chosen];
            const WallNodeRange& r = sys.wall_nodes[chosen];
            bool a_side = w.side_a.kind == Boundary::Kind::Zone &&
                          w.side_a.zone == zone.name;
            sys.mass_node[z] = a_side ? r.first : r.first + r.count - 1;
        }
    }

    // Every node must reach a boundary, otherwise part of the building floats.
    std::vector<char> seen(n_nodes, 0);
    std::deque<int> queue;
    for (const BoundaryLink& l : sys.links)
        if (!seen[l.node]) {
            seen[l.node] = 1;
            queue.push_back(l.node);
        }
    while (!queue.empty()) {
        int i = queue.front();
        queue.pop_front();
        for (int j = 0; j < n_nodes; ++j)
            if (j != i && !seen[j] && sys.conductance(i, j) != 0.0) {
                seen[j] = 1;
                queue.push_back(j);
            }
    }
    for (int z = 0; z < nz; ++z)
        if (!seen[sys.zone_node[z]])
            throw ModelError("zone '" + model.zones[z].name +
                             "' has no path to any boundary");

    return sys;
}

StepSolver::StepSolver(const NodalSystem& sys, double dt_s) : sys_(&sys), dt_s_(dt_s) {
    if (!(dt_s > 0.0)) throw ParameterError("step: dt must be positive");
    Eigen::MatrixXd m = sys.conductance;
    m.diagonal() += sys.capacitance / dt_s;
    llt_.compute(m);
    if (llt_.info() != Eigen::Success)
        throw ModelError("thermal system is singular");
}

Eigen::VectorXd StepSolver::advance(const Eigen::VectorXd& state,
                                    const BoundaryState& boundary) const {
    const int n = sys_->size();
    if (state.size() != n) throw ParameterError("step: state size mismatch");

    Eigen::VectorXd rhs = sys_->capacitance.cwiseProduct(state) / dt_s_;
    if (boundary.node_gains.size() > 0) {
        if (boundary.node_gains.size() != n)
            throw ParameterError("step: gain vector size mismatch");
        rhs += boundary.node_gains;
    }
    for (const BoundaryLink& l : sys_->links)
        rhs(l.node) += l.conductance *
                       (l.target == BoundaryLink::Target::Sky ? boundary.t_sky_c
                                                              : boundary.t_exterior_c);
    return llt_.solve(rhs);
}

Eigen::VectorXd step(const NodalSystem& sys, const Eigen::VectorXd& state,
                     const BoundaryState& boundary, double dt_s) {
    return StepSolver(sys, dt_s).advance(state, boundary);
}

namespace {

struct StepForcing {
    BoundaryState boundary;
    std::vector<double> window_flux;   // W/m^2 per window
    std::vector<double> window_power;  // W per window
    std::vector<double> window_sunlit;
    bool sun_up = false;
    bool flagged = false;
};

}  // namespace

SimulationResult simulate(const BuildingModel& model,
                          const weather::WeatherSeries& weather,
                          const SimOptions& opt) {
    model.validate();
    weather.validate();
    if (weather.step_minutes != 30)
        throw ParameterError("simulate: weather must be on a 30-minute step");
    const double dt = weather.step_minutes * 60.0;
    const std::size_t n_steps = weather.size();

    NodalSystem sys = build_network(model, opt);
    const int n_nodes = sys.size();
    const int nw = static_cast<int>(model.windows.size());

    solar::SolarOptions sopt = opt.solar;
    sopt.utc_offset_hours = model.site.utc_offset_hours;
    const double lat = model.site.latitude_deg * kDegToRad;
    const double lon = model.site.longitude_deg * kDegToRad;

    // Shading is orientation-only, so the diffuse factor is fixed per window.
    std::vector<double> blocked(nw, 0.0);
    for (int w = 0; w < nw; ++w) {
        const Window& win = model.windows[w];
        if (opt.ignore_shading || !win.shade) continue;
        blocked[w] = opt.blocked_override ? *opt.blocked_override
                                          : geometry::diffuse_blocked_fraction(*win.shade);
    }

    std::vector<StepForcing> forcing(n_steps);
    for (std::size_t t = 0; t < n_steps; ++t) {
        const weather::WeatherRecord& rec = weather.records[t];
        StepForcing& f = forcing[t];
        f.boundary.t_exterior_c = rec.t_out_c;
        f.boundary.t_sky_c = rec.t_sky_c;
        f.boundary.node_gains = Eigen::VectorXd::Zero(n_nodes);
        f.window_flux.resize(nw, 0.0);
        f.window_power.resize(nw, 0.0);
        f.window_sunlit.resize(nw, 1.0);

        auto pos = solar::solar_position(lat, lon, rec.time, sopt);
        auto split = solar::split_beam(rec.ghi_wm2, rec.dhi_wm2, pos.elevation, sopt);
        f.flagged = rec.flagged || split.inconsistent;
        f.sun_up = pos.elevation > 0.0;

        geometry::Vec3 sun_dir{-std::cos(pos.elevation) * std::sin(pos.azimuth),
                               -std::cos(pos.elevation) * std::cos(pos.azimuth),
                               std::sin(pos.elevation)};

        for (const SolarAbsorption& ab : sys.absorption) {
            const Wall& wall = model.walls[ab.wall];
            double tilt = wall.orientation.tilt_deg * kDegToRad;
            double inc = solar::incidence_angle(
                pos, wall.orientation.azimuth_deg * kDegToRad, tilt);
            auto comp = solar::tilt_irradiance_isotropic(
                split.beam_normal, rec.dhi_wm2, rec.ghi_wm2, model.site.albedo,
                tilt, inc);
            f.boundary.node_gains(ab.node) +=
                ab.gain_per_flux * (comp.beam_on_surface + comp.diffuse_total());
        }

        for (int w = 0; w < nw; ++w) {
            const Window& win = model.windows[w];
            double sunlit = 1.0;
            if (!opt.ignore_shading && win.shade && split.beam_normal > 0.0)
                sunlit = geometry::sunlit_fraction(*win.shade, sun_dir);
            f.window_sunlit[w] = sunlit;

            double tilt = win.orientation.tilt_deg * kDegToRad;
            double inc = solar::incidence_angle(
                pos, win.orientation.azimuth_deg * kDegToRad, tilt);
            auto comp = solar::tilt_irradiance_isotropic(
                split.beam_normal, rec.dhi_wm2, rec.ghi_wm2, model.site.albedo,
                tilt, inc);
            auto gain = solar::window_gain(comp, sunlit, blocked[w],
                                           win.transmittance, win.area);
            f.window_flux[w] = gain.exterior_flux;
            f.window_power[w] = gain.transmitted_power;

            int z = model.zone_index(win.zone);
            double to_mass = sys.mass_node[z] >= 0 ? opt.solar_mass_fraction : 0.0;
            if (to_mass > 0.0)
                f.boundary.node_gains(sys.mass_node[z]) +=
                    to_mass * gain.transmitted_power;
            f.boundary.node_gains(sys.zone_node[z]) +=
                (1.0 - to_mass) * gain.transmitted_power;
        }
    }

    StepSolver solver(sys, dt);
    Eigen::VectorXd state =
        Eigen::VectorXd::Constant(n_nodes, weather.records[0].t_out_c);

    // Spin on day one until the state repeats within tolerance.
    const std::size_t day_steps = std::min<std::size_t>(48, n_steps);
    int repeats = 0;
    for (; repeats < opt.warmup_max_repeats; ++repeats) {
        Eigen::VectorXd before = state;
        for (std::size_t t = 0; t < day_steps; ++t)
            state = solver.advance(state, forcing[t].boundary);
        if ((state - before).cwiseAbs().maxCoeff() < opt.warmup_tolerance) {
            ++repeats;
            break;
        }
    }

    SimulationResult result;
    result.warmup_repeats = repeats;
    result.time.reserve(n_steps);
    for (const auto& rec : weather.records) result.time.push_back(rec.time);
    result.zone_names.reserve(model.zones.size());
    for (const Zone& z : model.zones) result.zone_names.push_back(z.name);
    result.zone_temp_c.assign(model.zones.size(), {});
    for (auto& v : result.zone_temp_c) v.reserve(n_steps);
    result.windows.resize(nw);
    for (int w = 0; w < nw; ++w) {
        result.windows[w].name = model.windows[w].name;
        result.windows[w].blocked = blocked[w];
        result.windows[w].exterior_flux.reserve(n_steps);
        result.windows[w].transmitted_power.reserve(n_steps);
    }

    std::vector<double> sunlit_sum(nw, 0.0);
    std::size_t sun_steps = 0;
    for (std::size_t t = 0; t < n_steps; ++t) {
        const StepForcing& f = forcing[t];
        result.weather_flagged = result.weather_flagged || f.flagged;
        state = solver.advance(state, f.boundary);
        for (std::size_t z = 0; z < model.zones.size(); ++z)
            result.zone_temp_c[z].push_back(state(sys.zone_node[z]));
        for (int w = 0; w < nw; ++w) {
            result.windows[w].exterior_flux.push_back(f.window_flux[w]);
            result.windows[w].transmitted_power.push_back(f.window_power[w]);
        }
        if (f.sun_up) {
            ++sun_steps;
            for (int w = 0; w < nw; ++w) sunlit_sum[w] += f.window_sunlit[w];
        }
    }
    for (int w = 0; w < nw; ++w)
        result.windows[w].sunlit_mean =
            sun_steps ? sunlit_sum[w] / static_cast<double>(sun_steps) : 0.0;

    return result;
}

}  // namespace thermaval::thermal
