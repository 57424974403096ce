#include "thermaval/building_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermaval/errors.hpp"

namespace thermaval::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ParseError("building document: " + path + ": " + what);
}

const json& get(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing field");
    return *it;
}

double num(const json& obj, const char* key, const std::string& path) {
    const json& v = get(obj, key, path);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

double num_or(const json& obj, const char* key, const std::string& path,
              double fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return num(obj, key, path);
}

std::string str(const json& obj, const char* key, const std::string& path) {
    const json& v = get(obj, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

thermal::Boundary parse_boundary(const std::string& value) {
    if (value == "exterior") return thermal::Boundary::exterior();
    return thermal::Boundary::to_zone(value);
}

// Shade element dimensions; extent accepts the literal "inf".
geometry::ShadeElement parse_element(const json& obj, const std::string& path) {
    geometry::ShadeElement e;
    e.depth = num(obj, "depth", path);
    e.offset = num_or(obj, "offset", path, 0.0);
    if (obj.contains("extent")) {
        const json& v = obj["extent"];
        if (v.is_string()) {
            if (v.get<std::string>() != "inf")
                fail(path + ".extent", "expected a number or \"inf\"");
            e.extent = geometry::kInfiniteExtent;
        } else if (v.is_number()) {
            e.extent = v.get<double>();
        } else {
            fail(path + ".extent", "expected a number or \"inf\"");
        }
    }
    return e;
}

geometry::Rect3 window_rect(double width, double height, double azimuth_deg) {
    double a = azimuth_deg * kPi / 180.0;
    geometry::Vec3 lateral{std::cos(a), -std::sin(a), 0.0};
    return {{0.0, 0.0, 0.0}, lateral * width, geometry::Vec3{0.0, 0.0, 1.0} * height};
}

ordered_json element_json(const geometry::ShadeElement& e) {
    ordered_json j;
    j["depth"] = e.depth;
    if (std::isinf(e.extent))
        j["extent"] = "inf";
    else
        j["extent"] = e.extent;
    if (e.offset != 0.0) j["offset"] = e.offset;
    return j;
}

}  // namespace

thermal::BuildingModel parse_building(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("building document: ") + e.what());
    }

    thermal::BuildingModel model;
    const json& site = get(root, "site", "");
    model.site.latitude_deg = num(site, "latitude_deg", "site");
    model.site.longitude_deg = num(site, "longitude_deg", "site");
    model.site.utc_offset_hours = num_or(site, "utc_offset_hours", "site", 0.0);
    model.site.albedo = num_or(site, "albedo", "site", 0.2);

    const json& zones = get(root, "zones", "");
    if (!zones.is_array() || zones.empty()) fail("zones", "expected a non-empty array");
    for (std::size_t i = 0; i < zones.size(); ++i) {
        std::string path = "zones[" + std::to_string(i) + "]";
        thermal::Zone z;
        z.name = str(zones[i], "name", path);
        if (z.name == "exterior") fail(path + ".name", "'exterior' is reserved");
        z.volume = num(zones[i], "volume", path);
        z.air_capacitance = num_or(zones[i], "air_capacitance", path, 0.0);
        if (zones[i].contains("solar_mass_wall"))
            z.solar_mass_wall = str(zones[i], "solar_mass_wall", path);
        model.zones.push_back(std::move(z));
    }

    if (root.contains("walls")) {
        const json& walls = root["walls"];
        if (!walls.is_array()) fail("walls", "expected an array");
        for (std::size_t i = 0; i < walls.size(); ++i) {
            std::string path = "walls[" + std::to_string(i) + "]";
            thermal::Wall w;
            w.name = str(walls[i], "name", path);
            w.area = num(walls[i], "area", path);
            w.side_a = parse_boundary(str(walls[i], "side_a", path));
            w.side_b = parse_boundary(str(walls[i], "side_b", path));
            w.orientation.tilt_deg = num_or(walls[i], "tilt_deg", path, 90.0);
            w.orientation.azimuth_deg = num_or(walls[i], "azimuth_deg", path, 0.0);
            w.absorptance = num_or(walls[i], "absorptance", path, 0.6);
            w.h_sky = num_or(walls[i], "h_sky", path, -1.0);
            const json& layers = get(walls[i], "layers", path);
            if (!layers.is_array() || layers.empty())
                fail(path + ".layers", "expected a non-empty array");
            for (std::size_t li = 0; li < layers.size(); ++li) {
                std::string lpath = path + ".layers[" + std::to_string(li) + "]";
                thermal::Layer l;
                l.thickness = num(layers[li], "thickness", lpath);
                l.conductivity = num(layers[li], "conductivity", lpath);
                l.density = num(layers[li], "density", lpath);
                l.specific_heat = num(layers[li], "specific_heat", lpath);
                w.layers.push_back(l);
            }
            model.walls.push_back(std::move(w));
        }
    }

    if (root.contains("windows")) {
        const json& windows = root["windows"];
        if (!windows.is_array()) fail("windows", "expected an array");
        for (std::size_t i = 0; i < windows.size(); ++i) {
            std::string path = "windows[" + std::to_string(i) + "]";
            thermal::Window w;
            w.name = str(windows[i], "name", path);
            w.zone = str(windows[i], "zone", path);
            w.width = num(windows[i], "width", path);
            w.height = num(windows[i], "height", path);
            w.area = w.width * w.height;
            w.transmittance = num_or(windows[i], "transmittance", path, 0.85);
            w.orientation.tilt_deg = num_or(windows[i], "tilt_deg", path, 90.0);
            w.orientation.azimuth_deg = num_or(windows[i], "azimuth_deg", path, 0.0);
            if (windows[i].contains("shade")) {
                if (w.orientation.tilt_deg != 90.0)
                    fail(path + ".shade", "shades are supported on vertical windows only");
                const json& shade = windows[i]["shade"];
                geometry::ShadeAssembly s;
                s.window = window_rect(w.width, w.height, w.orientation.azimuth_deg);
                if (shade.contains("top_flap"))
                    s.top_flap = parse_element(shade["top_flap"], path + ".shade.top_flap");
                if (shade.contains("left_fin"))
                    s.left_fin = parse_element(shade["left_fin"], path + ".shade.left_fin");
                if (shade.contains("right_fin"))
                    s.right_fin = parse_element(shade["right_fin"], path + ".shade.right_fin");
                if (shade.contains("low_wall"))
                    s.low_wall = parse_element(shade["low_wall"], path + ".shade.low_wall");
                w.shade = std::move(s);
            }
            model.windows.push_back(std::move(w));
        }
    }

    model.validate();
    return model;
}

std::string serialize_building(const thermal::BuildingModel& model) {
    ordered_json root;
    root["site"] = {{"latitude_deg", model.site.latitude_deg},
                    {"longitude_deg", model.site.longitude_deg},
                    {"utc_offset_hours", model.site.utc_offset_hours},
                    {"albedo", model.site.albedo}};

    root["zones"] = ordered_json::array();
    for (const auto& z : model.zones) {
        ordered_json j;
        j["name"] = z.name;
        j["volume"] = z.volume;
        if (z.air_capacitance > 0.0) j["air_capacitance"] = z.air_capacitance;
        if (!z.solar_mass_wall.empty()) j["solar_mass_wall"] = z.solar_mass_wall;
        root["zones"].push_back(j);
    }

    root["walls"] = ordered_json::array();
    for (const auto& w : model.walls) {
        ordered_json j;
        j["name"] = w.name;
        j["area"] = w.area;
        j["side_a"] = w.side_a.kind == thermal::Boundary::Kind::Exterior
                          ? "exterior"
                          : w.side_a.zone;
        j["side_b"] = w.side_b.kind == thermal::Boundary::Kind::Exterior
                          ? "exterior"
                          : w.side_b.zone;
        j["tilt_deg"] = w.orientation.tilt_deg;
        j["azimuth_deg"] = w.orientation.azimuth_deg;
        j["absorptance"] = w.absorptance;
        if (w.h_sky >= 0.0) j["h_sky"] = w.h_sky;
        j["layers"] = ordered_json::array();
        for (const auto& l : w.layers)
            j["layers"].push_back({{"thickness", l.thickness},
                                   {"conductivity", l.conductivity},
                                   {"density", l.density},
                                   {"specific_heat", l.specific_heat}});
        root["walls"].push_back(j);
    }

    root["windows"] = ordered_json::array();
    for (const auto& w : model.windows) {
        if (!(w.width > 0.0) || !(w.height > 0.0))
            throw ModelError("window '" + w.name +
                             "' has no width/height; cannot serialize");
        ordered_json j;
        j["name"] = w.name;
        j["zone"] = w.zone;
        j["width"] = w.width;
        j["height"] = w.height;
        j["transmittance"] = w.transmittance;
        j["tilt_deg"] = w.orientation.tilt_deg;
        j["azimuth_deg"] = w.orientation.azimuth_deg;
        if (w.shade) {
            ordered_json s;
            if (w.shade->top_flap) s["top_flap"] = element_json(*w.shade->top_flap);
            if (w.shade->left_fin) s["left_fin"] = element_json(*w.shade->left_fin);
            if (w.shade->right_fin) s["right_fin"] = element_json(*w.shade->right_fin);
            if (w.shade->low_wall) s["low_wall"] = element_json(*w.shade->low_wall);
            j["shade"] = s;
        }
        root["windows"].push_back(j);
    }

    return root.dump(2) + "\n";
}

geometry::ShadeAssembly parse_shade(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("shade document: ") + e.what());
    }
    geometry::ShadeAssembly s;
    double width = num(root, "width", "");
    double height = num(root, "height", "");
    double azimuth = num_or(root, "azimuth_deg", "", 0.0);
    s.window = window_rect(width, height, azimuth);
    if (root.contains("top_flap")) s.top_flap = parse_element(root["top_flap"], "top_flap");
    if (root.contains("left_fin")) s.left_fin = parse_element(root["left_fin"], "left_fin");
    if (root.contains("right_fin"))
        s.right_fin = parse_element(root["right_fin"], "right_fin");
    if (root.contains("low_wall")) s.low_wall = parse_element(root["low_wall"], "low_wall");
    s.validate();
    return s;
}

geometry::ShadeAssembly load_shade(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open shade file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_shade(buf.str());
}

thermal::BuildingModel load_building(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open building file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_building(buf.str());
}

void save_building(const thermal::BuildingModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write building file '" + path + "'");
    out << serialize_building(model);
}

}  // namespace thermaval::io
