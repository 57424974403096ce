#include "thermaval/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermaval/errors.hpp"

namespace thermaval::io {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(std::string("cannot open ") + what + " '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj[key].get<T>();
}

void check_keys(const json& obj, std::initializer_list<const char*> known,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok)
            throw ConfigError("unknown " + where + " key '" + it.key() + "'");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json root = parse_json(text, "config");
    if (!root.is_object()) throw ConfigError("config: expected a JSON object");
    check_keys(root,
               {"building", "weather", "factors", "out_dir", "seed", "n_runs",
                "order", "parallel", "sim", "report", "diagnose"},
               "config");

    RunConfig c;
    try {
        take(root, "building", c.building_path);
        take(root, "weather", c.weather_path);
        take(root, "factors", c.factors_path);
        take(root, "out_dir", c.out_dir);
        take(root, "seed", c.seed);
        take(root, "n_runs", c.n_runs);
        take(root, "order", c.order);
        take(root, "parallel", c.parallel);

        if (root.contains("sim")) {
            const json& s = root["sim"];
            check_keys(s,
                       {"h_interior", "h_exterior", "h_sky", "layer_subdivision",
                        "solar_mass_fraction", "warmup_tolerance",
                        "warmup_max_repeats", "elevation_min_deg",
                        "equation_of_time", "ignore_shading", "blocked_override"},
                       "config sim");
            take(s, "h_interior", c.sim.h_interior);
            take(s, "h_exterior", c.sim.h_exterior);
            take(s, "h_sky", c.sim.h_sky_default);
            take(s, "layer_subdivision", c.sim.layer_subdivision);
            take(s, "solar_mass_fraction", c.sim.solar_mass_fraction);
            take(s, "warmup_tolerance", c.sim.warmup_tolerance);
            take(s, "warmup_max_repeats", c.sim.warmup_max_repeats);
            take(s, "elevation_min_deg", c.sim.solar.elevation_min_deg);
            take(s, "equation_of_time", c.sim.solar.equation_of_time);
            take(s, "ignore_shading", c.sim.ignore_shading);
            if (s.contains("blocked_override"))
                c.sim.blocked_override = s["blocked_override"].get<double>();
        }
        if (root.contains("report")) {
            const json& r = root["report"];
            check_keys(r, {"band", "strict", "threshold"}, "config report");
            take(r, "band", c.report.band);
            take(r, "strict", c.report.strict);
            take(r, "threshold", c.report.threshold);
        }
        if (root.contains("diagnose")) {
            const json& d = root["diagnose"];
            check_keys(d,
                       {"filter_order", "cutoff_per_hour", "window_len",
                        "overlap", "n_shifts", "alpha", "tie_margin"},
                       "config diagnose");
            take(d, "filter_order", c.diagnose.filter_order);
            take(d, "cutoff_per_hour", c.diagnose.cutoff_per_hour);
            take(d, "window_len", c.diagnose.window_len);
            take(d, "overlap", c.diagnose.overlap);
            take(d, "n_shifts", c.diagnose.n_shifts);
            take(d, "alpha", c.diagnose.alpha);
            take(d, "tie_margin", c.diagnose.tie_margin);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    RunConfig c = parse_config(read_file(path, "config file"));
    for (const std::string& p :
         {c.building_path, c.weather_path, c.factors_path}) {
        if (!p.empty() && !std::filesystem::exists(p))
            throw ConfigError("config references missing file '" + p + "'");
    }
    return c;
}

std::vector<sensitivity::FactorSpec> parse_factors(const std::string& text) {
    json root = parse_json(text, "factors");
    if (!root.is_array()) throw ConfigError("factors: expected a JSON array");

    std::vector<sensitivity::FactorSpec> out;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& f = root[i];
        check_keys(f, {"name", "target", "amplitude", "frequency"},
                   "factor [" + std::to_string(i) + "]");
        sensitivity::FactorSpec spec;
        try {
            spec.name = f.at("name").get<std::string>();
            spec.target = f.at("target").get<std::string>();
            take(f, "amplitude", spec.amplitude);
            take(f, "frequency", spec.frequency);
        } catch (const json::exception& e) {
            throw ConfigError("factors[" + std::to_string(i) + "]: " + e.what());
        }
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<sensitivity::FactorSpec> load_factors(const std::string& path) {
    return parse_factors(read_file(path, "factors file"));
}

}  // namespace thermaval::io
