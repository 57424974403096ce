#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermaval/building_io.hpp"
#include "thermaval/config.hpp"
#include "thermaval/dsp.hpp"
#include "thermaval/errors.hpp"
#include "thermaval/geometry.hpp"
#include "thermaval/sensitivity.hpp"
#include "thermaval/solar.hpp"
#include "thermaval/thermal.hpp"
#include "thermaval/validation.hpp"
#include "thermaval/weather.hpp"

namespace {

namespace fs = std::filesystem;
using namespace thermaval;

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitInputError = 2;

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string fmt_fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

fs::path prepare_out_dir(const std::string& dir) {
    fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
    fs::create_directories(p);
    return p;
}

struct TimedSeries {
    std::vector<Timestamp> time;
    dsp::Series series;
};

// Two-column series CSV: timestamp,<any value header>.
TimedSeries load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open series file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty series file", 1);

    TimedSeries out;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("expected 'timestamp,value'", lineno);
        std::string ts = line.substr(0, comma);
        std::string val = line.substr(comma + 1);
        if (!val.empty() && val.back() == '\r') val.pop_back();
        try {
            out.time.push_back(parse_timestamp(ts));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
        try {
            out.series.values.push_back(std::stod(val));
        } catch (const std::exception&) {
            throw ParseError("bad numeric value '" + val + "'", lineno);
        }
    }
    if (out.series.values.size() < 2)
        throw ParseError("series needs at least two samples");
    long long step = minutes_between(out.time[0], out.time[1]);
    if (step <= 0) throw ParseError("series timestamps must increase");
    for (std::size_t i = 1; i < out.time.size(); ++i)
        if (minutes_between(out.time[i - 1], out.time[i]) != step)
            throw ParseError("non-uniform series step",
                             static_cast<long>(i + 2));
    out.series.dt_hours = static_cast<double>(step) / 60.0;
    return out;
}

void save_series(const fs::path& path, const std::vector<Timestamp>& time,
                 const std::vector<double>& values, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "timestamp," << header << "\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << format_timestamp(time[i]) << ',' << fmt(values[i]) << "\n";
}

void print_report(const validation::ResidualReport& rep, std::ostream& os) {
    os << "residual (measured - predicted):\n"
       << "  mean            " << fmt_fixed(rep.mean, 4) << " K\n"
       << "  std (n-1)       " << fmt_fixed(rep.std_dev, 4) << " K\n"
       << "  within +/-" << fmt(rep.band) << " K  "
       << fmt_fixed(100.0 * rep.fraction_within, 2) << " %\n"
       << "  mode            " << (rep.strict ? "strict" : "threshold " + fmt(rep.threshold))
       << "\n"
       << "  verdict         " << (rep.accepted ? "accepted" : "rejected") << "\n";
    if (!rep.exceedances.empty()) {
        os << "  exceedances     ";
        for (std::size_t i = 0; i < rep.exceedances.size() && i < 8; ++i)
            os << (i ? ", " : "") << "[" << rep.exceedances[i].first << ".."
               << rep.exceedances[i].last << "]";
        if (rep.exceedances.size() > 8)
            os << ", ... (" << rep.exceedances.size() << " total)";
        os << "\n";
    }
}

void write_report_csv(const fs::path& path, const validation::ResidualReport& rep) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "mean_k,std_k,fraction_within,band_k,mode,verdict\n";
    out << fmt(rep.mean) << ',' << fmt(rep.std_dev) << ',' << fmt(rep.fraction_within)
        << ',' << fmt(rep.band) << ',' << (rep.strict ? "strict" : "threshold") << ','
        << (rep.accepted ? "accepted" : "rejected") << "\n";
}

void write_spectrogram(const fs::path& path, const dsp::Spectrogram& spec) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "slice_hours,freq_per_hour,magnitude\n";
    for (std::size_t s = 0; s < spec.slice_hours.size(); ++s)
        for (std::size_t k = 0; k < spec.freq.size(); ++k)
            out << fmt(spec.slice_hours[s]) << ',' << fmt(spec.freq[k]) << ','
                << fmt(spec.magnitude[s][k]) << "\n";
}

std::vector<validation::InputSeries> weather_channels(
    const weather::WeatherSeries& w) {
    auto channel = [&](const char* name, auto pick) {
        validation::InputSeries s;
        s.name = name;
        s.series.dt_hours = w.step_minutes / 60.0;
        for (const auto& r : w.records) s.series.values.push_back(pick(r));
        return s;
    };
    return {
        channel("direct_h", [](const weather::WeatherRecord& r) {
            return std::max(r.ghi_wm2 - r.dhi_wm2, 0.0);
        }),
        channel("diffuse_h", [](const weather::WeatherRecord& r) { return r.dhi_wm2; }),
        channel("t_out", [](const weather::WeatherRecord& r) { return r.t_out_c; }),
        channel("t_sky", [](const weather::WeatherRecord& r) { return r.t_sky_c; }),
        channel("wind", [](const weather::WeatherRecord& r) { return r.wind_ms; }),
    };
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
};

io::RunConfig effective_config(const CommonArgs& common) {
    io::RunConfig cfg;
    if (!common.config_path.empty()) cfg = io::load_config(common.config_path);
    if (!common.out_dir.empty()) cfg.out_dir = common.out_dir;
    if (common.has_seed) cfg.seed = common.seed;
    return cfg;
}

int cmd_simulate(const CommonArgs& common, const std::string& building_path,
                 const std::string& weather_path, bool ignore_shading) {
    io::RunConfig cfg = effective_config(common);
    std::string bp = building_path.empty() ? cfg.building_path : building_path;
    std::string wp = weather_path.empty() ? cfg.weather_path : weather_path;
    if (bp.empty() || wp.empty())
        throw ConfigError("simulate needs --building and --weather (or a config)");

    auto model = io::load_building(bp);
    auto wx = weather::load_weather(wp);
    thermal::SimOptions opt = cfg.sim;
    if (ignore_shading) opt.ignore_shading = true;

    auto result = thermal::simulate(model, wx, opt);

    fs::path dir = prepare_out_dir(cfg.out_dir);
    {
        std::ofstream out(dir / "simulation.csv");
        if (!out) throw Error("cannot write simulation.csv");
        out << "timestamp";
        for (const auto& z : result.zone_names) out << ",t_" << z << "_c";
        for (const auto& w : result.windows)
            out << ",flux_" << w.name << "_wm2,power_" << w.name << "_w";
        out << "\n";
        for (std::size_t t = 0; t < result.time.size(); ++t) {
            out << format_timestamp(result.time[t]);
            for (const auto& zt : result.zone_temp_c) out << ',' << fmt(zt[t]);
            for (const auto& w : result.windows)
                out << ',' << fmt(w.exterior_flux[t]) << ',' << fmt(w.transmitted_power[t]);
            out << "\n";
        }
    }
    for (std::size_t z = 0; z < result.zone_names.size(); ++z)
        save_series(dir / ("zone_" + result.zone_names[z] + ".csv"), result.time,
                    result.zone_temp_c[z], "t_" + result.zone_names[z] + "_c");

    std::cout << "simulated " << result.time.size() << " steps, "
              << result.zone_names.size() << " zones (warm-up "
              << result.warmup_repeats << " day repeats)\n";
    for (const auto& w : result.windows)
        std::cout << "window " << w.name << ": diffuse blocked "
                  << fmt_fixed(w.blocked, 4) << ", mean sunlit "
                  << fmt_fixed(w.sunlit_mean, 4) << "\n";
    if (result.weather_flagged)
        std::cout << "note: some weather records were inconsistent; beam was "
                     "clamped there\n";
    std::cout << "wrote " << (dir / "simulation.csv").string() << "\n";
    return kExitOk;
}

int cmd_sensitivity(const CommonArgs& common, const std::string& building_path,
                    const std::string& weather_path, const std::string& factors_path,
                    int n_runs, int order, bool serial, const std::string& zone) {
    io::RunConfig cfg = effective_config(common);
    std::string bp = building_path.empty() ? cfg.building_path : building_path;
    std::string wp = weather_path.empty() ? cfg.weather_path : weather_path;
    std::string fp = factors_path.empty() ? cfg.factors_path : factors_path;
    if (bp.empty() || wp.empty() || fp.empty())
        throw ConfigError(
            "sensitivity needs --building, --weather and --factors (or a config)");

    auto model = io::load_building(bp);
    auto wx = weather::load_weather(wp);
    auto factors = io::load_factors(fp);

    sensitivity::EnsembleOptions opt;
    opt.n_runs = n_runs > 0 ? n_runs : cfg.n_runs;
    opt.order = order > 0 ? order : cfg.order;
    opt.parallel = serial ? false : cfg.parallel;
    opt.sim = cfg.sim;

    auto outputs = sensitivity::run_ensemble(model, wx, factors, opt, zone);
    auto res = sensitivity::attribute_variance(outputs, factors, opt.order);

    fs::path dir = prepare_out_dir(cfg.out_dir);
    {
        std::ofstream out(dir / "shares.csv");
        if (!out) throw Error("cannot write shares.csv");
        out << "factor,target,frequency,base,share\n";
        for (std::size_t j = 0; j < factors.size(); ++j)
            out << factors[j].name << ',' << factors[j].target << ','
                << factors[j].frequency << ',' << fmt(factors[j].base) << ','
                << fmt(res.share[j]) << "\n";
    }
    {
        std::ofstream out(dir / "share_matrix.csv");
        if (!out) throw Error("cannot write share_matrix.csv");
        out << "factor";
        for (int t = 0; t < res.per_time_share.cols(); ++t) out << ",t" << t;
        out << "\n";
        for (std::size_t j = 0; j < factors.size(); ++j) {
            out << factors[j].name;
            for (int t = 0; t < res.per_time_share.cols(); ++t)
                out << ',' << fmt(res.per_time_share(j, t));
            out << "\n";
        }
    }

    std::vector<std::size_t> idx(factors.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return res.share[a] > res.share[b]; });
    std::cout << "variance shares over " << res.n_runs << " runs (mean residual variance "
              << fmt(res.total_variance) << " K^2):\n";
    for (std::size_t i : idx)
        std::cout << "  " << fmt_fixed(100.0 * res.share[i], 2) << " %  "
                  << factors[i].name << " (f=" << factors[i].frequency << ")\n";
    std::cout << "wrote " << (dir / "shares.csv").string() << "\n";
    return kExitOk;
}

int cmd_diagnose(const CommonArgs& common, const std::string& measured_path,
                 const std::string& predicted_path, const std::string& weather_path) {
    io::RunConfig cfg = effective_config(common);
    std::string wp = weather_path.empty() ? cfg.weather_path : weather_path;
    if (measured_path.empty() || predicted_path.empty() || wp.empty())
        throw ConfigError("diagnose needs --measured, --predicted and --weather");

    auto measured = load_series(measured_path);
    auto predicted = load_series(predicted_path);
    auto wx = weather::load_weather(wp);

    dsp::Series resid = validation::residual(measured.series, predicted.series);
    auto rep = validation::report(resid, cfg.report);
    auto inputs = weather_channels(wx);
    auto diag = validation::diagnose(resid, inputs, cfg.diagnose);

    fs::path dir = prepare_out_dir(cfg.out_dir);
    save_series(dir / "residual.csv", measured.time, resid.values, "residual_k");
    write_report_csv(dir / "report.csv", rep);
    {
        std::ofstream out(dir / "report.txt");
        print_report(rep, out);
    }
    {
        std::ofstream out(dir / "rankings.csv");
        if (!out) throw Error("cannot write rankings.csv");
        out << "rank,input,mean_similarity,p_value,tied_with_top\n";
        for (std::size_t i = 0; i < diag.ranked.size(); ++i)
            out << i + 1 << ',' << diag.ranked[i].name << ','
                << fmt(diag.ranked[i].similarity) << ',' << fmt(diag.ranked[i].p_value)
                << ',' << (diag.ranked[i].tied_with_top ? 1 : 0) << "\n";
    }
    {
        std::ofstream out(dir / "similarity_matrix.csv");
        if (!out) throw Error("cannot write similarity_matrix.csv");
        out << "input";
        for (double h : diag.slice_hours) out << ',' << fmt(h);
        out << "\n";
        for (std::size_t i = 0; i < diag.ranked.size(); ++i) {
            out << diag.ranked[i].name;
            for (double v : diag.per_slice[i]) out << ',' << fmt(v);
            out << "\n";
        }
    }
    {
        auto filter = dsp::butter_highpass(cfg.diagnose.filter_order,
                                           cfg.diagnose.cutoff_per_hour,
                                           resid.sample_rate());
        auto hp = dsp::apply_zero_phase(filter, resid);
        write_spectrogram(dir / "spectrogram_residual.csv",
                          dsp::stft(hp, cfg.diagnose.window_len, cfg.diagnose.overlap));
        for (const auto& in : inputs) {
            auto hpi = dsp::apply_zero_phase(filter, in.series);
            write_spectrogram(dir / ("spectrogram_" + in.name + ".csv"),
                              dsp::stft(hpi, cfg.diagnose.window_len,
                                        cfg.diagnose.overlap));
        }
    }

    print_report(rep, std::cout);
    std::cout << "input ranking by spectrogram similarity to the residual:\n";
    for (std::size_t i = 0; i < diag.ranked.size(); ++i) {
        const auto& e = diag.ranked[i];
        std::cout << "  " << i + 1 << ". " << e.name << "  similarity "
                  << fmt_fixed(e.similarity, 4) << "  p=" << fmt(e.p_value)
                  << (e.tied_with_top && i > 0 ? "  (tied with top)" : "") << "\n";
    }
    if (diag.no_clear_culprit)
        std::cout << "no clear culprit: the top similarity is not significant\n";
    std::cout << "wrote diagnostics under " << dir.string() << "\n";
    return rep.accepted ? kExitOk : kExitRejected;
}

int cmd_viewfactor(const CommonArgs& common, const std::string& shade_path,
                   const std::string& building_path, const std::string& window_name,
                   std::optional<double> sun_el, std::optional<double> sun_az) {
    geometry::ShadeAssembly shade;
    if (!shade_path.empty()) {
        shade = io::load_shade(shade_path);
    } else if (!building_path.empty()) {
        auto model = io::load_building(building_path);
        const thermal::Window* found = nullptr;
        for (const auto& w : model.windows) {
            if (!w.shade) continue;
            if (window_name.empty() || w.name == window_name) {
                found = &w;
                break;
            }
        }
        if (!found)
            throw ConfigError(window_name.empty()
                                  ? "building has no shaded window"
                                  : "no shaded window named '" + window_name + "'");
        shade = *found->shade;
    } else {
        throw ConfigError("viewfactor needs --shade or --building");
    }

    auto factors = geometry::per_element_view_factors(shade);
    double blocked = geometry::diffuse_blocked_fraction(shade);

    const char* labels[] = {"top_flap", "left_fin", "right_fin", "low_wall"};
    const bool present[] = {shade.top_flap.has_value(), shade.left_fin.has_value(),
                            shade.right_fin.has_value(), shade.low_wall.has_value()};
    std::size_t fi = 0;
    for (int i = 0; i < 4; ++i)
        if (present[i])
            std::cout << "F(window -> " << labels[i]
                      << ") = " << fmt_fixed(factors[fi++], 6) << "\n";
    std::cout << "diffuse blocked fraction = " << fmt_fixed(blocked, 6) << "\n";

    if (sun_el && sun_az) {
        double el = *sun_el * 3.14159265358979323846 / 180.0;
        double az = *sun_az * 3.14159265358979323846 / 180.0;
        geometry::Vec3 sun{-std::cos(el) * std::sin(az), -std::cos(el) * std::cos(az),
                           std::sin(el)};
        std::cout << "sunlit fraction at el=" << fmt(*sun_el) << " az=" << fmt(*sun_az)
                  << " deg = " << fmt_fixed(geometry::sunlit_fraction(shade, sun), 6)
                  << "\n";
    }
    (void)common;
    return kExitOk;
}

int cmd_synth_weather(const CommonArgs& common, int days, const std::string& profile,
                      const std::string& out_file, std::optional<double> lat,
                      std::optional<double> lon, std::optional<double> utc) {
    io::RunConfig cfg = effective_config(common);
    weather::SynthOptions opt;
    if (lat) opt.latitude_deg = *lat;
    if (lon) opt.longitude_deg = *lon;
    if (utc) opt.utc_offset_hours = *utc;

    auto wx = weather::synth_weather(days, weather::parse_profile(profile), cfg.seed, opt);
    fs::path out = out_file.empty()
                       ? prepare_out_dir(cfg.out_dir) / "weather.csv"
                       : fs::path(out_file);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    weather::save_weather(wx, out.string());
    std::cout << "wrote " << wx.size() << " records (" << profile << ", seed "
              << cfg.seed << ") to " << out.string() << "\n";
    return kExitOk;
}

int cmd_report(const CommonArgs& common, const std::string& residual_path,
               const std::string& measured_path, const std::string& predicted_path,
               std::optional<double> band, bool strict, std::optional<double> threshold) {
    io::RunConfig cfg = effective_config(common);
    validation::ReportOptions opt = cfg.report;
    if (band) opt.band = *band;
    if (strict) opt.strict = true;
    if (threshold) opt.threshold = *threshold;

    dsp::Series resid;
    std::vector<Timestamp> time;
    if (!residual_path.empty()) {
        auto r = load_series(residual_path);
        resid = std::move(r.series);
        time = std::move(r.time);
    } else if (!measured_path.empty() && !predicted_path.empty()) {
        auto m = load_series(measured_path);
        auto p = load_series(predicted_path);
        resid = validation::residual(m.series, p.series);
        time = std::move(m.time);
    } else {
        throw ConfigError("report needs --residual, or --measured with --predicted");
    }

    auto rep = validation::report(resid, opt);
    print_report(rep, std::cout);
    if (!cfg.out_dir.empty() && cfg.out_dir != ".") {
        fs::path dir = prepare_out_dir(cfg.out_dir);
        write_report_csv(dir / "report.csv", rep);
        std::ofstream out(dir / "report.txt");
        print_report(rep, out);
        std::cout << "wrote " << (dir / "report.csv").string() << "\n";
    }
    return rep.accepted ? kExitOk : kExitRejected;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"building thermal validation toolkit"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "run configuration file");
    app.add_option("--out-dir", common.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", common.seed, "random seed");

    std::string building, weather_path, factors, zone, shade_path, window_name;
    std::string measured, predicted, residual_path, out_file, profile = "clear";
    bool ignore_shading = false, serial = false, strict = false;
    int n_runs = 0, order = 0, days = 5;
    std::optional<double> sun_el, sun_az, lat, lon, utc, band, threshold;

    auto* sim = app.add_subcommand("simulate", "run the thermal simulation");
    sim->fallthrough();
    sim->add_option("--building", building, "building document");
    sim->add_option("--weather", weather_path, "weather CSV");
    sim->add_flag("--ignore-shading", ignore_shading,
                  "drop near shading (unshaded model)");

    auto* sens = app.add_subcommand("sensitivity", "spectral sensitivity analysis");
    sens->fallthrough();
    sens->add_option("--building", building, "building document");
    sens->add_option("--weather", weather_path, "weather CSV");
    sens->add_option("--factors", factors, "factor list file");
    sens->add_option("--n-runs", n_runs, "ensemble size");
    sens->add_option("--order", order, "harmonic order");
    sens->add_option("--zone", zone, "output zone (default: first)");
    sens->add_flag("--serial", serial, "disable the parallel ensemble");

    auto* diag = app.add_subcommand("diagnose", "residual diagnosis against inputs");
    diag->fallthrough();
    diag->add_option("--measured", measured, "measured series CSV");
    diag->add_option("--predicted", predicted, "predicted series CSV");
    diag->add_option("--weather", weather_path, "weather CSV with candidate inputs");

    auto* vf = app.add_subcommand("viewfactor", "shade view factors and blocked fraction");
    vf->fallthrough();
    vf->add_option("--shade", shade_path, "shade document");
    vf->add_option("--building", building, "building document");
    vf->add_option("--window", window_name, "window name within the building");
    vf->add_option("--sun-el", sun_el, "sun elevation (deg) for a sunlit fraction");
    vf->add_option("--sun-az", sun_az, "sun azimuth (deg, south 0, west positive)");

    auto* synth = app.add_subcommand("synth-weather", "generate synthetic weather");
    synth->fallthrough();
    synth->add_option("--days", days, "number of days")->check(CLI::PositiveNumber);
    synth->add_option("--profile", profile, "clear | overcast | mixed");
    synth->add_option("--out", out_file, "output CSV path");
    synth->add_option("--lat", lat, "site latitude (deg)");
    synth->add_option("--lon", lon, "site longitude (deg)");
    synth->add_option("--utc-offset", utc, "site UTC offset (hours)");

    auto* rep = app.add_subcommand("report", "residual acceptance report");
    rep->fallthrough();
    rep->add_option("--residual", residual_path, "residual series CSV");
    rep->add_option("--measured", measured, "measured series CSV");
    rep->add_option("--predicted", predicted, "predicted series CSV");
    rep->add_option("--band", band, "acceptance band half-width (K)");
    rep->add_flag("--strict", strict, "require every sample within the band");
    rep->add_option("--threshold", threshold, "fraction required in threshold mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }
    common.has_seed = seed_opt->count() > 0;

    try {
        if (sim->parsed())
            return cmd_simulate(common, building, weather_path, ignore_shading);
        if (sens->parsed())
            return cmd_sensitivity(common, building, weather_path, factors, n_runs,
                                   order, serial, zone);
        if (diag->parsed()) return cmd_diagnose(common, measured, predicted, weather_path);
        if (vf->parsed())
            return cmd_viewfactor(common, shade_path, building, window_name, sun_el,
                                  sun_az);
        if (synth->parsed())
            return cmd_synth_weather(common, days, profile, out_file, lat, lon, utc);
        if (rep->parsed())
            return cmd_report(common, residual_path, measured, predicted, band, strict,
                              threshold);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
