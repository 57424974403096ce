#include "thermaval/weather.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

#include "thermaval/errors.hpp"
#include "thermaval/solar.hpp"

namespace thermaval::weather {

namespace {

const char* const kColumns[] = {"timestamp", "t_out_c", "t_sky_c", "rh_pct",
                                "ghi_wm2",   "dhi_wm2", "wind_ms", "wind_dir_deg"};
constexpr int kNumColumns = 8;

std::vector<std::string> split_csv(const std::string& line) {
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

double parse_double(const std::string& s, long line) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError("bad numeric value '" + s + "'", line);
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace

void WeatherSeries::validate() const {
    if (records.empty()) throw ParseError("weather series is empty");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const WeatherRecord& r = records[i];
        if (r.rh_pct < 0.0 || r.rh_pct > 100.0)
            throw ParseError("relative humidity out of range",
                             static_cast<long>(i + 2));
        if (!std::isfinite(r.t_out_c) || !std::isfinite(r.ghi_wm2))
            throw ParseError("non-finite weather value", static_cast<long>(i + 2));
        if (i > 0) {
            long long gap = minutes_between(records[i - 1].time, r.time);
            if (gap != static_cast<long long>(step_minutes))
                throw ParseError("non-uniform time step", static_cast<long>(i + 2));
        }
    }
}

WeatherSeries load_weather(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open weather file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty weather file", 1);
    auto header = split_csv(line);
    for (int i = 0; i < kNumColumns; ++i) {
        bool found = false;
        for (const auto& h : header)
            if (h == kColumns[i]) found = true;
        if (!found)
            throw ParseError(std::string("missing column '") + kColumns[i] + "'", 1);
    }
    if (static_cast<int>(header.size()) != kNumColumns)
        throw ParseError("unexpected extra columns in weather header", 1);
    for (int i = 0; i < kNumColumns; ++i)
        if (header[i] != kColumns[i])
            throw ParseError("weather columns out of order", 1);

    WeatherSeries series;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != kNumColumns)
            throw ParseError("expected 8 fields", lineno);
        WeatherRecord r;
        try {
            r.time = parse_timestamp(fields[0]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
        r.t_out_c = parse_double(fields[1], lineno);
        r.t_sky_c = parse_double(fields[2], lineno);
        r.rh_pct = parse_double(fields[3], lineno);
        r.ghi_wm2 = parse_double(fields[4], lineno);
        r.dhi_wm2 = parse_double(fields[5], lineno);
        r.wind_ms = parse_double(fields[6], lineno);
        r.wind_dir_deg = parse_double(fields[7], lineno);
        r.flagged = r.dhi_wm2 < 0.0 || r.ghi_wm2 < r.dhi_wm2;
        series.records.push_back(r);
    }
    series.validate();
    return series;
}

void save_weather(const WeatherSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write weather file '" + path + "'");
    for (int i = 0; i < kNumColumns; ++i)
        out << (i ? "," : "") << kColumns[i];
    out << "\n";
    for (const WeatherRecord& r : series.records) {
        out << format_timestamp(r.time) << ',' << format_double(r.t_out_c) << ','
            << format_double(r.t_sky_c) << ',' << format_double(r.rh_pct) << ','
            << format_double(r.ghi_wm2) << ',' << format_double(r.dhi_wm2) << ','
            << format_double(r.wind_ms) << ',' << format_double(r.wind_dir_deg)
            << "\n";
    }
}

WeatherProfile parse_profile(const std::string& name) {
    if (name == "clear") return WeatherProfile::Clear;
    if (name == "overcast") return WeatherProfile::Overcast;
    if (name == "mixed") return WeatherProfile::Mixed;
    throw ConfigError("unknown weather profile '" + name +
                      "' (expected clear, overcast or mixed)");
}

std::string profile_name(WeatherProfile p) {
    switch (p) {
        case WeatherProfile::Clear: return "clear";
        case WeatherProfile::Overcast: return "overcast";
        default: return "mixed";
    }
}

namespace {

struct SynthRng {
    std::uint64_t state;

    explicit SynthRng(std::uint64_t seed) : state(seed) {}

    double uniform() {  // [0,1)
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t x = state;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        x ^= x >> 31;
        return static_cast<double>(x >> 11) * 0x1.0p-53;
    }

    double centered() { return 2.0 * uniform() - 1.0; }  // (-1,1)
};

constexpr double kPi = 3.14159265358979323846;

double clear_sky_ghi(double elevation) {
    double s = std::sin(elevation);
    if (s <= 0.0) return 0.0;
    return 1098.0 * s * std::exp(-0.057 / s);
}

// scale is a power of ten; dividing by it lands on the double nearest the
// decimal value, so the CSV shows plain two-digit numbers.
double round_to(double v, double scale) { return std::round(v * scale) / scale; }

}  // namespace

WeatherSeries synth_weather(int days, WeatherProfile profile, std::uint64_t seed,
                            const SynthOptions& opt) {
    if (days < 1) throw ParameterError("synth_weather: need at least one day");

    constexpr int kPerDay = 48;
    SynthRng rng(seed * 0x2545F4914F6CDD1Dull + 0x9E3779B97F4A7C15ull);
    solar::SolarOptions solar_opt;
    solar_opt.utc_offset_hours = opt.utc_offset_hours;
    const double lat = opt.latitude_deg * kPi / 180.0;
    const double lon = opt.longitude_deg * kPi / 180.0;

    WeatherSeries series;
    series.step_minutes = 30;
    series.records.reserve(static_cast<std::size_t>(days) * kPerDay);

    // Half-hour-scale texture: persistent cloud flicker on the irradiance and
    // micro-meteorological noise on temperature and wind.
    double flicker = 0.0, t_noise = 0.0, w_noise = 0.0;

    for (int d = 0; d < days; ++d) {
        // One draw block per day keeps day profiles independent of length.
        double bright, df, t_offset;
        switch (profile) {
            case WeatherProfile::Clear:
                bright = 0.97 + 0.03 * rng.centered();
                df = 0.20 + 0.03 * rng.centered();
                break;
            case WeatherProfile::Overcast:
                bright = 0.30 + 0.05 * rng.centered();
                df = 1.0;
                break;
            default:  // Mixed
                bright = 0.80 + 0.10 * rng.centered();
                df = 0.40 + 0.03 * rng.centered();
                break;
        }
        t_offset = 1.0 * rng.centered();
        // Cloud variability: random-phase components at a few sub-daily
        // periods, drawn fresh each day. Cloudy profiles get the full depth.
        constexpr double kCloudPeriods[4] = {12.0, 8.0, 5.0, 3.2};
        const double mod_depth = profile == WeatherProfile::Clear ? 0.02 : 0.15;
        double mod_amp[4], mod_phase[4];
        for (int k = 0; k < 4; ++k) {
            mod_amp[k] = mod_depth * (0.5 + 0.5 * rng.uniform());
            mod_phase[k] = 2.0 * kPi * rng.uniform();
        }
        // Cloud cover also damps the diurnal temperature swing.
        const double swing = opt.t_swing_c * (0.3 + 0.7 * std::clamp(bright, 0.0, 1.0));

        const double flicker_gain = profile == WeatherProfile::Clear ? 0.03 : 0.30;

        for (int i = 0; i < kPerDay; ++i) {
            WeatherRecord r;
            r.time = add_minutes(opt.start, (static_cast<long long>(d) * kPerDay + i) * 30);
            double h = clock_hours(r.time);

            flicker = 0.5 * flicker + 0.5 * rng.centered();
            t_noise = 0.8 * t_noise + 0.2 * rng.centered();
            w_noise = 0.8 * w_noise + 0.2 * rng.centered();

            auto pos = solar::solar_position(lat, lon, r.time, solar_opt);
            double envelope = clear_sky_ghi(pos.elevation);
            // The diffuse fraction stays fixed within a day, so daily ratios
            // land on the profile target regardless of the cloud modulation.
            double mod = 1.0 + flicker_gain * flicker;
            for (int k = 0; k < 4; ++k)
                mod -= mod_amp[k] *
                       (0.5 + 0.5 * std::sin(2.0 * kPi * h / kCloudPeriods[k] + mod_phase[k]));
            double ghi = round_to(bright * std::max(mod, 0.05) * envelope, 100.0);
            double dhi = profile == WeatherProfile::Overcast
                             ? ghi
                             : round_to(df * ghi, 100.0);

            r.ghi_wm2 = ghi;
            r.dhi_wm2 = dhi;
            r.t_out_c = round_to(
                opt.t_mean_c + t_offset + 0.6 * t_noise +
                    swing * std::sin(2.0 * kPi * (h - 9.0) / 24.0),
                100.0);
            double depression = opt.sky_depression_c * (profile == WeatherProfile::Overcast
                                                           ? 0.3
                                                           : 1.0 - 0.7 * (df > 0.99 ? 1.0 : df));
            r.t_sky_c = round_to(r.t_out_c - depression, 100.0);
            r.rh_pct = round_to(
                std::clamp(72.0 - 12.0 * std::sin(2.0 * kPi * (h - 9.0) / 24.0), 5.0, 100.0),
                10.0);
            r.wind_ms = round_to(
                std::max(0.0, 3.0 + 1.2 * w_noise +
                                  1.5 * std::sin(2.0 * kPi * (h - 12.0) / 24.0)),
                100.0);
            r.wind_dir_deg = round_to(100.0 + 15.0 * std::sin(2.0 * kPi * h / 24.0), 10.0);
            series.records.push_back(r);
        }
    }
    series.validate();
    return series;
}

}  // namespace thermaval::weather
