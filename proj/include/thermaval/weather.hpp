#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "thermaval/timestamp.hpp"

namespace thermaval::weather {

struct WeatherRecord {
    Timestamp time;
    double t_out_c = 0;
    double t_sky_c = 0;
    double rh_pct = 0;
    double ghi_wm2 = 0;  // global horizontal irradiance
    double dhi_wm2 = 0;  // diffuse horizontal irradiance
    double wind_ms = 0;
    double wind_dir_deg = 0;
    bool flagged = false;  // inconsistent record (diffuse above global)
};

struct WeatherSeries {
    std::vector<WeatherRecord> records;
    double step_minutes = 30;

    std::size_t size() const { return records.size(); }
    // Uniform time step and physical ranges. Irradiance inconsistencies are
    // flagged on the records, not fatal.
    void validate() const;
};

WeatherSeries load_weather(const std::string& path);
void save_weather(const WeatherSeries& series, const std::string& path);

enum class WeatherProfile { Clear, Overcast, Mixed };

WeatherProfile parse_profile(const std::string& name);
std::string profile_name(WeatherProfile p);

struct SynthOptions {
    double latitude_deg = -21.0;
    double longitude_deg = 55.5;
    double utc_offset_hours = 4.0;
    Timestamp start{2024, 1, 8, 0, 0, 0};  // midsummer for a southern site
    double t_mean_c = 27.0;
    double t_swing_c = 4.0;
    double sky_depression_c = 15.0;  // clear-sky t_out minus t_sky
};

WeatherSeries synth_weather(int days, WeatherProfile profile, std::uint64_t seed,
                            const SynthOptions& opt = {});

}  // namespace thermaval::weather
