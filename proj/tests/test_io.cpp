#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "thermaval/building_io.hpp"
#include "thermaval/config.hpp"
#include "thermaval/errors.hpp"
#include "thermaval/timestamp.hpp"
#include "thermaval/weather.hpp"

using namespace thermaval;
namespace fs = std::filesystem;

namespace {

std::string data_dir() { return THERMAVAL_DATA_DIR; }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("thermaval_io_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("timestamps parse and format losslessly") {
    auto t = parse_timestamp("2024-01-08T06:30:00");
    CHECK(t == Timestamp{2024, 1, 8, 6, 30, 0});
    CHECK(parse_timestamp("2024-01-08T06:30") == t);  // seconds optional
    CHECK(format_timestamp(t) == "2024-01-08T06:30:00");
    CHECK_THROWS_AS(parse_timestamp("yesterday"), ParseError);
    CHECK_THROWS_AS(parse_timestamp("2024-13-01T00:00"), ParseError);
    CHECK(day_of_year({2024, 3, 1, 0, 0, 0}) == 61);  // leap year
    CHECK(day_of_year({2023, 3, 1, 0, 0, 0}) == 60);
}

TEST_CASE("the bundled demo building loads and round-trips byte for byte") {
    auto model = io::load_building(data_dir() + "/demo_building.json");
    CHECK(model.zones.size() == 5);
    CHECK(model.walls.size() == 22);
    CHECK(model.windows.size() == 4);
    CHECK(model.site.latitude_deg == doctest::Approx(-21.0));

    const thermal::Window* bay = nullptr;
    for (const auto& w : model.windows)
        if (w.shade) bay = &w;
    REQUIRE(bay != nullptr);
    CHECK(bay->shade->top_flap.has_value());
    CHECK(bay->shade->left_fin.has_value());
    CHECK(bay->shade->right_fin.has_value());
    CHECK(bay->shade->low_wall.has_value());

    // Serialized form is a fixed point of parse + serialize.
    std::string first = io::serialize_building(model);
    std::string second = io::serialize_building(io::parse_building(first));
    CHECK(first == second);
}

TEST_CASE("building serialization restores every field") {
    thermal::BuildingModel m;
    m.site = {-21.0, 55.5, 4.0, 0.25};
    m.zones.push_back({"room", 50.0, 61000.0, "slab"});
    thermal::Wall w;
    w.name = "slab";
    w.layers = {{0.2, 1.75, 2400.0, 880.0}, {0.05, 0.04, 30.0, 1400.0}};
    w.area = 20.0;
    w.side_a = thermal::Boundary::to_zone("room");
    w.side_b = thermal::Boundary::exterior();
    w.orientation = {180.0, 0.0};
    w.absorptance = 0.0;
    w.h_sky = 0.0;
    m.walls.push_back(w);
    thermal::Window win;
    win.name = "bay";
    win.zone = "room";
    win.width = 4.0;
    win.height = 2.0;
    win.area = 8.0;
    win.transmittance = 0.8;
    win.orientation = {90.0, 90.0};
    geometry::ShadeAssembly shade;
    shade.window = {{0, 0, 0}, {0, -4.0, 0}, {0, 0, 2.0}};
    shade.top_flap = geometry::ShadeElement{1.0, geometry::kInfiniteExtent, 0.1};
    shade.left_fin = geometry::ShadeElement{0.8, 2.4, 0.0};
    win.shade = shade;
    m.windows.push_back(win);

    auto back = io::parse_building(io::serialize_building(m));
    CHECK(back.zones[0].air_capacitance == 61000.0);
    CHECK(back.zones[0].solar_mass_wall == "slab");
    CHECK(back.walls[0].layers.size() == 2);
    CHECK(back.walls[0].layers[1].conductivity == 0.04);
    CHECK(back.walls[0].h_sky == 0.0);
    CHECK(back.walls[0].orientation.tilt_deg == 180.0);
    CHECK(back.windows[0].area == 8.0);
    REQUIRE(back.windows[0].shade.has_value());
    CHECK(std::isinf(back.windows[0].shade->top_flap->extent));
    CHECK(back.windows[0].shade->top_flap->offset == 0.1);
    CHECK(back.windows[0].shade->left_fin->extent == 2.4);
    // The reconstructed frame matches the declared orientation.
    CHECK(io::serialize_building(back) == io::serialize_building(m));
}

TEST_CASE("a window defined by area alone cannot be serialized") {
    thermal::BuildingModel m;
    m.site = {0.0, 0.0, 0.0, 0.2};
    m.zones.push_back({"z", 10.0, 0.0, ""});
    thermal::Window win;
    win.name = "pane";
    win.zone = "z";
    win.area = 2.0;  // no width/height
    m.windows.push_back(win);
    CHECK_THROWS_AS(io::serialize_building(m), ModelError);
}

TEST_CASE("building documents report the offending path") {
    SUBCASE("missing field") {
        try {
            io::parse_building(R"({"site": {"latitude_deg": 0}})");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("site.longitude_deg") != std::string::npos);
        }
    }
    SUBCASE("dangling zone reference") {
        CHECK_THROWS_AS(
            io::parse_building(R"({
                "site": {"latitude_deg": 0, "longitude_deg": 0},
                "zones": [{"name": "a", "volume": 10}],
                "walls": [{"name": "w", "area": 5, "side_a": "nowhere",
                           "side_b": "exterior",
                           "layers": [{"thickness": 0.1, "conductivity": 1,
                                       "density": 1000, "specific_heat": 900}]}]
            })"),
            ModelError);
    }
    SUBCASE("reserved zone name") {
        CHECK_THROWS_AS(
            io::parse_building(R"({
                "site": {"latitude_deg": 0, "longitude_deg": 0},
                "zones": [{"name": "exterior", "volume": 10}]
            })"),
            ParseError);
    }
    SUBCASE("shade on a tilted window") {
        CHECK_THROWS_AS(
            io::parse_building(R"({
                "site": {"latitude_deg": 0, "longitude_deg": 0},
                "zones": [{"name": "a", "volume": 10}],
                "windows": [{"name": "sky", "zone": "a", "width": 1, "height": 1,
                             "tilt_deg": 0, "shade": {"top_flap": {"depth": 0.5}}}]
            })"),
            ParseError);
    }
    SUBCASE("bad extent token") {
        CHECK_THROWS_AS(
            io::parse_building(R"({
                "site": {"latitude_deg": 0, "longitude_deg": 0},
                "zones": [{"name": "a", "volume": 10}],
                "windows": [{"name": "w", "zone": "a", "width": 1, "height": 1,
                             "shade": {"top_flap": {"depth": 0.5, "extent": "wide"}}}]
            })"),
            ParseError);
    }
}

TEST_CASE("the demo shade document matches its window geometry") {
    auto shade = io::load_shade(data_dir() + "/demo_shade.json");
    CHECK(shade.window.area() == doctest::Approx(8.0));
    CHECK(shade.top_flap.has_value());
    CHECK(shade.low_wall.has_value());
    CHECK_NOTHROW(shade.validate());

    auto inline_shade = io::parse_shade(
        R"({"width": 2, "height": 1, "top_flap": {"depth": 0.4, "extent": "inf"}})");
    CHECK(std::isinf(inline_shade.top_flap->extent));
    CHECK(inline_shade.window.area() == doctest::Approx(2.0));
}

TEST_CASE("weather files round-trip exactly") {
    TempDir tmp;
    auto series = weather::synth_weather(2, weather::WeatherProfile::Mixed, 42);
    auto p = (tmp.path / "wx.csv").string();
    weather::save_weather(series, p);
    auto loaded = weather::load_weather(p);
    REQUIRE(loaded.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(loaded.records[i].time == series.records[i].time);
        CHECK(loaded.records[i].t_out_c == series.records[i].t_out_c);
        CHECK(loaded.records[i].t_sky_c == series.records[i].t_sky_c);
        CHECK(loaded.records[i].rh_pct == series.records[i].rh_pct);
        CHECK(loaded.records[i].ghi_wm2 == series.records[i].ghi_wm2);
        CHECK(loaded.records[i].dhi_wm2 == series.records[i].dhi_wm2);
        CHECK(loaded.records[i].wind_ms == series.records[i].wind_ms);
        CHECK(loaded.records[i].wind_dir_deg == series.records[i].wind_dir_deg);
        CHECK_FALSE(loaded.records[i].flagged);
    }
}

TEST_CASE("weather parsing pins down malformed files") {
    TempDir tmp;
    auto p = (tmp.path / "bad.csv").string();
    const std::string header =
        "timestamp,t_out_c,t_sky_c,rh_pct,ghi_wm2,dhi_wm2,wind_ms,wind_dir_deg\n";
    const std::string row = "2024-01-08T00:00:00,25,10,70,0,0,3,100\n";

    SUBCASE("missing column") {
        write_text(p, "timestamp,t_out_c\n");
        try {
            weather::load_weather(p);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 1);
            CHECK(std::string(e.what()).find("t_sky_c") != std::string::npos);
        }
    }
    SUBCASE("reordered columns") {
        write_text(p,
                   "t_out_c,timestamp,t_sky_c,rh_pct,ghi_wm2,dhi_wm2,wind_ms,"
                   "wind_dir_deg\n");
        CHECK_THROWS_AS(weather::load_weather(p), ParseError);
    }
    SUBCASE("extra column") {
        write_text(p, header.substr(0, header.size() - 1) + ",snow_cm\n");
        CHECK_THROWS_AS(weather::load_weather(p), ParseError);
    }
    SUBCASE("short row") {
        write_text(p, header + "2024-01-08T00:00:00,25,10\n");
        try {
            weather::load_weather(p);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("bad number") {
        write_text(p, header + row +
                          "2024-01-08T00:30:00,25,10,70,n/a,0,3,100\n");
        try {
            weather::load_weather(p);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("non-uniform step") {
        write_text(p, header + row + "2024-01-08T01:15:00,25,10,70,0,0,3,100\n");
        CHECK_THROWS_AS(weather::load_weather(p), ParseError);
    }
    SUBCASE("humidity out of range") {
        write_text(p, header + "2024-01-08T00:00:00,25,10,170,0,0,3,100\n");
        CHECK_THROWS_AS(weather::load_weather(p), ParseError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(weather::load_weather((tmp.path / "absent.csv").string()),
                        ParseError);
    }
}

TEST_CASE("inconsistent irradiance is flagged, not fatal") {
    TempDir tmp;
    auto p = (tmp.path / "odd.csv").string();
    write_text(p,
               "timestamp,t_out_c,t_sky_c,rh_pct,ghi_wm2,dhi_wm2,wind_ms,"
               "wind_dir_deg\n"
               "2024-01-08T00:00:00,25,10,70,100,150,3,100\n"
               "2024-01-08T00:30:00,25,10,70,100,50,3,100\n");
    auto series = weather::load_weather(p);
    CHECK(series.records[0].flagged);
    CHECK_FALSE(series.records[1].flagged);
}

TEST_CASE("the bundled demo weather is five clean days") {
    auto series = weather::load_weather(data_dir() + "/demo_weather.csv");
    CHECK(series.size() == 240);
    CHECK(series.step_minutes == 30);
    for (const auto& r : series.records) CHECK_FALSE(r.flagged);
}

TEST_CASE("synthetic profiles have their advertised character") {
    SUBCASE("overcast diffuse equals global exactly") {
        auto s = weather::synth_weather(3, weather::WeatherProfile::Overcast, 9);
        for (const auto& r : s.records) CHECK(r.dhi_wm2 == r.ghi_wm2);
    }
    SUBCASE("night irradiance is zero") {
        for (auto profile : {weather::WeatherProfile::Clear,
                             weather::WeatherProfile::Mixed}) {
            auto s = weather::synth_weather(2, profile, 13);
            for (const auto& r : s.records)
                if (r.time.hour >= 22 || r.time.hour < 4) CHECK(r.ghi_wm2 == 0.0);
        }
    }
    SUBCASE("mixed days keep a two-fifths diffuse fraction") {
        auto s = weather::synth_weather(4, weather::WeatherProfile::Mixed, 17);
        for (int d = 0; d < 4; ++d) {
            double ghi = 0, dhi = 0;
            for (int i = 0; i < 48; ++i) {
                ghi += s.records[d * 48 + i].ghi_wm2;
                dhi += s.records[d * 48 + i].dhi_wm2;
            }
            CHECK(dhi / ghi == doctest::Approx(0.40).epsilon(0.05 / 0.40));
        }
    }
    SUBCASE("clear days are steadier and warmer-swinging than overcast") {
        auto clear = weather::synth_weather(4, weather::WeatherProfile::Clear, 5);
        auto cloudy = weather::synth_weather(4, weather::WeatherProfile::Overcast, 5);
        auto daily_peak_ghi = [](const weather::WeatherSeries& s, int d) {
            double peak = 0;
            for (int i = 0; i < 48; ++i)
                peak = std::max(peak, s.records[d * 48 + i].ghi_wm2);
            return peak;
        };
        auto t_range = [](const weather::WeatherSeries& s, int d) {
            double lo = 1e9, hi = -1e9;
            for (int i = 0; i < 48; ++i) {
                lo = std::min(lo, s.records[d * 48 + i].t_out_c);
                hi = std::max(hi, s.records[d * 48 + i].t_out_c);
            }
            return hi - lo;
        };
        for (int d = 0; d < 4; ++d) {
            CHECK(daily_peak_ghi(clear, d) > 2.0 * daily_peak_ghi(cloudy, d));
            CHECK(t_range(clear, d) > t_range(cloudy, d) + 1.0);
        }
    }
    SUBCASE("same seed, same series; new seed, new series") {
        auto a = weather::synth_weather(2, weather::WeatherProfile::Mixed, 21);
        auto b = weather::synth_weather(2, weather::WeatherProfile::Mixed, 21);
        auto c = weather::synth_weather(2, weather::WeatherProfile::Mixed, 22);
        REQUIRE(a.size() == b.size());
        bool all_equal = true, any_diff = false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.records[i].ghi_wm2 != b.records[i].ghi_wm2 ||
                a.records[i].t_out_c != b.records[i].t_out_c)
                all_equal = false;
            if (a.records[i].ghi_wm2 != c.records[i].ghi_wm2 ||
                a.records[i].t_out_c != c.records[i].t_out_c)
                any_diff = true;
        }
        CHECK(all_equal);
        CHECK(any_diff);
    }
    SUBCASE("day count is validated") {
        CHECK_THROWS_AS(
            weather::synth_weather(0, weather::WeatherProfile::Clear, 1),
            ParameterError);
    }
}

TEST_CASE("profile names map both ways") {
    CHECK(weather::parse_profile("clear") == weather::WeatherProfile::Clear);
    CHECK(weather::parse_profile("overcast") == weather::WeatherProfile::Overcast);
    CHECK(weather::parse_profile("mixed") == weather::WeatherProfile::Mixed);
    CHECK(weather::profile_name(weather::WeatherProfile::Mixed) == "mixed");
    CHECK_THROWS_AS(weather::parse_profile("hail"), ConfigError);
}

TEST_CASE("run configuration parses defaults and overrides") {
    auto defaults = io::parse_config("{}");
    CHECK(defaults.out_dir == ".");
    CHECK(defaults.seed == 1);
    CHECK(defaults.n_runs == 1024);
    CHECK(defaults.order == 2);
    CHECK(defaults.parallel);
    CHECK(defaults.sim.h_interior == 8.0);
    CHECK(defaults.diagnose.window_len == 96);
    CHECK_FALSE(defaults.sim.blocked_override.has_value());

    auto c = io::parse_config(R"({
        "seed": 7, "n_runs": 256, "parallel": false,
        "sim": {"h_sky": 4.5, "layer_subdivision": 3, "blocked_override": 0.25,
                "ignore_shading": true},
        "report": {"band": 0.4, "strict": true, "threshold": 0.9},
        "diagnose": {"window_len": 48, "overlap": 0.5}
    })");
    CHECK(c.seed == 7);
    CHECK(c.n_runs == 256);
    CHECK_FALSE(c.parallel);
    CHECK(c.sim.h_sky_default == 4.5);
    CHECK(c.sim.layer_subdivision == 3);
    REQUIRE(c.sim.blocked_override.has_value());
    CHECK(*c.sim.blocked_override == 0.25);
    CHECK(c.sim.ignore_shading);
    CHECK(c.report.band == 0.4);
    CHECK(c.report.strict);
    CHECK(c.diagnose.window_len == 48);
    CHECK(c.diagnose.overlap == 0.5);
}

TEST_CASE("configuration rejects unknown keys and bad types") {
    CHECK_THROWS_AS(io::parse_config(R"({"runs": 10})"), ConfigError);
    CHECK_THROWS_AS(io::parse_config(R"({"sim": {"h_out": 20}})"), ConfigError);
    CHECK_THROWS_AS(io::parse_config(R"({"report": {"bands": 1}})"), ConfigError);
    CHECK_THROWS_AS(io::parse_config(R"({"diagnose": {"cutoff": 0.01}})"),
                    ConfigError);
    CHECK_THROWS_AS(io::parse_config(R"({"n_runs": "many"})"), ConfigError);
    CHECK_THROWS_AS(io::parse_config(R"([1, 2])"), ConfigError);
    CHECK_THROWS_AS(io::parse_config("{not json"), ParseError);
}

TEST_CASE("loading a config verifies its file references") {
    TempDir tmp;
    auto p = (tmp.path / "run.json").string();

    write_text(p, R"({"building": ")" + data_dir() + R"(/demo_building.json"})");
    auto ok = io::load_config(p);
    CHECK(!ok.building_path.empty());

    write_text(p, R"({"weather": ")" + (tmp.path / "gone.csv").string() + R"("})");
    CHECK_THROWS_AS(io::load_config(p), ConfigError);

    CHECK_THROWS_AS(io::load_config((tmp.path / "absent.json").string()),
                    ParseError);
}

TEST_CASE("factor files carry the ensemble definition") {
    auto factors = io::load_factors(data_dir() + "/demo_factors.json");
    REQUIRE(factors.size() == 8);
    bool saw_beam = false, saw_tau = false;
    for (const auto& f : factors) {
        CHECK(!f.name.empty());
        CHECK(!f.target.empty());
        CHECK(f.amplitude > 0.0);
        CHECK(f.frequency == 0);  // assigned at run time
        if (f.target == "weather:beam") saw_beam = true;
        if (f.target.find("transmittance") != std::string::npos) saw_tau = true;
    }
    CHECK(saw_beam);
    CHECK(saw_tau);

    auto parsed = io::parse_factors(
        R"([{"name": "a", "target": "weather:dhi", "amplitude": 0.2, "frequency": 3}])");
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].amplitude == 0.2);
    CHECK(parsed[0].frequency == 3);

    CHECK_THROWS_AS(io::parse_factors(R"({"name": "a"})"), ConfigError);
    CHECK_THROWS_AS(io::parse_factors(R"([{"target": "weather:dhi"}])"), ConfigError);
    CHECK_THROWS_AS(io::parse_factors(R"([{"name": "a", "target": "x", "amp": 1}])"),
                    ConfigError);
}
