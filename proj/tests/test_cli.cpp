#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thermaval/timestamp.hpp"

using namespace thermaval;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(THERMAVAL_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult res;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) res.output.append(buf, n);
    int status = ::pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string data_dir() { return THERMAVAL_DATA_DIR; }

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("thermaval_cli_" + std::to_string(::getpid()));
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

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    return line;
}

long count_lines(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    long count = 0;
    std::string line;
    while (std::getline(in, line)) ++count;
    return count;
}

// Two-column series file in the format the CLI consumes, 30-minute steps.
void write_series_csv(const fs::path& path, const std::vector<double>& values) {
    std::ofstream out(path);
    out << "timestamp,t_room_c\n";
    Timestamp t{2024, 1, 8, 0, 0, 0};
    for (double v : values) {
        out << format_timestamp(t) << ',' << v << '\n';
        t = add_minutes(t, 30);
    }
}

double value_after(const std::string& text, const std::string& key) {
    auto pos = text.find(key);
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size()));
}

}  // namespace

TEST_CASE("bad invocations exit with the input-error code and --help succeeds") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);

    auto help = run_cli("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("simulate") != std::string::npos);
    CHECK(help.output.find("synth-weather") != std::string::npos);

    auto missing = run_cli("simulate --building /no/such.json --weather /no/such.csv");
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("error:") != std::string::npos);

    // viewfactor without a source of geometry has nothing to work on
    CHECK(run_cli("viewfactor").exit_code == 2);
}

TEST_CASE("synth-weather writes a deterministic CSV controlled by --seed") {
    TempDir tmp;
    auto path_a = tmp.path / "a.csv";
    auto path_b = tmp.path / "b.csv";
    auto path_c = tmp.path / "c.csv";

    auto a = run_cli("synth-weather --days 2 --profile mixed --seed 7 --out " +
                     quoted(path_a));
    CHECK(a.exit_code == 0);
    CHECK(a.output.find("wrote 96 records") != std::string::npos);
    CHECK(run_cli("synth-weather --days 2 --profile mixed --seed 7 --out " +
                  quoted(path_b))
              .exit_code == 0);
    CHECK(run_cli("synth-weather --days 2 --profile mixed --seed 8 --out " +
                  quoted(path_c))
              .exit_code == 0);

    CHECK(first_line(path_a) ==
          "timestamp,t_out_c,t_sky_c,rh_pct,ghi_wm2,dhi_wm2,wind_ms,wind_dir_deg");
    CHECK(read_text(path_a) == read_text(path_b));
    CHECK(read_text(path_a) != read_text(path_c));
    CHECK(count_lines(path_a) == 97);

    CHECK(run_cli("synth-weather --days 0").exit_code == 2);
    CHECK(run_cli("synth-weather --profile hail --out " + quoted(path_c)).exit_code ==
          2);
}

TEST_CASE("simulate writes the combined table and one series per zone") {
    TempDir tmp;
    auto wx = tmp.path / "wx.csv";
    REQUIRE(run_cli("synth-weather --days 2 --profile clear --seed 3 --out " +
                    quoted(wx))
                .exit_code == 0);

    auto building = fs::path(data_dir()) / "demo_building.json";
    auto out_dir = tmp.path / "sim";
    auto r = run_cli("simulate --building " + quoted(building) + " --weather " +
                     quoted(wx) + " --out-dir " + quoted(out_dir));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("simulated 96 steps, 5 zones") != std::string::npos);

    CHECK(fs::exists(out_dir / "simulation.csv"));
    for (const char* z : {"living", "bed1", "bed2", "bed3", "hall"})
        CHECK(fs::exists(out_dir / ("zone_" + std::string(z) + ".csv")));

    auto header = first_line(out_dir / "simulation.csv");
    CHECK(header.rfind("timestamp,t_", 0) == 0);
    // one column per zone plus flux and transmitted power per window
    CHECK(std::count(header.begin(), header.end(), ',') == 5 + 2 * 4);
    CHECK(count_lines(out_dir / "simulation.csv") == 97);
    CHECK(first_line(out_dir / "zone_living.csv") == "timestamp,t_living_c");
    CHECK(count_lines(out_dir / "zone_living.csv") == 97);

    // the bay shade blocks about half of the diffuse sky
    double blocked = value_after(r.output, "window bay: diffuse blocked ");
    CHECK(std::abs(blocked - 0.4992) < 1e-3);

    auto bare = run_cli("simulate --building " + quoted(building) + " --weather " +
                        quoted(wx) + " --out-dir " + quoted(out_dir) +
                        " --ignore-shading");
    CHECK(bare.exit_code == 0);
    CHECK(bare.output.find("window bay: diffuse blocked 0.0000, mean sunlit 1.0000") !=
          std::string::npos);

    // the same run driven entirely by a config file
    auto cfg_out = tmp.path / "cfgout";
    write_text(tmp.path / "cfg.json",
               "{\"building\": \"" + building.string() + "\", \"weather\": \"" +
                   wx.string() + "\", \"out_dir\": \"" + cfg_out.string() + "\"}");
    CHECK(run_cli("simulate --config " + quoted(tmp.path / "cfg.json")).exit_code == 0);
    CHECK(fs::exists(cfg_out / "simulation.csv"));
}

TEST_CASE("report judges residual series and honours band, strict and config") {
    TempDir tmp;
    std::vector<double> small(200, 0.1);
    std::vector<double> outliers(200, 0.1);
    for (int i = 40; i < 70; ++i) outliers[i] = 5.0;  // 15 % outside the band
    std::vector<double> one_out(200, 0.1);
    one_out[50] = 5.0;
    write_series_csv(tmp.path / "small.csv", small);
    write_series_csv(tmp.path / "outliers.csv", outliers);
    write_series_csv(tmp.path / "one_out.csv", one_out);

    auto ok = run_cli("report --residual " + quoted(tmp.path / "small.csv"));
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("accepted") != std::string::npos);

    auto bad = run_cli("report --residual " + quoted(tmp.path / "outliers.csv"));
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("rejected") != std::string::npos);
    CHECK(bad.output.find("[40..69]") != std::string::npos);

    // one sample in 200 passes the default threshold but not strict mode
    CHECK(run_cli("report --residual " + quoted(tmp.path / "one_out.csv")).exit_code ==
          0);
    CHECK(run_cli("report --strict --residual " + quoted(tmp.path / "one_out.csv"))
              .exit_code == 1);
    CHECK(run_cli("report --band 6 --residual " + quoted(tmp.path / "outliers.csv"))
              .exit_code == 0);

    // a config file can widen the band; --out-dir turns on file output
    write_text(tmp.path / "cfg.json", "{\"report\": {\"band\": 6.0}}");
    auto rep_dir = tmp.path / "repdir";
    auto cfg = run_cli("report --config " + quoted(tmp.path / "cfg.json") +
                       " --residual " + quoted(tmp.path / "outliers.csv") +
                       " --out-dir " + quoted(rep_dir));
    CHECK(cfg.exit_code == 0);
    CHECK(first_line(rep_dir / "report.csv") ==
          "mean_k,std_k,fraction_within,band_k,mode,verdict");
    CHECK(fs::exists(rep_dir / "report.txt"));

    // measured/predicted pair instead of a precomputed residual
    write_series_csv(tmp.path / "m.csv", std::vector<double>(200, 25.2));
    write_series_csv(tmp.path / "p.csv", std::vector<double>(200, 25.0));
    auto pair = run_cli("report --measured " + quoted(tmp.path / "m.csv") +
                        " --predicted " + quoted(tmp.path / "p.csv"));
    CHECK(pair.exit_code == 0);
    CHECK(pair.output.find("0.2000") != std::string::npos);

    CHECK(run_cli("report --residual /no/file.csv").exit_code == 2);
    CHECK(run_cli("report").exit_code == 2);
}

TEST_CASE("viewfactor reports element view factors and the blocked fraction") {
    auto shade = fs::path(data_dir()) / "demo_shade.json";
    auto r = run_cli("viewfactor --shade " + quoted(shade));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("F(window -> top_flap)") != std::string::npos);
    CHECK(r.output.find("F(window -> low_wall)") != std::string::npos);
    double blocked = value_after(r.output, "diffuse blocked fraction = ");
    CHECK(std::abs(blocked - 0.4992) < 1e-3);

    auto sun = run_cli("viewfactor --shade " + quoted(shade) +
                       " --sun-el 45 --sun-az 90");
    CHECK(sun.exit_code == 0);
    CHECK(sun.output.find("sunlit fraction at el=45 az=90 deg = ") !=
          std::string::npos);
    double lit = value_after(sun.output, "deg = ");
    CHECK(lit >= 0.0);
    CHECK(lit <= 1.0);

    auto building = fs::path(data_dir()) / "demo_building.json";
    auto from_building =
        run_cli("viewfactor --building " + quoted(building) + " --window bay");
    CHECK(from_building.exit_code == 0);
    double bay = value_after(from_building.output, "diffuse blocked fraction = ");
    CHECK(std::abs(bay - blocked) < 1e-12);  // same assembly either way

    auto unknown =
        run_cli("viewfactor --building " + quoted(building) + " --window nope");
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.output.find("no shaded window named 'nope'") != std::string::npos);
}

TEST_CASE("diagnose writes the full diagnostic bundle and flags rejection") {
    TempDir tmp;
    auto wx = tmp.path / "wx.csv";
    REQUIRE(run_cli("synth-weather --days 5 --profile mixed --seed 11 --out " +
                    quoted(wx))
                .exit_code == 0);

    constexpr double kPi = 3.14159265358979323846;
    const int n = 240;
    std::vector<double> meas(n), pred(n, 25.0);
    for (int i = 0; i < n; ++i)
        meas[i] = 25.0 + 2.0 * std::sin(2.0 * kPi * 0.1 * (0.5 * i));
    write_series_csv(tmp.path / "m.csv", meas);
    write_series_csv(tmp.path / "p.csv", pred);

    auto out_dir = tmp.path / "diag";
    auto r = run_cli("diagnose --measured " + quoted(tmp.path / "m.csv") +
                     " --predicted " + quoted(tmp.path / "p.csv") + " --weather " +
                     quoted(wx) + " --out-dir " + quoted(out_dir));
    CHECK(r.exit_code == 1);  // the residual is far outside the default band
    CHECK(r.output.find("rejected") != std::string::npos);
    CHECK(r.output.find("input ranking by spectrogram similarity") !=
          std::string::npos);

    for (const char* f :
         {"residual.csv", "report.csv", "report.txt", "rankings.csv",
          "similarity_matrix.csv", "spectrogram_residual.csv",
          "spectrogram_direct_h.csv", "spectrogram_diffuse_h.csv",
          "spectrogram_t_out.csv", "spectrogram_t_sky.csv", "spectrogram_wind.csv"})
        CHECK(fs::exists(out_dir / f));

    CHECK(first_line(out_dir / "rankings.csv") ==
          "rank,input,mean_similarity,p_value,tied_with_top");
    CHECK(count_lines(out_dir / "rankings.csv") == 6);  // five candidate inputs
    CHECK(first_line(out_dir / "residual.csv") == "timestamp,residual_k");
    CHECK(count_lines(out_dir / "residual.csv") == 241);
    CHECK(first_line(out_dir / "spectrogram_residual.csv") ==
          "slice_hours,freq_per_hour,magnitude");

    CHECK(run_cli("diagnose --measured " + quoted(tmp.path / "m.csv")).exit_code == 2);
}

TEST_CASE("sensitivity runs an ensemble and reports variance shares") {
    TempDir tmp;
    auto wx = tmp.path / "wx.csv";
    REQUIRE(run_cli("synth-weather --days 2 --profile mixed --seed 5 --out " +
                    quoted(wx))
                .exit_code == 0);

    auto building = fs::path(data_dir()) / "demo_building.json";
    auto factors = fs::path(data_dir()) / "demo_factors.json";
    auto out_dir = tmp.path / "sens";
    auto r = run_cli("sensitivity --building " + quoted(building) + " --weather " +
                     quoted(wx) + " --factors " + quoted(factors) +
                     " --n-runs 64 --out-dir " + quoted(out_dir));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("variance shares over 64 runs") != std::string::npos);
    CHECK(first_line(out_dir / "shares.csv") == "factor,target,frequency,base,share");
    CHECK(count_lines(out_dir / "shares.csv") == 9);  // eight factors
    CHECK(fs::exists(out_dir / "share_matrix.csv"));

    // too few runs for eight factors at the default order
    auto small = run_cli("sensitivity --building " + quoted(building) +
                         " --weather " + quoted(wx) + " --factors " +
                         quoted(factors) + " --n-runs 16 --out-dir " +
                         quoted(out_dir));
    CHECK(small.exit_code == 2);
    CHECK(small.output.find("error:") != std::string::npos);
}
