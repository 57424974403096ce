#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermaval/sensitivity.hpp"
#include "thermaval/thermal.hpp"
#include "thermaval/validation.hpp"

namespace thermaval::io {

struct RunConfig {
    std::string building_path;
    std::string weather_path;
    std::string factors_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;

    int n_runs = 1024;
    int order = 2;
    bool parallel = true;

    thermal::SimOptions sim;
    validation::ReportOptions report;
    validation::DiagnoseOptions diagnose;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

std::vector<sensitivity::FactorSpec> load_factors(const std::string& path);
std::vector<sensitivity::FactorSpec> parse_factors(const std::string& text);

}  // namespace thermaval::io
