#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "thermaval/thermal.hpp"
#include "thermaval/weather.hpp"

namespace thermaval::sensitivity {

// A factor oscillates its target multiplicatively: on run k of n the target
// is scaled by 1 + amplitude*sin(2*pi*frequency*k/n).
//
// Targets:
//   weather:t_out | weather:ghi | weather:dhi    scale that channel
//   weather:beam | weather:diffuse               scale one irradiance part,
//                                                keeping the other fixed
//   wall:<name|*>:<layer index|*>:<field>        field in thickness,
//                                                conductivity, density,
//                                                specific_heat
//   window:<name|*>:transmittance|area
//   zone:<name|*>:volume
struct FactorSpec {
    std::string name;
    std::string target;
    double amplitude = 0.10;
    int frequency = 0;  // cycles per ensemble period; 0 = not yet assigned
    double base = std::numeric_limits<double>::quiet_NaN();  // filled at run time
};

// Distinct integer frequencies with no harmonic collision up to the given
// order: p*f_i != q*f_j for i != j and p,q <= order, and order*f < n_runs/2.
// Greedy smallest-first, so the result is deterministic.
std::vector<int> assign_frequencies(int n_factors, int n_runs, int order = 2);

// Generic ensemble core: the evaluator maps one multiplier per factor to an
// output series. Rows are independent, so threaded and serial execution
// produce identical matrices.
using Evaluator =
    std::function<std::vector<double>(const std::vector<double>& scales)>;

Eigen::MatrixXd run_ensemble_generic(const Evaluator& evaluate,
                                     const std::vector<FactorSpec>& factors,
                                     int n_runs, bool parallel = true);

struct EnsembleOptions {
    int n_runs = 1024;
    int order = 2;
    bool parallel = true;
    thermal::SimOptions sim;
};

// Runs the building simulator across the ensemble and returns living-zone
// temperature, one run per row. Assigns frequencies and resolves base values
// in place when missing. output_zone picks the recorded zone (default the
// first one).
Eigen::MatrixXd run_ensemble(const thermal::BuildingModel& model,
                             const weather::WeatherSeries& weather,
                             std::vector<FactorSpec>& factors,
                             const EnsembleOptions& opt = {},
                             const std::string& output_zone = {});

struct SensitivityResult {
    std::vector<std::string> factor_names;
    std::vector<double> share;       // overall variance share per factor
    Eigen::MatrixXd per_time_share;  // factors x time
    std::vector<double> time_variance;  // residual variance per time index
    double total_variance = 0;          // variance-weighted time average base
    int n_runs = 0;
};

SensitivityResult attribute_variance(const Eigen::MatrixXd& outputs,
                                     const std::vector<FactorSpec>& factors,
                                     int order = 2);

}  // namespace thermaval::sensitivity
