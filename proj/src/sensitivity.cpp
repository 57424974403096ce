#include "thermaval/sensitivity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include "fft.hpp"
#include "thermaval/errors.hpp"

namespace thermaval::sensitivity {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool collides(int f, const std::vector<int>& chosen, int order) {
    for (int g : chosen)
        for (int p = 1; p <= order; ++p)
            for (int q = 1; q <= order; ++q)
                if (p * f == q * g) return true;
    return false;
}

}  // namespace

std::vector<int> assign_frequencies(int n_factors, int n_runs, int order) {
    if (n_factors < 1) throw ParameterError("assign_frequencies: need a factor");
    if (order < 1) throw ParameterError("assign_frequencies: order must be >= 1");

    std::vector<int> out;
    int f = 0;
    while (static_cast<int>(out.size()) < n_factors) {
        ++f;
        if (!collides(f, out, order)) out.push_back(f);
    }
    if (2 * order * out.back() >= n_runs) {
        std::size_t minimal = 2 * static_cast<std::size_t>(order) * out.back() + 1;
        throw CapacityError(
            "assign_frequencies: " + std::to_string(n_factors) +
                " factors need at least " + std::to_string(minimal) + " runs",
            minimal);
    }
    return out;
}

namespace {

void check_assignment(const std::vector<FactorSpec>& factors, int n_runs) {
    if (factors.empty()) throw ConfigError("ensemble: no factors given");
    if (n_runs < 2) throw ConfigError("ensemble: need at least two runs");
    std::set<int> seen;
    for (const FactorSpec& f : factors) {
        if (f.amplitude <= 0.0 || f.amplitude >= 1.0)
            throw ConfigError("factor '" + f.name + "': amplitude outside (0,1)");
        if (f.frequency < 1)
            throw ConfigError("factor '" + f.name + "': frequency not assigned");
        if (2 * f.frequency >= n_runs)
            throw ConfigError("factor '" + f.name + "': frequency above Nyquist");
        if (!seen.insert(f.frequency).second)
            throw ConfigError("duplicate factor frequency " +
                              std::to_string(f.frequency));
    }
}

std::vector<double> scales_for_run(const std::vector<FactorSpec>& factors,
                                   int k, int n_runs) {
    std::vector<double> s(factors.size());
    for (std::size_t j = 0; j < factors.size(); ++j)
        s[j] = 1.0 + factors[j].amplitude *
                         std::sin(2.0 * kPi * factors[j].frequency * k / n_runs);
    return s;
}

}  // namespace

Eigen::MatrixXd run_ensemble_generic(const Evaluator& evaluate,
                                     const std::vector<FactorSpec>& factors,
                                     int n_runs, bool parallel) {
    check_assignment(factors, n_runs);

    std::vector<double> first = evaluate(scales_for_run(factors, 0, n_runs));
    if (first.empty()) throw ConfigError("ensemble: evaluator returned no samples");
    const int n_time = static_cast<int>(first.size());

    Eigen::MatrixXd out(n_runs, n_time);
    for (int t = 0; t < n_time; ++t) out(0, t) = first[t];

    std::atomic<bool> bad_length{false};
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int k = 1; k < n_runs; ++k) {
        std::vector<double> row = evaluate(scales_for_run(factors, k, n_runs));
        if (static_cast<int>(row.size()) != n_time) {
            bad_length = true;
            continue;
        }
        for (int t = 0; t < n_time; ++t) out(k, t) = row[t];
    }
    if (bad_length)
        throw ConfigError("ensemble: evaluator output length varied between runs");
    return out;
}

namespace {

struct ChannelEdit {
    enum class Kind { TOut, Ghi, Dhi, Beam, Diffuse } kind;
};

std::vector<std::string> split_target(const std::string& target) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : target) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

void scale_weather(weather::WeatherSeries& w, ChannelEdit::Kind kind, double s) {
    for (auto& r : w.records) {
        switch (kind) {
            case ChannelEdit::Kind::TOut:
                r.t_out_c *= s;
                break;
            case ChannelEdit::Kind::Ghi:
                r.ghi_wm2 *= s;
                break;
            case ChannelEdit::Kind::Dhi:
                r.dhi_wm2 *= s;
                break;
            case ChannelEdit::Kind::Beam:
                r.ghi_wm2 = r.dhi_wm2 + s * (r.ghi_wm2 - r.dhi_wm2);
                break;
            case ChannelEdit::Kind::Diffuse: {
                double beam = r.ghi_wm2 - r.dhi_wm2;
                r.dhi_wm2 *= s;
                r.ghi_wm2 = beam + r.dhi_wm2;
                break;
            }
        }
        r.flagged = r.dhi_wm2 < 0.0 || r.ghi_wm2 < r.dhi_wm2;
    }
}

bool name_matches(const std::string& pattern, const std::string& name) {
    return pattern == "*" || pattern == name;
}

// Applies one factor multiplier; returns the base value it found (parameter
// value for a unique match, 1.0 for wildcards and weather channels).
double apply_target(thermal::BuildingModel& model, weather::WeatherSeries& weather,
                    const std::string& target, double s) {
    auto parts = split_target(target);

    if (parts.size() == 2 && parts[0] == "weather") {
        ChannelEdit::Kind kind;
        if (parts[1] == "t_out") kind = ChannelEdit::Kind::TOut;
        else if (parts[1] == "ghi") kind = ChannelEdit::Kind::Ghi;
        else if (parts[1] == "dhi") kind = ChannelEdit::Kind::Dhi;
        else if (parts[1] == "beam") kind = ChannelEdit::Kind::Beam;
        else if (parts[1] == "diffuse") kind = ChannelEdit::Kind::Diffuse;
        else throw ConfigError("unknown weather channel '" + parts[1] + "'");
        scale_weather(weather, kind, s);
        return 1.0;
    }

    if (parts.size() == 4 && parts[0] == "wall") {
        int hits = 0;
        double base = 1.0;
        for (auto& wall : model.walls) {
            if (!name_matches(parts[1], wall.name)) continue;
            for (std::size_t li = 0; li < wall.layers.size(); ++li) {
                if (parts[2] != "*" && parts[2] != std::to_string(li)) continue;
                thermal::Layer& l = wall.layers[li];
                double* field = nullptr;
                if (parts[3] == "thickness") field = &l.thickness;
                else if (parts[3] == "conductivity") field = &l.conductivity;
                else if (parts[3] == "density") field = &l.density;
                else if (parts[3] == "specific_heat") field = &l.specific_heat;
                else throw ConfigError("unknown wall field '" + parts[3] + "'");
                base = *field;
                *field *= s;
                ++hits;
            }
        }
        if (!hits) throw ConfigError("factor target '" + target + "' matched nothing");
        return hits == 1 ? base : 1.0;
    }

    if (parts.size() == 3 && parts[0] == "window") {
        int hits = 0;
        double base = 1.0;
        for (auto& win : model.windows) {
            if (!name_matches(parts[1], win.name)) continue;
            if (parts[2] == "transmittance") {
                base = win.transmittance;
                win.transmittance *= s;
            } else if (parts[2] == "area") {
                base = win.area;
                double e = std::sqrt(s);
                win.area *= s;
                win.width *= e;
                win.height *= e;
                if (win.shade) {
                    win.shade->window.edge_u = win.shade->window.edge_u * e;
                    win.shade->window.edge_v = win.shade->window.edge_v * e;
                }
            } else {
                throw ConfigError("unknown window field '" + parts[2] + "'");
            }
            ++hits;
        }
        if (!hits) throw ConfigError("factor target '" + target + "' matched nothing");
        return hits == 1 ? base : 1.0;
    }

    if (parts.size() == 3 && parts[0] == "zone" && parts[2] == "volume") {
        int hits = 0;
        double base = 1.0;
        for (auto& z : model.zones) {
            if (!name_matches(parts[1], z.name)) continue;
            base = z.volume;
            z.volume *= s;
            if (z.air_capacitance > 0.0) z.air_capacitance *= s;
            ++hits;
        }
        if (!hits) throw ConfigError("factor target '" + target + "' matched nothing");
        return hits == 1 ? base : 1.0;
    }

    throw ConfigError("unrecognized factor target '" + target + "'");
}

}  // namespace

Eigen::MatrixXd run_ensemble(const thermal::BuildingModel& model,
                             const weather::WeatherSeries& weather,
                             std::vector<FactorSpec>& factors,
                             const EnsembleOptions& opt,
                             const std::string& output_zone) {
    bool any_assigned = false, all_assigned = true;
    for (const FactorSpec& f : factors) {
        if (f.frequency > 0)
            any_assigned = true;
        else
            all_assigned = false;
    }
    if (!any_assigned) {
        auto freqs = assign_frequencies(static_cast<int>(factors.size()),
                                        opt.n_runs, opt.order);
        for (std::size_t j = 0; j < factors.size(); ++j)
            factors[j].frequency = freqs[j];
    } else if (!all_assigned) {
        throw ConfigError("ensemble: assign all factor frequencies or none");
    }

    int zone = 0;
    if (!output_zone.empty()) {
        zone = model.zone_index(output_zone);
        if (zone < 0) throw ConfigError("unknown output zone '" + output_zone + "'");
    }

    // Dry run of every target against throwaway copies so bad paths fail
    // before the ensemble starts, and base values get recorded.
    {
        thermal::BuildingModel m = model;
        weather::WeatherSeries w = weather;
        for (FactorSpec& f : factors) f.base = apply_target(m, w, f.target, 1.0);
    }

    auto evaluate = [&](const std::vector<double>& scales) {
        thermal::BuildingModel m = model;
        weather::WeatherSeries w = weather;
        for (std::size_t j = 0; j < factors.size(); ++j)
            apply_target(m, w, factors[j].target, scales[j]);
        auto result = thermal::simulate(m, w, opt.sim);
        return result.zone_temp_c[zone];
    };
    return run_ensemble_generic(evaluate, factors, opt.n_runs, opt.parallel);
}

SensitivityResult attribute_variance(const Eigen::MatrixXd& outputs,
                                     const std::vector<FactorSpec>& factors,
                                     int order) {
    const int n_runs = static_cast<int>(outputs.rows());
    const int n_time = static_cast<int>(outputs.cols());
    if (n_runs < 4 || n_time < 1)
        throw ConfigError("attribute_variance: output matrix too small");
    check_assignment(factors, n_runs);
    for (const FactorSpec& f : factors)
        if (2 * order * f.frequency >= n_runs)
            throw ConfigError("factor '" + f.name +
                              "': harmonics exceed the run Nyquist");

    const int nf = static_cast<int>(factors.size());
    SensitivityResult res;
    res.n_runs = n_runs;
    res.factor_names.reserve(nf);
    for (const FactorSpec& f : factors) res.factor_names.push_back(f.name);
    res.per_time_share = Eigen::MatrixXd::Zero(nf, n_time);
    res.time_variance.assign(n_time, 0.0);

    std::vector<double> attributed(nf, 0.0);
    double total = 0.0;

    std::vector<double> column(n_runs);
    for (int t = 0; t < n_time; ++t) {
        for (int k = 0; k < n_runs; ++k) column[k] = outputs(k, t) - outputs(0, t);
        auto spec = detail::rfft(column);

        // One-sided bin powers; their sum is the population variance.
        const double norm = static_cast<double>(n_runs) * n_runs;
        auto bin_power = [&](int m) {
            double p = std::norm(spec[m]) / norm;
            if (2 * m != n_runs) p *= 2.0;
            return p;
        };
        double variance = 0.0;
        for (int m = 1; m <= n_runs / 2; ++m) variance += bin_power(m);
        res.time_variance[t] = variance;
        total += variance;

        for (int j = 0; j < nf; ++j) {
            double power = 0.0;
            for (int p = 1; p <= order; ++p)
                power += bin_power(p * factors[j].frequency);
            attributed[j] += power;
            res.per_time_share(j, t) = variance > 0.0 ? power / variance : 0.0;
        }
    }

    res.total_variance = total / n_time;
    res.share.assign(nf, 0.0);
    if (total > 0.0)
        for (int j = 0; j < nf; ++j) res.share[j] = attributed[j] / total;
    return res;
}

}  // namespace thermaval::sensitivity
