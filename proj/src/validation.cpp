#include "thermaval/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "thermaval/errors.hpp"

namespace thermaval::validation {

dsp::Series residual(const dsp::Series& measured, const dsp::Series& predicted) {
    if (measured.size() != predicted.size() ||
        measured.dt_hours != predicted.dt_hours)
        throw ParameterError("residual: series are not aligned");
    dsp::Series out;
    out.dt_hours = measured.dt_hours;
    out.values.resize(measured.size());
    for (std::size_t i = 0; i < measured.size(); ++i)
        out.values[i] = measured.values[i] - predicted.values[i];
    return out;
}

ResidualReport report(const dsp::Series& residual, const ReportOptions& opt) {
    const std::size_t n = residual.size();
    if (n == 0) throw ParameterError("report: empty residual");

    ResidualReport rep;
    rep.band = opt.band;
    rep.strict = opt.strict;
    rep.threshold = opt.threshold;

    double sum = std::accumulate(residual.values.begin(), residual.values.end(), 0.0);
    rep.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : residual.values) ss += (v - rep.mean) * (v - rep.mean);
    rep.std_dev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

    std::size_t within = 0;
    bool in_run = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(residual.values[i]) <= opt.band) {
            ++within;
            in_run = false;
        } else if (in_run) {
            rep.exceedances.back().last = i;
        } else {
            rep.exceedances.push_back({i, i});
            in_run = true;
        }
    }
    rep.fraction_within = static_cast<double>(within) / static_cast<double>(n);
    rep.accepted = opt.strict ? within == n : rep.fraction_within >= opt.threshold;
    return rep;
}

namespace {

dsp::Series shifted(const dsp::Series& s, std::size_t offset) {
    dsp::Series out;
    out.dt_hours = s.dt_hours;
    out.values.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        out.values[i] = s.values[(i + offset) % s.size()];
    return out;
}

}  // namespace

DiagnoseResult diagnose(const dsp::Series& residual,
                        const std::vector<InputSeries>& inputs,
                        const DiagnoseOptions& opt) {
    if (inputs.empty()) throw ParameterError("diagnose: no inputs given");
    for (const InputSeries& in : inputs)
        if (in.series.size() != residual.size() ||
            in.series.dt_hours != residual.dt_hours)
            throw ParameterError("diagnose: input '" + in.name +
                                 "' is not aligned with the residual");

    auto filter = dsp::butter_highpass(opt.filter_order, opt.cutoff_per_hour,
                                       residual.sample_rate());
    dsp::Series hp_res = dsp::apply_zero_phase(filter, residual);
    dsp::Spectrogram res_spec = dsp::stft(hp_res, opt.window_len, opt.overlap);

    struct Scored {
        std::size_t index;
        double similarity;
        std::vector<double> per_slice;
    };
    std::vector<Scored> scored;
    std::vector<dsp::Spectrogram> input_specs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        dsp::Series hp = dsp::apply_zero_phase(filter, inputs[i].series);
        input_specs.push_back(dsp::stft(hp, opt.window_len, opt.overlap));
        auto sim = dsp::spectrogram_similarity(input_specs.back(), res_spec);
        scored.push_back({i, sim.mean, std::move(sim.per_slice)});
    }

    // Reference distribution: the same scores against circularly shifted
    // copies of the filtered residual.
    std::vector<std::size_t> exceed(inputs.size(), 0);
    const std::size_t n = hp_res.size();
    for (int j = 1; j <= opt.n_shifts; ++j) {
        std::size_t offset = static_cast<std::size_t>(
            std::lround(static_cast<double>(j) * n / (opt.n_shifts + 1)));
        dsp::Spectrogram shifted_spec =
            dsp::stft(shifted(hp_res, offset), opt.window_len, opt.overlap);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            auto sim = dsp::spectrogram_similarity(input_specs[i], shifted_spec);
            if (sim.mean >= scored[i].similarity) ++exceed[i];
        }
    }

    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) {
                         return a.similarity > b.similarity;
                     });

    DiagnoseResult out;
    out.slice_hours = res_spec.slice_hours;
    for (const Scored& s : scored) {
        DiagnoseEntry e;
        e.name = inputs[s.index].name;
        e.similarity = s.similarity;
        e.p_value = (1.0 + static_cast<double>(exceed[s.index])) /
                    (1.0 + static_cast<double>(opt.n_shifts));
        out.ranked.push_back(e);
        out.per_slice.push_back(s.per_slice);
    }
    for (std::size_t i = 1; i < out.ranked.size(); ++i)
        if (out.ranked[0].similarity - out.ranked[i].similarity <= opt.tie_margin) {
            out.ranked[i].tied_with_top = true;
            out.ranked[0].tied_with_top = true;
        }
    out.no_clear_culprit = out.ranked[0].p_value > opt.alpha;
    return out;
}

}  // namespace thermaval::validation
