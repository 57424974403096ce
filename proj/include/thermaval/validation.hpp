#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "thermaval/dsp.hpp"

namespace thermaval::validation {

// Sign convention throughout: residual = measured - predicted.
dsp::Series residual(const dsp::Series& measured, const dsp::Series& predicted);

struct ExceedanceInterval {
    std::size_t first = 0;  // sample indices, inclusive
    std::size_t last = 0;
};

struct ReportOptions {
    double band = 0.5;  // K half-width
    bool strict = false;  // strict: every point inside; else fraction >= threshold
    double threshold = 0.95;
};

struct ResidualReport {
    double mean = 0;
    double std_dev = 0;  // sample standard deviation
    double fraction_within = 0;
    double band = 0.5;
    std::vector<ExceedanceInterval> exceedances;
    bool accepted = false;
    bool strict = false;
    double threshold = 0.95;
};

ResidualReport report(const dsp::Series& residual, const ReportOptions& opt = {});

struct InputSeries {
    std::string name;
    dsp::Series series;
};

struct DiagnoseOptions {
    int filter_order = 4;
    double cutoff_per_hour = 0.02;
    // Two full days per slice: spectra stay comparable across slice phases
    // and the sub-daily band gets twice the frequency resolution.
    int window_len = 96;
    double overlap = 0.75;
    int n_shifts = 199;   // circular shifts for the significance reference
    double alpha = 0.05;
    double tie_margin = 0.05;  // similarity gap treated as a tie with the top
};

struct DiagnoseEntry {
    std::string name;
    double similarity = 0;  // mean spectrogram similarity to the residual
    double p_value = 1;
    bool tied_with_top = false;
};

struct DiagnoseResult {
    std::vector<DiagnoseEntry> ranked;  // descending similarity
    bool no_clear_culprit = false;      // top score not significant
    std::vector<double> slice_hours;
    std::vector<std::vector<double>> per_slice;  // [input][slice], input in ranked order
};

// High-pass both sides, compare spectrograms, rank inputs by similarity to
// the residual. Significance of the top input is judged against circularly
// shifted copies of the residual.
DiagnoseResult diagnose(const dsp::Series& residual,
                        const std::vector<InputSeries>& inputs,
                        const DiagnoseOptions& opt = {});

}  // namespace thermaval::validation
