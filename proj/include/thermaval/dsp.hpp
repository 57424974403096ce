#pragma once

#include <cstddef>
#include <vector>

namespace thermaval::dsp {

struct Series {
    std::vector<double> values;
    double dt_hours = 0.5;

    std::size_t size() const { return values.size(); }
    double sample_rate() const { return 1.0 / dt_hours; }  // samples per hour
};

// Direct-form IIR transfer function, a[0] == 1, designed for a fixed
// sample rate.
struct FilterCoeffs {
    std::vector<double> b;
    std::vector<double> a;
    double sample_rate = 2.0;  // samples per hour

    double magnitude(double freq_per_hour) const;  // single-pass |H|
};

FilterCoeffs butter_highpass(int order = 4, double cutoff_per_hour = 0.02,
                             double sample_rate = 2.0);

// Forward-backward filtering; zero net phase, squared magnitude response.
// Edges handled by odd-reflective padding of 3x order samples.
Series apply_zero_phase(const FilterCoeffs& coeffs, const Series& series);

struct Spectrum {
    std::vector<double> freq;   // per hour, DC excluded
    std::vector<double> power;  // sums to the series variance
};

Spectrum psd(const Series& series);

struct Spectrogram {
    std::vector<double> slice_hours;  // window-center times
    std::vector<double> freq;         // per hour, 0..Nyquist
    std::vector<std::vector<double>> magnitude;  // [slice][bin]
    int window_len = 48;
    double overlap = 0.75;
};

Spectrogram stft(const Series& series, int window_len = 48,
                 double overlap = 0.75);

struct SimilarityResult {
    std::vector<double> per_slice;  // Pearson r of magnitude columns
    double mean = 0;
    bool degenerate = false;  // some slice had zero variance, scored 0
};

SimilarityResult spectrogram_similarity(const Spectrogram& a,
                                        const Spectrogram& b);

}  // namespace thermaval::dsp
