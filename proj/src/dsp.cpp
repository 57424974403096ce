#include "thermaval/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "fft.hpp"
#include "thermaval/errors.hpp"

namespace thermaval::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Multiplies out a polynomial from its roots; returns real coefficients,
// highest order first in z^-1 form: c[0] + c[1] z^-1 + ...
std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> c{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(c.size() + 1);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] * r;
        }
        c = std::move(next);
    }
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

std::complex<double> eval_poly(const std::vector<double>& c,
                               std::complex<double> zinv) {
    std::complex<double> acc = 0.0, p = 1.0;
    for (double ci : c) {
        acc += ci * p;
        p *= zinv;
    }
    return acc;
}

}  // namespace

double FilterCoeffs::magnitude(double freq_per_hour) const {
    std::complex<double> zinv =
        std::exp(std::complex<double>(0.0, -2.0 * kPi * freq_per_hour / sample_rate));
    return std::abs(eval_poly(b, zinv) / eval_poly(a, zinv));
}

FilterCoeffs butter_highpass(int order, double cutoff_per_hour,
                             double sample_rate) {
    if (order < 1 || order > 12)
        throw ParameterError("butter_highpass: order out of range");
    if (!(cutoff_per_hour > 0.0) || cutoff_per_hour >= sample_rate / 2.0)
        throw ParameterError("butter_highpass: cutoff must lie below Nyquist");

    // Analog low-pass prototype poles on the unit circle, transformed to
    // high-pass at the prewarped cutoff, then mapped by the bilinear
    // transform z = (2fs + s)/(2fs - s).
    const double wc = 2.0 * sample_rate * std::tan(kPi * cutoff_per_hour / sample_rate);
    const double fs2 = 2.0 * sample_rate;

    std::vector<std::complex<double>> zpoles;
    for (int k = 0; k < order; ++k) {
        double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
        std::complex<double> lp(std::cos(theta), std::sin(theta));
        std::complex<double> hp = wc / lp;
        zpoles.push_back((fs2 + hp) / (fs2 - hp));
    }
    for (const auto& p : zpoles)
        if (std::abs(p) >= 1.0)
            throw ParameterError("butter_highpass: unstable design");

    FilterCoeffs c;
    c.sample_rate = sample_rate;
    c.a = poly_from_roots(zpoles);
    // All zeros sit at z = 1.
    c.b = poly_from_roots(std::vector<std::complex<double>>(order, 1.0));

    // Unity gain at Nyquist.
    std::complex<double> zinv(-1.0, 0.0);
    double g = std::abs(eval_poly(c.a, zinv)) / std::abs(eval_poly(c.b, zinv));
    for (double& bi : c.b) bi *= g;
    return c;
}

namespace {

// State for steady response to a unit constant input; scaled by the first
// sample it removes the start-up transient of a causal pass.
std::vector<double> steady_state(const FilterCoeffs& c) {
    std::size_t n = c.a.size() - 1;
    double y = std::accumulate(c.b.begin(), c.b.end(), 0.0) /
               std::accumulate(c.a.begin(), c.a.end(), 0.0);
    std::vector<double> z(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double nxt = i + 1 < n ? z[i + 1] : 0.0;
        z[i] = nxt + c.b[i + 1] - c.a[i + 1] * y;
    }
    return z;
}

// Direct form II transposed single pass.
std::vector<double> filter_once(const FilterCoeffs& c, const std::vector<double>& x,
                                const std::vector<double>& zi) {
    std::size_t n = c.a.size() - 1;
    std::vector<double> z = zi;
    std::vector<double> y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        double yk = c.b[0] * x[k] + (n ? z[0] : 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i)
            z[i] = c.b[i + 1] * x[k] + z[i + 1] - c.a[i + 1] * yk;
        if (n) z[n - 1] = c.b[n] * x[k] - c.a[n] * yk;
        y[k] = yk;
    }
    return y;
}

}  // namespace

Series apply_zero_phase(const FilterCoeffs& coeffs, const Series& series) {
    const int order = static_cast<int>(coeffs.a.size()) - 1;
    const int pad = 3 * order;
    const std::size_t n = series.size();
    if (static_cast<int>(n) <= 3 * order)
        throw ParameterError("apply_zero_phase: series shorter than 3x filter order");

    // Odd reflection about the end samples.
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (int i = pad; i >= 1; --i)
        ext.push_back(2.0 * series.values[0] - series.values[i]);
    ext.insert(ext.end(), series.values.begin(), series.values.end());
    for (int i = 1; i <= pad; ++i)
        ext.push_back(2.0 * series.values[n - 1] - series.values[n - 1 - i]);

    std::vector<double> zi = steady_state(coeffs);
    auto scaled = [&](double x0) {
        std::vector<double> z = zi;
        for (double& v : z) v *= x0;
        return z;
    };

    std::vector<double> fwd = filter_once(coeffs, ext, scaled(ext.front()));
    std::reverse(fwd.begin(), fwd.end());
    std::vector<double> bwd = filter_once(coeffs, fwd, scaled(fwd.front()));
    std::reverse(bwd.begin(), bwd.end());

    Series out;
    out.dt_hours = series.dt_hours;
    out.values.assign(bwd.begin() + pad, bwd.begin() + pad + n);
    return out;
}

Spectrum psd(const Series& series) {
    const std::size_t n = series.size();
    if (n < 8) throw ParameterError("psd: need at least 8 samples");

    double mean = std::accumulate(series.values.begin(), series.values.end(), 0.0) /
                  static_cast<double>(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = series.values[i] - mean;

    auto spec = detail::rfft(x);
    const double norm = static_cast<double>(n) * static_cast<double>(n);

    Spectrum out;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        double p = std::norm(spec[k]) / norm;
        if (2 * k != n) p *= 2.0;  // fold the mirrored bin
        out.freq.push_back(static_cast<double>(k) /
                           (static_cast<double>(n) * series.dt_hours));
        out.power.push_back(p);
    }
    return out;
}

Spectrogram stft(const Series& series, int window_len, double overlap) {
    const std::size_t n = series.size();
    if (window_len < 4) throw ParameterError("stft: window too short");
    if (static_cast<std::size_t>(window_len) > n)
        throw ParameterError("stft: window longer than the series");
    if (overlap < 0.0 || overlap > 0.95)
        throw ParameterError("stft: overlap must be within [0, 0.95]");

    const int hop = std::max(1, static_cast<int>(std::lround(window_len * (1.0 - overlap))));
    std::vector<double> window(window_len);
    for (int i = 0; i < window_len; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (window_len - 1)));

    Spectrogram out;
    out.window_len = window_len;
    out.overlap = overlap;
    for (int k = 0; k <= window_len / 2; ++k)
        out.freq.push_back(static_cast<double>(k) / (window_len * series.dt_hours));

    std::vector<double> seg(window_len);
    for (std::size_t start = 0; start + window_len <= n; start += hop) {
        for (int i = 0; i < window_len; ++i)
            seg[i] = series.values[start + i] * window[i];
        auto spec = detail::rfft(seg);
        std::vector<double> mag(spec.size());
        for (std::size_t k = 0; k < spec.size(); ++k) mag[k] = std::abs(spec[k]);
        out.magnitude.push_back(std::move(mag));
        out.slice_hours.push_back((static_cast<double>(start) + (window_len - 1) / 2.0) *
                                  series.dt_hours);
    }
    return out;
}

SimilarityResult spectrogram_similarity(const Spectrogram& a, const Spectrogram& b) {
    if (a.magnitude.size() != b.magnitude.size() || a.freq != b.freq ||
        a.slice_hours != b.slice_hours)
        throw ParameterError("spectrogram_similarity: grids differ");

    SimilarityResult out;
    double sum = 0.0;
    for (std::size_t s = 0; s < a.magnitude.size(); ++s) {
        const auto& x = a.magnitude[s];
        const auto& y = b.magnitude[s];
        const double n = static_cast<double>(x.size());
        double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
        double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double sxx = 0, syy = 0, sxy = 0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            double dx = x[k] - mx, dy = y[k] - my;
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        double r;
        if (sxx <= 0.0 || syy <= 0.0) {
            r = 0.0;
            out.degenerate = true;
        } else {
            r = sxy / std::sqrt(sxx * syy);
        }
        out.per_slice.push_back(r);
        sum += r;
    }
    if (!out.per_slice.empty()) out.mean = sum / static_cast<double>(out.per_slice.size());
    return out;
}

}  // namespace thermaval::dsp
