#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "thermaval/errors.hpp"

namespace thermaval::detail {

namespace {
std::mutex plan_mutex;  // FFTW planning is not thread-safe
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
    if (x.empty()) throw ParameterError("rfft: empty input");
    const int n = static_cast<int>(x.size());
    const int nb = n / 2 + 1;

    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(nb);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    std::memcpy(in, x.data(), n * sizeof(double));
    fftw_execute(plan);

    std::vector<std::complex<double>> result(nb);
    for (int i = 0; i < nb; ++i) result[i] = {out[i][0], out[i][1]};

    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return result;
}

}  // namespace thermaval::detail
