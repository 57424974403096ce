#pragma once

#include <complex>
#include <vector>

namespace thermaval::detail {

// Real-to-complex forward DFT, bins 0..n/2. Planning is serialized
// internally; execution is safe to call from multiple threads.
std::vector<std::complex<double>> rfft(const std::vector<double>& x);

}  // namespace thermaval::detail
