#pragma once

#include <complex>
#include <vector>

namespace cbimc::num {

// In-place forward DFT, X_n = sum_j x_j exp(-2 pi i j n / N).
// Backed by FFTW with a deterministic (estimate-mode) plan so repeated runs
// produce bit-identical output.
void fft_forward(std::vector<std::complex<double>>& data);

} // namespace cbimc::num
