#include "cbimc/num/fftops.hpp"
#include "cbimc/errors.hpp"

#include <fftw3.h>

#include <mutex>

namespace cbimc::num {

void fft_forward(std::vector<std::complex<double>>& data) {
    if (data.empty()) return;
    // FFTW's planner is not thread-safe; execution is.
    static std::mutex planner_mutex;
    fftw_complex* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf,
                                FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (!plan) throw NumericalError("fft_forward: planner failure");
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
}

} // namespace cbimc::num
