#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace cbimc::num {

// Pairwise (cascade) summation over a fixed element order.  Reductions over
// per-path results use this so totals are identical for any worker count.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& v) {
    MeanStderr r;
    if (v.empty()) return r;
    const double n = static_cast<double>(v.size());
    r.mean = pairwise_sum(v) / n;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double d = v[i] - r.mean;
        sq[i] = d * d;
    }
    if (v.size() > 1)
        r.stderr_ = std::sqrt(pairwise_sum(sq) / (n * (n - 1.0)));
    return r;
}

// Solve a tridiagonal system in place (Thomas algorithm).  diag/upper/lower
// are overwritten.  Returns false on a vanishing pivot.
inline bool solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) return false;
        double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) return false;
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    return true;
}

} // namespace cbimc::num
