#pragma once

#include <functional>
#include <vector>

namespace cbimc::num {

// Gauss-Legendre rule on [-1, 1].  Nodes/weights are computed at first use
// (Newton iteration on the Legendre recurrence) and cached per order, so no
// hard-coded coefficient tables are needed.
struct GaussRule {
    std::vector<double> x; // nodes, ascending
    std::vector<double> w; // weights
};

const GaussRule& gauss_legendre(int n);

// Integrate f over [a, b] with an n-point rule mapped to the interval.
template <class F>
double gauss_panel(F&& f, double a, double b, int n) {
    const GaussRule& r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return s * half;
}

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;    // absolute error floor; 0 = purely relative
    int max_splits = 2000;   // refinement budget
    int points = 15;         // base rule order (error estimate uses 2x)
};

// Adaptive quadrature on a finite interval.  Splits the worst segment until
// the summed error estimate |G(n) - G(2n)| is below tolerance.  Throws
// NumericalError when the budget is exhausted without convergence.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadOptions& opts = {});

// Fixed-order deterministic sum of f over the same panels as `edges`
// (convenience for pre-split layouts).
double integrate_segments(const std::function<double(double)>& f,
                          const std::vector<double>& edges,
                          const QuadOptions& opts = {});

} // namespace cbimc::num
