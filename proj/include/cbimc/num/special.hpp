#pragma once

#include <complex>

namespace cbimc::num {

double normal_pdf(double x);
double normal_cdf(double x);

// Inverse standard normal CDF, accurate to ~1 ulp after a Halley polish of
// the Acklam rational approximation.
double inv_normal_cdf(double p);

// Upper incomplete gamma Gamma(a, x) for x > 0 and real a, including
// negative non-integer a (reached by downward recurrence
// Gamma(a,x) = (Gamma(a+1,x) - x^a e^-x) / a from a positive base case).
double upper_incomplete_gamma(double a, double x);

// log Gamma(z) for complex z (Lanczos, with the reflection formula for
// Re(z) < 0.5).  Intended for moderate |z|; exp() of the result is taken by
// callers, so the branch of the imaginary part is not normalized.
std::complex<double> log_gamma(std::complex<double> z);

// Complete Beta B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b) for complex a, real b.
std::complex<double> complete_beta(std::complex<double> a, double b);

} // namespace cbimc::num
