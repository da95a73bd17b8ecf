#include "cbimc/num/special.hpp"
#include "cbimc/errors.hpp"

#include <cmath>
#include <limits>

namespace cbimc::num {

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double inv_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw ValidationError("inv_normal_cdf: p must be in (0,1)");
    // Acklam's rational approximation (~1e-9), then one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement against the erfc-based CDF.
    double e = normal_cdf(x) - p;
    double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

namespace {

// Series for the lower incomplete gamma, valid for x < a + 1.
double lower_gamma_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x));
    }
    throw NumericalError("incomplete gamma: series did not converge");
}

// Continued fraction for Gamma(a, x), modified Lentz.  Converges for x
// comfortably above a; we use it for x >= 1 (and any a <= x + 1).
double upper_gamma_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16)
            return h * std::exp(-x + a * std::log(x));
    }
    throw NumericalError("incomplete gamma: continued fraction did not converge");
}

} // namespace

double upper_incomplete_gamma(double a, double x) {
    if (!(x > 0.0))
        throw ValidationError("upper_incomplete_gamma: x must be > 0");
    if (a > 0.0) {
        if (x < a + 1.0) return std::tgamma(a) - lower_gamma_series(a, x);
        return upper_gamma_cf(a, x);
    }
    if (x >= 1.0) return upper_gamma_cf(a, x);
    // a <= 0, small x: climb to a positive order, then recurse back down via
    //   Gamma(a, x) = (Gamma(a+1, x) - x^a e^-x) / a.
    int k = static_cast<int>(std::ceil(-a)) + 1; // a + k in (0, 2]
    double ah = a + k;
    double g = (x < ah + 1.0) ? std::tgamma(ah) - lower_gamma_series(ah, x)
                              : upper_gamma_cf(ah, x);
    for (int j = k - 1; j >= 0; --j) {
        double aj = a + j;
        g = (g - std::exp(aj * std::log(x) - x)) / aj;
    }
    return g;
}

namespace {

// log(sin(pi z)) assembled in log space; the direct sine overflows once
// |Im z| exceeds ~230
std::complex<double> log_sin_pi(std::complex<double> z) {
    const std::complex<double> ipz(-M_PI * z.imag(), M_PI * z.real());
    if (z.imag() > 0.0)
        return -ipz + std::log((1.0 - std::exp(2.0 * ipz)) *
                               std::complex<double>(0.0, 0.5));
    return ipz + std::log((1.0 - std::exp(-2.0 * ipz)) *
                          std::complex<double>(0.0, -0.5));
}

} // namespace

std::complex<double> log_gamma(std::complex<double> z) {
    if (z.real() < 0.0) {
        // Reflection: log Gamma(z) = log(pi) - log sin(pi z) - log Gamma(1 - z)
        return std::log(M_PI) - log_sin_pi(z) - log_gamma(1.0 - z);
    }
    if (z.real() < 0.5) {
        // shift instead of reflecting: stable for any imaginary part
        return log_gamma(z + 1.0) - std::log(z);
    }
    static const double cof[6] = {76.18009172947146,     -86.50532032941677,
                                  24.01409824083091,     -1.231739572450155,
                                  0.1208650973866179e-2, -0.5395239384953e-5};
    std::complex<double> x = z, y = z;
    std::complex<double> tmp = x + 5.5;
    tmp -= (x + 0.5) * std::log(tmp);
    std::complex<double> ser = 1.000000000190015;
    for (double c : cof) {
        y += 1.0;
        ser += c / y;
    }
    return -tmp + std::log(2.5066282746310005 * ser / x);
}

std::complex<double> complete_beta(std::complex<double> a, double b) {
    return std::exp(log_gamma(a) + log_gamma(std::complex<double>(b)) -
                    log_gamma(a + b));
}

} // namespace cbimc::num
