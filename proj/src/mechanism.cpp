#include "cbimc/mechanism.hpp"
#include "cbimc/errors.hpp"
#include "cbimc/num/quadrature.hpp"
#include "cbimc/num/special.hpp"

#include <cmath>
#include <sstream>

namespace cbimc {

void MechanismParams::validate() const {
    if (!(sigma >= 0.0)) throw ValidationError("mechanism: sigma must be >= 0");
    if (!(eta >= 0.0)) throw ValidationError("mechanism: eta must be >= 0");
    if (eta > 0.0) {
        if (!(theta > eta))
            throw ValidationError("mechanism: theta must exceed eta");
        if (!(alpha > 1.0 && alpha < 2.0))
            throw ValidationError("mechanism: alpha must lie in (1, 2)");
    }
    if (beta.empty()) throw ValidationError("mechanism: beta must be non-empty");
    double prev = 0.0;
    for (double v : beta) {
        if (!(v >= prev))
            throw ValidationError("mechanism: beta must be non-negative and non-decreasing");
        prev = v;
    }
    if (!std::isfinite(b)) throw ValidationError("mechanism: b must be finite");
}

double MechanismParams::delta_beta(std::size_t i) const {
    if (i < 1 || i > beta.size())
        throw ValidationError("mechanism: factor index out of range");
    return beta[i - 1] - (i >= 2 ? beta[i - 2] : 0.0);
}

Mechanism::Mechanism(MechanismParams params) : p_(std::move(params)) {
    p_.validate();
    if (p_.eta > 0.0) {
        theta_eff_ = p_.theta / p_.eta;
        const double cos_half = std::cos(0.5 * M_PI * p_.alpha); // < 0
        const double eta_alpha = std::exp(p_.alpha * std::log(p_.eta));
        cos_factor_ = eta_alpha / cos_half;
        // C(alpha, eta) = -eta^alpha / (Gamma(-alpha) cos(alpha pi/2)) > 0
        stable_const_ = -eta_alpha / (std::tgamma(-p_.alpha) * cos_half);
        te_alpha_ = std::exp(p_.alpha * std::log(theta_eff_));
        te_alpha_m1_ = std::exp((p_.alpha - 1.0) * std::log(theta_eff_));
    } else {
        theta_eff_ = std::numeric_limits<double>::infinity();
        cos_factor_ = stable_const_ = te_alpha_ = te_alpha_m1_ = 0.0;
    }
}

double Mechanism::phi_jump_real(double z) const {
    // eta^alpha [te^a + z a te^{a-1} - (z + te)^a] / cos(a pi / 2)
    const double base = z + theta_eff_;
    const double pow_base = base > 0.0 ? std::exp(p_.alpha * std::log(base)) : 0.0;
    return cos_factor_ * (te_alpha_ + z * p_.alpha * te_alpha_m1_ - pow_base);
}

double Mechanism::phi(double z) const {
    if (p_.eta > 0.0 && z < -theta_eff_ - 1e-12 * std::max(1.0, theta_eff_))
        throw ValidationError("phi: argument below the domain edge");
    double v = p_.b * z + 0.5 * p_.sigma * p_.sigma * z * z;
    if (p_.eta > 0.0) v += phi_jump_real(std::max(z, -theta_eff_));
    return v;
}

std::complex<double> Mechanism::phi(std::complex<double> z) const {
    if (z.imag() == 0.0) return {phi(z.real()), 0.0}; // bit-exact on the axis
    if (p_.eta > 0.0 && z.real() < -theta_eff_ - 1e-12 * std::max(1.0, theta_eff_))
        throw ValidationError("phi: real part below the domain edge");
    std::complex<double> v = p_.b * z + 0.5 * p_.sigma * p_.sigma * z * z;
    if (p_.eta > 0.0) {
        std::complex<double> base = z + theta_eff_;
        std::complex<double> pow_base = std::exp(p_.alpha * std::log(base));
        v += cos_factor_ * (te_alpha_ + z * p_.alpha * te_alpha_m1_ - pow_base);
    }
    return v;
}

double Mechanism::psi(double z, std::size_t i) const { return p_.delta_beta(i) * z; }

bool Mechanism::is_stable() const {
    if (p_.eta == 0.0) return p_.b >= 0.0;
    return phi(-theta_eff_) <= 0.0;
}

double Mechanism::explosion_threshold(double q) const {
    if (!(q >= 0.0)) throw ValidationError("explosion_threshold: q must be >= 0");
    double lo;
    if (p_.eta > 0.0) {
        if (phi(-theta_eff_) <= q) return -theta_eff_;
        lo = -theta_eff_;
    } else {
        // expand downward until phi(lo) > q (phi is eventually quadratic)
        lo = -1.0;
        while (phi(lo) <= q) {
            lo *= 2.0;
            if (lo < -1e12)
                throw NumericalError("explosion_threshold: no crossing found");
        }
    }
    // phi(lo) > q, phi(0) = 0 <= q; bisect the unique left-branch crossing
    double hi = 0.0;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        (phi(mid) > q ? lo : hi) = mid;
    }
    return hi;
}

LifetimeResult Mechanism::lifetime(double p, double q) const {
    if (!(q >= 0.0)) throw ValidationError("lifetime: q must be >= 0");
    if (p_.eta > 0.0 && p < -theta_eff_)
        throw ValidationError("lifetime: p below the domain edge");
    const double pq = explosion_threshold(q);
    if (p >= pq) return {false, std::numeric_limits<double>::infinity()};

    auto inv = [&](double y) { return 1.0 / (phi(y) - q); };
    num::QuadOptions opts;
    opts.rel_tol = 1e-11;
    opts.max_splits = 20000;

    // geometric edge refinement towards both endpoints; the integrand is
    // steepest next to p when p sits close to the explosion threshold
    auto decades = [](double a, double b) {
        std::vector<double> e{a};
        const double w = b - a;
        for (double f : {1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5})
            e.push_back(a + w * f);
        for (double f : {1e-2, 1e-3, 1e-4, 1e-6, 1e-8})
            e.push_back(b - w * f);
        e.push_back(b);
        return e;
    };

    double total = 0.0;
    if (p_.eta > 0.0) {
        total = num::integrate_segments(inv, decades(-theta_eff_, p), opts);
    } else {
        // split off an explicit far tail; the map y -> 1/y turns the
        // quadratic growth of phi into a bounded integrand near zero:
        //   int_{-inf}^{L} dy/(phi - q) = int_{1/L}^{0} du / (u^2 (phi(1/u) - q))
        const double L = p - std::max(10.0 * (std::abs(p) + 1.0), 100.0);
        auto tail = [&](double u) { return 1.0 / (u * u * (phi(1.0 / u) - q)); };
        total = num::integrate(tail, 1.0 / L, 0.0, opts);
        total += num::integrate_segments(inv, decades(L, p), opts);
    }
    return {true, total};
}

bool Mechanism::exp_moment_finite(double gamma) const {
    if (gamma <= 0.0) return true;
    if (p_.eta > 0.0 && gamma > theta_eff_) return false;
    return -gamma >= explosion_threshold(0.0);
}

double Mechanism::ergodic_laplace(double p, std::size_t i) const {
    if (!(p_.b > 0.0))
        throw ValidationError("ergodic_laplace: requires b > 0");
    const double dom = explosion_threshold(0.0);
    if (!(p > dom))
        throw ValidationError("ergodic_laplace: p outside the ergodic domain");
    if (i < 1 || i > p_.beta.size())
        throw ValidationError("ergodic_laplace: factor index out of range");
    if (p == 0.0) return 1.0;
    // z/phi(z) extends continuously to 1/b at zero, so plain adaptive
    // quadrature over [0, p] behaves.
    auto f = [&](double z) { return z / phi(z); };
    num::QuadOptions opts;
    opts.rel_tol = 1e-12;
    double integral = num::integrate(f, 0.0, p, opts);
    return std::exp(-p_.beta[i - 1] * integral);
}

double Mechanism::ergodic_mean(std::size_t i) const {
    if (!(p_.b > 0.0))
        throw ValidationError("ergodic_mean: requires b > 0");
    if (i < 1 || i > p_.beta.size())
        throw ValidationError("ergodic_mean: factor index out of range");
    return p_.beta[i - 1] / p_.b;
}

double Mechanism::jump_intensity_above(double eps) const {
    if (p_.eta == 0.0) return 0.0;
    if (!(eps > 0.0))
        throw ValidationError("jump_intensity_above: eps must be > 0");
    return stable_const_ * te_alpha_ *
           num::upper_incomplete_gamma(-p_.alpha, eps * theta_eff_);
}

double Mechanism::jump_compensator_above(double eps) const {
    if (p_.eta == 0.0) return 0.0;
    if (!(eps > 0.0))
        throw ValidationError("jump_compensator_above: eps must be > 0");
    return stable_const_ * te_alpha_m1_ *
           num::upper_incomplete_gamma(1.0 - p_.alpha, eps * theta_eff_);
}

} // namespace cbimc
