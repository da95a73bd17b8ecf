#pragma once

#include <complex>
#include <limits>
#include <vector>

namespace cbimc {

// Parameters of the common branching mechanism and of the per-factor
// immigration drifts.  The jump part is a tempered stable measure with
// stability index alpha in (1,2), tempering theta and scale eta; eta = 0
// degenerates to the square-root (CIR) diffusion and is permitted as a test
// configuration.
struct MechanismParams {
    double b = 0.0;     // linear (mean-reversion) coefficient
    double sigma = 0.0; // diffusion coefficient
    double eta = 0.0;   // jump scale
    double theta = 0.0; // tempering of the unscaled jump measure
    double alpha = 1.5; // stability index, in (1, 2)
    std::vector<double> beta; // cumulative immigration drifts, non-decreasing

    // Throws ValidationError on structural violations (theta <= eta when
    // jumps are present, alpha outside (1,2), decreasing/negative beta, ...).
    // Mean-reversion stability is *not* enforced here -- see is_stable();
    // explosive mechanisms are legitimate objects for lifetime analysis.
    void validate() const;

    std::size_t factors() const { return beta.size(); }
    double delta_beta(std::size_t i) const; // beta(i) - beta(i-1), i in 1..m
};

struct LifetimeResult {
    bool finite = false;
    double time = std::numeric_limits<double>::infinity();
};

// All analytic machinery attached to a mechanism: the Laplace exponent
// ("branching mechanism") phi, its domain, explosion thresholds and
// lifetimes of the associated exponent ODE, exponential-moment and ergodic
// diagnostics, and the truncated jump-measure integrals used by the Euler
// scheme.
class Mechanism {
public:
    explicit Mechanism(MechanismParams params);

    const MechanismParams& params() const { return p_; }

    // Effective tempering of the scaled jump measure (jumps of size w carry
    // weight ~ exp(-theta_eff w) w^{-1-alpha}).  +infinity when eta = 0.
    double theta_eff() const { return theta_eff_; }

    // Left endpoint of the domain of phi: -theta_eff (or -inf for eta = 0).
    double domain_lower() const { return -theta_eff_; }

    // Normalizing constant of the scaled jump measure.
    double stable_constant() const { return stable_const_; }

    // Branching mechanism phi(z) = b z + sigma^2/2 z^2 + jump part;
    // domain Re(z) >= domain_lower().  The complex overload uses the
    // principal branch and reproduces the real overload exactly on the real
    // axis.
    double phi(double z) const;
    std::complex<double> phi(std::complex<double> z) const;

    // Immigration mechanism of difference factor i (1-based):
    // psi_i(z) = (beta(i) - beta(i-1)) z.
    double psi(double z, std::size_t i) const;

    // Mean-reversion stability: phi(-theta_eff) <= 0, which keeps every
    // exponent ODE started in the domain alive for all time.  Always false
    // when b <= 0 fails to dominate the jump drift at the boundary.
    bool is_stable() const;

    // inf{ y in domain : phi(y) <= q } -- initial conditions above this
    // threshold yield globally defined exponent ODE solutions.
    double explosion_threshold(double q) const;

    // Lifetime of the exponent ODE started at p with inhomogeneity q >= 0:
    // infinite iff p >= explosion_threshold(q), otherwise the explicit
    // integral of 1/(phi - q) from the domain edge to p.
    LifetimeResult lifetime(double p, double q) const;

    // Whether E[exp(gamma X_t)] stays finite for all t.
    bool exp_moment_finite(double gamma) const;

    // Stationary-law diagnostics of factor i (requires b > 0).
    double ergodic_laplace(double p, std::size_t i) const;
    double ergodic_mean(std::size_t i) const;

    // Integrals of the scaled jump measure above a truncation level:
    //   jump_intensity_above  = nu([eps, inf))          (jump arrival rate)
    //   jump_compensator_above = int_eps^inf w nu(dw)   (mean jump drift)
    double jump_intensity_above(double eps) const;
    double jump_compensator_above(double eps) const;

private:
    double phi_jump_real(double z) const;
    MechanismParams p_;
    double theta_eff_;
    double stable_const_;   // C(alpha, eta)
    double cos_factor_;     // eta^alpha / cos(alpha pi / 2), negative
    double te_alpha_;       // theta_eff^alpha
    double te_alpha_m1_;    // theta_eff^(alpha-1)
};

} // namespace cbimc
