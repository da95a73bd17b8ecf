#pragma once

#include "cbimc/mechanism.hpp"

#include <complex>
#include <vector>

namespace cbimc {

// Initial-value problem for the exponent ODE
//   dv/dt = q - phi(v),  v(0) = p,
// solved together with its running integral I(t) = int_0^t v(s) ds.
struct RiccatiRequest {
    std::complex<double> p;
    double q = 0.0;
    double horizon = 0.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    // Step-size ceiling.  Accuracy of the dense output between accepted
    // nodes is governed by this (cubic Hermite, so ~h^4), not by rel_tol;
    // the default keeps interpolated queries at the 1e-10 scale.
    double max_step = 0.02;
};

// Dense-output solution.  Node data is cubic-Hermite interpolated between
// accepted steps, which matches the integrator's own order on accepted
// grids.  All queries outside the covered span throw.
class RiccatiSolution {
public:
    bool blew_up = false;
    double blowup_time = 0.0; // valid when blew_up
    double covered = 0.0;     // time actually integrated

    std::complex<double> v_at(double t) const;
    std::complex<double> I_at(double t) const;
    double v_real_at(double t) const { return v_at(t).real(); }
    double I_real_at(double t) const { return I_at(t).real(); }

    const std::vector<double>& grid() const { return t_; }
    const std::vector<std::complex<double>>& v_values() const { return v_; }
    const std::vector<std::complex<double>>& integral_values() const { return I_; }

    void append(double t, std::complex<double> v, std::complex<double> f,
                std::complex<double> I);

private:
    std::size_t locate(double t) const;
    std::vector<double> t_;
    std::vector<std::complex<double>> v_, f_, I_;
};

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) with PI step-size
// control and a guard band keeping Re(v) inside the domain of phi.  A
// trajectory that leaves the domain (or diverges, in the unbounded-domain
// case) is reported via blew_up/blowup_time rather than an exception.
RiccatiSolution solve_riccati(const Mechanism& mech, const RiccatiRequest& req);

// Multi-factor affine transform at horizon t:
//   exp( -sum_j [ x0_j v_j(t) + delta_beta_j I_j(t) ] )
// with v_j the exponent ODE run from (p_j, q_j).  Throws LifetimeError when
// any factor's exponent explodes before t.
std::complex<double> affine_transform(const Mechanism& mech,
                                      const std::vector<double>& x0,
                                      const std::vector<std::complex<double>>& p,
                                      const std::vector<double>& q, double t);

} // namespace cbimc
