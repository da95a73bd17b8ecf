#include "cbimc/riccati.hpp"
#include "cbimc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

namespace cbimc {

namespace {

using cplx = std::complex<double>;

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640,
                 E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

constexpr double kMagnitudeCap = 1e10; // divergence threshold (unbounded domain)

} // namespace

void RiccatiSolution::append(double t, cplx v, cplx f, cplx I) {
    t_.push_back(t);
    v_.push_back(v);
    f_.push_back(f);
    I_.push_back(I);
}

std::size_t RiccatiSolution::locate(double t) const {
    if (t_.size() < 2 || t < t_.front() - 1e-14 ||
        t > covered * (1.0 + 1e-14) + 1e-14)
        throw ValidationError("RiccatiSolution: query outside covered span");
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - t_.begin());
    if (i == 0) return 0;
    if (i >= t_.size()) return t_.size() - 2;
    return i - 1;
}

namespace {
inline bool at_origin(double t) { return std::abs(t) < 1e-14; }
} // namespace

cplx RiccatiSolution::v_at(double t) const {
    if (t_.size() == 1 && at_origin(t)) return v_.front();
    std::size_t i = locate(t);
    double h = t_[i + 1] - t_[i], s = (t - t_[i]) / h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * v_[i] + (s3 - 2 * s2 + s) * h * f_[i] +
           (-2 * s3 + 3 * s2) * v_[i + 1] + (s3 - s2) * h * f_[i + 1];
}

cplx RiccatiSolution::I_at(double t) const {
    if (t_.size() == 1 && at_origin(t)) return I_.front();
    std::size_t i = locate(t);
    double h = t_[i + 1] - t_[i], s = (t - t_[i]) / h;
    double s2 = s * s, s3 = s2 * s;
    // I' = v, so the node values of v act as the Hermite slopes here
    return (2 * s3 - 3 * s2 + 1) * I_[i] + (s3 - 2 * s2 + s) * h * v_[i] +
           (-2 * s3 + 3 * s2) * I_[i + 1] + (s3 - s2) * h * v_[i + 1];
}

RiccatiSolution solve_riccati(const Mechanism& mech, const RiccatiRequest& req) {
    if (!(req.horizon >= 0.0))
        throw ValidationError("solve_riccati: horizon must be >= 0");
    if (!(req.max_step > 0.0))
        throw ValidationError("solve_riccati: max_step must be > 0");
    const bool bounded = mech.params().eta > 0.0;
    const double floor_re = mech.domain_lower();
    const double guard = bounded ? floor_re + 1e-14 : -kMagnitudeCap;
    if (bounded && req.p.real() < floor_re)
        throw ValidationError("solve_riccati: Re(p) below the domain edge");

    RiccatiSolution sol;
    cplx v = req.p, I = 0.0;
    double t = 0.0;

    // RHS with an out-of-domain latch instead of exceptions: stage values
    // may transiently leave the domain on an oversized trial step.
    bool stage_breach = false;
    auto rhs = [&](cplx w) -> cplx {
        if (bounded && w.real() < floor_re) {
            stage_breach = true;
            w = {floor_re, w.imag()};
        }
        if (std::abs(w.real()) > kMagnitudeCap || std::abs(w.imag()) > kMagnitudeCap) {
            stage_breach = true;
            return 0.0;
        }
        return req.q - mech.phi(w);
    };

    cplx f0 = rhs(v);
    sol.append(0.0, v, f0, I);
    if (req.horizon == 0.0) {
        sol.covered = 0.0;
        return sol;
    }

    double h = std::min({req.horizon, req.max_step, 0.1 / (1.0 + std::abs(f0))});
    double err_prev = 1.0;
    const double h_min_rel = 1e-14;
    long steps = 0;

    while (t < req.horizon) {
        if (++steps > 20'000'000)
            throw NumericalError("solve_riccati: step budget exhausted");
        h = std::min({h, req.max_step, req.horizon - t});
        const double h_min = h_min_rel * std::max(1.0, t);

        stage_breach = false;
        cplx k1 = f0;
        cplx k2 = rhs(v + h * (A21 * k1));
        cplx k3 = rhs(v + h * (A31 * k1 + A32 * k2));
        cplx k4 = rhs(v + h * (A41 * k1 + A42 * k2 + A43 * k3));
        cplx k5 = rhs(v + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        cplx k6 = rhs(v + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        cplx v_new = v + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        cplx f_new = rhs(v_new); // FSAL stage, also the error estimator's k7

        auto declare_blowup = [&]() {
            sol.blew_up = true;
            sol.blowup_time = t;
            sol.covered = t;
        };

        if (stage_breach || !std::isfinite(v_new.real()) || !std::isfinite(v_new.imag())) {
            h *= 0.5;
            if (h < h_min) {
                declare_blowup();
                return sol;
            }
            continue;
        }

        cplx err_c = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * f_new);
        double scale = req.abs_tol +
                       req.rel_tol * std::max(std::abs(v), std::abs(v_new));
        double err = std::abs(err_c) / scale;

        if (err <= 1.0) {
            // advance I = int v by applying the RK weights to the stage
            // values of v (the augmented system (v, I) shares one tableau)
            cplx s1 = v;
            cplx s3 = v + h * (A31 * k1 + A32 * k2);
            cplx s4 = v + h * (A41 * k1 + A42 * k2 + A43 * k3);
            cplx s5 = v + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4);
            cplx s6 = v + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
            cplx I_new = I + h * (B1 * s1 + B3 * s3 + B4 * s4 + B5 * s5 + B6 * s6);

            double re = v_new.real();
            if (bounded && re < guard) {
                // the trajectory is pressing on the domain edge: if the field
                // still points outward there, the solution ceases to exist
                double push = req.q - mech.phi(cplx(guard, v_new.imag())).real();
                if (push < 0.0) {
                    declare_blowup();
                    return sol;
                }
                v_new = {guard, v_new.imag()};
                f_new = rhs(v_new);
            }
            if (std::abs(v_new) > kMagnitudeCap) {
                declare_blowup();
                return sol;
            }

            t += h;
            v = v_new;
            f0 = f_new;
            I = I_new;
            sol.append(t, v, f0, I);

            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.17) *
                         std::pow(err_prev, 0.08);
            h *= std::clamp(fac, 0.2, 5.0);
            err_prev = std::max(err, 1e-10);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < h_min) {
                declare_blowup();
                return sol;
            }
        }
    }
    sol.covered = req.horizon;
    return sol;
}

std::complex<double> affine_transform(const Mechanism& mech,
                                      const std::vector<double>& x0,
                                      const std::vector<cplx>& p,
                                      const std::vector<double>& q, double t) {
    const std::size_t m = mech.params().factors();
    if (x0.size() != m || p.size() != m || q.size() != m)
        throw ValidationError("affine_transform: factor dimension mismatch");
    cplx expo = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        RiccatiRequest req;
        req.p = p[j];
        req.q = q[j];
        req.horizon = t;
        RiccatiSolution s = solve_riccati(mech, req);
        if (s.blew_up)
            throw LifetimeError("affine_transform: exponent ODE explodes before t");
        expo -= x0[j] * s.v_at(t) + mech.params().delta_beta(j + 1) * s.I_at(t);
    }
    return std::exp(expo);
}

} // namespace cbimc
