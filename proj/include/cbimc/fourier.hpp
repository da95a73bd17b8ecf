#pragma once

#include "cbimc/model.hpp"

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace cbimc {

// Meta-parameters of the batch strike transform.  The defaults are the
// production settings: 32768 frequency points at mesh 0.05, damping chosen
// automatically from the admissible strip.
struct FftConfig {
    int n = 32768;
    double mesh = 0.05;
    double damping = 0.0; // 0 = automatic (must be > 0 for the batch route)
};

// Discounted transform of the compounded-rate variable for one caplet
// underlying: fixing at T, accrual [T, T+delta_i], conditional on the
// factor state x at valuation time t.  Writing X for the log of
// spread(T,T) / bond(T,T+delta), the context evaluates
//
//     Phi(zeta) = E_t[ exp(-int_t^{T+delta} r) * exp(i zeta X) ],
//
// so Phi(0) is the settlement-date bond and Phi(-i) the discounted forward
// level.  Evaluation off the real axis is limited to moment orders
// w = -Im(zeta) below strip_sup(); (-inf, 1] is always admissible.
//
// The context is bound to (i, t, T, x) and immutable; direct evaluations
// are thread-safe.  The line tables behind line_value()/forward_cf() are
// built lazily under an internal mutex.
class CharFunContext {
public:
    CharFunContext(const MultiCurveModel& model, std::size_t i, double t,
                   double T, std::vector<double> x);

    const MultiCurveModel& model() const { return *model_; }
    std::size_t tenor_index() const { return i_; }
    double valuation() const { return t_; }
    double expiry() const { return T_; }
    double accrual() const { return delta_; }
    double tau() const { return tau_; }
    const std::vector<double>& state() const { return x_; }

    // transform at a complex frequency; fresh exponent ODE solves per call
    std::complex<double> modified_cf(std::complex<double> zeta) const;

    // anchors: Phi(0) and Phi(-i), evaluated through the transform itself
    double settlement_bond() const;
    double forward_numeraire() const;

    // supremum of admissible moment orders w = -Im(zeta); > 1 always
    double strip_sup() const;
    // damping used by pricing when none is specified: 0.5 when the strip
    // allows it, otherwise half the headroom above order 1
    double default_damping() const;

    // table-backed transform on the line Im(zeta) = -w, for u in
    // [0, u_max]; agrees with modified_cf(u - i w) to quadrature accuracy
    std::complex<double> line_value(double u, double w, double u_max) const;
    // unit-normalized transform on the real line (forward characteristic
    // function): line_value(u, 0) / settlement_bond()
    std::complex<double> forward_cf(double u) const;

    // true when the payoff variable is a point mass given the state: either
    // every factor is degenerate (no immigration, zero state) or valuation
    // coincides with the fixing date
    bool deterministic() const;
    // log of the point-mass level exp(X) (only meaningful when deterministic)
    double point_mass_log() const;
    // log of the almost-sure lower bound of exp(X), attained when every
    // factor state vanishes at the fixing date; the spread exposures and
    // bond loadings both contribute non-negatively above it
    double support_floor_log() const;

private:
    struct LineTable;
    const LineTable& line(double w, double u_max) const;
    std::complex<double> factor_sum(std::complex<double> zeta) const;

    const MultiCurveModel* model_;
    std::size_t i_;
    double t_, T_, delta_, tau_;
    std::vector<double> x_;
    std::vector<double> b0_delta_;  // bond loadings at the accrual, <= 0
    std::vector<double> gamma_;     // spread exposure indicators
    std::vector<char> active_;      // factor contributes (immigration or state)
    double lam_base_, a0_settle_, ci_T_;
    double strip_sup_;

    mutable std::mutex table_mutex_;
    mutable std::map<double, std::shared_ptr<const LineTable>> tables_;
};

// Caplet price (unit notional, payoff delta*(L-K)^+ paid at T+delta,
// discounted to the context's valuation date) by damped frequency
// integration.  `damping` selects the contour; any value with
// 1 + damping < strip_sup() is admissible and all choices agree.
double caplet_price_fourier(const CharFunContext& ctx, double strike,
                            double damping);
double caplet_price_fourier(const CharFunContext& ctx, double strike);

// Batch caplet prices for many strikes from one FFT pass over the frequency
// grid, cubic-interpolated in log-strike to the requested strikes.  Requires
// strictly positive damping; matches the direct route to ~1e-6 absolute at
// the default grid.
std::vector<double> caplet_strip_fft(const CharFunContext& ctx,
                                     const std::vector<double>& strikes,
                                     const FftConfig& cfg = {});

} // namespace cbimc
