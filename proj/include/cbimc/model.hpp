#pragma once

#include "cbimc/curves.hpp"
#include "cbimc/mechanism.hpp"
#include "cbimc/num/interp.hpp"
#include "cbimc/riccati.hpp"

#include <string>
#include <vector>

namespace cbimc {

// Full parameter set of the multi-curve model: the common branching
// mechanism plus the short-rate loadings mu, the initial cumulative factor
// state y0 and the quoted tenors.  All vectors have one entry per factor,
// and factor i drives the spread of tenor i.
struct ModelParams {
    MechanismParams mechanism;
    std::vector<double> mu;     // short-rate loadings, >= 0
    std::vector<double> y0;     // initial cumulative state, non-decreasing
    std::vector<double> tenors; // accrual periods, strictly increasing

    void validate() const;
    std::size_t factors() const { return mechanism.beta.size(); }
};

ModelParams load_model_params(const std::string& path);
void save_model_params(const std::string& path, const ModelParams& params);

struct MarketCurves {
    DiscountCurve ois;
    std::vector<ForwardCurve> forwards; // one per tenor, same order
};

// The fitted multi-curve model.  Construction performs the exact fit of the
// deterministic shifts to the input curves:
//   Lambda(T) = -ln B_mkt(0,T) - sum_j [ db_j I0_j(T) + v0_j(T) x0_j ]
//   c_i(T)    =  ln S_mkt(0,T) - sum_{j<=i} [ db_j (I0-I1)_j(T)
//                                             + (v0-v1)_j(T) x0_j ]
// where v0_j = v(.,0,lambda_j), v1_j = v(.,-1,lambda_j) are the exponent
// ODE solutions shared by all linear products, I their running integrals,
// and db_j = beta(j) - beta(j-1).  Shifts are stored on a dense grid
// (monthly plus all pillars) with monotone cubic interpolation.
//
// Factor and tenor indices are 1-based throughout, matching the notation
// of the pricing formulas.  The constructed model is immutable and all
// pricing calls are thread-safe.
class MultiCurveModel {
public:
    MultiCurveModel(ModelParams params, MarketCurves market);

    const ModelParams& params() const { return params_; }
    const Mechanism& mechanism() const { return mech_; }
    const MarketCurves& market() const { return market_; }
    std::size_t factors() const { return params_.factors(); }
    double tenor(std::size_t i) const;
    double lambda(std::size_t j) const;      // sum_{k>=j} mu_k
    double delta_beta(std::size_t j) const;  // immigration of factor j
    const std::vector<double>& x0() const { return x0_; }
    double max_horizon() const { return horizon_; }

    // fitted deterministic shifts
    double shift_integral(double T) const;            // Lambda(T)
    double shift_rate(double t) const;                // Lambda'(t) = ell(t)
    double spread_shift(std::size_t i, double T) const; // c_i(T)
    // non-empty when some fitted c_i dips below zero (reported, not forced)
    const std::vector<std::string>& fit_warnings() const { return warnings_; }

    // affine pricing coefficients (log-bond and log-spread loadings)
    double coeff_A0(double t, double T) const;
    double coeff_B0(std::size_t j, double tau) const;  // -v0_j(tau), <= 0
    double coeff_Ai(std::size_t i, double t, double T) const;
    double coeff_Bi(std::size_t i, std::size_t j, double tau) const; // >= 0

    // linear products, all conditional on the time-t factor state x >= 0
    double bond_price(double t, double T, const std::vector<double>& x) const;
    double fwd_mult_spread(std::size_t i, double t, double T,
                           const std::vector<double>& x) const;
    double forward_ibor(std::size_t i, double t, double T,
                        const std::vector<double>& x) const;

    // futures minus forward Ibor rate for the accrual [T, T+tenor_i].
    // Throws LifetimeError when the required exponent explodes before T-t.
    double futures_convexity(std::size_t i, double t, double T,
                             const std::vector<double>& x) const;

private:
    void check_state(double t, double T, const std::vector<double>& x) const;
    double v0(std::size_t j, double tau) const;
    double I0(std::size_t j, double tau) const;
    double v1(std::size_t j, double tau) const;
    double I1(std::size_t j, double tau) const;

    ModelParams params_;
    Mechanism mech_;
    MarketCurves market_;
    std::vector<double> lambda_, dbeta_, x0_;
    double horizon_ = 0.0;
    std::vector<RiccatiSolution> sol0_, sol1_; // v(.,0,lambda_j), v(.,-1,lambda_j)
    num::Pchip Lambda_;
    std::vector<num::Pchip> c_;
    std::vector<std::string> warnings_;
};

} // namespace cbimc
