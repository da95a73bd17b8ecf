#pragma once

#include "cbimc/num/interp.hpp"

#include <string>
#include <vector>

namespace cbimc {

// OIS discount curve on pillar year fractions.  Interpolation is monotone
// cubic on log-discounts; beyond the last pillar the log-discount continues
// linearly, i.e. the instantaneous forward is held flat.  Discounts above 1
// are legitimate (negative-rate regimes).
class DiscountCurve {
public:
    DiscountCurve() = default;
    DiscountCurve(std::vector<double> pillars, std::vector<double> discounts);

    double discount(double T) const;
    double log_discount(double T) const;

    // simply-compounded forward over [T, T+delta] implied by the curve
    double simple_forward(double T, double delta) const;

    bool empty() const { return pillars_.empty(); }
    const std::vector<double>& pillars() const { return pillars_; }
    const std::vector<double>& discounts() const { return discounts_; }

private:
    std::vector<double> pillars_;   // always starts at 0
    std::vector<double> discounts_; // starts at 1
    num::Pchip interp_;             // log-discounts over pillars
};

// Pillar curve of simply-compounded term rates for one tenor.  Values are
// interpolated monotone-cubically and held flat outside the pillar span;
// negative rates are expected and supported.
class ForwardCurve {
public:
    ForwardCurve() = default;
    ForwardCurve(double tenor, std::vector<double> pillars,
                 std::vector<double> forwards);

    double tenor() const { return tenor_; }
    double forward(double T) const;

    bool empty() const { return pillars_.empty(); }
    const std::vector<double>& pillars() const { return pillars_; }
    const std::vector<double>& forwards() const { return forwards_; }

private:
    double tenor_ = 0.0;
    std::vector<double> pillars_;
    std::vector<double> forwards_;
    num::Pchip interp_;
};

struct VolQuote {
    double expiry = 0.0; // caplet fixing date, year fraction
    double strike = 0.0; // may be negative
    double tenor = 0.0;  // underlying rate tenor
    double vol = 0.0;    // absolute normal volatility (0.0060 = 60 bp)
};

struct VolSurface {
    std::vector<VolQuote> quotes;
    void validate() const; // expiries > 0, vols >= 0, tenors > 0
};

// Spot multiplicative spread between the tenor curve and the OIS-implied
// forward over the same accrual period:
//   (1 + delta L(0,T,delta)) / (1 + delta L_ois(0,T,delta)).
double spot_mult_spread(const ForwardCurve& fwd, const DiscountCurve& ois,
                        double T);

// Normal-model caplet price on a unit notional:
//   B_settle * delta * [ s n(z) + (fwd - K) N(z) ],  s = sigma sqrt(T),
// z = (fwd - K)/s; collapses to the discounted intrinsic at sigma = 0.
double bachelier_price(double B_settle, double delta, double fwd, double K,
                       double sigma, double T_expiry);

// Inverse of bachelier_price in sigma (safeguarded Newton, 1e-12 absolute).
// Prices below intrinsic or above any attainable value are rejected.
double implied_normal_vol(double price, double B_settle, double delta,
                          double fwd, double K, double T_expiry);

} // namespace cbimc
