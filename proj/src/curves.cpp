#include "cbimc/curves.hpp"
#include "cbimc/errors.hpp"
#include "cbimc/num/special.hpp"

#include <algorithm>
#include <cmath>

namespace cbimc {

DiscountCurve::DiscountCurve(std::vector<double> pillars,
                             std::vector<double> discounts) {
    if (pillars.empty() || pillars.size() != discounts.size())
        throw ValidationError("discount curve: need matching non-empty pillar/value lists");
    if (pillars.front() < 0.0)
        throw ValidationError("discount curve: pillars must be >= 0");
    for (double d : discounts)
        if (!(d > 0.0))
            throw ValidationError("discount curve: discounts must be positive");
    if (pillars.front() > 0.0) {
        pillars.insert(pillars.begin(), 0.0);
        discounts.insert(discounts.begin(), 1.0);
    } else if (std::abs(discounts.front() - 1.0) > 1e-12) {
        throw ValidationError("discount curve: value at T=0 must be 1");
    }
    if (pillars.size() < 2)
        throw ValidationError("discount curve: need at least one pillar beyond T=0");
    std::vector<double> logd(discounts.size());
    for (std::size_t i = 0; i < discounts.size(); ++i)
        logd[i] = std::log(discounts[i]);
    interp_ = num::Pchip(pillars, logd); // rejects non-increasing pillars
    pillars_ = std::move(pillars);
    discounts_ = std::move(discounts);
}

double DiscountCurve::log_discount(double T) const {
    if (empty()) throw ValidationError("discount curve: empty");
    if (!(T >= 0.0)) throw ValidationError("discount curve: T must be >= 0");
    if (T == 0.0) return 0.0;
    return interp_.value(T);
}

double DiscountCurve::discount(double T) const {
    // pillar queries return the stored value exactly (log/exp round-trip
    // wobbles in the last ulp, which perfect-fit checks would then inherit)
    auto it = std::lower_bound(pillars_.begin(), pillars_.end(), T);
    if (it != pillars_.end() && *it == T)
        return discounts_[static_cast<std::size_t>(it - pillars_.begin())];
    return std::exp(log_discount(T));
}

double DiscountCurve::simple_forward(double T, double delta) const {
    if (!(delta > 0.0))
        throw ValidationError("discount curve: forward tenor must be > 0");
    return (discount(T) / discount(T + delta) - 1.0) / delta;
}

ForwardCurve::ForwardCurve(double tenor, std::vector<double> pillars,
                           std::vector<double> forwards)
    : tenor_(tenor) {
    if (!(tenor > 0.0))
        throw ValidationError("forward curve: tenor must be > 0");
    if (pillars.empty() || pillars.size() != forwards.size())
        throw ValidationError("forward curve: need matching non-empty pillar/value lists");
    if (pillars.front() < 0.0)
        throw ValidationError("forward curve: pillars must be >= 0");
    if (pillars.size() >= 2) interp_ = num::Pchip(pillars, forwards);
    pillars_ = std::move(pillars);
    forwards_ = std::move(forwards);
}

double ForwardCurve::forward(double T) const {
    if (empty()) throw ValidationError("forward curve: empty");
    if (!(T >= 0.0)) throw ValidationError("forward curve: T must be >= 0");
    // flat beyond the quoted span; a single pillar means a flat curve
    if (T <= pillars_.front()) return forwards_.front();
    if (T >= pillars_.back()) return forwards_.back();
    return interp_.value(T);
}

void VolSurface::validate() const {
    for (const VolQuote& q : quotes) {
        if (!(q.expiry > 0.0))
            throw ValidationError("vol surface: expiries must be > 0");
        if (!(q.tenor > 0.0))
            throw ValidationError("vol surface: tenors must be > 0");
        if (!(q.vol >= 0.0))
            throw ValidationError("vol surface: vols must be >= 0");
    }
}

double spot_mult_spread(const ForwardCurve& fwd, const DiscountCurve& ois,
                        double T) {
    const double delta = fwd.tenor();
    const double num = 1.0 + delta * fwd.forward(T);
    const double den = 1.0 + delta * ois.simple_forward(T, delta);
    if (!(den > 0.0))
        throw ValidationError("spot_mult_spread: OIS accrual factor must stay positive");
    return num / den;
}

double bachelier_price(double B_settle, double delta, double fwd, double K,
                       double sigma, double T_expiry) {
    if (!(sigma >= 0.0))
        throw ValidationError("bachelier_price: sigma must be >= 0");
    if (!(B_settle > 0.0) || !(delta > 0.0))
        throw ValidationError("bachelier_price: settlement discount and accrual must be > 0");
    if (!(T_expiry >= 0.0))
        throw ValidationError("bachelier_price: expiry must be >= 0");
    const double s = sigma * std::sqrt(T_expiry);
    if (s == 0.0) return B_settle * delta * std::max(fwd - K, 0.0);
    const double z = (fwd - K) / s;
    return B_settle * delta * (s * num::normal_pdf(z) + (fwd - K) * num::normal_cdf(z));
}

double implied_normal_vol(double price, double B_settle, double delta,
                          double fwd, double K, double T_expiry) {
    if (!(B_settle > 0.0) || !(delta > 0.0))
        throw ValidationError("implied_normal_vol: settlement discount and accrual must be > 0");
    if (!std::isfinite(price))
        throw ValidationError("implied_normal_vol: price must be finite");
    const double intrinsic = B_settle * delta * std::max(fwd - K, 0.0);
    const double scale = B_settle * delta * (std::abs(fwd) + std::abs(K) + 1.0);
    if (price < intrinsic - 1e-15 * scale)
        throw ValidationError("implied_normal_vol: price below intrinsic value");
    if (price <= intrinsic) return 0.0;
    if (!(T_expiry > 0.0))
        throw ValidationError("implied_normal_vol: zero expiry admits only intrinsic prices");

    // bracket upward from an ATM-style guess, then safeguarded Newton
    double hi = std::max((price / (B_settle * delta)) * std::sqrt(2.0 * M_PI / T_expiry),
                         1e-8);
    int expansions = 0;
    while (bachelier_price(B_settle, delta, fwd, K, hi, T_expiry) < price) {
        hi *= 2.0;
        if (++expansions > 200)
            throw ValidationError("implied_normal_vol: price above attainable range");
    }
    double lo = 0.0, sigma = 0.5 * hi;
    for (int it = 0; it < 200; ++it) {
        const double val = bachelier_price(B_settle, delta, fwd, K, sigma, T_expiry);
        (val < price ? lo : hi) = sigma;
        const double vega = B_settle * delta * std::sqrt(T_expiry) *
                            num::normal_pdf((fwd - K) / (sigma * std::sqrt(T_expiry)));
        double next = sigma - (val - price) / vega;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // fall back to bisection
        if (std::abs(next - sigma) < 1e-12) return next;
        sigma = next;
    }
    return sigma;
}

} // namespace cbimc
