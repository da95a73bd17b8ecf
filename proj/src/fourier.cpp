#include "cbimc/fourier.hpp"

#include "cbimc/errors.hpp"
#include "cbimc/num/fftops.hpp"
#include "cbimc/num/quadrature.hpp"
#include "cbimc/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbimc {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// Endpoint-only exponent solves: dense output between nodes is never
// queried here, so the step ceiling can be relaxed well above the
// dense-query default; accuracy is set by rel_tol alone.
constexpr double kEndpointMaxStep = 0.25;

} // namespace

// ---------------------------------------------------------------------------
// context

CharFunContext::CharFunContext(const MultiCurveModel& model, std::size_t i,
                               double t, double T, std::vector<double> x)
    : model_(&model), i_(i), t_(t), T_(T), x_(std::move(x)) {
    const std::size_t m = model.factors();
    if (i_ < 1 || i_ > model.params().tenors.size())
        throw ValidationError("charfun: tenor index out of range");
    delta_ = model.tenor(i_);
    if (!(t_ >= 0.0) || !(T_ >= t_))
        throw ValidationError("charfun: need 0 <= t <= T");
    if (T_ + delta_ > model.max_horizon() + 1e-9)
        throw ValidationError("charfun: settlement beyond fitted horizon");
    if (x_.size() != m)
        throw ValidationError("charfun: state dimension mismatch");
    for (double xi : x_)
        if (!(xi >= 0.0))
            throw ValidationError("charfun: factor state must be >= 0");
    tau_ = T_ - t_;

    lam_base_ = -(model.shift_integral(T_) - model.shift_integral(t_));
    a0_settle_ = model.coeff_A0(T_, T_ + delta_);
    ci_T_ = model.spread_shift(i_, T_);
    b0_delta_.resize(m);
    gamma_.resize(m);
    active_.resize(m);
    for (std::size_t j = 1; j <= m; ++j) {
        b0_delta_[j - 1] = model.coeff_B0(j, delta_);
        gamma_[j - 1] = (j <= i_) ? 1.0 : 0.0;
        active_[j - 1] =
            (model.delta_beta(j) > 0.0 || x_[j - 1] > 0.0) ? 1 : 0;
    }

    // admissible moment orders w: the exponent start for factor j at order w
    // is (w-1)*B0_j(delta) - w*gamma_j, decreasing in w.  With jumps the
    // domain wall -theta_eff gives a closed form (binding factor = largest
    // bond loading); in the diffusive case the wall is at -infinity and the
    // constraint is finite-lifetime over [0, tau], located by bisection.
    const Mechanism& mech = model.mechanism();
    double vmax = 0.0;
    bool any_active = false;
    for (std::size_t j = 0; j < m; ++j)
        if (active_[j]) {
            any_active = true;
            vmax = std::max(vmax, -b0_delta_[j]);
        }
    if (!any_active) {
        strip_sup_ = std::numeric_limits<double>::infinity();
    } else if (model.params().mechanism.eta > 0.0) {
        const double te = mech.theta_eff();
        strip_sup_ = (te + vmax) / (1.0 + vmax);
    } else {
        auto order_ok = [&](double w) {
            for (std::size_t j = 1; j <= m; ++j) {
                if (!active_[j - 1]) continue;
                const double p =
                    (w - 1.0) * b0_delta_[j - 1] - w * gamma_[j - 1];
                const LifetimeResult lt = mech.lifetime(p, model.lambda(j));
                if (lt.finite && lt.time <= tau_) return false;
            }
            return true;
        };
        double lo = 1.0, hi = 1.5;
        while (order_ok(hi) && hi < 1024.0) {
            lo = hi;
            hi *= 2.0;
        }
        if (hi >= 1024.0 && order_ok(hi)) {
            strip_sup_ = hi; // effectively unconstrained for practical damping
        } else {
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (order_ok(mid) ? lo : hi) = mid;
            }
            strip_sup_ = lo;
        }
    }
}

bool CharFunContext::deterministic() const {
    if (tau_ == 0.0) return true; // value fixed at expiry
    for (char a : active_)
        if (a) return false;
    return true;
}

double CharFunContext::point_mass_log() const {
    double s = ci_T_ - a0_settle_;
    for (std::size_t j = 0; j < x_.size(); ++j)
        s += (gamma_[j] - b0_delta_[j]) * x_[j];
    return s;
}

double CharFunContext::support_floor_log() const { return ci_T_ - a0_settle_; }

std::complex<double>
CharFunContext::factor_sum(std::complex<double> zeta) const {
    const std::complex<double> iz = kI * zeta;
    std::complex<double> s = 0.0;
    for (std::size_t j = 1; j <= model_->factors(); ++j) {
        if (!active_[j - 1]) continue;
        const std::complex<double> p =
            (iz - 1.0) * b0_delta_[j - 1] - iz * gamma_[j - 1];
        if (tau_ == 0.0) {
            s += p * x_[j - 1];
            continue;
        }
        RiccatiRequest req;
        req.p = p;
        req.q = model_->lambda(j);
        req.horizon = tau_;
        req.max_step = kEndpointMaxStep;
        RiccatiSolution sol = solve_riccati(model_->mechanism(), req);
        if (sol.blew_up)
            throw LifetimeError("charfun: exponent exploded before expiry");
        s += model_->delta_beta(j) * sol.I_at(tau_) + sol.v_at(tau_) * x_[j - 1];
    }
    return s;
}

std::complex<double>
CharFunContext::modified_cf(std::complex<double> zeta) const {
    const double w = -zeta.imag();
    if (w > 1.0 && w >= strip_sup_)
        throw ValidationError("charfun: frequency outside the admissible strip");
    const std::complex<double> iz = kI * zeta;
    const std::complex<double> expo = lam_base_ + (1.0 - iz) * a0_settle_ +
                                      iz * ci_T_ - factor_sum(zeta);
    return std::exp(expo);
}

double CharFunContext::settlement_bond() const {
    return modified_cf(0.0).real();
}

double CharFunContext::forward_numeraire() const {
    return modified_cf(-kI).real();
}

double CharFunContext::strip_sup() const { return strip_sup_; }

double CharFunContext::default_damping() const {
    return strip_sup_ > 1.5 ? 0.5 : 0.5 * (strip_sup_ - 1.0);
}

// ---------------------------------------------------------------------------
// frequency-line tables
//
// On a fixed horizontal line Im(zeta) = -w the per-factor solve results
// depend analytically on u = Re(zeta), so the combined factor sum is
// interpolated per panel at Chebyshev-Lobatto nodes (barycentric form).
// Panels double geometrically, matching the u^alpha-type growth of the
// exponent, so a handful of solves serves the whole FFT grid.

struct CharFunContext::LineTable {
    double w = 0.0;
    double u_max = 0.0;
    std::vector<double> edges;
    std::vector<std::vector<double>> nodes;
    std::vector<std::vector<std::complex<double>>> vals;

    std::complex<double> eval(double u) const {
        const auto it =
            std::upper_bound(edges.begin() + 1, edges.end() - 1, u);
        const std::size_t p = static_cast<std::size_t>(it - edges.begin()) - 1;
        const std::vector<double>& xs = nodes[p];
        const std::vector<std::complex<double>>& fs = vals[p];
        std::complex<double> num = 0.0;
        double den = 0.0;
        double sign = 1.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            double wk = sign;
            if (k == 0 || k + 1 == xs.size()) wk *= 0.5;
            const double d = u - xs[k];
            if (d == 0.0) return fs[k];
            num += (wk / d) * fs[k];
            den += wk / d;
            sign = -sign;
        }
        return num / den;
    }
};

const CharFunContext::LineTable& CharFunContext::line(double w,
                                                      double u_max) const {
    std::lock_guard<std::mutex> lock(table_mutex_);
    auto it = tables_.find(w);
    if (it != tables_.end() && it->second->u_max >= u_max)
        return *it->second;

    if (w > 1.0 && w >= strip_sup_)
        throw ValidationError("charfun: frequency line outside the strip");
    auto tab = std::make_shared<LineTable>();
    tab->w = w;
    tab->u_max = u_max;
    tab->edges.push_back(0.0);
    for (double e = 1.0; e < u_max; e *= 2.0) tab->edges.push_back(e);
    tab->edges.push_back(u_max);

    const int degree = 16;
    for (std::size_t p = 0; p + 1 < tab->edges.size(); ++p) {
        const double a = tab->edges[p], b = tab->edges[p + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        std::vector<double> xs(degree + 1);
        std::vector<std::complex<double>> fs(degree + 1);
        for (int k = 0; k <= degree; ++k) {
            xs[k] = mid + half * std::cos(M_PI * k / degree);
            fs[k] = factor_sum(std::complex<double>(xs[k], -w));
        }
        tab->nodes.push_back(std::move(xs));
        tab->vals.push_back(std::move(fs));
    }
    tables_[w] = tab;
    return *tables_.at(w);
}

std::complex<double> CharFunContext::line_value(double u, double w,
                                                double u_max) const {
    if (!(u >= 0.0) || u > u_max)
        throw ValidationError("charfun: line query outside [0, u_max]");
    const LineTable& tab = line(w, u_max);
    const std::complex<double> zeta(u, -w);
    const std::complex<double> iz = kI * zeta;
    const std::complex<double> expo = lam_base_ + (1.0 - iz) * a0_settle_ +
                                      iz * ci_T_ - tab.eval(u);
    return std::exp(expo);
}

std::complex<double> CharFunContext::forward_cf(double u) const {
    if (deterministic())
        return std::exp(kI * u * point_mass_log());
    const double au = std::abs(u);
    double u_max = 64.0;
    while (u_max < au) u_max *= 2.0;
    const std::complex<double> phi =
        line_value(au, 0.0, u_max) / settlement_bond();
    return u >= 0.0 ? phi : std::conj(phi);
}

// ---------------------------------------------------------------------------
// pricing

namespace {

// Contour residue of the damped payoff transform.  The five branches cover
// damping below, at, and above the two simple poles (orders 0 and 1).
double residue(const CharFunContext& ctx, double kbar, double eps) {
    if (eps > 0.0) return 0.0;
    const double phi_m_i = ctx.forward_numeraire();
    if (eps == 0.0) return 0.5 * phi_m_i;
    if (eps > -1.0) return phi_m_i;
    const double phi_0 = ctx.settlement_bond();
    if (eps == -1.0) return phi_m_i - 0.5 * kbar * phi_0;
    return phi_m_i - kbar * phi_0;
}

double payoff_kernel_real(std::complex<double> phi, std::complex<double> zeta,
                          double k) {
    const std::complex<double> zp = zeta - kI;
    return (std::exp(-kI * zeta * k) * phi / (-zeta * zp)).real();
}

} // namespace

double caplet_price_fourier(const CharFunContext& ctx, double strike,
                            double damping) {
    const double delta = ctx.accrual();
    const double kbar = 1.0 + delta * strike;
    if (!(kbar > 0.0))
        throw ValidationError("caplet: shifted strike must be positive");
    const double w = 1.0 + damping;
    if (w > 1.0 && w >= ctx.strip_sup())
        throw ValidationError("caplet: damping outside the admissible strip");

    // point-mass law: the transform never decays, but the price is exact
    if (ctx.deterministic()) {
        const double level = std::exp(ctx.point_mass_log());
        return ctx.settlement_bond() * std::max(level - kbar, 0.0);
    }

    const double k = std::log(kbar);
    double peak_env = 0.0;
    double panel_env = 0.0;
    auto integrand = [&](double u) {
        const std::complex<double> zeta(u, -damping);
        const std::complex<double> zp = zeta - kI;
        const std::complex<double> phi = ctx.modified_cf(zp);
        // the contour poles sit near u = 0; only u >= 1 is indicative of
        // how far the transform itself has decayed
        if (u >= 1.0) {
            const double env =
                std::abs(phi) / (std::abs(zeta) * std::abs(zp));
            peak_env = std::max(peak_env, env);
            panel_env = std::max(panel_env, env);
        }
        return payoff_kernel_real(phi, zeta, k);
    };

    num::QuadOptions opts;
    opts.rel_tol = 1e-9;
    opts.abs_tol = 1e-14;
    double total = 0.0;
    double a = 0.0, b = 1.0;
    while (true) {
        panel_env = 0.0;
        total += num::integrate(integrand, a, b, opts);
        if (panel_env < 1e-14 * peak_env) break;
        a = b;
        b *= 2.0;
        if (b > 1e7)
            throw NumericalError(
                "caplet: transform decays too slowly to truncate");
    }
    return residue(ctx, kbar, damping) + total / M_PI;
}

double caplet_price_fourier(const CharFunContext& ctx, double strike) {
    return caplet_price_fourier(ctx, strike, ctx.default_damping());
}

std::vector<double> caplet_strip_fft(const CharFunContext& ctx,
                                     const std::vector<double>& strikes,
                                     const FftConfig& cfg) {
    if (cfg.n < 64 || !(cfg.mesh > 0.0))
        throw ValidationError("fft: need n >= 64 and positive mesh");
    const double eps =
        cfg.damping != 0.0 ? cfg.damping : ctx.default_damping();
    if (!(eps > 0.0))
        throw ValidationError("fft: batch route requires positive damping");
    const double w = 1.0 + eps;
    if (w >= ctx.strip_sup())
        throw ValidationError("fft: damping outside the admissible strip");

    const double delta = ctx.accrual();
    std::vector<double> ks(strikes.size());
    for (std::size_t s = 0; s < strikes.size(); ++s) {
        const double kbar = 1.0 + delta * strikes[s];
        if (!(kbar > 0.0))
            throw ValidationError("fft: shifted strike must be positive");
        ks[s] = std::log(kbar);
    }
    if (strikes.empty()) return {};

    if (ctx.deterministic()) {
        const double level = std::exp(ctx.point_mass_log());
        std::vector<double> out(strikes.size());
        for (std::size_t s = 0; s < strikes.size(); ++s)
            out[s] = ctx.settlement_bond() *
                     std::max(level - std::exp(ks[s]), 0.0);
        return out;
    }

    const int n = cfg.n;
    const double du = cfg.mesh;
    const double u_max = n * du;
    const double dk = 2.0 * M_PI / (n * du);
    const double k0 = -0.5 * n * dk;

    // The line table is extended past the FFT grid until the transform
    // envelope has genuinely decayed; the remainder [u_max, u_far] is added
    // per strike below.  Failure to decay within the cap is the "grid too
    // coarse" condition.
    double u_far = u_max;
    {
        // probe decay with single evaluations before committing to a table
        auto envelope = [&](double u) {
            const double m2 = (u * u + eps * eps) * (u * u + w * w);
            return std::abs(ctx.modified_cf({u, -w})) / std::sqrt(m2);
        };
        double env_peak = envelope(1.0);
        while (true) {
            const double probe = envelope(u_far);
            env_peak = std::max(env_peak, probe);
            if (probe < 1e-13 * env_peak) break;
            u_far *= 2.0;
            if (u_far > 1e7)
                throw NumericalError("fft: transform decays too slowly for "
                                     "the frequency grid; increase n or mesh");
        }
    }

    // Zero-padding the transform input evaluates the same frequency sum on
    // a finer log-strike grid (trigonometric interpolation), which the
    // local cubic then resolves to well below the target accuracy even for
    // sharply-peaked laws.
    const int pad = 8;
    const int nfft = n * pad;
    const double dk_fine = dk / pad;
    std::vector<std::complex<double>> h(static_cast<std::size_t>(nfft));
    for (int j = 0; j < n; ++j) {
        const double u = j * du;
        const std::complex<double> zeta(u, -eps);
        const std::complex<double> zp = zeta - kI;
        const std::complex<double> g = ctx.line_value(u, w, u_far) / (-zeta * zp);
        // Simpson alternation 1/3, 4/3, 2/3, ...
        const double sw = (j == 0) ? 1.0 / 3.0 : (j % 2 ? 4.0 / 3.0 : 2.0 / 3.0);
        h[static_cast<std::size_t>(j)] =
            sw * du * std::exp(-kI * (u * k0)) * g;
    }
    num::fft_forward(h);

    std::vector<double> grid_price(static_cast<std::size_t>(nfft));
    for (int m = 0; m < nfft; ++m)
        grid_price[static_cast<std::size_t>(m)] =
            std::exp(-eps * (k0 + m * dk_fine)) / M_PI *
            h[static_cast<std::size_t>(m)].real();

    // Two per-strike refinements keep the batch within direct-quadrature
    // accuracy at the production mesh: the damping pole at u = 0 is only
    // about one mesh step wide, so the leading Simpson block [0, u_head] is
    // replaced by an adaptive integral (subtracting a standalone Simpson
    // rule over the same nodes, which leaves the rest of the grid a proper
    // composite rule); and the grid's hard truncation at u_max leaves
    // visible tail mass for slowly decaying transforms, so [u_max, u_far]
    // is integrated directly off the line table.
    int j_head = static_cast<int>(std::min(2.0, 0.4 * u_max) / du);
    if (j_head % 2) --j_head;
    if (j_head < 2) j_head = 2;
    const double u_head = j_head * du;
    num::QuadOptions opts;
    opts.rel_tol = 1e-9;
    opts.abs_tol = 1e-14;

    std::vector<double> out(strikes.size());
    for (std::size_t s = 0; s < strikes.size(); ++s) {
        const double k = ks[s];
        const double pos = (k - k0) / dk_fine;
        const int m1 = static_cast<int>(std::floor(pos));
        if (m1 < 1 || m1 + 2 >= nfft)
            throw ValidationError("fft: strike outside the transform grid");
        const double t = pos - m1;
        // local cubic through the four surrounding grid prices
        const double pm1 = grid_price[static_cast<std::size_t>(m1 - 1)];
        const double p0 = grid_price[static_cast<std::size_t>(m1)];
        const double p1 = grid_price[static_cast<std::size_t>(m1 + 1)];
        const double p2 = grid_price[static_cast<std::size_t>(m1 + 2)];
        double price = pm1 * (-t * (t - 1.0) * (t - 2.0) / 6.0) +
                       p0 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
                       p1 * (-(t + 1.0) * t * (t - 2.0) / 2.0) +
                       p2 * ((t + 1.0) * t * (t - 1.0) / 6.0);

        auto kernel = [&](double u) {
            const std::complex<double> zeta(u, -eps);
            const std::complex<double> phi = ctx.line_value(u, w, u_far);
            return payoff_kernel_real(phi, zeta, k);
        };
        double head = num::integrate(kernel, 0.0, u_head, opts);
        for (int j = 0; j <= j_head; ++j) {
            const double sw = (j == 0 || j == j_head) ? 1.0 / 3.0
                              : (j % 2 ? 4.0 / 3.0 : 2.0 / 3.0);
            head -= sw * du * kernel(j * du);
        }
        double tail = 0.0;
        for (double a = u_max; a < u_far; a *= 2.0)
            tail += num::integrate(kernel, a, std::min(2.0 * a, u_far), opts);
        out[s] = price + (head + tail) / M_PI;
    }
    return out;
}

} // namespace cbimc
