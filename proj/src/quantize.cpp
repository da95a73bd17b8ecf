#include "cbimc/quantize.hpp"

#include "cbimc/errors.hpp"
#include "cbimc/num/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cbimc {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};
constexpr double kInf = std::numeric_limits<double>::infinity();

// frequency cutoff: beyond this the forward characteristic function is
// numerically zero and every kernel integrand with it
double frequency_cutoff(const CharFunContext& ctx) {
    double u = 64.0;
    while (std::abs(ctx.forward_cf(u)) >= 1e-12 && u < 1e6) u *= 2.0;
    return u;
}

// integral of a smooth decaying integrand over [0, cutoff], split into
// geometrically growing panels so the adaptive rule tracks the decay;
// `phase` is the oscillation rate (radians per unit frequency), used to
// pre-chunk wide panels before the adaptive rule takes over
template <class F>
double frequency_integral(F&& f, double cutoff, double phase = 0.0) {
    num::QuadOptions opts;
    opts.rel_tol = 1e-9;
    opts.abs_tol = 1e-13;
    double total = 0.0;
    double a = 0.0, b = std::min(1.0, cutoff);
    while (a < cutoff) {
        const int chunks =
            1 + static_cast<int>((b - a) * std::abs(phase) / 40.0);
        const double width = (b - a) / chunks;
        for (int q = 0; q < chunks; ++q)
            total += num::integrate(f, a + q * width, a + (q + 1) * width,
                                    opts);
        a = b;
        b = std::min(2.0 * a, cutoff);
    }
    return total;
}

// Precomputed Gauss-Legendre data for the incomplete-Beta-type kernel
//
//     int_r^1 t^{m + i*sgn*u} (1-t)^{p-1} dt,
//
// evaluated for many frequencies u at a fixed ratio r.  The phase reaches
// u*|log r| at the left endpoint, so the panel count is chosen from the
// largest frequency of interest and then doubled until the value at that
// frequency is stable to 1e-10 relative.
struct OscKernel {
    std::vector<double> logt;
    std::vector<double> coef;
    double sgn = 1.0;

    std::complex<double> eval(double u) const {
        std::complex<double> s = 0.0;
        const double f = sgn * u;
        for (std::size_t k = 0; k < logt.size(); ++k) {
            const double ph = f * logt[k];
            s += coef[k] * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        return s;
    }
};

OscKernel tabulate(double r, double m, double sgn, double p, int order,
                   int panels) {
    const num::GaussRule& rule = num::gauss_legendre(order);
    OscKernel k;
    k.sgn = sgn;
    k.logt.reserve(static_cast<std::size_t>(order) * panels);
    k.coef.reserve(static_cast<std::size_t>(order) * panels);
    const double width = (1.0 - r) / panels;
    for (int q = 0; q < panels; ++q) {
        const double a = r + q * width;
        const double mid = a + 0.5 * width, half = 0.5 * width;
        for (int i = 0; i < order; ++i) {
            const double t = mid + half * rule.x[i];
            k.logt.push_back(std::log(t));
            k.coef.push_back(rule.w[i] * half * std::pow(t, m) *
                             std::pow(1.0 - t, p - 1.0));
        }
    }
    return k;
}

OscKernel stable_kernel(double r, double m, double sgn, double p, int order,
                        double u_ref) {
    int panels = 1 + static_cast<int>(u_ref * -std::log(r) / 50.0);
    OscKernel k = tabulate(r, m, sgn, p, order, panels);
    for (int rep = 0; rep < 6; ++rep) {
        OscKernel fine = tabulate(r, m, sgn, p, order, 2 * panels);
        const std::complex<double> c = k.eval(u_ref), f = fine.eval(u_ref);
        if (std::abs(c - f) <= 1e-10 * (std::abs(f) + 1e-30)) return k;
        k = std::move(fine);
        panels *= 2;
    }
    return k;
}

// For the quadratic norm the kernel integral is elementary:
//
//     int_r^1 t^{a-1}(1-t) dt = (1-r^a)/a - (1-r^{a+1})/(a+1).
//
// The ramp (1-r^{ib})/(ib) is assembled from half-angle identities so it
// stays smooth through b = 0, where it tends to -log r.
std::complex<double> beta2_ramp(double b, double L) {
    if (b == 0.0) return {-L, 0.0};
    const double s = std::sin(b * L), h = std::sin(0.5 * b * L);
    return {-s / b, -2.0 * h * h / b};
}

// integrand t^{-1-iu}(1-t): a = -iu
std::complex<double> beta2_lower(double u, double L) {
    const double r1 = std::exp(L); // r itself
    const std::complex<double> rot(std::cos(u * L), -std::sin(u * L));
    return beta2_ramp(-u, L) -
           (1.0 - r1 * rot) / std::complex<double>(1.0, -u);
}

// integrand t^{iu-2}(1-t): a = iu - 1
std::complex<double> beta2_upper(double u, double L) {
    const double inv_r = std::exp(-L);
    const std::complex<double> rot(std::cos(u * L), std::sin(u * L));
    return (1.0 - inv_r * rot) / std::complex<double>(-1.0, u) -
           beta2_ramp(u, L);
}

double cdf_raw(const CharFunContext& ctx, double x, double cutoff) {
    // exact left clamp: the level never falls below its support floor;
    // Markov right clamp: P(Y > x) <= E[Y]/x, negligible far out
    if (std::log(x) <= ctx.support_floor_log()) return 0.0;
    const double mean = ctx.forward_numeraire() / ctx.settlement_bond();
    if (x >= 1e9 * mean) return 1.0;

    const double logx = std::log(x);
    auto f = [&](double u) {
        // the integrand has a removable point at u = 0 and is flat below
        // u ~ 1e-3; the floor keeps interpolation noise out of the division
        const double uu = std::max(u, 1e-3);
        const std::complex<double> z =
            std::exp(-kI * (uu * logx)) * ctx.forward_cf(uu);
        return z.imag() / uu; // Re[z/(iu)]
    };
    const double F = 0.5 - frequency_integral(f, cutoff, logx) / M_PI;
    return std::min(1.0, std::max(0.0, F));
}

// CDF under the level-tilted measure, for conditional means; the tilt
// leaves the support unchanged, so the same floor clamp applies
double tilted_cdf(const CharFunContext& ctx, double x, double cutoff,
                  double settle, double mean) {
    if (std::log(x) <= ctx.support_floor_log()) return 0.0;
    const double logx = std::log(x);
    auto f = [&](double u) {
        const double uu = std::max(u, 1e-3);
        const std::complex<double> psi1 =
            ctx.line_value(uu, 1.0, cutoff) / (settle * mean);
        const std::complex<double> z = std::exp(-kI * (uu * logx)) * psi1;
        return z.imag() / uu;
    };
    const double F = 0.5 - frequency_integral(f, cutoff, logx) / M_PI;
    return std::min(1.0, std::max(0.0, F));
}

// smallest level whose CDF reaches `target`, bracketed by doubling steps
// upward from `from` and resolved by bisection
double level_quantile(const CharFunContext& ctx, double cutoff, double target,
                      double lo, double from, double step, double width_tol) {
    double hi = from;
    while (cdf_raw(ctx, hi, cutoff) < target) {
        hi += step;
        step *= 2.0;
    }
    while (hi - lo > width_tol) {
        const double m = 0.5 * (lo + hi);
        (cdf_raw(ctx, m, cutoff) < target ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

// Distortion gradient of an ordered grid of bulk atoms.  Component j is
//
//     E[(x_j - Y)^{p-1} 1{lo_j <= Y <= x_j}] - E[(Y - x_j)^{p-1} 1{x_j <= Y <= hi_j}]
//
// with Y the compounded level under the settlement-forward measure; both
// truncated moments are recovered from the forward characteristic function.
// The zero lower edge of the first cell is moved up to just below the
// support floor (no mass is lost); every upper edge is finite because the
// top stratum edge caps the bulk.
class DistortionKernel {
public:
    DistortionKernel(const CharFunContext& ctx, double p, int order)
        : ctx_(&ctx), p_(p), order_(order) {
        if (!(p >= 1.0))
            throw ValidationError("quantize: p-norm must be >= 1");
        cutoff_ = frequency_cutoff(ctx);
        settle_ = ctx.settlement_bond();
        mean_ = ctx.forward_numeraire() / settle_;
        clip_ = std::exp(ctx.support_floor_log()) * (1.0 - 1e-3);
    }

    double mean() const { return mean_; }
    double cutoff() const { return cutoff_; }

    double component(const std::vector<double>& x,
                     const std::vector<double>& lo,
                     const std::vector<double>& hi, std::size_t j) const {
        const double xj = x[j];
        const double lo_j = std::max(lo[j], (j == 0) ? clip_ : 0.0);
        const double r_lo = lo_j / xj;
        const bool upper = std::isfinite(hi[j]);
        const double r_hi = upper ? xj / hi[j] : 1.0;

        if (!(r_lo < 1.0 || r_hi < 1.0)) return 0.0;
        const double logx = std::log(xj);
        const double L_lo = std::log(r_lo), L_hi = std::log(r_hi);
        // oscillation rate of the integrand, for panel pre-chunking
        const double rate =
            std::abs(logx) + std::max(r_lo < 1.0 ? -L_lo : 0.0,
                                      r_hi < 1.0 ? -L_hi : 0.0);
        if (p_ == 2.0) {
            auto f = [&](double u) {
                std::complex<double> kern = 0.0;
                if (r_lo < 1.0) kern += beta2_lower(u, L_lo);
                if (r_hi < 1.0) kern -= beta2_upper(u, L_hi);
                const std::complex<double> ph =
                    std::exp(-kI * (u * logx)) * ctx_->forward_cf(u);
                return (ph * kern).real();
            };
            return xj / M_PI * frequency_integral(f, cutoff_, rate);
        }
        OscKernel klo, khi;
        if (r_lo < 1.0)
            klo = stable_kernel(r_lo, -1.0, -1.0, p_, order_, cutoff_);
        if (r_hi < 1.0)
            khi = stable_kernel(r_hi, -p_, 1.0, p_, order_, cutoff_);
        auto f = [&](double u) {
            std::complex<double> kern = 0.0;
            if (r_lo < 1.0) kern += klo.eval(u);
            if (r_hi < 1.0) kern -= khi.eval(u);
            const std::complex<double> ph =
                std::exp(-kI * (u * logx)) * ctx_->forward_cf(u);
            return (ph * kern).real();
        };
        return std::pow(xj, p_ - 1.0) / M_PI *
               frequency_integral(f, cutoff_, rate);
    }

    std::vector<double> gradient(const std::vector<double>& x,
                                 const std::vector<double>& lo,
                                 const std::vector<double>& hi) const {
        std::vector<double> g(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            g[j] = component(x, lo, hi, j);
        return g;
    }

private:
    const CharFunContext* ctx_;
    double p_;
    int order_;
    double cutoff_, settle_, mean_, clip_;
};

// cell edges for the bulk atoms: midpoints inside, the support's zero on
// the left, the fixed stratum edge on the right
void bulk_edges(const std::vector<double>& x, double top,
                std::vector<double>& lo, std::vector<double>& hi) {
    const std::size_t n = x.size();
    lo.resize(n);
    hi.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        lo[j] = (j == 0) ? 0.0 : 0.5 * (x[j - 1] + x[j]);
        hi[j] = (j + 1 == n) ? top : 0.5 * (x[j] + x[j + 1]);
    }
}

bool strictly_increasing(const std::vector<double>& x, double min_gap) {
    for (std::size_t j = 1; j < x.size(); ++j)
        if (!(x[j] - x[j - 1] > min_gap)) return false;
    return x.empty() || x.front() > 0.0;
}

double linf(const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

// Starting grid from the one-dimensional high-resolution rule: the optimal
// point density scales like f^{1/(p+1)}, realised here through CDF
// increments on a log-spaced skeleton between the support floor and the
// stratum edge (no density evaluations needed).  This allocates points
// between the narrow bulk and the stretched shoulder in roughly the right
// proportion, so the Newton polish starts inside its basin.
std::vector<double> high_resolution_init(const CharFunContext& ctx, int n,
                                         double cutoff, double p,
                                         double floor_level, double top) {
    const int m = 48;
    const double y0 = floor_level * (1.0 - 1e-3);
    const double ratio = std::log(top / y0) / m;
    std::vector<double> y(m + 1), F(m + 1), H(m + 1, 0.0);
    for (int k = 0; k <= m; ++k) {
        y[k] = y0 * std::exp(ratio * k);
        F[k] = cdf_raw(ctx, y[k], cutoff);
        if (k > 0) {
            F[k] = std::max(F[k], F[k - 1]);
            const double df = F[k] - F[k - 1], dy = y[k] - y[k - 1];
            H[k] = H[k - 1] + std::pow(df, 1.0 / (p + 1.0)) *
                                  std::pow(dy, p / (p + 1.0));
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    int k = 1;
    for (int j = 0; j < n; ++j) {
        const double target = H[m] * (2.0 * j + 1.0) / (2.0 * n);
        while (k < m && H[k] < target) ++k;
        const double span = H[k] - H[k - 1];
        const double w = span > 0.0 ? (target - H[k - 1]) / span : 0.5;
        x[static_cast<std::size_t>(j)] = y[k - 1] + w * (y[k] - y[k - 1]);
    }
    return x;
}

std::vector<double> cell_weights(const CharFunContext& ctx,
                                 const std::vector<double>& hi,
                                 double cutoff) {
    const std::size_t n = hi.size();
    // CDF at the finite edges, with a running-max pass absorbing
    // quadrature noise below the tolerance of the inversion itself
    std::vector<double> F(n + 1);
    F[0] = 0.0;
    F[n] = 1.0;
    for (std::size_t j = 0; j + 1 < n; ++j)
        F[j + 1] = std::max(F[j], cdf_raw(ctx, hi[j], cutoff));
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = F[j + 1] - F[j];
    return w;
}

} // namespace

double forward_cdf(const CharFunContext& ctx, double x) {
    if (!(x > 0.0))
        throw ValidationError("forward_cdf: level must be positive");
    if (ctx.deterministic())
        return x >= std::exp(ctx.point_mass_log()) ? 1.0 : 0.0;
    return cdf_raw(ctx, x, frequency_cutoff(ctx));
}

QuantGrid build_grid(const CharFunContext& ctx, int n_points, double p_norm,
                     const QuantOptions& opts) {
    if (n_points < 1)
        throw ValidationError("build_grid: need at least one point");
    if (!(p_norm >= 1.0))
        throw ValidationError("quantize: p-norm must be >= 1");
    if (!(opts.tail_mass > 0.0 && opts.tail_mass < 0.5))
        throw ValidationError(
            "build_grid: top stratum mass must lie in (0, 0.5)");

    if (ctx.deterministic()) {
        // all mass on the atom; extra points are parked just above it
        const double atom = std::exp(ctx.point_mass_log());
        QuantGrid g;
        for (int j = 0; j < n_points; ++j)
            g.points.push_back(atom * (1.0 + 1e-6 * j));
        bulk_edges(g.points, kInf, g.mid_minus, g.mid_plus);
        g.weights.assign(static_cast<std::size_t>(n_points), 0.0);
        g.weights[0] = 1.0;
        return g;
    }

    const double mean = ctx.forward_numeraire() / ctx.settlement_bond();
    if (n_points == 1) {
        // the coarsest grid carries the whole law at its mean
        QuantGrid g;
        g.points.assign(1, mean);
        bulk_edges(g.points, kInf, g.mid_minus, g.mid_plus);
        g.weights.assign(1, 1.0);
        return g;
    }

    const DistortionKernel kern(ctx, p_norm, opts.gl_order);
    const double floor_level = std::exp(ctx.support_floor_log());
    const double lo_bound = floor_level * (1.0 - 1e-3);
    const double tol = opts.tol * std::pow(mean, p_norm - 1.0);
    const double min_gap = 1e-12 * mean;
    const double cutoff = kern.cutoff();
    const double settle = ctx.settlement_bond();

    // top stratum: fixed quantile edge, atom at the conditional mean
    const double e_star =
        level_quantile(ctx, cutoff, 1.0 - opts.tail_mass, lo_bound, mean,
                       std::max(mean - lo_bound, 1e-8 * mean), 1e-6 * mean);
    const double f_star = cdf_raw(ctx, e_star, cutoff);
    const double g_star = tilted_cdf(ctx, e_star, cutoff, settle, mean);
    const double tail_prob = 1.0 - f_star;
    if (!(tail_prob > 1e-12))
        throw NumericalError("build_grid: top stratum carries no mass");
    const double tail_atom = mean * (1.0 - g_star) / tail_prob;

    const int nb = n_points - 1; // bulk atoms below the stratum edge
    std::vector<double> x = high_resolution_init(ctx, nb, cutoff, p_norm,
                                                 floor_level, e_star);

    std::vector<double> lo_e, hi_e;
    bulk_edges(x, e_star, lo_e, hi_e);
    std::vector<double> g = kern.gradient(x, lo_e, hi_e);
    double res = linf(g);

    bool converged = res < tol;
    for (int it = 0; it < opts.max_iter && !converged; ++it) {
        bool stepped = false;
        {
            // tridiagonal Jacobian of the gradient by central differences;
            // component j only depends on x_{j-1}, x_j, x_{j+1}
            const std::size_t n = x.size();
            std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0);
            for (std::size_t l = 0; l < n; ++l) {
                const double h = 1e-6 * x[l];
                std::vector<double> xp = x, xm = x;
                xp[l] += h;
                xm[l] -= h;
                std::vector<double> lop, hip, lom, him;
                bulk_edges(xp, e_star, lop, hip);
                bulk_edges(xm, e_star, lom, him);
                for (std::size_t j = (l == 0 ? 0 : l - 1);
                     j < n && j <= l + 1; ++j) {
                    const double d = (kern.component(xp, lop, hip, j) -
                                      kern.component(xm, lom, him, j)) /
                                     (2.0 * h);
                    if (j + 1 == l)
                        sup[j] = d;
                    else if (j == l)
                        diag[j] = d;
                    else
                        sub[j] = d;
                }
            }
            // Thomas elimination
            std::vector<double> c(n, 0.0), d(n, 0.0), step(n, 0.0);
            bool ok = true;
            double piv = diag[0];
            if (std::abs(piv) < 1e-14) ok = false;
            if (ok) {
                c[0] = sup[0] / piv;
                d[0] = g[0] / piv;
                for (std::size_t j = 1; j < n && ok; ++j) {
                    piv = diag[j] - sub[j] * c[j - 1];
                    if (std::abs(piv) < 1e-14 || !std::isfinite(piv)) {
                        ok = false;
                        break;
                    }
                    c[j] = sup[j] / piv;
                    d[j] = (g[j] - sub[j] * d[j - 1]) / piv;
                }
            }
            if (ok) {
                step[n - 1] = d[n - 1];
                for (std::size_t j = n - 1; j-- > 0;)
                    step[j] = d[j] - c[j] * step[j + 1];
                // backtracked Newton: keep ordering and shrink the residual
                double s = 1.0;
                for (int bt = 0; bt < 8 && !stepped; ++bt, s *= 0.5) {
                    std::vector<double> trial = x;
                    for (std::size_t j = 0; j < n; ++j)
                        trial[j] -= s * step[j];
                    // points live strictly between the support floor and
                    // the stratum edge
                    if (!(trial.front() > lo_bound) ||
                        !(trial.back() < e_star) ||
                        !strictly_increasing(trial, min_gap))
                        continue;
                    std::vector<double> tlo, thi;
                    bulk_edges(trial, e_star, tlo, thi);
                    std::vector<double> tg = kern.gradient(trial, tlo, thi);
                    if (linf(tg) < res) {
                        x = std::move(trial);
                        lo_e = std::move(tlo);
                        hi_e = std::move(thi);
                        g = std::move(tg);
                        res = linf(g);
                        stepped = true;
                    }
                }
            }
        }
        if (!stepped) {
            // Lloyd recentering: move each bulk point to the conditional
            // mean of its cell, from the plain and level-tilted CDFs
            std::vector<double> trial = x;
            double Fp = 0.0, Gp = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double Fn = cdf_raw(ctx, hi_e[j], cutoff);
                const double Gn =
                    tilted_cdf(ctx, hi_e[j], cutoff, settle, mean);
                const double prob = Fn - Fp;
                if (prob > 1e-13) trial[j] = mean * (Gn - Gp) / prob;
                Fp = Fn;
                Gp = Gn;
            }
            std::sort(trial.begin(), trial.end());
            if (!strictly_increasing(trial, min_gap))
                throw NumericalError("build_grid: grid collapsed (two atoms "
                                     "merged during the Lloyd sweep)");
            x = std::move(trial);
            bulk_edges(x, e_star, lo_e, hi_e);
            g = kern.gradient(x, lo_e, hi_e);
            res = linf(g);
        }
        converged = res < tol;
    }
    if (!converged) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "build_grid: no convergence after %d iterations "
                      "(residual %.3e, tolerance %.3e)",
                      opts.max_iter, res, tol);
        throw NumericalError(msg);
    }

    QuantGrid grid;
    grid.points = std::move(x);
    grid.points.push_back(tail_atom);
    bulk_edges(grid.points, kInf, grid.mid_minus, grid.mid_plus);
    grid.mid_plus[static_cast<std::size_t>(nb) - 1] = e_star;
    grid.mid_minus[static_cast<std::size_t>(nb)] = e_star;
    grid.weights = cell_weights(ctx, grid.mid_plus, cutoff);
    return grid;
}

std::vector<double> master_residuals(const CharFunContext& ctx,
                                     const QuantGrid& grid, double p_norm,
                                     int gl_order) {
    const std::size_t n = grid.points.size();
    if (n == 0 || grid.mid_minus.size() != n || grid.mid_plus.size() != n)
        throw ValidationError("master_residuals: malformed grid");
    for (std::size_t j = 0; j + 1 < n; ++j)
        if (!std::isfinite(grid.mid_plus[j]))
            throw ValidationError(
                "master_residuals: interior cell edge must be finite");
    if (ctx.deterministic())
        return std::vector<double>(n, 0.0);

    const DistortionKernel kern(ctx, p_norm, gl_order);
    std::vector<double> g(n);
    for (std::size_t j = 0; j + 1 < n; ++j)
        g[j] = kern.component(grid.points, grid.mid_minus, grid.mid_plus, j);

    // top stratum: the atom must match the conditional mean past its edge
    const double cutoff = kern.cutoff();
    const double settle = ctx.settlement_bond();
    const double mean = kern.mean();
    const double e_star = grid.mid_minus[n - 1];
    double f_star = 0.0, g_star = 0.0;
    if (e_star > 0.0) {
        f_star = cdf_raw(ctx, e_star, cutoff);
        g_star = tilted_cdf(ctx, e_star, cutoff, settle, mean);
    }
    g[n - 1] = (grid.points[n - 1] * (1.0 - f_star) -
                mean * (1.0 - g_star)) *
               std::pow(mean, p_norm - 2.0);
    return g;
}

double caplet_price_quant(const QuantGrid& grid, const CharFunContext& ctx,
                          double strike) {
    if (grid.points.empty() || grid.points.size() != grid.weights.size())
        throw ValidationError("caplet_price_quant: malformed grid");
    const double kbar = 1.0 + ctx.accrual() * strike;
    if (!(kbar > 0.0))
        throw ValidationError("caplet: shifted strike must be positive");
    double payoff = 0.0;
    for (std::size_t j = 0; j < grid.points.size(); ++j)
        payoff += std::max(grid.points[j] - kbar, 0.0) * grid.weights[j];
    return ctx.settlement_bond() * payoff;
}

void write_grid_csv(const QuantGrid& grid, std::ostream& os) {
    os << "index,point,weight\n";
    char line[96];
    for (std::size_t j = 0; j < grid.points.size(); ++j) {
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", j + 1,
                      grid.points[j], grid.weights[j]);
        os << line;
    }
}

} // namespace cbimc
