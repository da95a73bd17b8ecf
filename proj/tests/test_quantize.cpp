#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cbimc/errors.hpp"
#include "cbimc/fourier.hpp"
#include "cbimc/num/quadrature.hpp"
#include "cbimc/quantize.hpp"
#include "market_fixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

using namespace cbimc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const MultiCurveModel& reference_model() {
    static MultiCurveModel m(fixture_model_params(), fixture_market());
    return m;
}

// six-month caplet context one year out: the stress configuration for the
// grid builder (the level's admissible moment strip ends just above 1, so
// the upper tail is heavy)
const CharFunContext& reference_ctx() {
    static CharFunContext c(reference_model(), 2, 0.0, 1.0,
                            reference_model().x0());
    return c;
}

const QuantGrid& reference_grid10() {
    static QuantGrid g = build_grid(reference_ctx(), 10);
    return g;
}

double forward_mean(const CharFunContext& ctx) {
    return ctx.forward_numeraire() / ctx.settlement_bond();
}

// composite Gauss-Legendre with panels clustered cubically toward `a`:
// the CDF has a boundary layer just above the support floor, and the
// oracle integrals often start there
double gl_integral(const std::function<double(double)>& f, double a,
                   double b, int order = 32) {
    const num::GaussRule& rule = num::gauss_legendre(order);
    const int panels = 12;
    double s = 0.0;
    for (int q = 0; q < panels; ++q) {
        const double u0 = static_cast<double>(q) / panels;
        const double u1 = static_cast<double>(q + 1) / panels;
        const double pa = a + (b - a) * u0 * u0 * u0;
        const double pb = a + (b - a) * u1 * u1 * u1;
        const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
        double ps = 0.0;
        for (int i = 0; i < order; ++i)
            ps += rule.w[i] * f(mid + half * rule.x[i]);
        s += ps * half;
    }
    return s;
}

// Stieltjes integrals against the level law, by parts on the CDF:
//   int_a^b (x-y) dF = -(x-a) F(a) + int_a^x F   (for the lower half-cell)
//   int_x^b (y-x) dF =  (b-x) F(b) - int_x^b F   (for the upper half-cell)
// This reconstructs a stationarity component from CDF values alone, an
// independent route from the frequency-domain kernels inside the library.
double component_oracle(const CharFunContext& ctx, double x, double lo,
                        double hi) {
    const double clip = std::exp(ctx.support_floor_log()) * (1.0 - 1e-3);
    const double a = std::max(lo, clip);
    auto F = [&](double y) { return forward_cdf(ctx, y); };
    const double lower = -(x - a) * F(a) + gl_integral(F, a, x);
    const double upper = (hi - x) * F(hi) - gl_integral(F, x, hi);
    return lower - upper;
}

// E[Y 1{Y > e}] by parts: mean - e F(e) + int_clip^e F
double tail_moment_oracle(const CharFunContext& ctx, double edge) {
    const double clip = std::exp(ctx.support_floor_log()) * (1.0 - 1e-3);
    auto F = [&](double y) { return forward_cdf(ctx, y); };
    return forward_mean(ctx) - edge * F(edge) +
           gl_integral(F, clip, edge);
}

} // namespace

TEST_CASE("forward distribution function behaves like a CDF") {
    const CharFunContext& ctx = reference_ctx();
    const double floor_level = std::exp(ctx.support_floor_log());

    // the compounded level never falls below its deterministic floor
    CHECK(forward_cdf(ctx, 0.5) == 0.0);
    CHECK(forward_cdf(ctx, floor_level * 0.999) == 0.0);
    CHECK(forward_cdf(ctx, 1e12) == doctest::Approx(1.0).epsilon(1e-8));

    double prev = 0.0;
    for (double x : {0.995, 1.000, 1.005, 1.010, 1.030, 1.200}) {
        const double F = forward_cdf(ctx, x);
        CHECK(F >= prev);
        CHECK(F <= 1.0);
        prev = F;
    }

    // spot value at the mean, frozen from a high-precision evaluation of
    // the inversion integral with an independent quadrature
    CHECK(forward_cdf(ctx, forward_mean(ctx)) ==
          doctest::Approx(0.724239).epsilon(2e-4));

    CHECK_THROWS_AS((void)forward_cdf(ctx, 0.0), ValidationError);
    CHECK_THROWS_AS((void)forward_cdf(ctx, -1.0), ValidationError);
}

TEST_CASE("degenerate law collapses to its point mass") {
    ModelParams p = fixture_model_params();
    p.mechanism.beta = {0.0, 0.0};
    p.y0 = {0.0, 0.0};
    MultiCurveModel m(p, fixture_market());
    CharFunContext ctx(m, 2, 0.0, 1.0, m.x0());
    REQUIRE(ctx.deterministic());

    const double atom = std::exp(ctx.point_mass_log());
    CHECK(forward_cdf(ctx, atom * 0.999) == 0.0);
    CHECK(forward_cdf(ctx, atom * 1.001) == 1.0);

    QuantGrid g = build_grid(ctx, 3);
    REQUIRE(g.points.size() == 3);
    CHECK(g.points[0] == doctest::Approx(atom).epsilon(1e-14));
    CHECK(g.weights[0] == 1.0);
    CHECK(g.weights[1] == 0.0);
    CHECK(g.weights[2] == 0.0);

    // pricing against the closed-form payoff at the atom
    for (double K : {0.001, 0.01, 0.05}) {
        const double kbar = 1.0 + ctx.accrual() * K;
        const double want =
            ctx.settlement_bond() * std::max(atom - kbar, 0.0);
        CHECK(caplet_price_quant(g, ctx, K) ==
              doctest::Approx(want).epsilon(1e-14));
    }

    for (double r : master_residuals(ctx, g)) CHECK(r == 0.0);
}

TEST_CASE("single-point grid sits at the forward mean") {
    const CharFunContext& ctx = reference_ctx();
    const double mean = forward_mean(ctx);

    for (double p : {2.0, 3.0}) {
        QuantGrid g = build_grid(ctx, 1, p);
        REQUIRE(g.points.size() == 1);
        CHECK(g.points[0] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(g.weights[0] == 1.0);
        CHECK(g.mid_minus[0] == 0.0);
        CHECK(g.mid_plus[0] == kInf);

        // at-the-mean stationarity is exact for the one-point grid
        auto r = master_residuals(ctx, g, p);
        REQUIRE(r.size() == 1);
        CHECK(std::abs(r[0]) < 1e-10);
    }

    // everything above the single atom prices to zero
    QuantGrid g = build_grid(ctx, 1);
    const double k_above = (mean * 1.01 - 1.0) / ctx.accrual();
    CHECK(caplet_price_quant(g, ctx, k_above) == 0.0);
}

TEST_CASE("stratified grid invariants") {
    const CharFunContext& ctx = reference_ctx();
    const QuantGrid& g = reference_grid10();
    const double mean = forward_mean(ctx);
    const std::size_t n = g.points.size();
    REQUIRE(n == 10);
    REQUIRE(g.mid_minus.size() == n);
    REQUIRE(g.mid_plus.size() == n);
    REQUIRE(g.weights.size() == n);

    for (std::size_t j = 1; j < n; ++j)
        CHECK(g.points[j] > g.points[j - 1]);
    CHECK(g.points.front() > std::exp(ctx.support_floor_log()));

    // cell chain: zero on the left, midpoints inside the bulk, the fixed
    // stratum edge between the bulk and the top cell, open on the right
    CHECK(g.mid_minus.front() == 0.0);
    CHECK(g.mid_plus.back() == kInf);
    for (std::size_t j = 1; j < n; ++j)
        CHECK(g.mid_minus[j] == g.mid_plus[j - 1]);
    for (std::size_t j = 0; j + 2 < n; ++j)
        CHECK(g.mid_plus[j] ==
              doctest::Approx(0.5 * (g.points[j] + g.points[j + 1]))
                  .epsilon(1e-14));

    const double e_star = g.mid_minus.back();
    CHECK(g.points[n - 2] < e_star);
    CHECK(g.points[n - 1] > e_star);
    // the stratum edge clears the strike band used by the pricing tests,
    // so those payoffs are linear across the whole top cell
    CHECK(e_star > 1.0125);

    double wsum = 0.0, qmean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        CHECK(g.weights[j] >= 0.0);
        wsum += g.weights[j];
        qmean += g.weights[j] * g.points[j];
    }
    CHECK(std::abs(wsum - 1.0) < 1e-13);
    // conditional-mean top atom makes the grid mean exact, not just close
    CHECK(qmean == doctest::Approx(mean).epsilon(1e-9));
    CHECK(std::abs(g.weights.back() - 0.02) < 2e-5);
}

TEST_CASE("cell masses match the distribution function") {
    const CharFunContext& ctx = reference_ctx();
    const QuantGrid& g = reference_grid10();
    const std::size_t n = g.points.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double f_lo =
            g.mid_minus[j] > 0.0 ? forward_cdf(ctx, g.mid_minus[j]) : 0.0;
        const double f_hi =
            std::isfinite(g.mid_plus[j]) ? forward_cdf(ctx, g.mid_plus[j])
                                         : 1.0;
        CHECK(g.weights[j] == doctest::Approx(f_hi - f_lo).epsilon(1e-7));
    }
}

TEST_CASE("stationarity residuals vanish at the built grid") {
    const CharFunContext& ctx = reference_ctx();
    const QuantGrid& g = reference_grid10();
    const double scale = forward_mean(ctx);

    auto r = master_residuals(ctx, g);
    REQUIRE(r.size() == g.points.size());
    for (double v : r) CHECK(std::abs(v) < 1e-8 * scale);
}

TEST_CASE("residual components agree with a CDF-quadrature oracle") {
    const CharFunContext& ctx = reference_ctx();

    // perturb the converged grid so the components are of visible size —
    // by a fraction of the local spacing, to keep the atoms ordered —
    // then reconcile the kernel route against integration by parts
    QuantGrid g = reference_grid10();
    const double e_star = g.mid_minus.back();
    const std::vector<double> base = g.points;
    for (std::size_t j = 0; j < base.size(); ++j) {
        double gap = (j + 1 < base.size()) ? base[j + 1] - base[j]
                                           : base[j] - e_star;
        if (j > 0) gap = std::min(gap, base[j] - base[j - 1]);
        g.points[j] += 0.2 * gap * ((j % 2 == 0) ? 1.0 : -1.0);
    }
    for (std::size_t j = 1; j < g.points.size(); ++j)
        REQUIRE(g.points[j] > g.points[j - 1]);
    for (std::size_t j = 0; j + 1 < g.points.size(); ++j) {
        const double edge =
            (j + 2 == g.points.size())
                ? e_star
                : 0.5 * (g.points[j] + g.points[j + 1]);
        g.mid_plus[j] = edge;
        g.mid_minus[j + 1] = edge;
    }

    auto r = master_residuals(ctx, g);
    for (std::size_t j : {std::size_t{0}, std::size_t{4}, std::size_t{8}}) {
        const double oracle = component_oracle(
            ctx, g.points[j], g.mid_minus[j], g.mid_plus[j]);
        CHECK(std::abs(r[j] - oracle) < 1e-6 + 1e-3 * std::abs(oracle));
    }

    // top component: mass-weighted gap between the atom and the
    // conditional mean beyond the stratum edge
    const double f_star = forward_cdf(ctx, e_star);
    const double oracle_top =
        g.points.back() * (1.0 - f_star) - tail_moment_oracle(ctx, e_star);
    CHECK(std::abs(r.back() - oracle_top) < 1e-6);
}

TEST_CASE("tail atom equals the conditional mean beyond its edge") {
    const CharFunContext& ctx = reference_ctx();
    const QuantGrid& g = reference_grid10();
    const double e_star = g.mid_minus.back();
    const double tail_prob = 1.0 - forward_cdf(ctx, e_star);
    const double want = tail_moment_oracle(ctx, e_star) / tail_prob;
    CHECK(g.points.back() == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("residuals are stable in the quadrature order") {
    const CharFunContext& ctx = reference_ctx();
    const QuantGrid& g = reference_grid10();

    // p != 2 exercises the tabulated oscillatory kernels; doubling their
    // order must not move the result
    auto coarse = master_residuals(ctx, g, 3.0, 48);
    auto fine = master_residuals(ctx, g, 3.0, 96);
    REQUIRE(coarse.size() == fine.size());
    for (std::size_t j = 0; j < coarse.size(); ++j)
        CHECK(coarse[j] ==
              doctest::Approx(fine[j]).epsilon(1e-7).scale(1e-4));
}

TEST_CASE("prices approach the transform benchmark and improve with size") {
    const CharFunContext& ctx = reference_ctx();
    const QuantGrid& g10 = reference_grid10();

    const double f1 = caplet_price_fourier(ctx, 0.01);
    const double f2 = caplet_price_fourier(ctx, 0.02);

    auto rel = [](double a, double b) { return std::abs(a - b) / b; };

    CHECK(rel(caplet_price_quant(g10, ctx, 0.02), f2) < 0.02);
    CHECK(rel(caplet_price_quant(g10, ctx, 0.01), f1) < 0.10);

    QuantGrid g5 = build_grid(ctx, 5);
    QuantGrid g20 = build_grid(ctx, 20);
    auto worst = [&](const QuantGrid& g) {
        return std::max(rel(caplet_price_quant(g, ctx, 0.01), f1),
                        rel(caplet_price_quant(g, ctx, 0.02), f2));
    };
    const double e5 = worst(g5), e10 = worst(g10), e20 = worst(g20);
    CHECK(e5 > e10);
    CHECK(e10 > e20);

    // bulk distortion on the shared window [floor, stratum edge], from one
    // tabulated CDF: must fall as the grid refines
    const double clip = std::exp(ctx.support_floor_log()) * (1.0 - 1e-3);
    const double e_star = g10.mid_minus.back();
    const int cells = 400;
    std::vector<double> y(cells + 1), F(cells + 1);
    for (int k = 0; k <= cells; ++k) {
        y[k] = clip + (e_star - clip) * k / cells;
        F[k] = forward_cdf(ctx, std::max(y[k], clip * (1.0 + 1e-12)));
    }
    auto distortion = [&](const QuantGrid& g) {
        double d = 0.0;
        for (int k = 0; k < cells; ++k) {
            const double mid = 0.5 * (y[k] + y[k + 1]);
            double best = kInf;
            for (double x : g.points)
                best = std::min(best, (mid - x) * (mid - x));
            d += best * (F[k + 1] - F[k]);
        }
        return d;
    };
    const double d5 = distortion(g5), d10 = distortion(g10),
                 d20 = distortion(g20);
    CHECK(d5 > d10);
    CHECK(d10 > d20);
}

TEST_CASE("payoff edges: beyond the last atom and below the first") {
    const CharFunContext& ctx = reference_ctx();
    const QuantGrid& g = reference_grid10();
    const double accrual = ctx.accrual();

    const double k_above = (g.points.back() * 1.01 - 1.0) / accrual;
    CHECK(caplet_price_quant(g, ctx, k_above) == 0.0);

    // a shifted strike below every atom pays the full forward value
    const double kbar = g.points.front() * 0.99;
    const double k_below = (kbar - 1.0) / accrual;
    const double want = ctx.forward_numeraire() - kbar * ctx.settlement_bond();
    CHECK(caplet_price_quant(g, ctx, k_below) ==
          doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("pricing a hand-built grid is plain arithmetic") {
    const CharFunContext& ctx = reference_ctx();
    QuantGrid g;
    g.points = {1.0, 1.02};
    g.mid_minus = {0.0, 1.01};
    g.mid_plus = {1.01, kInf};
    g.weights = {0.6, 0.4};
    const double want = ctx.settlement_bond() * 0.4 * (1.02 - 1.01);
    CHECK(caplet_price_quant(g, ctx, 0.01 / ctx.accrual()) ==
          doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("grid construction is deterministic") {
    const CharFunContext& ctx = reference_ctx();
    QuantGrid a = build_grid(ctx, 5);
    QuantGrid b = build_grid(ctx, 5);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t j = 0; j < a.points.size(); ++j) {
        CHECK(a.points[j] == b.points[j]);
        CHECK(a.weights[j] == b.weights[j]);
        CHECK(a.mid_plus[j] == b.mid_plus[j]);
    }
}

TEST_CASE("two-point grid splits bulk and stratum") {
    const CharFunContext& ctx = reference_ctx();
    QuantGrid g = build_grid(ctx, 2);
    REQUIRE(g.points.size() == 2);
    CHECK(g.points[0] < g.mid_plus[0]);
    CHECK(g.points[1] > g.mid_minus[1]);
    CHECK(g.mid_plus[0] == g.mid_minus[1]);
    const double mean = forward_mean(ctx);
    CHECK(g.weights[0] * g.points[0] + g.weights[1] * g.points[1] ==
          doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("input validation") {
    const CharFunContext& ctx = reference_ctx();
    CHECK_THROWS_AS((void)build_grid(ctx, 0), ValidationError);
    CHECK_THROWS_AS((void)build_grid(ctx, 5, 0.5), ValidationError);

    QuantOptions bad;
    bad.tail_mass = 0.0;
    CHECK_THROWS_AS((void)build_grid(ctx, 5, 2.0, bad), ValidationError);
    bad.tail_mass = 0.6;
    CHECK_THROWS_AS((void)build_grid(ctx, 5, 2.0, bad), ValidationError);

    QuantGrid broken;
    broken.points = {1.0, 1.1};
    broken.weights = {1.0};
    CHECK_THROWS_AS((void)caplet_price_quant(broken, ctx, 0.01),
                    ValidationError);
    CHECK_THROWS_AS((void)master_residuals(ctx, broken), ValidationError);

    // interior cell edges must be finite for the kernel integrals
    QuantGrid open_interior;
    open_interior.points = {1.0, 1.1};
    open_interior.mid_minus = {0.0, kInf};
    open_interior.mid_plus = {kInf, kInf};
    open_interior.weights = {0.5, 0.5};
    CHECK_THROWS_AS((void)master_residuals(ctx, open_interior),
                    ValidationError);

    // shifted strike must stay positive
    const QuantGrid& g = reference_grid10();
    CHECK_THROWS_AS(
        (void)caplet_price_quant(g, ctx, -2.0 / ctx.accrual()),
        ValidationError);
}

TEST_CASE("grid serialization") {
    QuantGrid g;
    g.points = {1.0, 1.5};
    g.mid_minus = {0.0, 1.25};
    g.mid_plus = {1.25, kInf};
    g.weights = {0.75, 0.25};
    std::ostringstream os;
    write_grid_csv(g, os);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "index,point,weight");
    REQUIRE(std::getline(is, line));
    CHECK(line == "1,1,0.75");
    REQUIRE(std::getline(is, line));
    CHECK(line == "2,1.5,0.25");
}
