#pragma once

#include "cbimc/fourier.hpp"

#include <iosfwd>
#include <vector>

namespace cbimc {

// Voronoi quantization of the compounded-rate level exp(X) under the
// settlement-forward measure: N atoms with nearest-neighbour cells, cell
// probabilities recovered from the forward characteristic function.
//
// The top cell is a fixed stratum rather than a half-open Voronoi cell:
// its lower edge sits at the (1 - tail_mass) quantile of the level and its
// atom at the conditional mean beyond that edge.  On the admissibility
// boundary the level has fewer than two moments, so an unconstrained
// quadratic grid does not exist (the top atom would chase the heavy tail
// indefinitely); pinning the tail stratum keeps the system well posed, and
// prices of payoffs that are linear beyond the top edge pick up no error
// from the stratum at all.
struct QuantGrid {
    std::vector<double> points;    // atom levels, strictly increasing
    std::vector<double> mid_minus; // lower cell edges; first entry is 0
    std::vector<double> mid_plus;  // upper cell edges; last entry is +inf
    std::vector<double> weights;   // cell probabilities, summing to 1
};

struct QuantOptions {
    int max_iter = 200;      // Newton iterations before giving up
    double tol = 1e-9;       // stationarity residual bound (level scale)
    int gl_order = 64;       // Gauss-Legendre order in the kernel integrals
    double tail_mass = 0.02; // probability carried by the top stratum
};

// Distribution function of exp(X) under the settlement-forward measure,
// obtained by frequency inversion and clamped to [0, 1].
double forward_cdf(const CharFunContext& ctx, double x);

// Stationary grid for the L^p distortion: interior atoms solve the
// distortion-gradient system on the bulk (below the top stratum edge) by
// damped Newton iteration with a tridiagonal Jacobian, started from
// quantiles of the high-resolution point density f^{1/(p+1)}; a Lloyd
// recentering sweep is the fallback when a Newton step stalls.  The top
// atom is the conditional mean of the stratum, so the grid reproduces the
// forward level mean exactly.
QuantGrid build_grid(const CharFunContext& ctx, int n_points,
                     double p_norm = 2.0, const QuantOptions& opts = {});

// Stationarity residuals of a grid: one distortion-gradient component per
// interior atom (using the stored cell edges) plus, for the top atom, the
// mismatch against the conditional stratum mean; every entry is zero (to
// quadrature accuracy) at a grid produced by build_grid.
std::vector<double> master_residuals(const CharFunContext& ctx,
                                     const QuantGrid& grid,
                                     double p_norm = 2.0, int gl_order = 64);

// Caplet price from a built grid: settlement bond times the quantized
// expectation of the payoff (level - shifted strike)^+.
double caplet_price_quant(const QuantGrid& grid, const CharFunContext& ctx,
                          double strike);

// Dump as CSV rows `index,point,weight` (with a header line).
void write_grid_csv(const QuantGrid& grid, std::ostream& os);

} // namespace cbimc
