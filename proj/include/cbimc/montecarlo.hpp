#pragma once

#include "cbimc/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace cbimc {

// Euler simulation of the factor flow.  Paths are driven by one
// counter-based random stream per (path, factor layer, noise kind), so a
// given path is reproducible independently of how many paths are run and
// of any scheduling; results depend only on (seed, config, model).
struct SimConfig {
    double horizon = 1.0;    // simulated interval [0, horizon]
    int steps = 1000;        // Euler steps across the horizon
    double eps_trunc = 1e-3; // jump sizes below this are dropped
    std::size_t paths = 1;
    std::uint64_t seed = 0;
    bool antithetic = false; // mirror the Brownian component pairwise
    bool jump_log = false;   // record (time, layer, size) per jump

    void validate() const;
};

struct JumpEvent {
    double time;         // grid time of the step that produced the jump
    std::uint32_t layer; // difference layer (1-based); felt by all Y^i, i >= layer
    double size;
};

// Simulated paths of the cumulative factors Y^1 <= ... <= Y^m on the
// uniform grid.  The ordering holds pathwise by construction: the
// independent difference layers X^j are simulated and summed, so adding a
// layer never reorders the ones below it.
struct PathBundle {
    std::vector<double> times;            // steps + 1 grid points
    std::size_t n_factors = 0;
    std::vector<double> values;           // [path][factor][time], cumulative
    std::vector<std::vector<JumpEvent>> jump_log; // empty when not recorded
    double floored_fraction = 0.0; // Euler steps clipped at zero
    double accept_rate = 1.0;      // jump-size acceptance-rejection yield

    std::size_t n_paths() const {
        const std::size_t block = n_factors * times.size();
        return block == 0 ? 0 : values.size() / block;
    }
    // cumulative factor Y^i at grid index n (i 1-based)
    double value(std::size_t path, std::size_t i, std::size_t n) const {
        return values[(path * n_factors + (i - 1)) * times.size() + n];
    }
    // difference layer X^j = Y^j - Y^{j-1}
    double layer(std::size_t path, std::size_t j, std::size_t n) const {
        const double hi = value(path, j, n);
        return j == 1 ? hi : hi - value(path, j - 1, n);
    }
};

PathBundle simulate(const MultiCurveModel& model, const SimConfig& config);

struct McResult {
    double price = 0.0;
    double std_error = 0.0;
};

// Monte Carlo caplet price: discounted payoff delta * (L(T,T,delta_i) - K)^+
// with the Ibor fixing evaluated from the model formulas at the simulated
// time-T state and the discount factor from the trapezoid rule on the
// pathwise short-rate integral.  The grid is split at the fixing date so
// both T and the payment date T + delta_i are exact grid points; the step
// width on each segment matches config.horizon / config.steps as closely
// as possible.  The batch overload prices all strikes off one set of paths.
McResult mc_caplet(const MultiCurveModel& model, const SimConfig& config,
                   std::size_t i, double T, double strike);
std::vector<McResult> mc_caplet(const MultiCurveModel& model,
                                const SimConfig& config, std::size_t i,
                                double T, const std::vector<double>& strikes);

// Jump-arrival diagnostics from a bundle simulated with jump_log enabled.
// Counts pool every layer of a path (all of them hit the top cumulative
// factor).  A dispersion index above 1 signals clustering relative to a
// Poisson flow of the same rate.
struct ClusterStats {
    double window = 0.0;             // tumbling-window width used
    std::vector<long> window_counts; // per path and window
    double mean_count = 0.0;
    double dispersion_index = 0.0;   // variance / mean of window counts
    double common_fraction = 0.0;    // layer-1 jumps shared by the top tenor
    double histogram_bin = 0.0;
    std::vector<double> interjump_histogram; // relative frequencies
};

ClusterStats cluster_stats(const PathBundle& bundle, double window = 0.5);

// path_id,time,Y1..Ym,r,spread1..spreadm -- short rate and spot spreads
// evaluated from the model formulas at each simulated state
void write_paths_csv(const MultiCurveModel& model, const PathBundle& bundle,
                     std::ostream& os);

} // namespace cbimc
