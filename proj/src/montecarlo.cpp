#include "cbimc/montecarlo.hpp"

#include "cbimc/errors.hpp"
#include "cbimc/num/reduce.hpp"
#include "cbimc/num/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cbimc {

namespace {

struct SimCoeffs {
    double b, sigma, alpha, theta_eff;
    double neps; // jump arrival rate per unit of state
    double meps; // mean jump drift per unit of state
    std::vector<double> dbeta;
};

SimCoeffs make_coeffs(const MultiCurveModel& model, double eps) {
    const MechanismParams& mp = model.mechanism().params();
    SimCoeffs c;
    c.b = mp.b;
    c.sigma = mp.sigma;
    c.alpha = mp.alpha;
    c.theta_eff = model.mechanism().theta_eff();
    c.neps = model.mechanism().jump_intensity_above(eps);
    c.meps = model.mechanism().jump_compensator_above(eps);
    c.dbeta.resize(model.factors());
    for (std::size_t j = 1; j <= model.factors(); ++j)
        c.dbeta[j - 1] = model.delta_beta(j);
    return c;
}

struct Counters {
    long long floored = 0, steps = 0;
    long long accepted = 0, proposed = 0;
};

struct LayerNoise {
    num::RandomStream diff, count, size;
    bool anti;

    LayerNoise(std::uint64_t seed, std::uint64_t stream_path,
               std::uint32_t layer, bool a)
        : diff(seed, stream_path, layer, num::NoiseKind::Diffusion),
          count(seed, stream_path, layer, num::NoiseKind::JumpCount),
          size(seed, stream_path, layer, num::NoiseKind::JumpSize),
          anti(a) {}

    double normal() {
        const double z = diff.next_normal();
        return anti ? -z : z;
    }
};

// truncated tempered-stable jump size: Pareto proposal, exponential
// tempering in the acceptance test
double draw_jump(num::RandomStream& rs, const SimCoeffs& c, double eps,
                 Counters& ct) {
    for (int it = 0; it < 100000; ++it) {
        const double y = eps * std::pow(rs.next_u01(), -1.0 / c.alpha);
        const double v = rs.next_u01();
        ++ct.proposed;
        if (v <= std::exp(-c.theta_eff * (y - eps))) {
            ++ct.accepted;
            return y;
        }
    }
    throw NumericalError("montecarlo: jump size sampler failed to accept");
}

// One path of all difference layers over the given (possibly nonuniform)
// grid.  obs(n, x) is invoked with the layer states after each grid point,
// including the initial one.  Antithetic pairs share every stream and
// mirror the Brownian draws of the odd member.
template <class Observer>
void run_path(const MultiCurveModel& model, const SimCoeffs& c, double eps,
              std::uint64_t seed, std::size_t path, bool antithetic,
              const std::vector<double>& grid, Counters& ct,
              std::vector<JumpEvent>* log, Observer&& obs) {
    const std::size_t m = model.factors();
    const std::uint64_t stream_path = antithetic ? path / 2 : path;
    const bool anti = antithetic && (path % 2 == 1);

    std::vector<LayerNoise> noise;
    noise.reserve(m);
    for (std::size_t j = 0; j < m; ++j)
        noise.emplace_back(seed, stream_path,
                           static_cast<std::uint32_t>(j + 1), anti);

    std::vector<double> x = model.x0();
    obs(std::size_t{0}, x);
    for (std::size_t n = 1; n < grid.size(); ++n) {
        const double dt = grid[n] - grid[n - 1];
        for (std::size_t j = 0; j < m; ++j) {
            const double xj = x[j];
            double jumps = 0.0;
            if (c.neps > 0.0) {
                const long jn = noise[j].count.next_poisson(xj * dt * c.neps);
                for (long k = 0; k < jn; ++k) {
                    const double w = draw_jump(noise[j].size, c, eps, ct);
                    jumps += w;
                    if (log)
                        log->push_back(
                            {grid[n], static_cast<std::uint32_t>(j + 1), w});
                }
            }
            double next = xj + (c.dbeta[j] - (c.b + c.meps) * xj) * dt +
                          c.sigma * std::sqrt(std::max(xj, 0.0) * dt) *
                              noise[j].normal() +
                          jumps;
            ++ct.steps;
            if (next < 0.0) {
                next = 0.0;
                ++ct.floored;
            }
            x[j] = next;
        }
        obs(n, x);
    }
}

std::vector<num::MeanStderr> reduce_samples(
    const std::vector<std::vector<double>>& samples, bool antithetic) {
    std::vector<num::MeanStderr> out;
    out.reserve(samples.size());
    for (const std::vector<double>& s : samples) {
        if (!antithetic) {
            out.push_back(num::mean_stderr(s));
            continue;
        }
        // statistics over pair means: the mirrored member of a pair is not
        // independent of its partner
        std::vector<double> pairs(s.size() / 2);
        for (std::size_t k = 0; k < pairs.size(); ++k)
            pairs[k] = 0.5 * (s[2 * k] + s[2 * k + 1]);
        out.push_back(num::mean_stderr(pairs));
    }
    return out;
}

} // namespace

void SimConfig::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ValidationError("sim config: horizon must be positive");
    if (steps < 1)
        throw ValidationError("sim config: need at least one step");
    if (!(eps_trunc > 0.0))
        throw ValidationError("sim config: jump truncation must be > 0");
    if (paths < 1)
        throw ValidationError("sim config: need at least one path");
    if (antithetic && paths % 2 != 0)
        throw ValidationError("sim config: antithetic needs an even path count");
}

PathBundle simulate(const MultiCurveModel& model, const SimConfig& config) {
    config.validate();
    const std::size_t m = model.factors();
    const std::size_t nt = static_cast<std::size_t>(config.steps) + 1;
    if (config.paths * m * nt > std::size_t{250000000})
        throw ValidationError(
            "simulate: bundle too large; reduce paths or steps");

    PathBundle bundle;
    bundle.n_factors = m;
    bundle.times.resize(nt);
    for (std::size_t n = 0; n < nt; ++n)
        bundle.times[n] = config.horizon * static_cast<double>(n) /
                          config.steps;
    bundle.values.assign(config.paths * m * nt, 0.0);
    if (config.jump_log) bundle.jump_log.resize(config.paths);

    const SimCoeffs coef = make_coeffs(model, config.eps_trunc);
    Counters ct;
    for (std::size_t p = 0; p < config.paths; ++p) {
        double* base = bundle.values.data() + p * m * nt;
        std::vector<JumpEvent>* log =
            config.jump_log ? &bundle.jump_log[p] : nullptr;
        run_path(model, coef, config.eps_trunc, config.seed, p,
                 config.antithetic, bundle.times, ct, log,
                 [&](std::size_t n, const std::vector<double>& x) {
                     double cum = 0.0;
                     for (std::size_t j = 0; j < m; ++j) {
                         cum += x[j];
                         base[j * nt + n] = cum;
                     }
                 });
    }
    bundle.floored_fraction =
        ct.steps > 0 ? static_cast<double>(ct.floored) / ct.steps : 0.0;
    bundle.accept_rate =
        ct.proposed > 0
            ? static_cast<double>(ct.accepted) / ct.proposed
            : 1.0;
    return bundle;
}

McResult mc_caplet(const MultiCurveModel& model, const SimConfig& config,
                   std::size_t i, double T, double strike) {
    return mc_caplet(model, config, i, T, std::vector<double>{strike})[0];
}

std::vector<McResult> mc_caplet(const MultiCurveModel& model,
                                const SimConfig& config, std::size_t i,
                                double T, const std::vector<double>& strikes) {
    config.validate();
    if (strikes.empty())
        throw ValidationError("mc_caplet: need at least one strike");
    if (!(T > 0.0)) throw ValidationError("mc_caplet: expiry must be > 0");
    const double delta = model.tenor(i);
    if (T + delta > config.horizon + 1e-9)
        throw ValidationError(
            "mc_caplet: payment date beyond the simulation horizon");

    // grid split at the fixing date so T and T + delta are exact nodes
    const double dt_target = config.horizon / config.steps;
    const std::size_t n_fix = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(T / dt_target)));
    const std::size_t n_pay = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(delta / dt_target)));
    std::vector<double> grid(n_fix + n_pay + 1);
    for (std::size_t n = 0; n <= n_fix; ++n)
        grid[n] = T * static_cast<double>(n) / n_fix;
    for (std::size_t n = 1; n <= n_pay; ++n)
        grid[n_fix + n] = T + delta * static_cast<double>(n) / n_pay;

    std::vector<double> lambda(model.factors());
    for (std::size_t j = 1; j <= model.factors(); ++j)
        lambda[j - 1] = model.lambda(j);
    const double shift = model.shift_integral(T + delta);

    const SimCoeffs coef = make_coeffs(model, config.eps_trunc);
    Counters ct;
    std::vector<double> fixing(config.paths), discount(config.paths);
    std::vector<double> state(model.factors());
    for (std::size_t p = 0; p < config.paths; ++p) {
        double integ = 0.0, s_prev = 0.0;
        run_path(model, coef, config.eps_trunc, config.seed, p,
                 config.antithetic, grid, ct, nullptr,
                 [&](std::size_t n, const std::vector<double>& x) {
                     double s = 0.0;
                     for (std::size_t j = 0; j < x.size(); ++j)
                         s += lambda[j] * x[j];
                     if (n > 0)
                         integ += 0.5 * (s_prev + s) *
                                  (grid[n] - grid[n - 1]);
                     s_prev = s;
                     if (n == n_fix) state = x;
                 });
        fixing[p] = model.forward_ibor(i, T, T, state);
        discount[p] = std::exp(-shift - integ);
    }

    std::vector<std::vector<double>> samples(
        strikes.size(), std::vector<double>(config.paths));
    for (std::size_t k = 0; k < strikes.size(); ++k)
        for (std::size_t p = 0; p < config.paths; ++p)
            samples[k][p] = delta *
                            std::max(fixing[p] - strikes[k], 0.0) *
                            discount[p];

    std::vector<McResult> out(strikes.size());
    const std::vector<num::MeanStderr> stats =
        reduce_samples(samples, config.antithetic);
    for (std::size_t k = 0; k < strikes.size(); ++k)
        out[k] = {stats[k].mean, stats[k].stderr_};
    return out;
}

ClusterStats cluster_stats(const PathBundle& bundle, double window) {
    const std::size_t paths = bundle.n_paths();
    if (bundle.jump_log.size() != paths || paths == 0)
        throw ValidationError("cluster_stats: bundle has no jump log");
    const double horizon = bundle.times.back();
    if (!(window > 0.0) || window > horizon + 1e-12)
        throw ValidationError("cluster_stats: window outside (0, horizon]");

    ClusterStats st;
    st.window = window;
    const std::size_t n_windows = static_cast<std::size_t>(
        std::ceil(horizon / window - 1e-12));
    st.window_counts.assign(paths * n_windows, 0);

    const double bin = window / 5.0;
    st.histogram_bin = bin;
    std::vector<long> hist(25, 0);
    long gaps = 0;

    std::size_t shared = 0, layer1 = 0;
    for (std::size_t p = 0; p < paths; ++p) {
        const std::vector<JumpEvent>& ev = bundle.jump_log[p];
        double prev = std::numeric_limits<double>::quiet_NaN();
        for (const JumpEvent& e : ev) {
            std::size_t w = static_cast<std::size_t>(e.time / window);
            if (w >= n_windows) w = n_windows - 1;
            ++st.window_counts[p * n_windows + w];
            if (!std::isnan(prev)) {
                std::size_t k = static_cast<std::size_t>((e.time - prev) / bin);
                if (k >= hist.size()) k = hist.size() - 1;
                ++hist[k];
                ++gaps;
            }
            prev = e.time;
            if (e.layer == 1) {
                ++layer1;
                // A first-layer jump feeds every cumulative factor, so it
                // must be visible in each factor's realized increment over
                // the step it was drawn in.  Measure that from the stored
                // values instead of trusting the assembly: half the logged
                // size leaves room for drift and diffusion noise.
                const auto it = std::lower_bound(bundle.times.begin(),
                                                 bundle.times.end(),
                                                 e.time - 1e-12);
                const std::size_t n = static_cast<std::size_t>(
                    it - bundle.times.begin());
                bool visible = n + 1 < bundle.times.size();
                for (std::size_t i = 0; visible && i < bundle.n_factors; ++i)
                    visible = bundle.value(p, i, n + 1) -
                                  bundle.value(p, i, n) >=
                              0.5 * e.size;
                if (visible) ++shared;
            }
        }
    }

    double mean = 0.0;
    for (long c : st.window_counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(st.window_counts.size());
    double var = 0.0;
    for (long c : st.window_counts) {
        const double d = static_cast<double>(c) - mean;
        var += d * d;
    }
    var /= static_cast<double>(st.window_counts.size());
    st.mean_count = mean;
    st.dispersion_index = mean > 0.0 ? var / mean : 0.0;
    st.common_fraction =
        layer1 > 0 ? static_cast<double>(shared) / layer1 : 0.0;

    st.interjump_histogram.assign(hist.size(), 0.0);
    if (gaps > 0)
        for (std::size_t k = 0; k < hist.size(); ++k)
            st.interjump_histogram[k] =
                static_cast<double>(hist[k]) / gaps;
    return st;
}

void write_paths_csv(const MultiCurveModel& model, const PathBundle& bundle,
                     std::ostream& os) {
    const std::size_t m = bundle.n_factors;
    if (m != model.factors())
        throw ValidationError("write_paths_csv: factor count mismatch");
    os << "path_id,time";
    for (std::size_t i = 1; i <= m; ++i) os << ",Y" << i;
    os << ",r";
    for (std::size_t i = 1; i <= m; ++i) os << ",spread" << i;
    os << "\n";

    const std::vector<double>& mu = model.params().mu;
    std::vector<double> state(m);
    char buf[64];
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        for (std::size_t n = 0; n < bundle.times.size(); ++n) {
            const double t = bundle.times[n];
            os << p << ',' << t;
            double rate = model.shift_rate(t);
            for (std::size_t i = 1; i <= m; ++i) {
                const double y = bundle.value(p, i, n);
                rate += mu[i - 1] * y;
                std::snprintf(buf, sizeof(buf), ",%.10g", y);
                os << buf;
                // differencing the stored cumulative values can leave
                // harmless negative round-off in a layer
                state[i - 1] = std::max(bundle.layer(p, i, n), 0.0);
            }
            std::snprintf(buf, sizeof(buf), ",%.10g", rate);
            os << buf;
            for (std::size_t i = 1; i <= m; ++i) {
                std::snprintf(buf, sizeof(buf), ",%.10g",
                              model.fwd_mult_spread(i, t, t, state));
                os << buf;
            }
            os << "\n";
        }
    }
}

} // namespace cbimc
