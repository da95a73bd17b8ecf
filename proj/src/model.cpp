#include "cbimc/model.hpp"
#include "cbimc/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace cbimc {

void ModelParams::validate() const {
    mechanism.validate();
    const std::size_t m = mechanism.beta.size();
    if (mu.size() != m || y0.size() != m || tenors.size() != m)
        throw ValidationError("model: mu, y0, tenors must all match the factor count");
    for (double v : mu)
        if (!(v >= 0.0)) throw ValidationError("model: mu must be >= 0");
    double prev = 0.0;
    for (double v : y0) {
        if (!(v >= prev))
            throw ValidationError("model: y0 must be non-negative and non-decreasing");
        prev = v;
    }
    prev = 0.0;
    for (double v : tenors) {
        if (!(v > prev))
            throw ValidationError("model: tenors must be positive and strictly increasing");
        prev = v;
    }
}

ModelParams load_model_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    ModelParams p;
    try {
        p.mechanism.b = j.at("b").get<double>();
        p.mechanism.sigma = j.at("sigma").get<double>();
        p.mechanism.eta = j.at("eta").get<double>();
        p.mechanism.theta = j.at("theta").get<double>();
        p.mechanism.alpha = j.at("alpha").get<double>();
        p.mechanism.beta = j.at("beta").get<std::vector<double>>();
        p.mu = j.at("mu").get<std::vector<double>>();
        p.y0 = j.at("y0").get<std::vector<double>>();
        p.tenors = j.at("tenors").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    p.validate();
    return p;
}

void save_model_params(const std::string& path, const ModelParams& p) {
    nlohmann::json j;
    j["b"] = p.mechanism.b;
    j["sigma"] = p.mechanism.sigma;
    j["eta"] = p.mechanism.eta;
    j["theta"] = p.mechanism.theta;
    j["alpha"] = p.mechanism.alpha;
    j["beta"] = p.mechanism.beta;
    j["mu"] = p.mu;
    j["y0"] = p.y0;
    j["tenors"] = p.tenors;
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

MultiCurveModel::MultiCurveModel(ModelParams params, MarketCurves market)
    : params_(std::move(params)), mech_(params_.mechanism),
      market_(std::move(market)) {
    params_.validate();
    if (!mech_.is_stable())
        throw ValidationError(
            "model: mechanism violates the no-explosion bound (phi(-theta/eta) > 0)");
    const std::size_t m = params_.factors();
    if (market_.ois.empty())
        throw ValidationError("model: OIS curve required");
    if (market_.forwards.size() != m)
        throw ValidationError("model: need one forward curve per tenor");
    for (std::size_t i = 0; i < m; ++i)
        if (std::abs(market_.forwards[i].tenor() - params_.tenors[i]) > 1e-12)
            throw ValidationError("model: forward curve tenor mismatch at index " +
                                  std::to_string(i + 1));

    lambda_.resize(m);
    double acc = 0.0;
    for (std::size_t j = m; j-- > 0;) {
        acc += params_.mu[j];
        lambda_[j] = acc;
    }
    dbeta_.resize(m);
    x0_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        dbeta_[j] = params_.mechanism.delta_beta(j + 1);
        x0_[j] = params_.y0[j] - (j > 0 ? params_.y0[j - 1] : 0.0);
    }

    horizon_ = market_.ois.pillars().back();
    for (std::size_t i = 0; i < m; ++i)
        horizon_ = std::max(horizon_,
                            market_.forwards[i].pillars().back() + params_.tenors[i]);

    // the spread exponent starts at -1, so the domain must reach below it
    if (params_.mechanism.eta > 0.0 && !(mech_.theta_eff() > 1.0))
        throw ValidationError("model: spread exponent -1 outside the mechanism domain");

    sol0_.reserve(m);
    sol1_.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        RiccatiRequest req;
        req.horizon = horizon_;
        req.q = lambda_[j];
        req.p = 0.0;
        sol0_.push_back(solve_riccati(mech_, req));
        req.p = -1.0;
        sol1_.push_back(solve_riccati(mech_, req));
        if (sol0_.back().blew_up || sol1_.back().blew_up)
            throw NumericalError("model: exponent ODE exploded during fitting "
                                 "(stability bound should preclude this)");
    }

    // fitting grid: monthly nodes, all pillars, and pillar+tenor points so
    // that every perfect-fit target is an exact grid node
    std::vector<double> grid{0.0};
    for (int k = 1; k / 12.0 < horizon_ + 1e-9; ++k)
        grid.push_back(std::min(k / 12.0, horizon_));
    auto add = [&](double T) {
        if (T >= 0.0 && T <= horizon_ + 1e-9) grid.push_back(std::min(T, horizon_));
    };
    for (double T : market_.ois.pillars()) add(T);
    for (std::size_t i = 0; i < m; ++i)
        for (double T : market_.forwards[i].pillars()) {
            add(T);
            add(T + params_.tenors[i]);
        }
    add(horizon_);
    std::sort(grid.begin(), grid.end());
    std::vector<double> nodes;
    for (double T : grid)
        if (nodes.empty() || T - nodes.back() > 1e-9) nodes.push_back(T);

    std::vector<double> Lg(nodes.size());
    std::vector<std::vector<double>> cg(m, std::vector<double>(nodes.size()));
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double T = nodes[k];
        double L = -market_.ois.log_discount(T);
        for (std::size_t j = 0; j < m; ++j)
            L -= dbeta_[j] * I0(j + 1, T) + v0(j + 1, T) * x0_[j];
        Lg[k] = L;
        for (std::size_t i = 0; i < m; ++i) {
            double c = std::log(
                spot_mult_spread(market_.forwards[i], market_.ois, T));
            for (std::size_t j = 0; j <= i; ++j)
                c -= dbeta_[j] * (I0(j + 1, T) - I1(j + 1, T)) +
                     (v0(j + 1, T) - v1(j + 1, T)) * x0_[j];
            cg[i][k] = c;
        }
    }
    Lg[0] = 0.0; // exact by construction; pin against round-off
    Lambda_ = num::Pchip(nodes, Lg);
    c_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        c_.emplace_back(nodes, cg[i]);
        const double worst = *std::min_element(cg[i].begin(), cg[i].end());
        if (worst < -1e-12)
            warnings_.push_back("fitted spread shift c_" + std::to_string(i + 1) +
                                " dips to " + std::to_string(worst) +
                                "; spreads may fall below 1");
    }
}

double MultiCurveModel::tenor(std::size_t i) const {
    if (i < 1 || i > params_.tenors.size())
        throw ValidationError("model: tenor index out of range");
    return params_.tenors[i - 1];
}

double MultiCurveModel::lambda(std::size_t j) const {
    if (j < 1 || j > lambda_.size())
        throw ValidationError("model: factor index out of range");
    return lambda_[j - 1];
}

double MultiCurveModel::delta_beta(std::size_t j) const {
    if (j < 1 || j > dbeta_.size())
        throw ValidationError("model: factor index out of range");
    return dbeta_[j - 1];
}

double MultiCurveModel::v0(std::size_t j, double tau) const {
    return sol0_[j - 1].v_real_at(tau);
}
double MultiCurveModel::I0(std::size_t j, double tau) const {
    return sol0_[j - 1].I_real_at(tau);
}
double MultiCurveModel::v1(std::size_t j, double tau) const {
    return sol1_[j - 1].v_real_at(tau);
}
double MultiCurveModel::I1(std::size_t j, double tau) const {
    return sol1_[j - 1].I_real_at(tau);
}

double MultiCurveModel::shift_integral(double T) const {
    if (!(T >= 0.0) || T > horizon_ + 1e-9)
        throw ValidationError("model: shift query outside [0, max_horizon]");
    if (T == 0.0) return 0.0;
    return Lambda_.value(T);
}

double MultiCurveModel::shift_rate(double t) const {
    if (!(t >= 0.0) || t > horizon_ + 1e-9)
        throw ValidationError("model: shift query outside [0, max_horizon]");
    return Lambda_.derivative(t);
}

double MultiCurveModel::spread_shift(std::size_t i, double T) const {
    if (i < 1 || i > c_.size())
        throw ValidationError("model: tenor index out of range");
    if (!(T >= 0.0) || T > horizon_ + 1e-9)
        throw ValidationError("model: shift query outside [0, max_horizon]");
    return c_[i - 1].value(T);
}

double MultiCurveModel::coeff_A0(double t, double T) const {
    if (!(t >= 0.0) || !(T >= t))
        throw ValidationError("model: need 0 <= t <= T");
    double a = -(shift_integral(T) - shift_integral(t));
    for (std::size_t j = 1; j <= factors(); ++j)
        a -= dbeta_[j - 1] * I0(j, T - t);
    return a;
}

double MultiCurveModel::coeff_B0(std::size_t j, double tau) const {
    if (j < 1 || j > factors())
        throw ValidationError("model: factor index out of range");
    if (!(tau >= 0.0))
        throw ValidationError("model: tau must be >= 0");
    return -v0(j, tau);
}

double MultiCurveModel::coeff_Ai(std::size_t i, double t, double T) const {
    if (!(t >= 0.0) || !(T >= t))
        throw ValidationError("model: need 0 <= t <= T");
    double a = spread_shift(i, T);
    for (std::size_t j = 1; j <= i; ++j)
        a += dbeta_[j - 1] * (I0(j, T - t) - I1(j, T - t));
    return a;
}

double MultiCurveModel::coeff_Bi(std::size_t i, std::size_t j, double tau) const {
    if (i < 1 || i > factors() || j < 1 || j > factors())
        throw ValidationError("model: index out of range");
    if (j > i) return 0.0;
    return v0(j, tau) - v1(j, tau);
}

void MultiCurveModel::check_state(double t, double T,
                                  const std::vector<double>& x) const {
    if (!(t >= 0.0) || !(T >= t))
        throw ValidationError("model: need 0 <= t <= T");
    if (T > horizon_ + 1e-9)
        throw ValidationError("model: maturity beyond fitted horizon");
    if (x.size() != factors())
        throw ValidationError("model: factor state dimension mismatch");
    for (double v : x)
        if (!(v >= 0.0))
            throw ValidationError("model: factor state must be >= 0");
}

double MultiCurveModel::bond_price(double t, double T,
                                   const std::vector<double>& x) const {
    check_state(t, T, x);
    double expo = coeff_A0(t, T);
    for (std::size_t j = 1; j <= factors(); ++j)
        expo += coeff_B0(j, T - t) * x[j - 1];
    return std::exp(expo);
}

double MultiCurveModel::fwd_mult_spread(std::size_t i, double t, double T,
                                        const std::vector<double>& x) const {
    check_state(t, T, x);
    double expo = coeff_Ai(i, t, T);
    for (std::size_t j = 1; j <= i; ++j)
        expo += coeff_Bi(i, j, T - t) * x[j - 1];
    return std::exp(expo);
}

double MultiCurveModel::forward_ibor(std::size_t i, double t, double T,
                                     const std::vector<double>& x) const {
    const double delta = tenor(i);
    const double s = fwd_mult_spread(i, t, T, x);
    const double ratio = bond_price(t, T, x) / bond_price(t, T + delta, x);
    return (s * ratio - 1.0) / delta;
}

double MultiCurveModel::futures_convexity(std::size_t i, double t, double T,
                                          const std::vector<double>& x) const {
    const double delta = tenor(i);
    check_state(t, T, x);
    if (T + delta > horizon_ + 1e-9)
        throw ValidationError("model: settlement beyond fitted horizon");
    const double tau = T - t;

    // per-factor exponent start B0_j(delta) - gamma_{i,j}; inhomogeneity 0
    double expo = spread_shift(i, T) - coeff_A0(T, T + delta);
    for (std::size_t j = 1; j <= factors(); ++j) {
        // a factor with no immigration and zero state is identically zero, so
        // its exponential moment is 1 for any exponent -- skip the domain check
        if (dbeta_[j - 1] == 0.0 && x[j - 1] == 0.0) continue;
        const double start = coeff_B0(j, delta) - (j <= i ? 1.0 : 0.0);
        if (params_.mechanism.eta > 0.0 && start < -mech_.theta_eff())
            throw LifetimeError(
                "futures convexity: exponent start below the mechanism domain");
        LifetimeResult lt = mech_.lifetime(start, 0.0);
        if (lt.finite && lt.time <= tau)
            throw LifetimeError("futures convexity: not finite at this horizon");
        RiccatiRequest req;
        req.p = start;
        req.q = 0.0;
        req.horizon = tau;
        RiccatiSolution sol = solve_riccati(mech_, req);
        if (sol.blew_up)
            throw LifetimeError("futures convexity: not finite at this horizon");
        expo -= dbeta_[j - 1] * sol.I_real_at(tau) + sol.v_real_at(tau) * x[j - 1];
    }
    const double future_rate = (std::exp(expo) - 1.0) / delta;
    return future_rate - forward_ibor(i, t, T, x);
}

} // namespace cbimc
