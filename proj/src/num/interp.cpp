#include "cbimc/num/interp.hpp"
#include "cbimc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cbimc::num {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// One-sided three-point slope for the boundary nodes, limited so the first
// interval stays shape-preserving.
double edge_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign(m) != sign(d0))
        m = 0.0;
    else if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0))
        m = 3.0 * d0;
    return m;
}

} // namespace

Pchip::Pchip(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw ValidationError("Pchip: need >= 2 nodes and matching sizes");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw ValidationError("Pchip: abscissae must be strictly increasing");

    m_.assign(n, 0.0);
    if (n == 2) {
        double d = (y_[1] - y_[0]) / (x_[1] - x_[0]);
        m_[0] = m_[1] = d;
        return;
    }
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] == 0.0 || d[i] == 0.0 || sign(d[i - 1]) != sign(d[i])) {
            m_[i] = 0.0;
        } else {
            double w1 = 2.0 * h[i] + h[i - 1];
            double w2 = h[i] + 2.0 * h[i - 1];
            m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m_[0] = edge_slope(h[0], h[1], d[0], d[1]);
    m_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

std::size_t Pchip::locate(double x) const {
    // index of the interval [x_i, x_{i+1}] containing (or nearest to) x
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double Pchip::value(double x) const {
    if (x < x_.front()) return y_.front() + m_.front() * (x - x_.front());
    if (x > x_.back()) return y_.back() + m_.back() * (x - x_.back());
    std::size_t i = locate(x);
    double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    double h10 = t3 - 2.0 * t2 + t;
    double h01 = -2.0 * t3 + 3.0 * t2;
    double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double Pchip::derivative(double x) const {
    if (x < x_.front()) return m_.front();
    if (x > x_.back()) return m_.back();
    std::size_t i = locate(x);
    double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
    double t2 = t * t;
    double g00 = (6.0 * t2 - 6.0 * t) / h;
    double g10 = 3.0 * t2 - 4.0 * t + 1.0;
    double g01 = (-6.0 * t2 + 6.0 * t) / h;
    double g11 = 3.0 * t2 - 2.0 * t;
    return g00 * y_[i] + g10 * m_[i] + g01 * y_[i + 1] + g11 * m_[i + 1];
}

} // namespace cbimc::num
