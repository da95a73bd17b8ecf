#pragma once

#include <vector>

namespace cbimc::num {

// Shape-preserving piecewise cubic Hermite interpolation (Fritsch-Carlson
// slopes, weighted-harmonic form).  Monotone data yields a monotone
// interpolant; general data is overshoot-free.  C1 everywhere.
class Pchip {
public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);

    double value(double x) const;
    double derivative(double x) const;

    // Evaluation outside [x_front, x_back] continues the boundary cubic's
    // tangent line (linear extension, consistent with C1).
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

private:
    std::size_t locate(double x) const;
    std::vector<double> x_, y_, m_; // nodes, values, node slopes
};

} // namespace cbimc::num
