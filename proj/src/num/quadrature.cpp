#include "cbimc/num/quadrature.hpp"
#include "cbimc/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <queue>

namespace cbimc::num {

namespace {

GaussRule make_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    // Roots of P_n via Newton from the Chebyshev-like initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = -x; // fill ascending from the left
        r.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    return r;
}

std::map<int, GaussRule> g_rules;
std::mutex g_rules_mutex;

struct Segment {
    double a, b, value, err;
    bool operator<(const Segment& o) const { return err < o.err; }
};

Segment eval_segment(const std::function<double(double)>& f, double a, double b, int n) {
    double coarse = gauss_panel(f, a, b, n);
    double fine = gauss_panel(f, a, b, 2 * n);
    return {a, b, fine, std::abs(fine - coarse)};
}

} // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw ValidationError("gauss_legendre: order must be >= 1");
    std::lock_guard<std::mutex> lock(g_rules_mutex);
    auto it = g_rules.find(n);
    if (it == g_rules.end()) it = g_rules.emplace(n, make_rule(n)).first;
    return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadOptions& opts) {
    if (!(a < b)) {
        if (a == b) return 0.0;
        return -integrate(f, b, a, opts);
    }
    std::priority_queue<Segment> heap;
    Segment s0 = eval_segment(f, a, b, opts.points);
    double total = s0.value, err = s0.err;
    heap.push(s0);
    int splits = 0;
    while (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (splits++ >= opts.max_splits)
            throw NumericalError("integrate: refinement budget exhausted");
        Segment worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            // interval underflow: accept what we have for this segment
            err -= worst.err;
            heap.push({worst.a, worst.b, worst.value, 0.0});
            continue;
        }
        Segment l = eval_segment(f, worst.a, mid, opts.points);
        Segment r = eval_segment(f, mid, worst.b, opts.points);
        total += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
    }
    return total;
}

double integrate_segments(const std::function<double(double)>& f,
                          const std::vector<double>& edges,
                          const QuadOptions& opts) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        s += integrate(f, edges[i], edges[i + 1], opts);
    return s;
}

} // namespace cbimc::num
