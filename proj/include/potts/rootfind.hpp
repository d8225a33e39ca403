#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace potts {

/// Root of a continuous function on a bracketing interval [lo, hi]
/// (f(lo) and f(hi) of opposite sign). Bisection down to ~1e-13 relative
/// width, then a single secant polish step if it stays inside the bracket.
inline double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("bisect_root: interval does not bracket a sign change");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at machine resolution
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid; flo = fm;
        } else {
            hi = mid; fhi = fm;
        }
        if (hi - lo < 1e-13 * (1.0 + std::fabs(lo) + std::fabs(hi))) break;
    }
    // secant polish
    double x = (std::fabs(flo) < std::fabs(fhi)) ? lo : hi;
    if (fhi != flo) {
        double s = lo - flo * (hi - lo) / (fhi - flo);
        if (s > lo && s < hi) x = s;
    }
    return x;
}

/// Expands [lo, hi] upward (doubling the width) until f changes sign,
/// then bisects. f must be monotone-ish so that a sign change is eventually
/// found; throws after `max_doublings`.
inline double bisect_root_expand_up(const std::function<double(double)>& f, double lo, double hi,
                                    int max_doublings = 200) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    int n = 0;
    while ((fhi > 0.0) == (flo > 0.0)) {
        if (++n > max_doublings)
            throw std::runtime_error("bisect_root_expand_up: no sign change found");
        lo = hi; flo = fhi;
        hi *= 2.0;
        fhi = f(hi);
    }
    return bisect_root(f, lo, hi);
}

/// Golden-section maximization on [lo, hi] for a unimodal bump.
/// Returns {argmax, max}.
inline std::pair<double, double> golden_max(const std::function<double(double)>& f,
                                            double lo, double hi, double tol = 1e-12) {
    static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 300 && (b - a) > tol * (1.0 + std::fabs(a) + std::fabs(b)); ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    double x = 0.5 * (a + b);
    return {x, f(x)};
}

/// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1; p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

/// Quadrature of f over [a, b] with an n-node Gauss-Legendre rule.
inline double gauss_legendre_integrate(const std::function<double(double)>& f,
                                       double a, double b, int n = 256) {
    std::vector<double> xs, ws;
    gauss_legendre(n, xs, ws);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += ws[i] * f(mid + half * xs[i]);
    return s * half;
}

}  // namespace potts
