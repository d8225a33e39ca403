#pragma once

// Completely homogeneous measures for the constant field (alpha, 0, ..., 0):
// the fixed-point system in z-coordinates, all critical constants and curves
// of the (theta, alpha) plane, solution counting, and an independent
// multi-start Newton enumerator used as the counting oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "potts/freetree.hpp"
#include "potts/model.hpp"
#include "potts/rootfind.hpp"
#include "potts/uniqueness.hpp"

namespace potts {

// ---------------------------------------------------------------------------
// Scalar-branch constants and the curves alpha_+/-(theta)
// ---------------------------------------------------------------------------

inline double theta_c(int k, int q) {
    double rho = static_cast<double>(k + 1) / (k - 1);
    return 0.5 * (std::sqrt(static_cast<double>(q - 2) * (q - 2) + 4.0 * (q - 1) * rho * rho) -
                  (q - 2));
}

inline double b_func(double theta, int q) { return theta * (theta + q - 2) / (q - 1); }

/// Discriminant of (b+x)(1+x) = k(b-1)x; nonnegative iff theta >= theta_c.
inline double disc_d(double theta, int k, int q) {
    double rho = static_cast<double>(k + 1) / (k - 1);
    double b = b_func(theta, q);
    return (b - 1.0) * (k - 1.0) * (k - 1.0) * (b - rho * rho);
}

/// Tangency abscissas x_- < x_+; x_- computed as b/x_+ to avoid cancellation.
inline std::pair<double, double> x_pm(double theta, int k, int q) {
    if (theta < theta_c(k, q)) throw std::domain_error("x_pm: theta >= theta_c required");
    double b = b_func(theta, q);
    double d = std::max(disc_d(theta, k, q), 0.0);
    double xp = 0.5 * ((b - 1.0) * (k - 1.0) - 2.0 + std::sqrt(d));
    return {b / xp, xp};
}

/// Tangency slopes {a_-, a_+} = {a(x_-), a(x_+)} with a(x) = f(x)/x;
/// a is increasing on [x_-, x_+], so a_- < a_+.
inline std::pair<double, double> a_pm(double theta, int k, int q) {
    auto [xm, xp] = x_pm(theta, k, q);
    double b = b_func(theta, q);
    auto a_of = [&](double x) { return std::pow((1.0 + x) / (b + x), k) / x; };
    return {a_of(xm), a_of(xp)};
}

/// Critical field values (alpha_-, alpha_+):
///   alpha_+- = -(k+1) + ln((q-1)/a_-+) / ln theta   (alpha_- pairs with a_+).
inline std::pair<double, double> alpha_pm(int k, int q, double theta) {
    if (theta < theta_c(k, q)) throw std::domain_error("alpha_pm: theta >= theta_c required");
    if (theta < 1.0 + 1e-9) throw std::domain_error("alpha_pm: theta too close to 1");
    auto [am, ap] = a_pm(theta, k, q);
    double lt = std::log(theta);
    double alpha_minus = -(k + 1) + std::log((q - 1) / ap) / lt;
    double alpha_plus = -(k + 1) + std::log((q - 1) / am) / lt;
    return {alpha_minus, alpha_plus};
}

/// Number of solutions u > 0 of the scalar branch; 2 only inside the
/// tangency band |alpha - alpha_+-| < band.
inline int count_scalar(int k, int q, double theta, double alpha, double band = 1e-7) {
    if (theta <= theta_c(k, q)) return 1;
    auto [am, ap] = alpha_pm(k, q, theta);
    if (std::fabs(alpha - am) < band || std::fabs(alpha - ap) < band) return 2;
    return (alpha > am && alpha < ap) ? 3 : 1;
}

// ---------------------------------------------------------------------------
// The pair branch: L_m, K_m and their critical quantities
// ---------------------------------------------------------------------------

/// p_k(v) = v^{k-1} + ... + v.
inline double p_k_poly(int k, double v) {
    double s = 0.0, t = v;
    for (int i = 1; i <= k - 1; ++i) {
        s += t;
        t *= v;
    }
    return s;
}

inline double p_k_deriv(int k, double v) {
    double s = 0.0, t = 1.0;
    for (int i = 1; i <= k - 1; ++i) {
        s += i * t;
        t *= v;
    }
    return s;
}

inline double l_func(int k, int q, int m, double v, double theta) {
    if (v <= 0.0) throw std::domain_error("l_func: v > 0 required");
    return (theta - 1.0) * p_k_poly(k, v) - m * std::pow(v, k) - (q - 1 - m);
}

inline double k_func(int k, int q, int m, double v, double theta) {
    double pk = p_k_poly(k, v);
    double lm = l_func(k, q, m, v, theta);
    double den = pk + lm;
    if (den <= 0.0) throw std::domain_error("k_func: p_k + L_m <= 0");
    return lm * std::pow((pk + 1.0) / den, k);
}

/// dK_m/dv, up to the positive factor (p_k+1)^{k-1} / (p_k+L)^{k+1}:
///   (p_k+1)(p_k - (k-1)L) L' - k L (1-L) p_k'.
/// Same sign as the derivative inside the positivity interval.
inline double k_deriv_sign_part(int k, int q, int m, double v, double theta) {
    double pk = p_k_poly(k, v);
    double pkd = p_k_deriv(k, v);
    double lm = l_func(k, q, m, v, theta);
    double lmd = (theta - 1.0) * pkd - k * m * std::pow(v, k - 1);
    return (pk + 1.0) * (pk - (k - 1) * lm) * lmd - k * lm * (1.0 - lm) * pkd;
}

/// Argmax of v -> L_m(v; theta): unique root of (theta-1) p_k'(v) = k m v^{k-1}.
inline double v_argmax_l(int k, int m, double theta) {
    if (!(theta > 1.0)) throw std::domain_error("v_argmax_l: theta > 1 required");
    // (theta-1) * sum_i (k-i) v^{-i} - k m is continuous decreasing in v > 0
    auto g = [&](double v) {
        double s = 0.0;
        for (int i = 1; i <= k - 1; ++i) s += (k - i) * std::pow(v, -i);
        return (theta - 1.0) * s - static_cast<double>(k) * m;
    };
    double hi = 1.0;
    while (g(hi) > 0.0) hi *= 2.0;
    double lo = hi * 0.5;
    while (g(lo) < 0.0) lo *= 0.5;
    return bisect_root(g, lo, hi);
}

inline double l_star(int k, int q, int m, double theta) {
    return l_func(k, q, m, v_argmax_l(k, m, theta), theta);
}

/// theta_m: unique zero of the increasing map theta -> max_v L_m(v; theta).
inline double theta_m(int k, int q, int m) {
    if (m < 1 || m > q - 2) throw std::invalid_argument("theta_m: m in 1..q-2 required");
    auto f = [&](double th) { return l_star(k, q, m, th); };
    return bisect_root_expand_up(f, 1.0 + 1e-12, 2.0);
}

/// Positivity interval V_m^+(theta) = (v_lo, v_hi) around the L_m argmax.
inline std::pair<double, double> positivity_interval(int k, int q, int m, double theta) {
    double vm = v_argmax_l(k, m, theta);
    auto L = [&](double v) { return l_func(k, q, m, v, theta); };
    if (L(vm) <= 0.0) throw std::domain_error("positivity_interval: theta <= theta_m");
    double lo = vm * 0.5;
    while (L(lo) > 0.0) lo *= 0.5;
    double hi = vm * 2.0;
    while (L(hi) > 0.0) hi *= 2.0;
    return {bisect_root(L, lo, vm), bisect_root(L, vm, hi)};
}

namespace detail {

struct KScan {
    std::vector<double> v;  // scan grid inside the positivity interval
    std::vector<double> f;  // K_m(v) on the grid
};

/// Dense scan of K_m over V_m^+. K dives to zero at both interval endpoints
/// but can spike inside boundary layers much narrower than the interval, so
/// the log-spaced core grid is completed by geometric ladders toward each
/// endpoint (absolute and multiplicative). K can be multimodal; counting and
/// maximization both run off this grid.
inline KScan scan_k(int k, int q, int m, double theta, int grid_points = 2000) {
    auto [vlo, vhi] = positivity_interval(k, q, m, theta);
    double w = vhi - vlo;
    KScan s;
    s.v.reserve(grid_points + 240);
    double a = std::log(vlo + w * 1e-6), b = std::log(vhi - w * 1e-6);
    for (int j = 0; j < grid_points; ++j)
        s.v.push_back(std::exp(a + (b - a) * j / (grid_points - 1.0)));
    for (int j = 1; j <= 52; ++j) {
        double step = w * std::pow(0.5, j);
        s.v.push_back(vlo + step);
        s.v.push_back(vhi - step);
        s.v.push_back(vlo * (1.0 + std::pow(0.5, j)));
        s.v.push_back(vhi * (1.0 - std::pow(0.5, j)));
    }
    std::erase_if(s.v, [&](double v) { return !(v > vlo && v < vhi); });
    std::sort(s.v.begin(), s.v.end());
    s.v.erase(std::unique(s.v.begin(), s.v.end()), s.v.end());
    s.f.resize(s.v.size());
    for (std::size_t j = 0; j < s.v.size(); ++j) s.f[j] = k_func(k, q, m, s.v[j], theta);
    return s;
}

/// Critical points of v -> K_m(v) inside the positivity interval: sign
/// changes of the analytic derivative on the scan grid, pinned by bisection.
inline std::vector<double> k_critical_points(int k, int q, int m, double theta, const KScan& s) {
    std::vector<double> crit;
    auto dk = [&](double v) { return k_deriv_sign_part(k, q, m, v, theta); };
    double prev = dk(s.v[0]);
    for (std::size_t j = 1; j < s.v.size(); ++j) {
        double cur = dk(s.v[j]);
        if (prev == 0.0)
            crit.push_back(s.v[j - 1]);
        else if ((prev > 0.0) != (cur > 0.0))
            crit.push_back(bisect_root(dk, s.v[j - 1], s.v[j]));
        prev = cur;
    }
    return crit;
}

}  // namespace detail

/// K_m^*(theta) = max over the positivity interval: grid scan plus exact
/// refinement of every interior critical point (K can be multimodal).
inline std::pair<double, double> k_star(int k, int q, int m, double theta) {
    detail::KScan s = detail::scan_k(k, q, m, theta);
    double best_v = s.v[0], best_f = s.f[0];
    for (std::size_t j = 1; j < s.v.size(); ++j)
        if (s.f[j] > best_f) {
            best_f = s.f[j];
            best_v = s.v[j];
        }
    for (double v : detail::k_critical_points(k, q, m, theta, s)) {
        double fv = k_func(k, q, m, v, theta);
        if (fv > best_f) {
            best_f = fv;
            best_v = v;
        }
    }
    return {best_v, best_f};
}

/// alpha_m(theta) = ln K_m^*(theta) / ln theta for theta > theta_m.
inline double alpha_m(int k, int q, int m, double theta) {
    if (theta < 1.0 + 1e-9) throw std::domain_error("alpha_m: theta too close to 1");
    return std::log(k_star(k, q, m, theta).second) / std::log(theta);
}

// ---------------------------------------------------------------------------
// Zeros of the critical curves
// ---------------------------------------------------------------------------

/// Sole positive root of m sum i v^{k-i} = (m'+1) sum i v^{i-k}  (increasing LHS-RHS).
inline double v_m_zero(int k, int q, int m) {
    int mp1 = q - 1 - m + 1;
    auto g = [&](double v) {
        double s = 0.0;
        for (int i = 1; i <= k - 1; ++i) s += i * (m * std::pow(v, k - i) - mp1 * std::pow(v, i - k));
        return s;
    };
    double hi = 2.0;
    while (g(hi) < 0.0) hi *= 2.0;
    double lo = 0.5;
    while (g(lo) > 0.0) lo *= 0.5;
    return bisect_root(g, lo, hi);
}

/// Zero of alpha_m: theta_m^0 = 1 + (m v^k + m' + 1)/p_k(v) at v = v_m^0.
/// (This is the L_m(v;theta) = 1 double-root condition.)
inline double theta_m_zero(int k, int q, int m) {
    double v = v_m_zero(k, q, m);
    return 1.0 + (m * std::pow(v, k) + (q - 1 - m) + 1.0) / p_k_poly(k, v);
}

/// Zero of alpha_+.
inline double theta_0_plus(int k, int q) {
    if (q == 2) return theta_c(k, 2);
    return 1.0 + static_cast<double>(q) / (k - 1);
}

/// Zero of alpha_-; coincides with the zero of alpha_1 (theta_c for q = 2).
inline double theta_0_minus(int k, int q) {
    if (q == 2) return theta_c(k, 2);
    return theta_m_zero(k, q, 1);
}

/// Additional q=3 critical value.
inline double tilde_theta_1(int k) {
    return (5.0 - k + std::sqrt(49.0 * k * k + 62.0 * k + 49.0)) / (6.0 * (k - 1));
}

struct CriticalConstants {
    double theta_c = 0.0;
    double theta_0 = 0.0;
    double theta_star = 0.0;
    double theta_0_plus = 0.0;
    double theta_0_minus = 0.0;
    std::vector<double> theta_m;       // m = 1..q-2
    std::vector<double> theta_m0;      // m = 1..floor((q-1)/2)
    double tilde_theta_1 = 0.0;        // meaningful for q = 3 only
};

inline CriticalConstants critical_constants(int k, int q) {
    CriticalConstants c;
    c.theta_c = theta_c(k, q);
    c.theta_0 = theta_0(k, q);
    c.theta_star = theta_star(k, q);
    c.theta_0_plus = theta_0_plus(k, q);
    c.theta_0_minus = theta_0_minus(k, q);
    for (int m = 1; m <= q - 2; ++m) c.theta_m.push_back(theta_m(k, q, m));
    for (int m = 1; 2 * m <= q - 1; ++m) c.theta_m0.push_back(theta_m_zero(k, q, m));
    if (q == 3) c.tilde_theta_1 = tilde_theta_1(k);
    return c;
}

struct CurveSample {
    std::vector<double> theta;                  // ascending grid
    std::vector<double> alpha_minus, alpha_plus;   // NaN below theta_c
    std::vector<std::vector<double>> alpha_m;      // [m-1][i], NaN below theta_m
};

inline CurveSample sample_curves(int k, int q, double theta_min, double theta_max, int steps) {
    if (steps < 2 || theta_max <= theta_min)
        throw std::invalid_argument("sample_curves: need an ascending range and steps >= 2");
    const double tc = theta_c(k, q);
    std::vector<double> tms;
    for (int m = 1; m <= q - 2; ++m) tms.push_back(theta_m(k, q, m));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CurveSample s;
    s.alpha_m.resize(q - 2);
    for (int i = 0; i < steps; ++i) {
        double th = theta_min + (theta_max - theta_min) * i / (steps - 1.0);
        s.theta.push_back(th);
        if (th >= tc && th > 1.0 + 1e-9) {
            auto [am, ap] = alpha_pm(k, q, th);
            s.alpha_minus.push_back(am);
            s.alpha_plus.push_back(ap);
        } else {
            s.alpha_minus.push_back(nan);
            s.alpha_plus.push_back(nan);
        }
        for (int m = 1; m <= q - 2; ++m)
            s.alpha_m[m - 1].push_back(th > tms[m - 1] ? alpha_m(k, q, m, th) : nan);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Appendix-B polynomials for q = 3 and the closed-form d^2K_1/dv^2 at v = 1
// ---------------------------------------------------------------------------

/// R~(y; t) for k in {2,3,4}, y = v + 1/v.
inline double r_tilde(int k, double y, double t) {
    switch (k) {
        case 2:
            return -y * (t + 4.0) + t * t + 3.0 * t - 2.0;
        case 3:
            return (t + 3.0) * (2.0 * t * y - 2.0 * (y * y - 2.0) + 5.0 * t - 4.0 * y);
        case 4:
            return t * t * (3.0 * y * y * y + 11.0 * y * y + 16.0 * y + 8.0) -
                   t * (3.0 * y * y * y * y + y * y * y - 25.0 * y * y - 60.0 * y - 40.0) -
                   (8.0 * y * y * y * y + 24.0 * y * y * y + 16.0 * y * y - 36.0 * y - 48.0);
        default:
            throw std::invalid_argument("r_tilde: k must be 2, 3 or 4");
    }
}

/// Positive zero t* of t -> R~(2; t); tilde_theta_1 = t* + 1.
inline double t_star(int k) {
    switch (k) {
        case 2: return 0.5 * (std::sqrt(41.0) - 1.0);
        case 3: return 4.0 / 3.0;
        case 4: return (std::sqrt(1081.0) - 17.0) / 18.0;
        default: throw std::invalid_argument("t_star: k must be 2, 3 or 4");
    }
}

/// The factor chi(v) > 0 in R(v;t) = chi(v) * R~(v + 1/v; t).
inline double chi_factor(int k, double v) {
    switch (k) {
        case 2: return v;
        case 3: return v * v * (v + 1.0);
        case 4: return v * v * v * v;
        default: throw std::invalid_argument("chi_factor: k must be 2, 3 or 4");
    }
}

struct Q3Polys {
    double r;        // R(v; t)
    double r_tilde;  // R~(y; t), y = v + 1/v
};

inline Q3Polys q3_appendix_polys(int k, double v, double t) {
    if (v <= 0.0) throw std::domain_error("q3_appendix_polys: v > 0 required");
    double y = v + 1.0 / v;
    double rt = r_tilde(k, y, t);
    return {chi_factor(k, v) * rt, rt};
}

/// Closed form of d^2 K_1 / dv^2 at v = 1 (q = 3), t = theta - 1; changes
/// sign exactly at tilde_theta_1.
inline double second_derivative_k1_at_1(int k, double theta) {
    double t = theta - 1.0;
    double den = (k - 1.0) * (t + 1.0) - 2.0;
    if (den <= 0.0) throw std::domain_error("second_derivative_k1_at_1: (k-1)theta - 2 <= 0");
    double quad = 0.5 * (k - 1.0) * (k - 1.0) * t * t + (k - 1.0) * (7.0 * k - 11.0) * t / 6.0 -
                  3.0 * k + 1.0;
    return std::pow(k / den, k + 1) * 0.5 * (k - 1.0) * quad;
}

// ---------------------------------------------------------------------------
// Root counting
// ---------------------------------------------------------------------------

namespace detail {

inline void push_unique_root(std::vector<double>& roots, double v) {
    for (double r : roots)
        if (std::fabs(r - v) <= 1e-8 * std::max(1.0, std::fabs(r))) return;
    roots.push_back(v);
}

}  // namespace detail

/// Admissible roots v of theta^alpha = K_m(v; theta), v in V_m^+, v != 1.
/// Transversal roots come from grid sign changes refined by bisection;
/// points where K grazes the level (local extremum of K - theta^alpha within
/// tangency_tol of zero) count once, which is what puts the boundary curve
/// alpha = alpha_m(theta) itself in the counted region.
inline std::vector<double> count_pair_roots(int k, int q, int m, double theta, double alpha,
                                            double tangency_tol = 1e-9) {
    if (q < 3 || m < 1 || m > q - 2) throw std::invalid_argument("count_pair: m in 1..q-2, q >= 3");
    if (l_star(k, q, m, theta) <= 0.0) return {};  // theta <= theta_m
    const double level = std::pow(theta, alpha);
    detail::KScan s = detail::scan_k(k, q, m, theta);
    std::vector<double> roots;
    auto G = [&](double v) { return k_func(k, q, m, v, theta) - level; };
    for (std::size_t j = 0; j + 1 < s.v.size(); ++j) {
        double f0 = s.f[j] - level, f1 = s.f[j + 1] - level;
        if (f0 == 0.0) detail::push_unique_root(roots, s.v[j]);
        if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0))
            detail::push_unique_root(roots, bisect_root(G, s.v[j], s.v[j + 1]));
    }
    // tangential roots: critical points where K grazes the level
    for (double x : detail::k_critical_points(k, q, m, theta, s)) {
        if (std::fabs(k_func(k, q, m, x, theta) - level) < tangency_tol * std::max(1.0, level))
            detail::push_unique_root(roots, x);
    }
    // the v = 1 exclusion
    std::erase_if(roots, [](double v) { return std::fabs(v - 1.0) <= 1e-8; });
    std::sort(roots.begin(), roots.end());
    return roots;
}

inline int count_pair(int k, int q, int m, double theta, double alpha) {
    return static_cast<int>(count_pair_roots(k, q, m, theta, alpha).size());
}

/// u recovered from a pair root v.
inline double u_from_v(int k, int q, int m, double v, double theta) {
    double pk = p_k_poly(k, v);
    return (pk + l_func(k, q, m, v, theta)) / (pk + 1.0);
}

inline std::uint64_t binomial(int n, int r) {
    if (r < 0 || r > n) return 0;
    std::uint64_t acc = 1;
    for (int i = 1; i <= r; ++i) acc = acc * (n - r + i) / i;
    return acc;
}

/// Zero-field count: nu(theta, 0) = 1 + sum_m C(q-1, m) * #{u != 1 : L_m(u) = 1}.
inline int count_zero_field(int k, int q, double theta) {
    if (!(theta >= 1.0)) throw std::invalid_argument("count_zero_field: theta >= 1 required");
    if (theta == 1.0) return 1;
    int total = 1;
    for (int m = 1; m <= q - 1; ++m) {
        double vm = v_argmax_l(k, m, theta);
        double lstar = l_func(k, q, m, vm, theta);
        auto G = [&](double u) { return l_func(k, q, m, u, theta) - 1.0; };
        std::vector<double> roots;
        if (std::fabs(lstar - 1.0) <= 1e-12) {
            roots.push_back(vm);
        } else if (lstar > 1.0) {
            double lo = vm * 0.5;
            while (G(lo) > 0.0) lo *= 0.5;
            double hi = vm * 2.0;
            while (G(hi) > 0.0) hi *= 2.0;
            roots.push_back(bisect_root(G, lo, vm));
            roots.push_back(bisect_root(G, vm, hi));
        }
        std::erase_if(roots, [](double u) { return std::fabs(u - 1.0) <= 1e-8; });
        total += static_cast<int>(binomial(q - 1, m)) * static_cast<int>(roots.size());
    }
    return total;
}

struct CountReport {
    int nu = 0;                    // total count
    int nu0 = 0;                   // scalar-branch count
    std::vector<int> pair_counts;  // r_m for m = 1..q-2
    std::string region;            // "inside A" / "inside B" / "inside A and B" / "outside"
    bool q3_boundary_caveat = false;  // on alpha = alpha_1(theta), theta <= tilde_theta_1
};

/// Total count nu(theta, alpha) = nu_0 + sum_m C(q-2, m) r_m with the region
/// label of the non-uniqueness diagram. alpha = 0 has its own classifier.
inline CountReport count_total(int k, int q, double theta, double alpha, double band = 1e-7) {
    if (!(theta > 1.0)) throw std::invalid_argument("count_total: theta > 1 required");
    if (alpha == 0.0) throw std::invalid_argument("count_total: use count_zero_field at alpha = 0");
    CountReport rep;
    rep.nu0 = count_scalar(k, q, theta, alpha, band);
    rep.nu = rep.nu0;
    for (int m = 1; m <= q - 2; ++m) {
        int r = count_pair(k, q, m, theta, alpha);
        rep.pair_counts.push_back(r);
        rep.nu += static_cast<int>(binomial(q - 2, m)) * r;
    }

    bool in_a = false, in_b = false;
    if (theta > theta_c(k, q)) {
        auto [am, ap] = alpha_pm(k, q, theta);
        in_a = alpha >= am - band && alpha <= ap + band;
    }
    if (q >= 3) {
        double th1 = theta_m(k, q, 1);
        if (theta > th1) {
            double a1 = alpha_m(k, q, 1, theta);
            if (q == 3) {
                bool on_curve = std::fabs(alpha - a1) <= band;
                in_b = alpha < a1 - band || (on_curve && theta > tilde_theta_1(k));
                if (on_curve && theta <= tilde_theta_1(k)) rep.q3_boundary_caveat = true;
            } else {
                in_b = alpha <= a1 + band;
            }
        }
    }
    rep.region = in_a && in_b ? "inside A and B" : in_a ? "inside A" : in_b ? "inside B" : "outside";
    return rep;
}

// ---------------------------------------------------------------------------
// Solutions of the full system and the brute-force enumerator
// ---------------------------------------------------------------------------

enum class HomKind { Trivial, ScalarType, PairType, Other };

struct HomSolution {
    std::vector<double> z;  // positive (q-1)-vector
    HomKind kind = HomKind::Other;
    int m = 0;          // block size for pair_type (or scalar block at alpha = 0)
    double u = 1.0;     // distinguished value
    double v = 1.0;     // block value for pair_type
    std::uint64_t placement_count = 1;
    double residual = 0.0;
};

namespace detail {

/// Right-hand sides of the z-system; all components lie in (0, theta].
inline void system_rhs(int k, int q, double theta, double alpha, std::span<const double> z,
                       std::span<double> rhs) {
    const int d = q - 1;
    double ta = std::pow(theta, alpha);
    std::vector<double> xk(d);
    double denom = theta;
    for (int i = 0; i < d; ++i) {
        xk[i] = (i == 0 ? ta : 1.0) * std::pow(z[i], k);
        denom += xk[i];
    }
    for (int i = 0; i < d; ++i) rhs[i] = 1.0 + (theta - 1.0) * (xk[i] - 1.0) / denom;
}

/// Residual map in log coordinates, R_i(w) = w_i - ln rhs_i(e^w), plus its
/// analytic Jacobian.
struct LogSystem {
    int k, q;
    double theta, alpha;

    void residual(std::span<const double> w, std::span<double> r) const {
        const int d = q - 1;
        std::vector<double> z(d), rhs(d);
        for (int i = 0; i < d; ++i) z[i] = std::exp(w[i]);
        system_rhs(k, q, theta, alpha, z, rhs);
        for (int i = 0; i < d; ++i) r[i] = w[i] - std::log(rhs[i]);
    }

    void jacobian(std::span<const double> w, std::vector<double>& jac) const {
        const int d = q - 1;
        double ta = std::pow(theta, alpha);
        std::vector<double> xk(d), rhs(d);
        double denom = theta;
        for (int i = 0; i < d; ++i) {
            xk[i] = (i == 0 ? ta : 1.0) * std::exp(k * w[i]);
            denom += xk[i];
        }
        for (int i = 0; i < d; ++i) rhs[i] = 1.0 + (theta - 1.0) * (xk[i] - 1.0) / denom;
        jac.assign(d * d, 0.0);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                // d rhs_i / d X_j, then chain through X_j = c e^{k w_j}
                double drhs = (i == j)
                                  ? (theta - 1.0) * (denom - (xk[i] - 1.0)) / (denom * denom)
                                  : -(theta - 1.0) * (xk[i] - 1.0) / (denom * denom);
                jac[i * d + j] = (i == j ? 1.0 : 0.0) - drhs * k * xk[j] / rhs[i];
            }
        }
    }
};

/// Solves jac * x = b in place (Gaussian elimination, partial pivoting).
inline bool solve_linear(std::vector<double> a, std::vector<double> b, std::span<double> x) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / a[col * n + col];
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
        x[r] = s / a[r * n + r];
    }
    return true;
}

inline double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

/// Damped Newton from one start; returns w on success.
inline bool newton_solve(const LogSystem& sys, std::vector<double> w, double w_cap,
                         std::vector<double>& out) {
    const int d = sys.q - 1;
    std::vector<double> r(d), step(d), jac, wtry(d), rtry(d);
    sys.residual(w, r);
    double rn = inf_norm(r);
    for (int it = 0; it < 120; ++it) {
        if (rn < 1e-13) {
            out = w;
            return true;
        }
        sys.jacobian(w, jac);
        std::vector<double> neg(r.begin(), r.end());
        for (double& x : neg) x = -x;
        if (!solve_linear(jac, neg, step)) return false;
        double lambda = 1.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            for (int i = 0; i < d; ++i)
                wtry[i] = std::clamp(w[i] + lambda * step[i], -w_cap, w_cap);
            sys.residual(wtry, rtry);
            if (inf_norm(rtry) < rn) {
                w = wtry;
                r = rtry;
                rn = inf_norm(r);
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) return false;
    }
    return false;
}

}  // namespace detail

/// Shape classification of a z-vector against the block structure of the
/// homogeneous system's solutions.
inline void classify_solution(HomSolution& s, double alpha, double tol = 1e-6) {
    const int d = static_cast<int>(s.z.size());
    std::vector<double> nontrivial;
    for (double z : s.z)
        if (std::fabs(z - 1.0) > tol) {
            bool known = false;
            for (double w : nontrivial)
                if (std::fabs(w - z) <= tol * std::max(1.0, std::fabs(w))) known = true;
            if (!known) nontrivial.push_back(z);
        }
    if (nontrivial.empty()) {
        s.kind = HomKind::Trivial;
        s.placement_count = 1;
        return;
    }
    if (nontrivial.size() == 1) {
        double u = nontrivial[0];
        int count = 0;
        for (double z : s.z)
            if (std::fabs(z - u) <= tol * std::max(1.0, std::fabs(u))) ++count;
        s.kind = HomKind::ScalarType;
        s.u = u;
        s.m = count;
        s.placement_count = alpha == 0.0 ? binomial(d, count) : 1;
        return;
    }
    if (nontrivial.size() == 2 && alpha != 0.0) {
        // pair type: u alone in the first coordinate, v on a block elsewhere
        double u = s.z[0];
        double v = std::fabs(nontrivial[0] - u) <= tol ? nontrivial[1] : nontrivial[0];
        int mcount = 0;
        bool structured = std::fabs(s.z[0] - u) <= tol;
        for (int i = 1; i < d; ++i) {
            if (std::fabs(s.z[i] - v) <= tol * std::max(1.0, std::fabs(v)))
                ++mcount;
            else if (std::fabs(s.z[i] - 1.0) > tol)
                structured = false;
        }
        if (structured && mcount >= 1) {
            s.kind = HomKind::PairType;
            s.u = u;
            s.v = v;
            s.m = mcount;
            s.placement_count = binomial(d - 1, mcount);
            return;
        }
    }
    s.kind = HomKind::Other;
}

/// Independent verifier: multi-start damped Newton on the z-system in log
/// coordinates (quasi-random box starts plus structured starts on the
/// block-ansatz manifolds), deduplicated and re-verified.
inline std::vector<HomSolution> oracle_enumerate(int k, int q, double theta, double alpha,
                                                 int quasi_starts = 10'000) {
    if (q > 6) throw std::invalid_argument("oracle_enumerate: q <= 6 only (dimension q-1 <= 5)");
    const int d = q - 1;
    detail::LogSystem sys{k, q, theta, alpha};
    const double wlo = std::log(1e-3);
    const double whi = std::max((k + 2) * std::log(std::max(theta, 1.0 + 1e-12)), 1.0);
    const double w_cap = std::max(std::fabs(wlo), std::fabs(whi)) + 10.0;

    std::vector<std::vector<double>> starts;
    starts.reserve(quasi_starts + 4000);
    // additive quasi-random lattice (Kronecker sequence on golden-ratio powers)
    {
        static const double alphas[5] = {0.6180339887498949, 0.7548776662466927,
                                         0.8191725133961645, 0.8566748838545029,
                                         0.8812714616335696};
        std::vector<double> x(d, 0.5);
        for (int s = 0; s < quasi_starts; ++s) {
            std::vector<double> w(d);
            for (int i = 0; i < d; ++i) {
                x[i] += alphas[i % 5];
                if (x[i] >= 1.0) x[i] -= 1.0;
                w[i] = wlo + (whi - wlo) * x[i];
            }
            starts.push_back(std::move(w));
        }
    }
    // structured starts on the block manifolds
    {
        std::vector<double> grid;
        for (int j = 0; j < 40; ++j)
            grid.push_back(wlo + (whi - wlo) * j / 39.0);
        starts.push_back(std::vector<double>(d, 0.0));  // trivial
        for (double wu : grid) {
            std::vector<double> w(d, 0.0);
            w[0] = wu;
            starts.push_back(std::move(w));  // scalar ansatz
        }
        if (d >= 2) {
            std::vector<double> coarse;
            for (int j = 0; j < 14; ++j) coarse.push_back(wlo + (whi - wlo) * j / 13.0);
            for (int m = 1; m <= q - 2; ++m) {
                std::vector<int> subset(m);
                // enumerate m-subsets of positions {1..d-1}
                std::function<void(int, int)> rec = [&](int from, int depth) {
                    if (depth == m) {
                        for (double wu : coarse)
                            for (double wv : coarse) {
                                std::vector<double> w(d, 0.0);
                                w[0] = wu;
                                for (int pos : subset) w[pos] = wv;
                                starts.push_back(std::move(w));
                            }
                        return;
                    }
                    for (int p = from; p < d; ++p) {
                        subset[depth] = p;
                        rec(p + 1, depth + 1);
                    }
                };
                rec(1, 0);
            }
        }
    }

    std::vector<std::vector<double>> found(starts.size());
    std::vector<char> ok(starts.size(), 0);
    parallel_for(starts.size(), [&](std::size_t i) {
        std::vector<double> w;
        if (detail::newton_solve(sys, starts[i], w_cap, w)) {
            found[i] = std::move(w);
            ok[i] = 1;
        }
    });

    // ordered dedup at 1e-6 in log coordinates
    std::vector<std::vector<double>> unique;
    for (std::size_t i = 0; i < found.size(); ++i) {
        if (!ok[i]) continue;
        bool dup = false;
        for (const auto& u : unique) {
            double dmax = 0.0;
            for (int j = 0; j < d; ++j) dmax = std::max(dmax, std::fabs(u[j] - found[i][j]));
            if (dmax <= 1e-6) {
                dup = true;
                break;
            }
        }
        if (!dup) unique.push_back(found[i]);
    }

    std::vector<HomSolution> sols;
    std::vector<double> rhs(d);
    for (const auto& w : unique) {
        HomSolution s;
        s.z.resize(d);
        for (int j = 0; j < d; ++j) s.z[j] = std::exp(w[j]);
        detail::system_rhs(k, q, theta, alpha, s.z, rhs);
        double r = 0.0;
        for (int j = 0; j < d; ++j) r = std::max(r, std::fabs(s.z[j] - rhs[j]));
        if (r >= 1e-10) continue;  // re-verification gate
        s.residual = r;
        classify_solution(s, alpha);
        sols.push_back(std::move(s));
    }
    if (sols.empty()) throw std::logic_error("oracle_enumerate: no solutions found");
    std::sort(sols.begin(), sols.end(),
              [](const HomSolution& a, const HomSolution& b) { return a.z < b.z; });
    return sols;
}

/// GBC assignment of a completely homogeneous solution on a ball:
/// H = k ln z off the root, and the root value given by the recursion.
inline GbcAssignment homogeneous_assignment(const Ball& ball, int q, std::span<const double> z,
                                            double alpha, double theta) {
    GbcAssignment h(ball, q);
    const int d = q - 1;
    std::vector<double> h0(d), arg(d), img(d);
    for (int i = 0; i < d; ++i) h0[i] = ball.k() * std::log(z[i]);
    for (int i = 0; i < d; ++i) arg[i] = h0[i] + (i == 0 ? alpha * std::log(theta) : 0.0);
    f_map_into(arg, theta, img);
    for (std::size_t x = 1; x < ball.size(); ++x) h.h[x] = h0;
    for (int i = 0; i < d; ++i) h.h[0][i] = (ball.k() + 1) * img[i];
    return h;
}

}  // namespace potts
