#pragma once

// Potts model context and the compatibility machinery: the map F, per-vertex
// residuals of the recursion, and exact Gibbs tables on tiny balls.
//
// Conventions used throughout:
//   * J = 1, beta = ln(theta), so theta = e^{beta J} carries the temperature.
//   * Field values xi are stored UNscaled (multiplied by beta at use).
//   * GBC values are stored already scaled: H(x) := beta * h_reduced(x).

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "potts/freetree.hpp"
#include "potts/parallel.hpp"

namespace potts {

struct ModelParams {
    int k = 2;           // tree degree
    int q = 2;           // spin states
    double theta = 1.0;  // activity e^{beta J} >= 1

    ModelParams(int k_, int q_, double theta_) : k(k_), q(q_), theta(theta_) {
        if (k < 2) throw std::invalid_argument("ModelParams: k >= 2 required");
        if (q < 2) throw std::invalid_argument("ModelParams: q >= 2 required");
        if (!(theta >= 1.0)) throw std::invalid_argument("ModelParams: theta >= 1 (ferromagnetic)");
    }

    double beta() const { return std::log(theta); }
};

/// q-1 differences against the reference coordinate `reduction_index`
/// (1-based; the reference coordinate is the implicit zero).
struct ReducedVector {
    std::vector<double> entries;
    int reduction_index;  // default q

    ReducedVector() : reduction_index(0) {}
    explicit ReducedVector(std::vector<double> e, int ell = 0)
        : entries(std::move(e)), reduction_index(ell) {}
};

/// Reduce a full q-vector by subtracting coordinate ell (1-based).
/// Entries keep their original coordinate order with the ell-th removed.
inline std::vector<double> reduce_full(std::span<const double> full, int ell) {
    int q = static_cast<int>(full.size());
    if (ell < 1 || ell > q) throw std::invalid_argument("reduce_full: bad reduction index");
    std::vector<double> r;
    r.reserve(q - 1);
    for (int i = 0; i < q; ++i)
        if (i != ell - 1) r.push_back(full[i] - full[ell - 1]);
    return r;
}

/// Embed a standard-reduction (ell = q) vector as a full q-vector with 0 last.
inline std::vector<double> embed_reduced(std::span<const double> red) {
    std::vector<double> full(red.begin(), red.end());
    full.push_back(0.0);
    return full;
}

// ---------------------------------------------------------------------------
// The map F(u; theta), componentwise
//   F_i(u) = ln[((theta-1) e^{u_i} + 1 + sum_j e^{u_j}) / (theta + sum_j e^{u_j})]
// evaluated in shifted log-domain so entries up to +-700 do not overflow.
// ---------------------------------------------------------------------------
inline void f_map_into(std::span<const double> u, double theta, std::span<double> out) {
    const std::size_t d = u.size();
    double m = 0.0;  // shift by max(u_j, 0)
    for (double v : u) {
        if (!std::isfinite(v)) throw std::invalid_argument("f_map: non-finite input");
        if (v > m) m = v;
    }
    double s = 0.0;  // sum_j e^{u_j - m}
    for (double v : u) s += std::exp(v - m);
    const double e0 = std::exp(-m);  // e^{0 - m}
    const double den = std::log(theta * e0 + s);
    for (std::size_t i = 0; i < d; ++i) {
        double eui = std::exp(u[i] - m);
        out[i] = std::log((theta - 1.0) * eui + e0 + s) - den;
    }
}

inline std::vector<double> f_map(std::span<const double> u, double theta) {
    if (!(theta >= 1.0)) throw std::invalid_argument("f_map: theta >= 1 required");
    std::vector<double> out(u.size());
    f_map_into(u, theta, out);
    return out;
}

/// F conjugated to the ell-th reduction (1-based): entries of u are the
/// coordinates != ell in coordinate order, the ell-th is the implicit zero.
/// With ell = q this is f_map.
inline std::vector<double> f_map_ell(std::span<const double> u, double theta, int ell) {
    const int q = static_cast<int>(u.size()) + 1;
    if (ell < 1 || ell > q) throw std::invalid_argument("f_map_ell: bad reduction index");
    std::vector<double> full;
    full.reserve(q);
    for (int i = 0; i < q - 1; ++i) {
        if (i == ell - 1) full.push_back(0.0);
        full.push_back(u[i]);
    }
    if (ell == q) full.push_back(0.0);
    double m = 0.0;
    for (double v : full) m = std::max(m, v);
    double s = 0.0;
    for (double v : full) s += std::exp(v - m);
    const double den = std::log((theta - 1.0) * std::exp(-m) + s);
    std::vector<double> out;
    out.reserve(q - 1);
    for (int i = 0; i < q; ++i)
        if (i != ell - 1)
            out.push_back(std::log((theta - 1.0) * std::exp(full[i] - m) + s) - den);
    return out;
}

// ---------------------------------------------------------------------------
// Per-vertex data on a ball: scaled GBC assignment H(x) = beta*h(x) and an
// unscaled reduced field realization xi(x), both in BFS vertex order.
// ---------------------------------------------------------------------------
struct GbcAssignment {
    const Ball* ball = nullptr;
    std::vector<std::vector<double>> h;  // scaled reduced vectors, size q-1

    GbcAssignment() = default;
    GbcAssignment(const Ball& b, int q)
        : ball(&b), h(b.size(), std::vector<double>(q - 1, 0.0)) {}
};

using FieldRealization = std::vector<std::vector<double>>;  // unscaled reduced xi per vertex

struct ResidualReport {
    double max_residual = 0.0;
    std::vector<double> per_vertex;  // size = interior vertex count, BFS order
};

/// Max-norm residual of the compatibility recursion at every interior vertex:
///   r(x) = || H(x) - sum_{y in S(x)} F(H(y) + beta*xi(y); theta) ||_inf
inline ResidualReport compatibility_residual(const GbcAssignment& h, const FieldRealization& xi,
                                             double theta) {
    const Ball& ball = *h.ball;
    const std::int64_t interior = ball.interior_size();
    if (interior == 0) throw std::invalid_argument("compatibility_residual: depth-0 ball has no interior");
    const double beta = std::log(theta);
    const std::size_t d = h.h[0].size();
    ResidualReport rep;
    rep.per_vertex.assign(interior, 0.0);
    std::vector<double> arg(d), img(d), acc(d);
    for (std::int64_t x = 0; x < interior; ++x) {
        std::fill(acc.begin(), acc.end(), 0.0);
        auto [cb, ce] = ball.children(x);
        for (std::int64_t y = cb; y < ce; ++y) {
            for (std::size_t i = 0; i < d; ++i) arg[i] = h.h[y][i] + beta * xi[y][i];
            f_map_into(arg, theta, img);
            for (std::size_t i = 0; i < d; ++i) acc[i] += img[i];
        }
        double r = 0.0;
        for (std::size_t i = 0; i < d; ++i) r = std::max(r, std::fabs(h.h[x][i] - acc[i]));
        rep.per_vertex[x] = r;
        rep.max_residual = std::max(rep.max_residual, r);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Exact Gibbs table on a tiny ball (brute force; the ground-truth oracle).
//
//   mu(sigma) propto exp{ beta*sum_edges delta + beta*sum_x xi_{sigma(x)}(x)
//                         + sum_{x in W_n} H_{sigma(x)}(x) }
//
// Configurations are indexed in base q with vertex 0 the least significant
// digit, so restriction to the sub-ball V_{n-1} is `index mod q^{|V_{n-1}|}`.
// ---------------------------------------------------------------------------
struct BallMeasure {
    int q = 2;
    std::size_t n_vertices = 0;
    std::vector<double> prob;  // size q^{n_vertices}

    std::size_t states() const { return prob.size(); }
};

/// Full-vector core: per-vertex q-vectors, xi unscaled, H scaled by beta.
inline BallMeasure exact_ball_measure_full(const ModelParams& params, const Ball& ball,
                                           const std::vector<std::vector<double>>& xi_full,
                                           const std::vector<std::vector<double>>& h_full,
                                           std::uint64_t state_budget = 10'000'000) {
    const int q = params.q;
    const std::size_t nv = ball.size();
    double states_d = std::pow(static_cast<double>(q), static_cast<double>(nv));
    if (states_d > static_cast<double>(state_budget))
        throw std::runtime_error("exact_ball_measure: q^|V_n| = " + std::to_string(states_d) +
                                 " exceeds state budget");
    const std::size_t states = static_cast<std::size_t>(states_d + 0.5);
    const double beta = params.beta();

    // per-vertex one-site weights in log domain; the GBC enters at W_n only
    std::vector<std::vector<double>> site(nv, std::vector<double>(q));
    for (std::size_t x = 0; x < nv; ++x)
        for (int s = 0; s < q; ++s) {
            site[x][s] = beta * xi_full[x][s];
            if (ball.is_leaf(x)) site[x][s] += h_full[x][s];
        }

    BallMeasure m;
    m.q = q;
    m.n_vertices = nv;
    m.prob.assign(states, 0.0);

    std::vector<std::int32_t> parent(nv);
    for (std::size_t x = 0; x < nv; ++x) parent[x] = ball.parent(x);

    const unsigned workers = thread_budget();
    const std::size_t chunk = (states + workers - 1) / workers;
    parallel_for(workers, [&](std::size_t w) {
        std::size_t b = w * chunk, e = std::min(states, b + chunk);
        std::vector<int> spin(nv);
        for (std::size_t idx = b; idx < e; ++idx) {
            std::size_t t = idx;
            for (std::size_t x = 0; x < nv; ++x) {
                spin[x] = static_cast<int>(t % q);
                t /= q;
            }
            double lw = 0.0;
            for (std::size_t x = 0; x < nv; ++x) {
                lw += site[x][spin[x]];
                if (parent[x] >= 0 && spin[x] == spin[parent[x]]) lw += beta;
            }
            m.prob[idx] = lw;
        }
    });

    double shift = m.prob[0];
    for (double lw : m.prob) shift = std::max(shift, lw);
    double z = 0.0;
    for (double& w : m.prob) {
        w = std::exp(w - shift);
        z += w;  // fixed order: deterministic normalizer
    }
    for (double& w : m.prob) w /= z;
    return m;
}

/// Reduced-vector wrapper (standard ell = q reduction).
inline BallMeasure exact_ball_measure(const ModelParams& params, const Ball& ball,
                                      const FieldRealization& xi, const GbcAssignment& h,
                                      std::uint64_t state_budget = 10'000'000) {
    std::vector<std::vector<double>> xi_full(ball.size()), h_full(ball.size());
    for (std::size_t x = 0; x < ball.size(); ++x) {
        xi_full[x] = embed_reduced(xi[x]);
        h_full[x] = embed_reduced(h.h[x]);
    }
    return exact_ball_measure_full(params, ball, xi_full, h_full, state_budget);
}

/// Marginal of a depth-(n+1) table onto its depth-n prefix ball.
inline std::vector<double> marginalize_to_prefix(const BallMeasure& m, std::size_t prefix_vertices) {
    std::size_t sub_states = 1;
    for (std::size_t i = 0; i < prefix_vertices; ++i) sub_states *= m.q;
    std::vector<double> out(sub_states, 0.0);
    for (std::size_t idx = 0; idx < m.prob.size(); ++idx) out[idx % sub_states] += m.prob[idx];
    return out;
}

inline double total_variation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return 0.5 * s;
}

struct ConsistencyReport {
    double tv = 0.0;            // TV( marginal of mu_{n+1}, mu_n )
    double residual = 0.0;      // compatibility residual of h on the deeper ball
    bool residual_ok = false;   // residual < tol (the iff-test companion)
};

/// Definitional compatibility test: builds the exact tables at depths n+1 and
/// n from one assignment on V_{n+1} and compares the W_{n+1}-marginal.
inline ConsistencyReport check_marginal_consistency(const ModelParams& params, const Ball& outer,
                                                    const FieldRealization& xi,
                                                    const GbcAssignment& h, int n,
                                                    double residual_tol = 1e-12) {
    if (outer.depth() != n + 1)
        throw std::invalid_argument("check_marginal_consistency: outer ball must have depth n+1");
    Ball inner(outer.k(), n);
    // V_n data is the BFS prefix of the V_{n+1} data
    FieldRealization xi_in(xi.begin(), xi.begin() + inner.size());
    GbcAssignment h_in(inner, params.q);
    for (std::size_t x = 0; x < inner.size(); ++x) h_in.h[x] = h.h[x];

    BallMeasure big = exact_ball_measure(params, outer, xi, h);
    BallMeasure small = exact_ball_measure(params, inner, xi_in, h_in);
    std::vector<double> marg = marginalize_to_prefix(big, inner.size());

    ConsistencyReport rep;
    rep.tv = total_variation(marg, small.prob);
    rep.residual = compatibility_residual(h, xi, params.theta).max_residual;
    rep.residual_ok = rep.residual < residual_tol;
    return rep;
}

}  // namespace potts
