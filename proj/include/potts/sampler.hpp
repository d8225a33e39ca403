#pragma once

// Exact realization of the splitting measure on finite balls: boundary laws
// on directed edges, root-outward forward sampling (exact when the GBC is
// compatible, by the splitting factorization), and the finite-ball
// translation-invariance checks.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "potts/field.hpp"
#include "potts/freetree.hpp"
#include "potts/model.hpp"
#include "potts/parallel.hpp"
#include "potts/rng.hpp"
#include "potts/uniqueness.hpp"

namespace potts {

// Per directed edge <x,y>: positive q-vector z(x,y), stored max-normalized
// (the proportionality constant c(x,y) is arbitrary anyway).
struct BoundaryLaw {
    const Ball* ball = nullptr;
    int q = 0;
    // inward[x]: law on <x, parent(x)>, x > 0
    std::vector<std::vector<double>> inward;
    // outward[x][slot]: law on <x, child>, slot = child index - first child index
    std::vector<std::vector<std::vector<double>>> outward;
};

inline int child_slot(const Ball& ball, std::size_t parent, std::size_t child) {
    auto [cb, ce] = ball.children(parent);
    if (static_cast<std::int64_t>(child) < cb || static_cast<std::int64_t>(child) >= ce)
        throw std::logic_error("child_slot: not a child");
    return static_cast<int>(static_cast<std::int64_t>(child) - cb);
}

namespace detail {

inline std::vector<double> max_normalized_exp(std::vector<double> logv) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : logv) m = std::max(m, x);
    for (double& x : logv) x = std::exp(x - m);
    return logv;
}

inline std::vector<double> log_full(const std::vector<double>& reduced) {
    std::vector<double> full(reduced.begin(), reduced.end());
    full.push_back(0.0);
    return full;
}

}  // namespace detail

/// Fills inward edges from z_i(x, parent) = e^{beta h_i(x)} and outward
/// edges by the root-anchored induction of the consistency relation
///   z_i(x,y) = c prod_{v in boundary(x)-{y}} sum_j z_j(v,x) e^{beta J d_ij + beta xi_j(v)}.
/// Requires a compatible assignment (that is what makes the two definitions
/// of the law on inward edges agree).
inline BoundaryLaw outward_law(const ModelParams& params, const Ball& ball,
                               const FieldRealization& xi, const GbcAssignment& h,
                               double residual_tol = 1e-8) {
    double res = compatibility_residual(h, xi, params.theta).max_residual;
    if (res >= residual_tol)
        throw std::invalid_argument("outward_law: incompatible GBC, residual = " +
                                    std::to_string(res));
    const int q = params.q;
    const double beta = params.beta();
    BoundaryLaw law;
    law.ball = &ball;
    law.q = q;
    law.inward.assign(ball.size(), {});
    law.outward.assign(ball.size(), {});

    for (std::size_t x = 1; x < ball.size(); ++x)
        law.inward[x] = detail::max_normalized_exp(detail::log_full(h.h[x]));

    // log of sum_j z_j(v,x) exp{beta delta_ij + beta xi_j(v)}
    auto edge_factor = [&](const std::vector<double>& zvx, std::size_t v, int i) {
        std::vector<double> xv = detail::log_full(xi[v]);
        double m = -std::numeric_limits<double>::infinity();
        std::vector<double> terms(q);
        for (int j = 0; j < q; ++j) {
            terms[j] = std::log(zvx[j]) + (i == j ? beta : 0.0) + beta * xv[j];
            m = std::max(m, terms[j]);
        }
        double s = 0.0;
        for (int j = 0; j < q; ++j) s += std::exp(terms[j] - m);
        return m + std::log(s);
    };

    for (std::size_t x = 0; x < ball.size(); ++x) {
        auto [cb, ce] = ball.children(x);
        if (cb == ce) continue;
        for (std::int64_t y = cb; y < ce; ++y) {
            std::vector<double> lz(q, 0.0);
            for (int i = 0; i < q; ++i) {
                double acc = 0.0;
                for (std::int64_t v = cb; v < ce; ++v)
                    if (v != y) acc += edge_factor(law.inward[v], v, i);
                if (x != 0) {
                    const std::size_t par = ball.parent(x);
                    acc += edge_factor(law.outward[par][child_slot(ball, par, x)], par, i);
                }
                lz[i] = acc;
            }
            law.outward[x].push_back(detail::max_normalized_exp(std::move(lz)));
        }
    }
    return law;
}

struct SpinSample {
    std::vector<std::uint8_t> spins;  // 1..q per vertex, BFS order
    std::uint64_t seed = 0;
    int depth = 0;
};

/// Root-outward forward sampling: root spin from exp{beta xi + H}, then each
/// vertex from exp{beta J delta + beta xi + H} given its parent spin. Exact
/// for compatible assignments by the splitting property.
inline std::vector<SpinSample> sample_configuration(const ModelParams& params, const Ball& ball,
                                                    const FieldRealization& xi,
                                                    const GbcAssignment& h, int count,
                                                    std::uint64_t seed,
                                                    double residual_tol = 1e-8) {
    double res = compatibility_residual(h, xi, params.theta).max_residual;
    if (res >= residual_tol)
        throw std::invalid_argument("sample_configuration: incompatible GBC, residual = " +
                                    std::to_string(res));
    const int q = params.q;
    const double beta = params.beta();
    const std::size_t nv = ball.size();

    std::vector<std::vector<double>> site(nv, std::vector<double>(q));
    for (std::size_t x = 0; x < nv; ++x)
        for (int s = 0; s < q; ++s)
            site[x][s] = s < q - 1 ? beta * xi[x][s] + h.h[x][s] : 0.0;

    auto cumulative = [&](std::size_t x, int parent_spin /* -1 for the root */) {
        std::vector<double> w(q);
        double m = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < q; ++s) {
            w[s] = site[x][s] + (parent_spin == s ? beta : 0.0);
            m = std::max(m, w[s]);
        }
        double z = 0.0;
        for (int s = 0; s < q; ++s) {
            w[s] = std::exp(w[s] - m);
            z += w[s];
        }
        double acc = 0.0;
        for (int s = 0; s < q; ++s) {
            acc += w[s] / z;
            w[s] = acc;
        }
        w[q - 1] = 1.0;
        return w;
    };

    // conditionals depend on (vertex, parent spin) only
    std::vector<std::vector<std::vector<double>>> cond(nv);
    for (std::size_t x = 0; x < nv; ++x) {
        if (x == 0) {
            cond[x] = {cumulative(x, -1)};
        } else {
            cond[x].reserve(q);
            for (int ps = 0; ps < q; ++ps) cond[x].push_back(cumulative(x, ps));
        }
    }

    std::vector<SpinSample> out(count);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t s) {
        CounterRng rng(seed, "sample/" + std::to_string(s));
        SpinSample& smp = out[s];
        smp.seed = seed;
        smp.depth = ball.depth();
        smp.spins.resize(nv);
        for (std::size_t x = 0; x < nv; ++x) {
            const std::vector<double>& cum =
                x == 0 ? cond[x][0] : cond[x][smp.spins[ball.parent(x)] - 1];
            double u = rng.next_unit();
            int spin = 0;
            while (spin < q - 1 && u >= cum[spin]) ++spin;
            smp.spins[x] = static_cast<std::uint8_t>(spin + 1);
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Translation-invariance checking (finite-ball version of the criterion)
// ---------------------------------------------------------------------------
struct TiReport {
    double field_deviation = 0.0;     // (i) max |xi(x) - xi(root)|
    double symmetry_deviation = 0.0;  // (ii) max |h+(x,y) - h+(y,x)|
    double shift_deviation = 0.0;     // (iii) max over tested shifts
    bool invariant(double tol = 1e-9) const {
        return field_deviation < tol && symmetry_deviation < tol && shift_deviation < tol;
    }
};

namespace detail {

/// Reduced h-dagger of a directed edge from a (max-normalized) law entry.
inline std::vector<double> reduced_dagger(const std::vector<double>& law, double beta) {
    const int q = static_cast<int>(law.size());
    std::vector<double> r(q - 1);
    for (int i = 0; i + 1 < q; ++i) r[i] = (std::log(law[i]) - std::log(law[q - 1])) / beta;
    return r;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace detail

/// Checks the three conditions of the invariance criterion on the ball:
/// (i) constant reduced field, (ii) symmetric h-dagger on edges, and
/// (iii) shift invariance of h-dagger. Shifts are tested up to length
/// min(depth-1, max_shift_length); only image edges inside the ball count.
inline TiReport check_translation_invariance(const ModelParams& params, const Ball& ball,
                                             const FieldRealization& xi, const GbcAssignment& h,
                                             double residual_tol = 1e-8,
                                             int max_shift_length = 3) {
    if (ball.depth() < 2)
        throw std::invalid_argument("check_translation_invariance: depth >= 2 required");
    TiReport rep;
    const double beta = params.beta();

    for (std::size_t x = 1; x < ball.size(); ++x)
        rep.field_deviation = std::max(rep.field_deviation, detail::max_abs_diff(xi[x], xi[0]));

    BoundaryLaw law = outward_law(params, ball, xi, h, residual_tol);
    std::vector<std::vector<double>> up(ball.size()), down(ball.size());
    for (std::size_t x = 1; x < ball.size(); ++x) {
        up[x] = detail::reduced_dagger(law.inward[x], beta);
        const std::size_t par = ball.parent(x);
        down[x] = detail::reduced_dagger(law.outward[par][child_slot(ball, par, x)], beta);
        rep.symmetry_deviation =
            std::max(rep.symmetry_deviation, detail::max_abs_diff(up[x], down[x]));
    }

    const int zlen = std::min(ball.depth() - 1, max_shift_length);
    for (std::int64_t zi = 1; zi < ball.sphere_end(zlen); ++zi) {
        const GroupWord& z = ball.word(zi);
        for (std::size_t x = 1; x < ball.size(); ++x) {
            const std::size_t y = ball.parent(x);
            std::int32_t tx = ball.find(translate(z, ball.word(x)));
            std::int32_t ty = ball.find(translate(z, ball.word(y)));
            if (tx < 0 || ty < 0) continue;
            // the image of the inward edge <x,y> may point either way
            const std::vector<double>* img = nullptr;
            if (ball.parent(tx) == ty)
                img = &up[tx];
            else if (static_cast<std::int32_t>(ball.parent(ty)) == tx)
                img = &down[ty];
            else
                continue;
            rep.shift_deviation = std::max(rep.shift_deviation, detail::max_abs_diff(up[x], *img));
        }
    }
    return rep;
}

/// Boundary law as JSON keyed by "from>to" vertex strings.
inline nlohmann::json boundary_law_to_json(const BoundaryLaw& law) {
    nlohmann::json j = nlohmann::json::object();
    const Ball& ball = *law.ball;
    for (std::size_t x = 1; x < ball.size(); ++x)
        j[to_string(ball.word(x)) + ">" + to_string(ball.word(ball.parent(x)))] = law.inward[x];
    for (std::size_t x = 0; x < ball.size(); ++x) {
        auto [cb, ce] = ball.children(x);
        for (std::int64_t y = cb; y < ce; ++y)
            j[to_string(ball.word(x)) + ">" + to_string(ball.word(y))] =
                law.outward[x][y - cb];
    }
    return j;
}

/// Finite-depth gap estimate: max over ell of the minimum over the ball of
/// the per-ell coordinate gap of the realized field.
inline double estimate_gap(const FieldSpec& spec, int k, int q, int n, std::uint64_t seed) {
    Ball ball(k, n);
    FieldRealization xi = realize_field(spec, ball, q, seed);
    double best = -std::numeric_limits<double>::infinity();
    for (int ell = 1; ell <= q; ++ell) {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& v : xi) lo = std::min(lo, detail::ell_min_gap(v, ell));
        best = std::max(best, lo);
    }
    return best;
}

}  // namespace potts
