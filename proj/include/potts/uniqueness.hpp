#pragma once

// Uniqueness machinery: the scalar functions phi and Q, the critical roots
// theta_0 / theta_*_gamma / theta_dagger, the contraction bound, and the
// fixed-point iterator for the recursion on finite balls.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "potts/field.hpp"
#include "potts/freetree.hpp"
#include "potts/model.hpp"
#include "potts/rootfind.hpp"

namespace potts {

/// phi(t; theta) for t >= theta >= 1, evaluated in the overflow-free form
/// (theta-1) / (sqrt(theta - theta/t) + sqrt(1 - theta/t))^2. Decreasing in t,
/// with phi(theta;theta) = 1 and phi(inf;theta) = (sqrt th - 1)/(sqrt th + 1).
inline double phi(double t, double theta) {
    if (!(theta >= 1.0)) throw std::domain_error("phi: theta >= 1 required");
    if (std::isinf(t)) {
        double r = std::sqrt(theta);
        return (r - 1.0) / (r + 1.0);
    }
    if (t < theta) throw std::domain_error("phi: t >= theta required");
    if (t == theta) return 1.0;
    double a = std::sqrt(theta - theta / t), b = std::sqrt(1.0 - theta / t);
    return (theta - 1.0) / ((a + b) * (a + b));
}

inline double q_func(double theta, int q) {
    double r = std::sqrt(theta);
    return (q - 2) * (r - 1.0) / (r + 1.0);
}

/// t_gamma(theta) = theta + 1 + (q-2) theta^gamma.
inline double t_gamma(double theta, int q, double gamma) {
    return theta + 1.0 + (q - 2) * std::pow(theta, gamma);
}

/// Root of Q(theta) + (theta-1)/(theta+1) = 1/k; closed form (k+1)/(k-1) at q=2.
inline double theta_0(int k, int q) {
    if (q == 2) return static_cast<double>(k + 1) / (k - 1);
    auto f = [&](double th) { return q_func(th, q) + (th - 1.0) / (th + 1.0) - 1.0 / k; };
    return bisect_root_expand_up(f, 1.0, 2.0);
}

/// Root of (q-1)(theta-1)/(theta+1) = 1/k.
inline double theta_star(int k, int q) {
    return static_cast<double>(k * (q - 1) + 1) / (k * (q - 1) - 1);
}

/// Root of Q(theta) + phi(t_gamma(theta); theta) = 1/k. Nondecreasing in
/// gamma; constant (= theta_0) for q = 2.
inline double theta_star_gamma(int k, int q, double gamma) {
    if (q == 2) return theta_0(k, 2);
    auto f = [&](double th) {
        return q_func(th, q) + phi(t_gamma(th, q, gamma), th) - 1.0 / k;
    };
    return bisect_root_expand_up(f, 1.0, 2.0);
}

// ---------------------------------------------------------------------------
// Asymptotic gap of a field spec and the averaged threshold theta_dagger.
// ---------------------------------------------------------------------------
struct GapResult {
    double value = 0.0;
    bool analytic = true;       // false for finite-depth estimates
    std::string note;
};

namespace detail {

/// min_{i != ell} (xi_i - xi_ell) from a standard-reduction vector
/// (the implicit q-th coordinate is 0). ell is 1-based.
inline double ell_min_gap(std::span<const double> xi_reduced, int ell) {
    const int q = static_cast<int>(xi_reduced.size()) + 1;
    auto coord = [&](int i) { return i == q ? 0.0 : xi_reduced[i - 1]; };
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= q; ++i)
        if (i != ell) lo = std::min(lo, coord(i) - coord(ell));
    return lo;
}

/// max over ell of the per-ell minimum gap of a single (constant) vector.
inline double constant_gap(std::span<const double> xi_reduced) {
    const int q = static_cast<int>(xi_reduced.size()) + 1;
    double best = -std::numeric_limits<double>::infinity();
    for (int ell = 1; ell <= q; ++ell) best = std::max(best, ell_min_gap(xi_reduced, ell));
    return best;
}

/// Distribution of xi_(1) = min_{i != q}(xi_i - xi_q) for an atom list.
inline std::vector<std::pair<double, double>> xi_min_distribution(const std::vector<FieldAtom>& atoms) {
    std::vector<std::pair<double, double>> vals;
    for (const auto& a : atoms) {
        int q = static_cast<int>(a.xi.size());
        double lo = std::numeric_limits<double>::infinity();
        for (int i = 0; i + 1 < q; ++i) lo = std::min(lo, a.xi[i] - a.xi[q - 1]);
        vals.emplace_back(lo, a.p);
    }
    return vals;
}

/// True when the atom distribution is invariant under coordinate
/// permutations: every permutation of an atom's vector carries the same
/// total probability as the atom itself.
inline bool atoms_exchangeable(const std::vector<FieldAtom>& atoms, double tol = 1e-12) {
    auto prob_of = [&](const std::vector<double>& v) {
        double p = 0.0;
        for (const auto& a : atoms) {
            bool same = true;
            for (std::size_t i = 0; i < v.size() && same; ++i)
                if (std::fabs(a.xi[i] - v[i]) > tol) same = false;
            if (same) p += a.p;
        }
        return p;
    };
    for (const auto& a : atoms) {
        std::vector<double> perm = a.xi;
        std::sort(perm.begin(), perm.end());
        double p0 = prob_of(a.xi);
        do {
            if (std::fabs(prob_of(perm) - p0) > tol) return false;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return true;
}

}  // namespace detail

/// Asymptotic gap Delta^xi of a field spec. Analytic for constant and
/// exchangeable i.i.d. specs; a duplicated root makes the gap random and is
/// rejected (use estimate_gap on a realization instead).
inline GapResult gap_delta_xi(const FieldSpec& spec, int q) {
    GapResult g;
    switch (spec.kind) {
        case FieldKind::ConstantReduced:
            g.value = detail::constant_gap(spec.xi_reduced);
            return g;
        case FieldKind::IidDiscrete: {
            // max over ell of the a.s. liminf of the per-ell coordinate gap;
            // for exchangeable atoms this is inf supp(xi_1 - xi_q)
            int qq = static_cast<int>(spec.atoms[0].xi.size());
            double best = -std::numeric_limits<double>::infinity();
            for (int ell = 0; ell < qq; ++ell) {
                double lo = std::numeric_limits<double>::infinity();
                for (const auto& a : spec.atoms) {
                    if (a.p <= 0.0) continue;
                    for (int i = 0; i < qq; ++i)
                        if (i != ell) lo = std::min(lo, a.xi[i] - a.xi[ell]);
                }
                best = std::max(best, lo);
            }
            g.value = best;
            return g;
        }
        case FieldKind::IidUniform01:
            g.value = -1.0;
            return g;
        case FieldKind::PerVertex: {
            // finite-depth surrogate over the listed vertices
            double best = -std::numeric_limits<double>::infinity();
            for (int ell = 1; ell <= q; ++ell) {
                double lo = std::numeric_limits<double>::infinity();
                for (const auto& [key, v] : spec.values)
                    lo = std::min(lo, detail::ell_min_gap(v, ell));
                best = std::max(best, lo);
            }
            g.value = best;
            g.analytic = false;
            g.note = "finite-depth estimate over " + std::to_string(spec.values.size()) + " vertices";
            return g;
        }
        case FieldKind::DuplicatedRoot:
            throw std::invalid_argument("gap_delta_xi: gap is random; use per-realization estimate");
    }
    throw std::logic_error("gap_delta_xi: unreachable");
}

/// Root of Q(theta) + E[ phi(t_{xi_(1)-k}(theta); theta) ] = 1/k for an
/// i.i.d. exchangeable spec. Discrete atoms use the exact finite sum;
/// uniform01 uses Gauss-Legendre on the analytic density of
/// W = min(xi_1..xi_{q-1}) - xi_q, namely 1 - (-w)^{q-1} on [-1,0] and
/// (1-w)^{q-1} on [0,1].
inline double theta_dagger(int k, int q, const FieldSpec& spec) {
    std::function<double(double)> expected_phi;
    if (spec.kind == FieldKind::IidDiscrete) {
        if (!detail::atoms_exchangeable(spec.atoms))
            throw std::invalid_argument("theta_dagger: atom coordinates are not exchangeable");
        auto dist = detail::xi_min_distribution(spec.atoms);
        expected_phi = [dist, k, q](double th) {
            double s = 0.0;
            for (const auto& [v, p] : dist) s += p * phi(t_gamma(th, q, v - k), th);
            return s;
        };
    } else if (spec.kind == FieldKind::IidUniform01) {
        expected_phi = [k, q](double th) {
            auto f = [&](double w) {
                double dens = w < 0.0 ? 1.0 - std::pow(-w, q - 1) : std::pow(1.0 - w, q - 1);
                return dens * phi(t_gamma(th, q, w - k), th);
            };
            return gauss_legendre_integrate(f, -1.0, 0.0, 256) +
                   gauss_legendre_integrate(f, 0.0, 1.0, 256);
        };
    } else {
        throw std::invalid_argument("theta_dagger: spec must be i.i.d. with exchangeable coordinates");
    }
    auto g = [&](double th) { return q_func(th, q) + expected_phi(th) - 1.0 / k; };
    return bisect_root_expand_up(g, 1.0, 2.0);
}

/// Analytic contraction bound lambda <= k (Q(theta) + phi(t_gamma(theta))).
/// Without a gamma the uniform bound k (Q + (theta-1)/(theta+1)) applies;
/// < 1 certifies the contraction.
inline double contraction_lambda(int k, int q, double theta, std::optional<double> gamma = {}) {
    if (!(theta >= 1.0)) throw std::invalid_argument("contraction_lambda: theta >= 1 required");
    double ph = gamma ? phi(t_gamma(theta, q, *gamma), theta) : (theta - 1.0) / (theta + 1.0);
    return k * (q_func(theta, q) + ph);
}

// ---------------------------------------------------------------------------
// Fixed-point iteration of g <- Psi g on a finite ball.
// ---------------------------------------------------------------------------
enum class LeafMode {
    Held,     // leaf g-values act as free boundary data, kept fixed
    Refresh,  // leaves take Psi with empty successor sum: g = F(beta*xi)
};

struct IterationTrace {
    int depth = 0;
    bool converged = false;
    int sweeps = 0;
    std::vector<double> sweep_updates;   // max update per sweep
    std::vector<double> sweep_norms;     // ||g||_V per sweep (interior)
    std::vector<std::vector<double>> g;  // final assignment, BFS order
};

/// Sweeps spheres W_{n-1} .. W_0 (Jacobi within a sphere; vertices of one
/// sphere depend only on the one below, so the update order inside a sphere
/// is immaterial and the result is deterministic).
inline IterationTrace iterate_psi(const ModelParams& params, const Ball& ball,
                                  const FieldRealization& xi,
                                  const std::vector<std::vector<double>>& g0, double tol = 1e-10,
                                  int max_sweeps = 1000, LeafMode leaf_mode = LeafMode::Held) {
    if (ball.depth() < 1) throw std::invalid_argument("iterate_psi: ball depth >= 1 required");
    const double beta = params.beta();
    const std::size_t d = params.q - 1;
    IterationTrace tr;
    tr.depth = ball.depth();
    tr.g = g0;

    if (leaf_mode == LeafMode::Refresh) {
        std::vector<double> arg(d);
        for (std::int64_t x = ball.sphere_begin(ball.depth()); x < ball.sphere_end(ball.depth()); ++x) {
            for (std::size_t i = 0; i < d; ++i) arg[i] = beta * xi[x][i];
            f_map_into(arg, params.theta, tr.g[x]);
        }
    }

    std::vector<double> arg(d), img(d);
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double max_update = 0.0, norm = 0.0;
        for (int depth = ball.depth() - 1; depth >= 0; --depth) {
            for (std::int64_t x = ball.sphere_begin(depth); x < ball.sphere_end(depth); ++x) {
                for (std::size_t i = 0; i < d; ++i) arg[i] = beta * xi[x][i];
                auto [cb, ce] = ball.children(x);
                for (std::int64_t y = cb; y < ce; ++y)
                    for (std::size_t i = 0; i < d; ++i) arg[i] += tr.g[y][i];
                f_map_into(arg, params.theta, img);
                for (std::size_t i = 0; i < d; ++i) {
                    max_update = std::max(max_update, std::fabs(img[i] - tr.g[x][i]));
                    tr.g[x][i] = img[i];
                    norm = std::max(norm, std::fabs(img[i]));
                }
            }
        }
        tr.sweeps = sweep;
        tr.sweep_updates.push_back(max_update);
        tr.sweep_norms.push_back(norm);
        if (max_update < tol) {
            tr.converged = true;
            break;
        }
    }
    return tr;
}

/// The GBC induced by a g-assignment: H(x) = sum_{y in S(x)} g(y) on the
/// interior (leaves keep no induced value and are zeroed).
inline GbcAssignment gbc_from_g(const Ball& ball, int q, const std::vector<std::vector<double>>& g) {
    GbcAssignment h(ball, q);
    for (std::int64_t x = 0; x < ball.interior_size(); ++x) {
        auto [cb, ce] = ball.children(x);
        for (std::int64_t y = cb; y < ce; ++y)
            for (int i = 0; i < q - 1; ++i) h.h[x][i] += g[y][i];
    }
    return h;
}

// ---------------------------------------------------------------------------
// Verdict
// ---------------------------------------------------------------------------
enum class Verdict { UniqueT2, UniqueT3, UniqueT4As, Unknown };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::UniqueT2: return "unique_t2";
        case Verdict::UniqueT3: return "unique_t3";
        case Verdict::UniqueT4As: return "unique_t4_as";
        default: return "unknown";
    }
}

struct UniquenessVerdict {
    Verdict verdict = Verdict::Unknown;
    double threshold = 0.0;      // the governing threshold value
    std::string threshold_name;  // "theta_0" | "theta_star_gamma" | "theta_dagger"
    double gap = 0.0;            // Delta^xi when available
    bool gap_analytic = true;
};

/// Strongest applicable certificate, checked in the order t2, t3, t4.
/// Never claims non-uniqueness.
inline UniquenessVerdict uniqueness_verdict(int k, int q, double theta, const FieldSpec& spec) {
    UniquenessVerdict v;
    double th0 = theta_0(k, q);
    if (theta < th0) {
        v.verdict = Verdict::UniqueT2;
        v.threshold = th0;
        v.threshold_name = "theta_0";
        return v;
    }
    bool have_gap = false;
    try {
        GapResult g = gap_delta_xi(spec, q);
        v.gap = g.value;
        v.gap_analytic = g.analytic;
        have_gap = true;
    } catch (const std::invalid_argument&) {
        // random gap (duplicated root): no t3/t4 certificate
    }
    if (have_gap) {
        double th3 = theta_star_gamma(k, q, v.gap - k);
        if (theta < th3) {
            v.verdict = Verdict::UniqueT3;
            v.threshold = th3;
            v.threshold_name = "theta_star_gamma";
            return v;
        }
    }
    if (spec.kind == FieldKind::IidUniform01 ||
        (spec.kind == FieldKind::IidDiscrete && detail::atoms_exchangeable(spec.atoms))) {
        double th4 = theta_dagger(k, q, spec);
        if (theta < th4) {
            v.verdict = Verdict::UniqueT4As;
            v.threshold = th4;
            v.threshold_name = "theta_dagger";
            return v;
        }
    }
    v.verdict = Verdict::Unknown;
    return v;
}

}  // namespace potts
