// Command-line front end: critical constants, phase-diagram curve sweeps,
// solution counting, uniqueness certificates, fixed-point iteration,
// sampling, and compatibility verification with reproducible file outputs.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 verification
// mismatch.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "potts/potts.hpp"
#include "potts/rng.hpp"

using nlohmann::json;
using namespace potts;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMismatch = 3;

/// Writes output atomically: temp file in the target directory, then rename.
void write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::ios_base::failure("cannot open " + tmp.string());
        out << content;
        if (!out.flush()) throw std::ios_base::failure("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

void emit(const std::optional<std::string>& out_path, const std::string& content) {
    if (out_path)
        write_file(*out_path, content);
    else
        std::cout << content;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

FieldSpec load_field_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open field spec " + path);
    json j;
    in >> j;
    return field_spec_from_json(j);
}

json constants_json(int k, int q) {
    CriticalConstants c = critical_constants(k, q);
    json j;
    j["theta_c"] = c.theta_c;
    j["theta_0"] = c.theta_0;
    j["theta_star"] = c.theta_star;
    j["theta_0_plus"] = c.theta_0_plus;
    j["theta_0_minus"] = c.theta_0_minus;
    j["theta_m"] = c.theta_m;
    j["theta_m0"] = c.theta_m0;
    if (q == 3) j["tilde_theta_1"] = c.tilde_theta_1;
    return j;
}

std::string curves_csv(int k, int q, double tmin, double tmax, int steps) {
    CurveSample s = sample_curves(k, q, tmin, tmax, steps);

    std::ostringstream csv;
    csv << "theta,alpha_minus,alpha_plus";
    for (int m = 1; m <= q - 2; ++m) csv << ",alpha_m" << m;
    csv << '\n';

    auto cell = [&](double v) {
        if (!std::isnan(v)) csv << fmt17(v);
    };
    double prev_minus = std::numeric_limits<double>::infinity();
    std::vector<double> prev_m(q - 1, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < s.theta.size(); ++i) {
        csv << fmt17(s.theta[i]) << ',';
        cell(s.alpha_minus[i]);
        csv << ',';
        cell(s.alpha_plus[i]);
        if (!std::isnan(s.alpha_minus[i])) {
            if (s.alpha_minus[i] > prev_minus + 1e-12)
                std::cerr << "warning: alpha_minus not decreasing at theta = " << s.theta[i] << '\n';
            prev_minus = s.alpha_minus[i];
        }
        for (int m = 1; m <= q - 2; ++m) {
            double a = s.alpha_m[m - 1][i];
            csv << ',';
            cell(a);
            if (std::isnan(a)) continue;
            if (m > 1 && !std::isnan(s.alpha_m[0][i]) && a > s.alpha_m[0][i] + 1e-9)
                std::cerr << "warning: alpha_m" << m
                          << " exceeds the alpha_1 majorant at theta = " << s.theta[i] << '\n';
            if (a < prev_m[m - 1] - 1e-12)
                std::cerr << "warning: alpha_m" << m << " not increasing at theta = " << s.theta[i]
                          << '\n';
            prev_m[m - 1] = a;
        }
        csv << '\n';
    }
    return csv.str();
}

std::string gnuplot_stub(const std::string& csv_path, int k, int q) {
    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel 'theta'\nset ylabel 'alpha'\n"
       << "set title 'critical curves, k=" << k << " q=" << q << "'\n"
       << "plot for [col=2:" << q << "] '" << csv_path << "' using 1:col with lines\n";
    return gp.str();
}

json solution_json(const HomSolution& s) {
    json j;
    j["z"] = s.z;
    switch (s.kind) {
        case HomKind::Trivial: j["kind"] = "trivial"; break;
        case HomKind::ScalarType: j["kind"] = "scalar_type"; break;
        case HomKind::PairType: j["kind"] = "pair_type"; break;
        default: j["kind"] = "other"; break;
    }
    if (s.kind == HomKind::PairType) {
        j["m"] = s.m;
        j["u"] = s.u;
        j["v"] = s.v;
    } else if (s.kind == HomKind::ScalarType) {
        j["u"] = s.u;
    }
    j["placement_count"] = s.placement_count;
    j["residual"] = s.residual;
    return j;
}

struct CompatTrial {
    double residual_compatible, tv_compatible;
    double residual_perturbed, tv_perturbed;
    bool consistent;
};

CompatTrial run_compat_trial(int k, int q, double theta, int depth, std::uint64_t seed, int trial,
                             double tol_res, double tol_tv) {
    Ball outer(k, depth);
    const double beta = std::log(theta);
    CounterRng rng(seed, "verify-compat/" + std::to_string(trial));
    FieldRealization xi(outer.size(), std::vector<double>(q - 1));
    for (auto& v : xi)
        for (double& x : v) x = 2.0 * rng.next_unit() - 1.0;

    GbcAssignment h(outer, q);
    for (std::int64_t x = outer.sphere_begin(depth); x < outer.sphere_end(depth); ++x)
        for (double& v : h.h[x]) v = 2.0 * rng.next_unit() - 1.0;
    for (int d = depth - 1; d >= 0; --d)
        for (std::int64_t x = outer.sphere_begin(d); x < outer.sphere_end(d); ++x) {
            auto [cb, ce] = outer.children(x);
            std::vector<double> acc(q - 1, 0.0), arg(q - 1);
            for (std::int64_t y = cb; y < ce; ++y) {
                for (int i = 0; i < q - 1; ++i) arg[i] = h.h[y][i] + beta * xi[y][i];
                std::vector<double> img = f_map(arg, theta);
                for (int i = 0; i < q - 1; ++i) acc[i] += img[i];
            }
            h.h[x] = acc;
        }

    ModelParams p(k, q, theta);
    CompatTrial t{};
    auto good = check_marginal_consistency(p, outer, xi, h, depth - 1);
    t.residual_compatible = good.residual;
    t.tv_compatible = good.tv;

    GbcAssignment bad = h;
    for (std::int64_t x = 0; x < outer.interior_size(); ++x)
        for (double& v : bad.h[x]) v += 0.2 + 0.3 * rng.next_unit();
    auto broken = check_marginal_consistency(p, outer, xi, bad, depth - 1);
    t.residual_perturbed = broken.residual;
    t.tv_perturbed = broken.tv;

    t.consistent = (t.residual_compatible < tol_res && t.tv_compatible < tol_tv) &&
                   (t.residual_perturbed > 1e-3 && t.tv_perturbed > 1e-6);
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Splitting Gibbs measures of the ferromagnetic Potts model on Cayley trees"};
    app.require_subcommand(1);

    int k = 2, q = 2, depth = 2, steps = 100, m = 1, trials = 20, n_samples = 100;
    double theta = 2.0, alpha = 0.0, theta_min = 1.0, theta_max = 10.0, tol = 1e-10, g0 = 0.0;
    std::optional<std::string> out_path, field_path;
    std::optional<std::uint64_t> seed;
    std::string format = "json";
    bool with_oracle = false, gnuplot = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--k", k, "tree degree (>= 2)");
        cmd->add_option("--q", q, "spin states (>= 2)");
        cmd->add_option("--out", out_path, "output path (atomic write); stdout when omitted");
        cmd->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* c_const = app.add_subcommand("constants", "critical constants as JSON");
    add_common(c_const);

    CLI::App* c_curves = app.add_subcommand("curves", "alpha curves on a theta grid as CSV");
    add_common(c_curves);
    c_curves->add_option("--theta-min", theta_min);
    c_curves->add_option("--theta-max", theta_max);
    c_curves->add_option("--steps", steps)->check(CLI::Range(2, 100000000));
    c_curves->add_flag("--gnuplot-stub", gnuplot, "also emit a gnuplot script next to the CSV");

    CLI::App* c_count = app.add_subcommand("count", "count completely homogeneous solutions");
    add_common(c_count);
    c_count->add_option("--theta", theta)->required();
    c_count->add_option("--alpha", alpha)->required();
    c_count->add_option("--m", m, "report the admissible roots of one pair branch only")
        ->check(CLI::Range(1, 1000));
    c_count->add_flag("--oracle", with_oracle, "cross-check against the brute-force enumerator");

    CLI::App* c_uni = app.add_subcommand("uniqueness", "uniqueness certificate for a field spec");
    add_common(c_uni);
    c_uni->add_option("--theta", theta)->required();
    c_uni->add_option("--field", field_path, "field spec JSON path")->required();

    CLI::App* c_iter = app.add_subcommand("iterate", "fixed-point iteration on a finite ball");
    add_common(c_iter);
    c_iter->add_option("--theta", theta)->required();
    c_iter->add_option("--depth", depth)->required();
    c_iter->add_option("--field", field_path)->required();
    c_iter->add_option("--seed", seed, "field realization seed");
    c_iter->add_option("--tol", tol)->check(CLI::PositiveNumber);
    c_iter->add_option("--g0", g0, "constant initial value for every g entry");

    CLI::App* c_samp = app.add_subcommand("sample", "draw spin configurations of the SGM");
    add_common(c_samp);
    c_samp->add_option("--theta", theta)->required();
    c_samp->add_option("--depth", depth)->required();
    c_samp->add_option("--field", field_path)->required();
    c_samp->add_option("--n-samples", n_samples)->check(CLI::PositiveNumber);
    c_samp->add_option("--seed", seed, "seed (required)");
    c_samp->add_option("--tol", tol)->check(CLI::PositiveNumber);

    CLI::App* c_ver = app.add_subcommand("verify-compat", "compatibility iff-test on random instances");
    add_common(c_ver);
    c_ver->add_option("--theta", theta)->required();
    c_ver->add_option("--depth", depth)->required();
    c_ver->add_option("--trials", trials);
    c_ver->add_option("--seed", seed, "seed (required)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_const->parsed()) {
            ModelParams check(k, q, 1.0);  // validates k, q
            emit(out_path, constants_json(k, q).dump(2) + "\n");
        } else if (c_curves->parsed()) {
            if (theta_max <= theta_min) throw std::invalid_argument("curves: range must ascend");
            std::string csv = curves_csv(k, q, theta_min, theta_max, steps);
            emit(out_path, csv);
            if (gnuplot) {
                if (!out_path) throw std::invalid_argument("--gnuplot-stub requires --out");
                write_file(*out_path + ".gp", gnuplot_stub(*out_path, k, q));
            }
        } else if (c_count->parsed()) {
            json j;
            int nu;
            if (c_count->count("--m") > 0) {
                if (alpha == 0.0)
                    throw std::invalid_argument("count --m: use the full count at alpha = 0");
                auto roots = count_pair_roots(k, q, m, theta, alpha);
                j["m"] = m;
                j["pair_roots"] = roots;
                j["count"] = roots.size();
                json us = json::array();
                for (double v : roots) us.push_back(u_from_v(k, q, m, v, theta));
                j["pair_u"] = us;
                emit(out_path, j.dump(2) + "\n");
                return kExitOk;
            }
            if (alpha == 0.0) {
                nu = count_zero_field(k, q, theta);
                j["nu"] = nu;
                j["branch"] = "zero_field";
            } else {
                CountReport rep = count_total(k, q, theta, alpha);
                nu = rep.nu;
                j["nu"] = rep.nu;
                j["nu0"] = rep.nu0;
                j["pair_counts"] = rep.pair_counts;
                j["region"] = rep.region;
                if (rep.q3_boundary_caveat)
                    j["caveat"] = "on the q=3 boundary curve; conjecture-dependent for k > 4";
            }
            if (with_oracle) {
                auto sols = oracle_enumerate(k, q, theta, alpha);
                j["oracle_count"] = sols.size();
                json arr = json::array();
                for (const auto& s : sols) arr.push_back(solution_json(s));
                j["solutions"] = arr;
                if (static_cast<int>(sols.size()) != nu) {
                    j["mismatch"] = true;
                    emit(out_path, j.dump(2) + "\n");
                    return kExitMismatch;
                }
            }
            emit(out_path, j.dump(2) + "\n");
        } else if (c_uni->parsed()) {
            FieldSpec spec = load_field_spec(*field_path);
            UniquenessVerdict v = uniqueness_verdict(k, q, theta, spec);
            json j;
            j["verdict"] = verdict_name(v.verdict);
            j["theta"] = theta;
            if (v.verdict != Verdict::Unknown) {
                j["threshold"] = v.threshold;
                j["threshold_name"] = v.threshold_name;
            }
            if (v.verdict == Verdict::UniqueT3 || v.verdict == Verdict::UniqueT4As) {
                j["gap"] = v.gap;
                j["gap_analytic"] = v.gap_analytic;
            }
            emit(out_path, j.dump(2) + "\n");
        } else if (c_iter->parsed()) {
            FieldSpec spec = load_field_spec(*field_path);
            bool stochastic = spec.kind == FieldKind::IidDiscrete ||
                              spec.kind == FieldKind::IidUniform01 ||
                              spec.kind == FieldKind::DuplicatedRoot;
            if (stochastic && !seed)
                throw std::invalid_argument("iterate: --seed required for a random field spec");
            ModelParams p(k, q, theta);
            Ball ball(k, depth);
            FieldRealization xi = realize_field(spec, ball, q, seed.value_or(0));
            std::vector<std::vector<double>> init(ball.size(), std::vector<double>(q - 1, g0));
            IterationTrace tr = iterate_psi(p, ball, xi, init, tol);
            json j;
            j["depth"] = tr.depth;
            j["converged"] = tr.converged;
            j["sweeps"] = tr.sweeps;
            j["sweep_updates"] = tr.sweep_updates;
            j["final_residual"] = tr.sweep_updates.empty() ? 0.0 : tr.sweep_updates.back();
            json g = json::object();
            for (std::size_t x = 0; x < ball.size(); ++x) g[to_string(ball.word(x))] = tr.g[x];
            j["g"] = g;
            emit(out_path, j.dump(2) + "\n");
        } else if (c_samp->parsed()) {
            if (!seed) throw std::invalid_argument("sample: --seed is required (no hidden entropy)");
            FieldSpec spec = load_field_spec(*field_path);
            ModelParams p(k, q, theta);
            Ball ball(k, depth);
            FieldRealization xi = realize_field(spec, ball, q, *seed);
            // boundary-free fixed point: leaves refreshed, exact compatibility
            std::vector<std::vector<double>> init(ball.size(), std::vector<double>(q - 1, 0.0));
            IterationTrace tr =
                iterate_psi(p, ball, xi, init, 1e-13, 2000, LeafMode::Refresh);
            GbcAssignment h = gbc_from_g(ball, q, tr.g);
            auto samples = sample_configuration(p, ball, xi, h, n_samples, *seed);
            // CSV blocks are the default; explicit --format json adds the law
            if (c_samp->count("--format") > 0 && format == "json") {
                json j;
                j["boundary_law"] = boundary_law_to_json(outward_law(p, ball, xi, h));
                json arr = json::array();
                for (const auto& s : samples) arr.push_back(s.spins);
                j["samples"] = arr;
                emit(out_path, j.dump(2) + "\n");
            } else {
                std::ostringstream csv;
                csv << "vertex,spin\n";
                for (std::size_t s = 0; s < samples.size(); ++s) {
                    csv << "# sample " << s << '\n';
                    for (std::size_t x = 0; x < ball.size(); ++x)
                        csv << to_string(ball.word(x)) << ',' << int(samples[s].spins[x]) << '\n';
                }
                emit(out_path, csv.str());
            }
        } else if (c_ver->parsed()) {
            if (!seed) throw std::invalid_argument("verify-compat: --seed is required");
            if (depth < 1) throw std::invalid_argument("verify-compat: depth >= 1 required");
            json arr = json::array();
            bool all_ok = true;
            for (int t = 0; t < trials; ++t) {
                CompatTrial tr = run_compat_trial(k, q, theta, depth, *seed, t, 1e-10, 1e-8);
                json jt;
                jt["residual_compatible"] = tr.residual_compatible;
                jt["tv_compatible"] = tr.tv_compatible;
                jt["residual_perturbed"] = tr.residual_perturbed;
                jt["tv_perturbed"] = tr.tv_perturbed;
                jt["consistent"] = tr.consistent;
                arr.push_back(jt);
                all_ok = all_ok && tr.consistent;
            }
            json j;
            j["trials"] = arr;
            j["all_consistent"] = all_ok;
            emit(out_path, j.dump(2) + "\n");
            if (!all_ok) return kExitMismatch;
        }
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}
