#include <doctest.h>

#include <cmath>
#include <iostream>

#include "potts/homogeneous.hpp"
#include "potts/model.hpp"
#include "potts/rng.hpp"

using namespace potts;

TEST_CASE("theta_c and b") {
    for (int k : {2, 3, 5})
        CHECK(theta_c(k, 2) == doctest::Approx(static_cast<double>(k + 1) / (k - 1)));
    CHECK(theta_c(2, 5) == doctest::Approx(0.5 * (std::sqrt(153.0) - 3.0)).epsilon(1e-14));
    for (int k : {2, 3})
        for (int q : {2, 3, 5}) {
            double rho = static_cast<double>(k + 1) / (k - 1);
            CHECK(b_func(theta_c(k, q), q) == doctest::Approx(rho * rho).epsilon(1e-12));
        }
    CHECK(b_func(1.0, 4) == doctest::Approx(1.0));
}

TEST_CASE("alpha_pm: values at theta_c and at infinity") {
    SUBCASE("cusp value matches the closed form; zero iff q = 2") {
        for (int k : {2, 3})
            for (int q : {2, 3, 5}) {
                double tc = theta_c(k, q);
                auto [am, ap] = alpha_pm(k, q, tc);
                double expect = -(k + 1) + (std::log(q - 1.0) +
                                            (k + 1) * std::log((k + 1.0) / (k - 1.0))) /
                                               std::log(tc);
                CHECK(am == doctest::Approx(expect).epsilon(1e-9));
                CHECK(ap == doctest::Approx(expect).epsilon(1e-9));
                if (q == 2)
                    CHECK(std::fabs(am) < 1e-9);
                else
                    CHECK(am > 0.0);
            }
        auto [am, ap] = alpha_pm(2, 5, theta_c(2, 5));
        CHECK(am == doctest::Approx(0.0319).epsilon(0.03));  // Fig 6 caption, 3 sig digits
        CHECK(std::fabs(am - 0.0319) < 1e-3);
    }
    SUBCASE("large-theta limits are +-(k-1), approached at a 1/ln(theta) rate") {
        // at theta = 1e6 the residual gap is (ln(q-1) + ln 4)/ln(theta) for k = 2
        auto [am, ap] = alpha_pm(2, 2, 1e6);
        CHECK(ap - 1.0 == doctest::Approx(-std::log(4.0) / std::log(1e6)).epsilon(1e-3));
        double prev_gap = 1.0 - ap;
        for (double th : {1e12, 1e24, 1e48}) {
            auto [am2, ap2] = alpha_pm(2, 2, th);
            CHECK(1.0 - ap2 > 0.0);
            CHECK(1.0 - ap2 < prev_gap);
            prev_gap = 1.0 - ap2;
            CHECK(am2 == doctest::Approx(-ap2).epsilon(1e-10));
        }
        CHECK(prev_gap < 2e-2);  // within 1e-2 of the limit only near 1e60
    }
    SUBCASE("domain error below theta_c") {
        CHECK_THROWS_AS(alpha_pm(2, 5, 2.0), std::domain_error);
    }
}

TEST_CASE("alpha_pm: identities and bounds on a theta grid") {
    for (int k : {2, 3})
        for (int q : {2, 3, 5}) {
            double tc = theta_c(k, q);
            double theta_bar =
                q == 2 ? 1.0
                       : (q - 2.0) / (std::pow(q - 1.0, (k - 1.0) / k) - 1.0);
            for (int i = 0; i < 120; ++i) {
                double th = tc + 1e-4 + 20.0 * i / 119.0;
                auto [am, ap] = a_pm(th, k, q);
                CHECK(std::fabs(am * ap * std::pow(b_func(th, q), k + 1) - 1.0) < 1e-9);
                CHECK(ap < 1.0 / b_func(th, q));                    // a_+ < 1/b
                CHECK(am > std::pow(b_func(th, q), -k));            // a_- > b^-k
                auto [alm, alp] = alpha_pm(k, q, th);
                CHECK(alm <= alp);
                CHECK(alm > -(k - 1.0));
                if (th >= theta_bar) CHECK(alp < k - 1.0);
                if (q == 2) CHECK(std::fabs(alm + alp) < 1e-10);
            }
        }
}

TEST_CASE("zeros of alpha_pm") {
    for (auto [k, q] : std::vector<std::pair<int, int>>{{2, 3}, {2, 5}, {3, 4}}) {
        double t0p = theta_0_plus(k, q);
        auto [am_p, ap_p] = alpha_pm(k, q, t0p);
        CHECK(std::fabs(ap_p) < 1e-8);

        double t0m = theta_0_minus(k, q);
        auto [am_m, ap_m] = alpha_pm(k, q, t0m);
        CHECK(std::fabs(am_m) < 1e-8);
        CHECK(t0m == doctest::Approx(theta_m_zero(k, q, 1)));

        // alpha_+ has a flat zero: central finite difference of the slope
        double h = 1e-5;
        auto [x1, up] = alpha_pm(k, q, t0p + h);
        auto [x2, dn] = alpha_pm(k, q, t0p - h);
        CHECK(std::fabs((up - dn) / (2.0 * h)) < 1e-4);
    }
    // q = 2: both zeros collapse onto theta_c = theta_0_plus
    CHECK(theta_0_plus(2, 2) == doctest::Approx(theta_c(2, 2)));
    CHECK(theta_0_minus(3, 2) == doctest::Approx(theta_c(3, 2)));
}

TEST_CASE("count_scalar") {
    CHECK(count_scalar(2, 5, 2.0, 1.7) == 1);  // theta below theta_c
    CHECK(count_scalar(2, 2, 4.0, 0.0) == 3);  // alpha_- < 0 < alpha_+ by antisymmetry
    auto [am, ap] = alpha_pm(2, 2, 4.0);
    CHECK(am < 0.0);
    CHECK(ap > 0.0);
    CHECK(count_scalar(2, 2, 4.0, ap) == 2);           // exact tangency
    CHECK(count_scalar(2, 2, 4.0, ap + 1e-3) == 1);    // outside
    CHECK(count_scalar(2, 2, 4.0, ap - 1e-3) == 3);    // inside
}

TEST_CASE("L and K: special values and scaling identities") {
    SUBCASE("L_m(1) is independent of m") {
        for (int m = 1; m <= 3; ++m)
            CHECK(l_func(3, 5, m, 1.0, 2.7) ==
                  doctest::Approx((2.7 - 1.0) * 2 - 4.0).epsilon(1e-14));
    }
    SUBCASE("conjugation identities at 1000 random points") {
        CounterRng rng(41, "lk-scaling");
        int tested = 0;
        while (tested < 1000) {
            int k = 2 + static_cast<int>(rng.next_u64() % 3);
            int q = 3 + static_cast<int>(rng.next_u64() % 6);
            int m = 1 + static_cast<int>(rng.next_u64() % (q - 2));
            int mp = q - 1 - m;
            double v = 0.2 + 4.8 * rng.next_unit();
            double th = 1.0 + 19.0 * rng.next_unit();
            double l1 = l_func(k, q, mp, v, th);
            double l2 = std::pow(v, k) * l_func(k, q, m, 1.0 / v, th);
            CHECK(std::fabs(l1 - l2) <= 1e-10 * std::max({1.0, std::fabs(l1), std::fabs(l2)}));
            double den1 = p_k_poly(k, v) + l1;
            double den2 = p_k_poly(k, 1.0 / v) + l_func(k, q, m, 1.0 / v, th);
            if (den1 < 0.5 || den2 < 0.5) continue;  // outside the K domain or near its pole
            double k1 = k_func(k, q, mp, v, th);
            double k2 = k_func(k, q, m, 1.0 / v, th);
            CHECK(std::fabs(k1 - k2) <= 1e-10 * std::max({1.0, std::fabs(k1), std::fabs(k2)}));
            ++tested;
        }
    }
    SUBCASE("k_func domain error") {
        // v far right of the positivity interval makes p_k + L negative
        CHECK_THROWS_AS(k_func(2, 5, 3, 50.0, 1.5), std::domain_error);
    }
}

TEST_CASE("theta_m") {
    // k = 2 closed form 1 + 2 sqrt(m(q-m-1))
    for (int q : {3, 4, 5, 6, 7})
        for (int m = 1; m <= q - 2; ++m)
            CHECK(theta_m(2, q, m) ==
                  doctest::Approx(1.0 + 2.0 * std::sqrt(m * (q - m - 1.0))).epsilon(1e-10));
    CHECK(theta_m(2, 5, 1) == doctest::Approx(1.0 + 2.0 * std::sqrt(3.0)));
    CHECK(theta_m(2, 5, 2) == doctest::Approx(5.0));
    // q = 3: theta_1 = 1 + 2/(k-1) for any k
    for (int k : {2, 3, 4, 6})
        CHECK(theta_m(k, 3, 1) == doctest::Approx(1.0 + 2.0 / (k - 1)).epsilon(1e-10));
    // conjugation symmetry
    CHECK(theta_m(3, 6, 1) == doctest::Approx(theta_m(3, 6, 4)).epsilon(1e-9));
    CHECK(theta_m(3, 6, 2) == doctest::Approx(theta_m(3, 6, 3)).epsilon(1e-9));
}

TEST_CASE("alpha_m: divergence, bounds, symmetry, ordering") {
    const int k = 2, q = 5;
    double t1 = theta_m(k, q, 1);

    SUBCASE("diverges to -infinity at theta_m (logarithmically in the offset)") {
        double a6 = alpha_m(k, q, 1, t1 + 1e-6);
        double a10 = alpha_m(k, q, 1, t1 + 1e-10);
        CHECK(a6 < -5.0);
        CHECK(a10 < a6 - 4.0);  // keeps sinking as theta drops toward theta_m
        CHECK(alpha_m(k, q, 1, t1 + 1e-3) > a6);
    }
    SUBCASE("upper bound k-1 and the large-theta limit") {
        double prev = -1e9;
        for (double th : {6.0, 30.0, 1e3, 1e6, 1e13}) {
            double a = alpha_m(k, q, 1, th);
            CHECK(a < k - 1.0);
            CHECK(a > prev);
            prev = a;
        }
        // the limit is approached at a 1/ln(theta) rate
        CHECK(std::fabs(alpha_m(k, q, 1, 1e6) - (k - 1.0)) < 0.15);
        CHECK(std::fabs(alpha_m(k, q, 1, 1e13) - (k - 1.0)) < 0.05);
    }
    SUBCASE("conjugate symmetry alpha_m = alpha_m'") {
        for (double th : {5.2, 6.0, 7.7})
            CHECK(alpha_m(2, 6, 1, th) == doctest::Approx(alpha_m(2, 6, 4, th)).epsilon(1e-10));
    }
    SUBCASE("majorant ordering for q = 5: theta_1 < theta_2, alpha_1 > alpha_2") {
        CHECK(theta_m(k, q, 1) < theta_m(k, q, 2));
        for (double th : {5.2, 6.4, 9.0})
            CHECK(alpha_m(k, q, 1, th) > alpha_m(k, q, 2, th));
    }
    SUBCASE("domain error at theta <= theta_m") {
        CHECK_THROWS_AS(alpha_m(k, q, 1, t1 - 1e-3), std::domain_error);
    }
    SUBCASE("w_m stays in (1, theta) for m below the symmetric index") {
        for (int q2 : {5, 6, 7})
            for (int m = 1; 2 * m < q2 - 1; ++m)
                for (double dt : {0.3, 1.1, 4.0}) {
                    double th = theta_m(2, q2, m) + dt;
                    auto [w, ks] = k_star(2, q2, m, th);
                    CHECK(w > 1.0);
                    CHECK(w < th);
                }
    }
    SUBCASE("K_m^* increases in theta") {
        for (int m : {1, 2}) {
            double prev = -1.0;
            for (double th = theta_m(k, q, m) + 0.05; th < 12.0; th += 0.35) {
                double ks = k_star(k, q, m, th).second;
                CHECK(ks > prev);
                prev = ks;
            }
        }
    }
}

TEST_CASE("zeros of alpha_m and the zero-field critical ladder") {
    CHECK(theta_0_plus(2, 5) == doctest::Approx(6.0));
    CHECK(theta_m_zero(2, 5, 1) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(theta_m_zero(2, 5, 2) == doctest::Approx(1.0 + 2.0 * std::sqrt(6.0)).epsilon(1e-12));
    // k = 2 closed form and the ordering theta_1^0 < ... < theta_m0^0 < theta_0^+
    for (int q : {5, 6, 7, 9}) {
        double prev = 1.0;
        for (int m = 1; 2 * m <= q - 1; ++m) {
            double tz = theta_m_zero(2, q, m);
            CHECK(tz == doctest::Approx(1.0 + 2.0 * std::sqrt(m * (q - m * 1.0))).epsilon(1e-10));
            CHECK(tz > prev);
            prev = tz;
        }
        CHECK(prev < theta_0_plus(2, q));
    }
    // alpha_m really vanishes there
    CHECK(std::fabs(alpha_m(2, 5, 1, theta_m_zero(2, 5, 1))) < 1e-9);
    CHECK(std::fabs(alpha_m(3, 4, 1, theta_m_zero(3, 4, 1))) < 1e-8);
    // the numeric table for k = 5
    CHECK(theta_0_minus(5, 3) == doctest::Approx(1.6966).epsilon(5e-4));
    CHECK(theta_0_minus(5, 8) == doctest::Approx(2.1803).epsilon(5e-4));
}

TEST_CASE("critical constants aggregate and curve samples") {
    CriticalConstants c = critical_constants(2, 5);
    CHECK(c.theta_c == doctest::Approx(theta_c(2, 5)));
    CHECK(c.theta_0_plus == doctest::Approx(6.0));
    REQUIRE(c.theta_m.size() == 3);
    REQUIRE(c.theta_m0.size() == 2);
    CHECK(c.theta_m[1] == doctest::Approx(5.0));

    CurveSample s = sample_curves(2, 5, 4.0, 8.0, 9);
    REQUIRE(s.theta.size() == 9);
    CHECK(std::isnan(s.alpha_plus[0]));  // below theta_c
    CHECK(!std::isnan(s.alpha_plus[8]));
    CHECK(!std::isnan(s.alpha_m[0][8]));
    CHECK(std::isnan(s.alpha_m[1][0]));  // below theta_2
    auto [am, ap] = alpha_pm(2, 5, s.theta[8]);
    CHECK(s.alpha_minus[8] == doctest::Approx(am));
    CHECK_THROWS_AS(sample_curves(2, 5, 8.0, 4.0, 9), std::invalid_argument);
}

TEST_CASE("tilde_theta_1") {
    CHECK(tilde_theta_1(2) == doctest::Approx(0.5 * (1.0 + std::sqrt(41.0))).epsilon(1e-14));
    CHECK(tilde_theta_1(3) == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
    CHECK(tilde_theta_1(4) == doctest::Approx((1.0 + std::sqrt(1081.0)) / 18.0).epsilon(1e-14));
}

TEST_CASE("count_pair") {
    const int k = 2, q = 5;
    double t1 = theta_m(k, q, 1);
    SUBCASE("empty below theta_m or above alpha_m") {
        CHECK(count_pair(k, q, 1, t1 - 0.1, -1.0) == 0);
        double th = t1 + 1.0;
        CHECK(count_pair(k, q, 1, th, alpha_m(k, q, 1, th) + 0.05) == 0);
    }
    SUBCASE("up to 4 roots for m=1 at theta=6.9") {
        int most = 0;
        for (double al = -2.0; al < 1.0; al += 0.01)
            most = std::max(most, count_pair(k, q, 1, 6.9, al));
        CHECK(most == 4);
    }
    SUBCASE("recovered u solves the pair system") {
        double th = 6.9, al = -0.5;
        for (double v : count_pair_roots(k, q, 1, th, al)) {
            double u = u_from_v(k, q, 1, v, th);
            double denom = th + std::pow(th, al) * std::pow(u, k) + 1.0 * std::pow(v, k) + q - 3.0;
            double eq1 = u - 1.0 - (th - 1.0) * (std::pow(th, al) * std::pow(u, k) - 1.0) / denom;
            double eq2 = 1.0 - (th - 1.0) * (p_k_poly(k, v) + 1.0) / denom;
            CHECK(std::fabs(eq1) < 1e-9);
            CHECK(std::fabs(eq2) < 1e-9);
            CHECK(std::fabs(v - 1.0) > 1e-8);
        }
    }
    SUBCASE("q3 boundary curve: admissible roots appear between tilde_theta_1 and theta_1^0") {
        // on alpha = alpha_1(theta), k = 2, q = 3
        double just_above_t1 = theta_m(2, 3, 1) + 0.05;
        CHECK(count_pair(2, 3, 1, just_above_t1, alpha_m(2, 3, 1, just_above_t1)) == 0);
        double mid = 0.5 * (theta_m(2, 3, 1) + tilde_theta_1(2));
        CHECK(count_pair(2, 3, 1, mid, alpha_m(2, 3, 1, mid)) == 0);
        double just_below_z = theta_m_zero(2, 3, 1) - 0.02;
        REQUIRE(just_below_z > tilde_theta_1(2));
        CHECK(count_pair(2, 3, 1, just_below_z, alpha_m(2, 3, 1, just_below_z)) >= 1);
    }
}

TEST_CASE("count_zero_field") {
    CHECK(count_zero_field(2, 4, 1.0) == 1);
    CHECK(count_zero_field(2, 2, 20.0) == 3);
    CHECK(count_zero_field(2, 3, 20.0) == 7);
    CHECK(count_zero_field(2, 4, 20.0) == 15);
    CHECK(count_zero_field(2, 5, 20.0) == 31);
    // below the first critical value the trivial solution is alone
    CHECK(count_zero_field(2, 3, 2.0) == 1);
}

TEST_CASE("count_total") {
    SUBCASE("q = 2 reduces to the scalar branch") {
        auto rep = count_total(2, 2, 4.0, 0.1);
        CHECK(rep.nu == rep.nu0);
        CHECK(rep.nu <= 3);
        CHECK(rep.pair_counts.empty());
    }
    SUBCASE("region labels") {
        CHECK(count_total(2, 5, 2.0, 0.3).region == "outside");
        auto rep = count_total(2, 5, 6.9, -0.5);
        CHECK(rep.region == "inside B");
        CHECK(rep.nu == 15);
        auto [am, ap] = alpha_pm(2, 5, 6.9);
        auto rep2 = count_total(2, 5, 6.9, 0.5 * (am + ap));
        CHECK(rep2.region == "inside A and B");
    }
    SUBCASE("q=3 dotted segment carries the conjecture caveat") {
        double th = 0.5 * (theta_m(2, 3, 1) + tilde_theta_1(2));
        auto rep = count_total(2, 3, th, alpha_m(2, 3, 1, th));
        CHECK(rep.q3_boundary_caveat);
        CHECK(rep.nu == 1);
        auto rep2 = count_total(2, 3, th, alpha_m(2, 3, 1, th) - 0.5);
        CHECK_FALSE(rep2.q3_boundary_caveat);
    }
    SUBCASE("alpha = 0 is rejected") {
        CHECK_THROWS_AS(count_total(2, 3, 2.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("oracle_enumerate") {
    SUBCASE("theta = 1: only the all-ones solution") {
        auto sols = oracle_enumerate(2, 3, 1.0, 0.7, 2000);
        REQUIRE(sols.size() == 1);
        CHECK(sols[0].kind == HomKind::Trivial);
        for (double z : sols[0].z) CHECK(z == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("every solution has a block shape, placements add up") {
        auto sols = oracle_enumerate(2, 5, 6.9, -0.5, 10000);
        CHECK(sols.size() == 15);
        for (const auto& s : sols) {
            CHECK(s.residual < 1e-10);
            CHECK(s.kind != HomKind::Other);
            if (s.kind == HomKind::PairType) {
                CHECK(s.u != doctest::Approx(1.0));
                CHECK(s.v != doctest::Approx(1.0));
                CHECK(s.u != doctest::Approx(s.v));
            }
        }
    }
    SUBCASE("solutions close the loop with the compatibility residual") {
        const int k = 2, q = 3;
        double th = 4.5, al = -0.8;
        Ball ball(k, 3);
        FieldRealization xi(ball.size(), std::vector<double>(q - 1, 0.0));
        for (auto& v : xi) v[0] = al;
        for (const auto& s : oracle_enumerate(k, q, th, al, 4000)) {
            GbcAssignment h = homogeneous_assignment(ball, q, s.z, al, th);
            CHECK(compatibility_residual(h, xi, th).max_residual < 1e-9);
        }
    }
    SUBCASE("classifier equals oracle on a small off-critical grid") {
        for (double th : {3.0, 5.0, 6.2})
            for (double al : {-1.3, -0.4, 0.21, 0.9}) {
                auto rep = count_total(2, 3, th, al);
                auto sols = oracle_enumerate(2, 3, th, al, 4000);
                CHECK(rep.nu == static_cast<int>(sols.size()));
            }
    }
    SUBCASE("q cap") {
        CHECK_THROWS_AS(oracle_enumerate(2, 7, 2.0, 0.1), std::invalid_argument);
    }
}

TEST_CASE("conjecture probes (reported, never gating)") {
    // alpha_- decreasing / alpha_+ V-shaped around theta_0^+; alpha_m increasing;
    // nu <= 2^q - 1 also for k = 3
    int viol_minus = 0, viol_m = 0;
    double prev_minus = 1e9, prev_m = -1e9;
    for (double th = theta_c(2, 5) + 0.01; th < 16.0; th += 0.25) {
        auto [am, ap] = alpha_pm(2, 5, th);
        if (am > prev_minus + 1e-12) ++viol_minus;
        prev_minus = am;
        if (th > theta_m(2, 5, 1) + 0.01) {
            double a1 = alpha_m(2, 5, 1, th);
            if (a1 < prev_m - 1e-12) ++viol_m;
            prev_m = a1;
        }
    }
    std::cout << "[probe] monotone alpha_-: " << (viol_minus == 0 ? "holds" : "violated")
              << "; monotone alpha_1: " << (viol_m == 0 ? "holds" : "violated") << '\n';
    int worst = 0;
    for (double th : {8.0, 20.0})
        for (double al : {-0.9, -0.2, 0.4}) {
            auto rep = count_total(3, 3, th, al);
            worst = std::max(worst, rep.nu);
        }
    std::cout << "[probe] k=3, q=3 max count over sample: " << worst << " (2^q-1 = 7)\n";
}

TEST_CASE("appendix polynomials") {
    SUBCASE("R~(2; t*) vanishes") {
        for (int k : {2, 3, 4}) CHECK(std::fabs(r_tilde(k, 2.0, t_star(k))) < 1e-9);
        CHECK(t_star(3) == doctest::Approx(4.0 / 3.0));
        CHECK(tilde_theta_1(2) == doctest::Approx(t_star(2) + 1.0));
    }
    SUBCASE("R~ strictly decreasing in y on [2, 50]") {
        for (int k : {2, 3, 4})
            for (int i = 0; i < 10; ++i) {
                double t = t_star(k) * i / 9.0;
                double prev = r_tilde(k, 2.0, t);
                for (int j = 1; j < 1000; ++j) {
                    double y = 2.0 + 48.0 * j / 999.0;
                    double val = r_tilde(k, y, t);
                    CHECK(val < prev);
                    prev = val;
                }
            }
    }
    SUBCASE("R factors through chi") {
        CounterRng rng(8, "chi");
        for (int trial = 0; trial < 200; ++trial) {
            int k = 2 + static_cast<int>(rng.next_u64() % 3);
            double v = 0.2 + 4.0 * rng.next_unit();
            double t = 3.0 * rng.next_unit();
            auto pol = q3_appendix_polys(k, v, t);
            CHECK(pol.r == doctest::Approx(chi_factor(k, v) * pol.r_tilde));
            // the v <-> 1/v symmetry of y keeps R~ invariant
            auto mirror = q3_appendix_polys(k, 1.0 / v, t);
            CHECK(pol.r_tilde == doctest::Approx(mirror.r_tilde).epsilon(1e-9));
        }
    }
    SUBCASE("closed-form second derivative of K_1 at v = 1") {
        for (int k : {2, 3, 4}) {
            double tt = tilde_theta_1(k);
            CHECK(second_derivative_k1_at_1(k, tt - 1e-6) < 0.0);
            CHECK(second_derivative_k1_at_1(k, tt + 1e-6) > 0.0);
            // negative on (theta_1, tilde_theta_1)
            double th1 = 1.0 + 2.0 / (k - 1.0);
            for (double f : {0.15, 0.5, 0.85})
                CHECK(second_derivative_k1_at_1(k, th1 + f * (tt - th1)) < 0.0);
            // matches the 5-point finite-difference stencil
            for (double th : {th1 + 0.2, tt + 0.8}) {
                auto K = [&](double v) { return k_func(k, 3, 1, v, th); };
                double h = 1e-2;
                double fd = (-K(1 - 2 * h) + 16 * K(1 - h) - 30 * K(1.0) + 16 * K(1 + h) -
                             K(1 + 2 * h)) /
                            (12 * h * h);
                CHECK(second_derivative_k1_at_1(k, th) ==
                      doctest::Approx(fd).epsilon(1e-5));
            }
        }
        CHECK_THROWS_AS(second_derivative_k1_at_1(2, 1.5), std::domain_error);
    }
}
