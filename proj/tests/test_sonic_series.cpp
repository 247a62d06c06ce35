#include <doctest.h>

#include <cmath>

#include "lp/integrate.hpp"
#include "lp/sonic_series.hpp"

using namespace lp;

TEST_CASE("seed coefficients match the closed forms") {
    // y* = 2: (1/2, 1/2), (-1/2, 0), (1/4, 1/4)
    lp_seed_coeffs s = lp_seed(sonic_parameter(2.0));
    CHECK(s.rho0 == 0.5);
    CHECK(s.omega0 == 0.5);
    CHECK(s.rho1 == -0.5);
    CHECK(s.omega1 == 0.0);
    CHECK(s.rho2 == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s.omega2 == doctest::Approx(0.25).epsilon(1e-15));

    // y* = 3: (1/3, 1/3), (-1/3, 1/3), (1/9, -5/18)
    s = lp_seed(sonic_parameter(3.0));
    CHECK(s.rho1 == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(s.omega1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s.rho2 == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(s.omega2 == doctest::Approx(-5.0 / 18.0).epsilon(1e-15));

    s = lp_seed(sonic_parameter(2.5));
    CHECK(s.rho2 == doctest::Approx(0.175).epsilon(1e-15));
    CHECK(s.omega2 == doctest::Approx(-0.075).epsilon(1e-15));

    CHECK_THROWS_AS(lp_seed(sonic_parameter(1.4)), unsupported_parameter);
    CHECK_THROWS_AS(lp_seed(sonic_parameter(1.5)), unsupported_parameter);
}

TEST_CASE("series construction reproduces the seeds") {
    for (double ys : {2.0, 2.5, 3.0}) {
        sonic_parameter p(ys);
        lp_seed_coeffs seed = lp_seed(p);
        sonic_series s = extend_series(p, branch_kind::lp, 20);
        CHECK(std::abs(s.rho[0] - seed.rho0) <= 1e-15);
        CHECK(std::abs(s.omega[1] - seed.omega1) <= 1e-15);
        CHECK(std::abs(s.rho[2] - seed.rho2) <= 1e-14);
        CHECK(std::abs(s.omega[2] - seed.omega2) <= 1e-14);
    }
}

TEST_CASE("order-2 source terms at y*=2, frozen oracle") {
    // hand-computed: (F_2, G_2) = (-1/2, -3/2), and the 2x2 system
    // [[-2, 0], [-2, -4]] (rho_2, omega_2) = (F_2, G_2) has solution (1/4, 1/4)
    sonic_parameter p(2.0);
    sonic_series s = extend_series(p, branch_kind::lp, 20);
    auto [f, g] = source_terms(2, p, s.rho, s.omega);
    CHECK(f == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(g == doctest::Approx(-1.5).epsilon(1e-14));
    solvability_matrix m = coeff_matrix(2, s.omega[0], s.omega[1], s.rho[1]);
    CHECK(m.a11 == doctest::Approx(-2.0));
    CHECK(m.a12 == doctest::Approx(0.0));
    CHECK(m.a21 == doctest::Approx(-2.0));
    CHECK(m.a22 == doctest::Approx(-4.0));
    CHECK(m.det == doctest::Approx(8.0));
}

TEST_CASE("solvability residual vanishes to order 80") {
    for (double ys : {2.0, 2.34, 2.5, 3.0}) {
        sonic_parameter p(ys);
        sonic_series s = extend_series(p, branch_kind::lp, 80);
        for (int n = 2; n <= 80; ++n) {
            auto [f, g] = source_terms(n, p, s.rho, s.omega);
            solvability_matrix m = coeff_matrix(n, s.omega[0], s.omega[1], s.rho[1]);
            double r1 = m.a11 * s.rho[n] + m.a12 * s.omega[n] - f;
            double r2 = m.a21 * s.rho[n] + m.a22 * s.omega[n] - g;
            double scale = std::max({1.0, std::abs(f), std::abs(g)});
            CHECK(std::abs(r1) / scale <= 1e-12);
            CHECK(std::abs(r2) / scale <= 1e-12);
        }
    }
}

TEST_CASE("full Taylor relations vanish on the computed coefficients") {
    // the order-n relation with the exact index-(n+1) coefficient present must
    // cancel to roundoff; this is independent of the padding trick used to
    // isolate the source terms
    sonic_parameter p(2.5);
    sonic_series s = extend_series(p, branch_kind::lp, 40);
    double y2 = p.y_star * p.y_star;
    for (int n = 1; n < 40; ++n) {
        double r = detail::sonic_rho_relation(n, y2, s.rho, s.omega);
        double w = detail::sonic_omega_relation(n, y2, s.rho, s.omega);
        CHECK(std::abs(r) <= 1e-11);
        CHECK(std::abs(w) <= 1e-11);
    }
}

TEST_CASE("hunter branch seeds and degeneracies") {
    hunter_seed_coeffs h = hunter_seed(sonic_parameter(2.0));
    CHECK(h.rho0 == 0.5);
    CHECK(h.rho1 == doctest::Approx(-0.5));
    CHECK(h.omega1 == 0.0);

    // det A_N^H / 4 = N (N + 1 - y*): singular at y* = N + 1 for N >= 2
    CHECK_THROWS_AS(hunter_seed(sonic_parameter(4.0), 5), degenerate_parameter);
    CHECK_THROWS_AS(extend_series(sonic_parameter(3.0), branch_kind::hunter, 10),
                    degenerate_parameter);
    CHECK_THROWS_AS(extend_series(sonic_parameter(4.0), branch_kind::hunter, 10),
                    degenerate_parameter);
    CHECK_NOTHROW(extend_series(sonic_parameter(3.5), branch_kind::hunter, 20));
    CHECK_NOTHROW(extend_series(sonic_parameter(4.0 + 1e-7), branch_kind::hunter, 10));
    // below the first degenerate order nothing blocks y* = 4
    CHECK_NOTHROW(hunter_seed(sonic_parameter(4.0), 2));
}

TEST_CASE("radius estimate and evaluation window") {
    sonic_series s = extend_series(sonic_parameter(2.0), branch_kind::lp, 80);
    CHECK(s.radius > 0.0);
    CHECK(s.radius <= 0.5);
    CHECK_NOTHROW(eval_series(s, 1.0 - 0.9 * s.radius));
    CHECK_NOTHROW(eval_series(s, 1.0 + 0.9 * s.radius));
    CHECK_THROWS_AS(eval_series(s, 1.0 + 1.1 * s.radius), outside_radius);
    CHECK_THROWS_AS(eval_series(s, 0.2), outside_radius);

    // short series cannot support a radius estimate
    sonic_series stub = extend_series(sonic_parameter(2.0), branch_kind::lp, 5);
    CHECK_THROWS_AS(estimate_radius(stub), insufficient_coefficients);
}

TEST_CASE("series agrees with the ODE flow inside the disk") {
    for (double ys : {2.0, 2.5, 3.0}) {
        sonic_parameter p(ys);
        sonic_series s = extend_series(p, branch_kind::lp, 80);
        double r = s.radius;
        ode_options opt;
        for (double sign : {-1.0, 1.0}) {
            double za = 1.0 + sign * 0.2 * r;
            double zb = 1.0 + sign * 0.5 * r;
            flow_state start = eval_series(s, za);
            event_spec ev;
            integration_outcome out = integrate(start, p, zb, ev, opt);
            REQUIRE(out.event == terminal_event::reached_target);
            flow_state ref = eval_series(s, zb);
            CHECK(std::abs(out.final_state.rho - ref.rho) <= 1e-8);
            CHECK(std::abs(out.final_state.omega - ref.omega) <= 1e-8);
        }
    }
}

TEST_CASE("truncation error falls with the order") {
    sonic_parameter p(2.0);
    double dz = 0.2;
    flow_state ref = eval_series(extend_series(p, branch_kind::lp, 80), 1.0 + dz);
    double prev = 1e300;
    for (int n : {12, 24, 48}) {
        sonic_series s = extend_series(p, branch_kind::lp, n);
        // reuse the order-80 radius; low-order tails overestimate Chat
        s.radius = 0.3;
        flow_state v = eval_series(s, 1.0 + dz);
        double err = std::max(std::abs(v.rho - ref.rho), std::abs(v.omega - ref.omega));
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev <= 1e-12);
}

TEST_CASE("parameter derivative matches finite differences") {
    double ys = 2.4;
    sonic_series s = extend_series(sonic_parameter(ys), branch_kind::lp, 10);
    auto der = param_derivative_series(s);
    double w0 = 1.0 / ys, d = 1e-6;
    sonic_series sp = extend_series(sonic_parameter(1.0 / (w0 + d)), branch_kind::lp, 10);
    sonic_series sm = extend_series(sonic_parameter(1.0 / (w0 - d)), branch_kind::lp, 10);
    for (int n = 0; n <= 10; ++n) {
        double fd_r = (sp.rho[n] - sm.rho[n]) / (2.0 * d);
        double fd_w = (sp.omega[n] - sm.omega[n]) / (2.0 * d);
        CHECK(der[n].first == doctest::Approx(fd_r).epsilon(1e-5));
        CHECK(der[n].second == doctest::Approx(fd_w).epsilon(1e-5));
    }
    // seed derivatives are exact: d rho_1 = -1, d omega_1 = -2
    CHECK(der[1].first == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(der[1].second == doctest::Approx(-2.0).epsilon(1e-14));

    sonic_series h = extend_series(sonic_parameter(3.5), branch_kind::hunter, 10);
    CHECK_THROWS_AS(param_derivative_series(h), unsupported_parameter);
}
