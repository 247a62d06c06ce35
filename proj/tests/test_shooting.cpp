#include <doctest.h>

#include <cmath>

#include "lp/shooting.hpp"

using namespace lp;

TEST_CASE("endpoint classifications") {
    solver_config cfg;
    classification c = classify(sonic_parameter(2.0), cfg);
    CHECK(c.label == 'X');
    CHECK(c.inf_omega > 0.5);

    c = classify(sonic_parameter(3.0), cfg);
    CHECK(c.label == 'Y');
    REQUIRE(c.z_one_third.has_value());

    c = classify(sonic_parameter(2.95), cfg);
    CHECK(c.label == 'Y');

    CHECK_THROWS_AS(classify(sonic_parameter(1.4), cfg), unsupported_parameter);
}

TEST_CASE("bisection endpoints are validated") {
    solver_config cfg;
    CHECK_THROWS_AS(find_y_bar(cfg, 2.0, 2.1), bracket_invalid);  // both X
    CHECK_THROWS_AS(find_y_bar(cfg, 2.9, 3.0), bracket_invalid);  // both Y
}

TEST_CASE("critical parameter bisection") {
    solver_config cfg;
    y_bar_result r = find_y_bar(cfg);
    CHECK(r.y_bar > 2.0);
    CHECK(r.y_bar < 3.0);
    CHECK(r.y_bar - r.lo <= std::max(cfg.tol_y, 4.0 * r.y_bar * 2.3e-16));
    CHECK(classify(sonic_parameter(r.y_bar), cfg).label == 'Y');
    CHECK(classify(sonic_parameter(r.lo), cfg).label != 'Y');

    // a looser bracket target agrees with the tight one within its own width
    solver_config loose = cfg;
    loose.tol_y = 1e-6;
    y_bar_result rl = find_y_bar(loose);
    CHECK(std::abs(rl.y_bar - r.y_bar) <= 1e-6);
}

TEST_CASE("left-family inversion round-trips") {
    solver_config cfg;
    sonic_parameter p(2.5);
    double z0 = 0.02, rho0 = 1.5;
    double target = left_state_at(p, rho0, z0, cfg).rho;
    double found = find_rho1(p, z0, target, 0.5, 5.0, cfg);
    CHECK(found == doctest::Approx(rho0).epsilon(1e-8));

    CHECK_THROWS_AS(find_rho1(p, z0, 100.0, 0.5, 5.0, cfg), target_outside_image);
    CHECK_THROWS_AS(find_rho1(p, z0, 0.01, 0.5, 5.0, cfg), target_outside_image);
}

TEST_CASE("matching verdicts around the critical parameter") {
    solver_config cfg;
    y_bar_result r = find_y_bar(cfg);

    // at the critical parameter the two families agree
    match_result m = match_left_right(sonic_parameter(r.y_bar), 0.01, cfg);
    CHECK(m.verdict == match_verdict::matched);
    CHECK(std::abs(m.delta_omega) <= cfg.tol_match);

    // on the X side of the bracket the right solution rides above
    match_result up = match_left_right(sonic_parameter(r.y_bar - 1e-6), 0.01, cfg);
    CHECK(up.verdict == match_verdict::upper);
    CHECK(up.delta_omega > 0.0);

    // inside Y, just above the crossing the right solution dips under the left
    sonic_parameter py(r.y_bar + 1e-6);
    classification cy = classify(py, cfg);
    REQUIRE(cy.z_one_third.has_value());
    match_result low = match_left_right(py, *cy.z_one_third * 1.05, cfg);
    CHECK(low.verdict == match_verdict::lower);
    CHECK(low.delta_omega < 0.0);
}

TEST_CASE("full solve and assembled profile") {
    solver_config cfg;
    lp_solution sol = solve_lp(cfg);
    CHECK(sol.y_bar > 2.0);
    CHECK(sol.y_bar < 3.0);
    CHECK(sol.rho_center > 1.0 / 3.0);
    CHECK(sol.farfield_c > 0.0);
    CHECK(sol.overlap_max_rho <= cfg.tol_match);
    CHECK(sol.overlap_max_omega <= cfg.tol_match);

    // quadratic central behavior: (omega - 1/3)/z^2 stable across a dyadic range
    CHECK(std::abs(sol.quad_k[1] / sol.quad_k[0] - 1.0) <= 0.05);
    CHECK(std::abs(sol.quad_k[2] / sol.quad_k[1] - 1.0) <= 0.05);

    const auto& pts = sol.profile.pts;
    REQUIRE(!pts.empty());
    CHECK(pts.front().z == 0.0);
    CHECK(pts.front().rho == doctest::Approx(sol.rho_center).epsilon(1e-12));
    CHECK(pts.front().omega == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(pts.back().z == doctest::Approx(cfg.z_max));
    for (size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].z > pts[i - 1].z);

    // near-center velocity pinned to 1/3 at the first interior grid point
    bool found = false;
    for (const auto& pt : pts)
        if (pt.z == cfg.z_min) {
            CHECK(std::abs(pt.omega - 1.0 / 3.0) <= 1e-9);
            found = true;
        }
    CHECK(found);

    // density decreases monotonically outward
    for (size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].rho <= pts[i - 1].rho + 1e-12);
}
