#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lp/config.hpp"
#include "lp/errors.hpp"
#include "lp/integrate.hpp"
#include "lp/model.hpp"
#include "lp/origin_series.hpp"
#include "lp/sonic_series.hpp"

namespace lp {

inline ode_options make_ode_options(const solver_config& cfg) {
    ode_options opt;
    opt.rtol = opt.atol = cfg.tol_ode;
    opt.eps_sonic = cfg.eps_sonic;
    opt.eps_event = cfg.eps_event;
    return opt;
}

// The bisection and the final shooting leg see their errors amplified by the
// z^-3 mode near the origin, so they run at a tighter tolerance than the rest.
// They must share one tolerance: the bisection pins down the critical point of
// the numerical flow it was run with, not of the exact one.
inline ode_options make_shoot_options(const solver_config& cfg) {
    ode_options opt = make_ode_options(cfg);
    opt.rtol = opt.atol = std::min(cfg.tol_ode, 1e-13);
    return opt;
}

struct classification {
    char label = '?'; // 'X', 'Y', 'Z'
    std::optional<double> z_one_third;
    std::optional<double> sonic_time;
    double inf_omega = 0.0;
    terminal_event term = terminal_event::reached_target;
};

// Run the inner integration and sort the parameter into the X/Y/Z partition:
// Y if omega reaches 1/3, X if inf omega stays clear of 1/3, Z otherwise.
inline classification classify(const sonic_parameter& p, const solver_config& cfg,
                               branch_kind branch = branch_kind::lp) {
    sonic_series series = extend_series(p, branch, cfg.n_max, cfg.radius_safety, cfg.radius_cap);
    event_spec ev;
    ev.one_third = true;
    ev.sonic_line = true;
    ev.guard = inner_apriori_guard(p, cfg.tol_guard);
    integration_outcome out = integrate_inner(p, series, cfg.z_min, ev, make_shoot_options(cfg));

    classification c;
    c.term = out.event;
    c.inf_omega = out.inf_omega;
    if (out.event == terminal_event::hit_one_third) {
        c.label = 'Y';
        c.z_one_third = out.z_event;
        return c;
    }
    if (out.event == terminal_event::hit_sonic_line) c.sonic_time = out.z_event;
    if (out.event == terminal_event::step_underflow && out.inf_omega <= 1.0 / 3.0 + cfg.delta_classify)
        throw unclassifiable_run("classify: step underflow at z=" + std::to_string(out.z_event) +
                                 " before the X/Y criterion resolved");
    c.label = out.inf_omega > 1.0 / 3.0 + cfg.delta_classify ? 'X' : 'Z';
    return c;
}

struct y_bar_result {
    double y_bar; // = hi endpoint, inside Y
    double lo;    // last not-Y parameter
    int iterations = 0;
};

// Bisection on Y-membership, maintaining lo not in Y, hi in Y.
inline y_bar_result find_y_bar(const solver_config& cfg, double lo = 2.0, double hi = 3.0) {
    if (cfg.tol_y < 1e-16) throw config_error("find_y_bar: tol_y below double precision");
    classification clo = classify(sonic_parameter(lo), cfg);
    classification chi = classify(sonic_parameter(hi), cfg);
    if (clo.label == 'Y' || chi.label != 'Y')
        throw bracket_invalid("find_y_bar: need classify(lo) != Y and classify(hi) = Y, got " +
                              std::string(1, clo.label) + "/" + std::string(1, chi.label));
    y_bar_result r{hi, lo, 0};
    while (r.y_bar - r.lo > cfg.tol_y) {
        double mid = 0.5 * (r.lo + r.y_bar);
        if (mid <= r.lo || mid >= r.y_bar) break; // double precision exhausted
        ++r.iterations;
        classification cm = classify(sonic_parameter(mid), cfg);
        if (cm.label == 'Y')
            r.y_bar = mid;
        else
            r.lo = mid;
    }
    return r;
}

// Left-family state rho_-(z0; rho0), omega_-(z0; rho0): origin series, handed
// to the integrator beyond the handoff offset.
inline flow_state left_state_at(const sonic_parameter& p, double rho0, double z0,
                                const solver_config& cfg) {
    origin_series os = extend_origin_series(p, rho0, cfg.n_max, cfg.radius_safety, cfg.radius_cap);
    double z_h = handoff_offset(os.radius);
    if (z0 <= z_h) return eval_origin_series(os, z0);
    event_spec ev;
    ev.sonic_line = true;
    integration_outcome out = integrate_left(os, z0, ev, make_ode_options(cfg));
    if (out.event != terminal_event::reached_target)
        throw solver_error(std::string("left_state_at: leg ended with ") +
                           terminal_name(out.event) + " at z=" + std::to_string(out.z_event) +
                           " before z0=" + std::to_string(z0));
    return out.final_state;
}

// Invert rho0 -> rho_-(z0; rho0) by bisection (the map is strictly increasing
// on the admissible scale).
inline double find_rho1(const sonic_parameter& p, double z0, double target_rho, double lo,
                        double hi, const solver_config& cfg) {
    auto g = [&](double rho0) { return left_state_at(p, rho0, z0, cfg).rho; };
    double glo = g(lo), ghi = g(hi), gmid = g(0.5 * (lo + hi));
    if (!(glo < gmid && gmid < ghi))
        throw nonmonotone_detected("find_rho1: sampled rho_-(z0;.) not increasing; z0 too large");
    if (target_rho < glo || target_rho > ghi)
        throw target_outside_image("find_rho1: target " + std::to_string(target_rho) +
                                   " outside [" + std::to_string(glo) + ", " +
                                   std::to_string(ghi) + "]");
    double a = lo, b = hi;
    for (int i = 0; i < 200 && b - a > 1e-13 * std::max(1.0, b); ++i) {
        double m = 0.5 * (a + b);
        if (g(m) < target_rho)
            a = m;
        else
            b = m;
    }
    return 0.5 * (a + b);
}

enum class match_verdict { upper, lower, matched };

struct match_result {
    double delta_rho = 0.0; // zero by construction (rho is matched exactly)
    double delta_omega = 0.0;
    match_verdict verdict = match_verdict::matched;
    double rho1 = 0.0;
};

// Upper/lower-solution diagnostic: match the right solution's density at z0
// with a left-family member and compare velocities.
inline match_result match_left_right(const sonic_parameter& p, double z0,
                                     const solver_config& cfg) {
    sonic_series series = extend_series(p, branch_kind::lp, cfg.n_max, cfg.radius_safety,
                                        cfg.radius_cap);
    double h = handoff_offset(series.radius);
    event_spec ev;
    ev.sonic_line = true;
    // shoot-grade tolerance: near-critical parameters come from the bisection,
    // which pins the critical point of the tighter flow
    integration_outcome out =
        integrate(eval_series(series, 1.0 - h), p, z0, ev, make_shoot_options(cfg));
    if (out.event != terminal_event::reached_target)
        throw solver_error(std::string("match_left_right: inner solution ended with ") +
                           terminal_name(out.event) + " before z0");
    flow_state right = out.final_state;

    double hi = std::sqrt(3.0) / (std::sqrt(2.0) * p.y_star * z0); // a priori upper end of the window
    double lo = 1.0 / 3.0;
    match_result m;
    m.rho1 = find_rho1(p, z0, right.rho, lo, hi, cfg);
    flow_state left = left_state_at(p, m.rho1, z0, cfg);
    m.delta_omega = right.omega - left.omega;
    if (std::abs(m.delta_omega) <= cfg.tol_match)
        m.verdict = match_verdict::matched;
    else
        m.verdict = m.delta_omega > 0 ? match_verdict::upper : match_verdict::lower;
    return m;
}

struct lp_solution {
    double y_bar = 0.0;
    double bracket_lo = 0.0;
    double rho_center = 0.0;
    double farfield_c = 0.0;
    solution_profile profile; // assembled on [0, z_max]
    double overlap_max_rho = 0.0;
    double overlap_max_omega = 0.0;
    double quad_k[3] = {0, 0, 0}; // (omega-1/3)/z^2 at z = 4e-3, 2e-3, 1e-3
    std::vector<std::string> event_log;
    int bisection_iterations = 0;
};

namespace detail {

inline std::vector<double> log_spaced(double a, double b, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = std::exp(la + (lb - la) * i / (n - 1));
    v.front() = a;
    v.back() = b;
    return v;
}

inline const profile_point* point_at(const solution_profile& pr, double z) {
    const profile_point* best = nullptr;
    double bd = 1e-9;
    for (const auto& pt : pr.pts) {
        double d = std::abs(pt.z - z);
        if (d < bd) {
            bd = d;
            best = &pt;
        }
    }
    return best;
}

} // namespace detail

// Full pipeline: bisect to y_bar, shoot inward, extrapolate the central
// density, rebuild the origin neighbourhood from the left family, verify the
// overlap, and glue origin / inner / sonic-bridge / outer into one profile.
inline lp_solution solve_lp(const solver_config& cfg) {
    cfg.validate();
    ode_options opt = make_ode_options(cfg);
    lp_solution sol;

    y_bar_result yb = find_y_bar(cfg);
    sol.y_bar = yb.y_bar;
    sol.bracket_lo = yb.lo;
    sol.bisection_iterations = yb.iterations;
    sol.event_log.push_back("bisection: y_bar bracket [" + std::to_string(yb.lo) + ", " +
                            std::to_string(yb.y_bar) + "] after " +
                            std::to_string(yb.iterations) + " iterations");

    // Shoot inward from both bracket endpoints.  Each run departs from the
    // critical trajectory like (y - y_bar) z^-3, with opposite signs on the
    // two sides, so the endpoint average cancels the leading departure.
    sonic_parameter p(yb.lo);
    sonic_series series = extend_series(p, branch_kind::lp, cfg.n_max, cfg.radius_safety,
                                        cfg.radius_cap);
    double h = handoff_offset(series.radius);

    std::vector<double> checkpoints = detail::log_spaced(1e-3, 0.1, 25);
    for (double z : {2e-3, 4e-3})
        if (std::find(checkpoints.begin(), checkpoints.end(), z) == checkpoints.end())
            checkpoints.push_back(z);
    std::sort(checkpoints.begin(), checkpoints.end());
    std::vector<double> inner_targets(checkpoints.rbegin(), checkpoints.rend());

    ode_options opt_shoot = make_shoot_options(cfg);
    auto run_leg = [&](double y) {
        sonic_parameter py(y);
        sonic_series sy = extend_series(py, branch_kind::lp, cfg.n_max, cfg.radius_safety,
                                        cfg.radius_cap);
        event_spec ev_in;
        ev_in.sonic_line = true;
        ev_in.guard = inner_apriori_guard(py, cfg.tol_guard);
        integration_outcome out = integrate_path(eval_series(sy, 1.0 - handoff_offset(sy.radius)),
                                                 py, inner_targets, ev_in, opt_shoot);
        if (out.event != terminal_event::reached_target)
            throw solver_error(std::string("solve_lp: inner leg ended with ") +
                               terminal_name(out.event) + " at z=" + std::to_string(out.z_event));
        return out;
    };
    integration_outcome inner = run_leg(yb.lo);
    integration_outcome inner_hi = run_leg(yb.y_bar);
    sol.event_log.push_back("inner legs: " + std::to_string(inner.steps) + "+" +
                            std::to_string(inner_hi.steps) + " steps from z=" +
                            std::to_string(1.0 - h) + " to z=0.001");

    auto inner_at = [&](double z) {
        const profile_point* a = detail::point_at(inner.profile, z);
        const profile_point* b = detail::point_at(inner_hi.profile, z);
        if (!a || !b)
            throw solver_error("solve_lp: missing checkpoint at z=" + std::to_string(z));
        return profile_point{z, 0.5 * (a->rho + b->rho), 0.5 * (a->omega + b->omega),
                             0.5 * (a->drho + b->drho), 0.5 * (a->domega + b->domega)};
    };
    profile_point c1 = inner_at(1e-3), c2 = inner_at(2e-3);
    if (std::abs(c1.omega - 1.0 / 3.0) > cfg.tol_center)
        throw center_mismatch("solve_lp: omega(1e-3) - 1/3 = " +
                              std::to_string(c1.omega - 1.0 / 3.0) + " exceeds tol_center");

    // Richardson on rho = rho* + a z^2
    double rho_star = (4.0 * c1.rho - c2.rho) / 3.0;
    sol.rho_center = rho_star;
    sol.event_log.push_back("rho* extrapolated: " + std::to_string(rho_star));

    // Origin-series rebuild and overlap verification on [1e-3, 0.1]
    origin_series oseries =
        extend_origin_series(p, rho_star, cfg.n_max, cfg.radius_safety, cfg.radius_cap);
    double z_h = handoff_offset(oseries.radius);
    std::vector<double> left_targets;
    for (double z : checkpoints)
        if (z > z_h) left_targets.push_back(z);
    solution_profile left_profile;
    if (!left_targets.empty()) {
        event_spec ev_left;
        ev_left.sonic_line = true;
        integration_outcome left =
            integrate_path(eval_origin_series(oseries, z_h), p, left_targets, ev_left, opt);
        if (left.event != terminal_event::reached_target)
            throw solver_error(std::string("solve_lp: origin rebuild leg ended with ") +
                               terminal_name(left.event));
        left_profile = left.profile;
    }
    auto rebuild_at = [&](double z) -> flow_state {
        if (z <= z_h) return eval_origin_series(oseries, z);
        const profile_point* pt = detail::point_at(left_profile, z);
        if (!pt) throw solver_error("solve_lp: missing rebuild checkpoint at z=" + std::to_string(z));
        return {pt->z, pt->rho, pt->omega};
    };
    for (double z : checkpoints) {
        profile_point a = inner_at(z);
        flow_state b = rebuild_at(z);
        double dr = std::abs(a.rho - b.rho) / std::max(1e-30, std::abs(b.rho));
        double dw = std::abs(a.omega - b.omega) / std::max(1e-30, std::abs(b.omega));
        sol.overlap_max_rho = std::max(sol.overlap_max_rho, dr);
        sol.overlap_max_omega = std::max(sol.overlap_max_omega, dw);
    }
    if (sol.overlap_max_rho > cfg.tol_match || sol.overlap_max_omega > cfg.tol_match)
        throw center_mismatch("solve_lp: overlap disagreement rho=" +
                              std::to_string(sol.overlap_max_rho) + " omega=" +
                              std::to_string(sol.overlap_max_omega) + " exceeds tol_match");
    sol.event_log.push_back("overlap on [1e-3, 0.1]: max rel diff rho=" +
                            std::to_string(sol.overlap_max_rho) + ", omega=" +
                            std::to_string(sol.overlap_max_omega));

    for (int i = 0; i < 3; ++i) {
        double z = (i == 0 ? 4e-3 : i == 1 ? 2e-3 : 1e-3);
        flow_state s = rebuild_at(z);
        sol.quad_k[i] = (s.omega - 1.0 / 3.0) / (z * z);
    }

    // Outer leg and far-field constant
    auto [outer_profile, farfield_c] = integrate_outer(p, series, cfg.z_max, opt, cfg.tol_guard);
    sol.farfield_c = farfield_c;
    sol.event_log.push_back("outer leg to z=" + std::to_string(cfg.z_max) +
                            ", farfield C=" + std::to_string(farfield_c));

    // ---- assembly ----
    solution_profile& pr = sol.profile;
    pr.y_star = sol.y_bar;
    pr.rho_center = rho_star;
    pr.farfield_c = farfield_c;
    auto push_series_point = [&](double z) {
        derivs d;
        flow_state s = eval_origin_series(oseries, z, &d);
        pr.pts.push_back({z, s.rho, s.omega, d.drho, d.domega});
    };
    push_series_point(0.0);
    if (cfg.z_min < z_h) push_series_point(cfg.z_min);
    for (double z : detail::log_spaced(std::max(cfg.z_min * 2.0, 1e-6), z_h, 60))
        if (z > pr.pts.back().z) push_series_point(z);
    for (const auto& pt : left_profile.pts)
        if (pt.z > pr.pts.back().z) pr.pts.push_back(pt);
    // inner shooting leg, reversed (it ran right-to-left), above the overlap cut
    for (auto it = inner.profile.pts.rbegin(); it != inner.profile.pts.rend(); ++it)
        if (it->z > std::max(0.1, pr.pts.back().z)) pr.pts.push_back(*it);
    // sonic bridge from the series
    for (int i = 0; i <= 40; ++i) {
        double z = (1.0 - h) + 2.0 * h * i / 40.0;
        if (z <= pr.pts.back().z || z >= 1.0 + h) continue;
        derivs d;
        flow_state s = eval_series(series, z, &d);
        pr.pts.push_back({z, s.rho, s.omega, d.drho, d.domega});
    }
    for (const auto& pt : outer_profile.pts)
        if (pt.z > pr.pts.back().z) pr.pts.push_back(pt);
    pr.events = sol.event_log;
    return sol;
}

} // namespace lp
