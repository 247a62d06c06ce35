#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lp/errors.hpp"
#include "lp/model.hpp"
#include "lp/origin_series.hpp"
#include "lp/sonic_series.hpp"

namespace lp {

enum class terminal_event {
    reached_target,
    hit_one_third,
    hit_sonic_line,
    reached_origin_window,
    step_underflow,
    bound_guard_tripped,
};

inline const char* terminal_name(terminal_event t) {
    switch (t) {
        case terminal_event::reached_target: return "ReachedTarget";
        case terminal_event::hit_one_third: return "HitOneThird";
        case terminal_event::hit_sonic_line: return "HitSonicLine";
        case terminal_event::reached_origin_window: return "ReachedOriginWindow";
        case terminal_event::step_underflow: return "StepUnderflow";
        case terminal_event::bound_guard_tripped: return "BoundGuardTripped";
    }
    return "?";
}

struct integration_outcome {
    terminal_event event = terminal_event::reached_target;
    double z_event = 0.0;
    double indicator_value = 0.0; // for hit_sonic_line
    std::string guard_reason;     // for bound_guard_tripped
    solution_profile profile;
    flow_state final_state;
    double inf_omega = std::numeric_limits<double>::infinity();
    long steps = 0;
    long rejections = 0;
};

// Guard returns an empty string when the state is fine, otherwise a reason.
using guard_fn = std::function<std::string(const profile_point&)>;

struct event_spec {
    bool one_third = false;  // stop when omega <= 1/3
    bool sonic_line = false; // stop when the indicator drops to eps_event
    guard_fn guard;
};

struct ode_options {
    double rtol = 1e-11;
    double atol = 1e-11;
    double h_max = 0.05;
    double eps_sonic = 1e-12;
    double eps_event = 1e-10;
    double event_tol = 1e-12; // bisection width for event roots
    long max_steps = 4000000;
};

namespace detail {

using vec2 = std::array<double, 2>;

// Dormand-Prince 5(4) tableau.
struct dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output weights
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

struct rhs_fn {
    sonic_parameter p;
    double eps_sonic;
    vec2 operator()(double z, const vec2& y) const {
        derivs d = eval_rhs({z, y[0], y[1]}, p, eps_sonic);
        return {d.drho, d.domega};
    }
};

struct step_data {
    vec2 y1;
    vec2 f1; // FSAL derivative at z+h
    std::array<vec2, 7> k;
    double err; // scaled error norm
};

inline step_data dopri5_step(const rhs_fn& f, double z, const vec2& y, const vec2& f0, double h,
                             double atol, double rtol) {
    using t = dopri5;
    step_data s;
    auto& k = s.k;
    k[0] = f0;
    vec2 w;
    for (int i = 0; i < 2; ++i) w[i] = y[i] + h * t::a21 * k[0][i];
    k[1] = f(z + t::c2 * h, w);
    for (int i = 0; i < 2; ++i) w[i] = y[i] + h * (t::a31 * k[0][i] + t::a32 * k[1][i]);
    k[2] = f(z + t::c3 * h, w);
    for (int i = 0; i < 2; ++i)
        w[i] = y[i] + h * (t::a41 * k[0][i] + t::a42 * k[1][i] + t::a43 * k[2][i]);
    k[3] = f(z + t::c4 * h, w);
    for (int i = 0; i < 2; ++i)
        w[i] = y[i] + h * (t::a51 * k[0][i] + t::a52 * k[1][i] + t::a53 * k[2][i] + t::a54 * k[3][i]);
    k[4] = f(z + t::c5 * h, w);
    for (int i = 0; i < 2; ++i)
        w[i] = y[i] + h * (t::a61 * k[0][i] + t::a62 * k[1][i] + t::a63 * k[2][i] +
                           t::a64 * k[3][i] + t::a65 * k[4][i]);
    k[5] = f(z + h, w);
    for (int i = 0; i < 2; ++i)
        s.y1[i] = y[i] + h * (t::a71 * k[0][i] + t::a73 * k[2][i] + t::a74 * k[3][i] +
                              t::a75 * k[4][i] + t::a76 * k[5][i]);
    k[6] = f(z + h, s.y1);
    s.f1 = k[6];
    double err2 = 0.0;
    for (int i = 0; i < 2; ++i) {
        double e = h * (t::e1 * k[0][i] + t::e3 * k[2][i] + t::e4 * k[3][i] + t::e5 * k[4][i] +
                        t::e6 * k[5][i] + t::e7 * k[6][i]);
        double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(s.y1[i]));
        err2 += (e / sk) * (e / sk);
    }
    s.err = std::sqrt(err2 / 2.0);
    return s;
}

// Quartic dense-output interpolant over an accepted step.
struct dense_step {
    double z0, h;
    vec2 rc1, rc2, rc3, rc4, rc5;

    void build(const vec2& y0, const step_data& s) {
        using t = dopri5;
        for (int i = 0; i < 2; ++i) {
            double ydiff = s.y1[i] - y0[i];
            double bspl = h * s.k[0][i] - ydiff;
            rc1[i] = y0[i];
            rc2[i] = ydiff;
            rc3[i] = bspl;
            rc4[i] = ydiff - h * s.f1[i] - bspl;
            rc5[i] = h * (t::d1 * s.k[0][i] + t::d3 * s.k[2][i] + t::d4 * s.k[3][i] +
                          t::d5 * s.k[4][i] + t::d6 * s.k[5][i] + t::d7 * s.k[6][i]);
        }
    }
    vec2 eval(double z) const {
        double th = (z - z0) / h, th1 = 1.0 - th;
        vec2 y;
        for (int i = 0; i < 2; ++i)
            y[i] = rc1[i] + th * (rc2[i] + th1 * (rc3[i] + th * (rc4[i] + th1 * rc5[i])));
        return y;
    }
};

// Plain error-controlled advance with no events or profile; used for event
// polishing and by the reversibility tests.
inline vec2 advance_plain(const rhs_fn& f, double z0, vec2 y, double z1, const ode_options& opt) {
    if (z0 == z1) return y;
    double dir = z1 > z0 ? 1.0 : -1.0;
    double z = z0;
    vec2 fc = f(z, y);
    double h = dir * std::min(opt.h_max, 0.25 * std::abs(z1 - z0) + 1e-30);
    double facold = 1e-4;
    long steps = 0;
    while (dir * (z1 - z) > 0.0) {
        if (++steps > opt.max_steps) throw solver_error("advance_plain: step limit");
        if (dir * (z + h - z1) > 0.0) h = z1 - z;
        double h_min = 1e-14 * std::max(std::abs(z), 1e-10);
        if (std::abs(h) < h_min)
            throw solver_error("advance_plain: step underflow at z=" + std::to_string(z));
        bool failed = false;
        step_data s{};
        try {
            s = dopri5_step(f, z, y, fc, h, opt.atol, opt.rtol);
            if (!std::isfinite(s.y1[0]) || !std::isfinite(s.y1[1])) failed = true;
        } catch (const solver_error&) {
            failed = true;
        }
        if (failed) {
            h *= 0.5;
            continue;
        }
        if (s.err <= 1.0) {
            z += h;
            y = s.y1;
            fc = s.f1;
            facold = std::max(s.err, 1e-4);
            double fac11 = std::pow(s.err, 0.2 - 0.04 * 0.75);
            double fac = fac11 / std::pow(facold, 0.04);
            fac = std::max(0.1, std::min(5.0, fac / 0.9));
            h = h / fac;
            if (std::abs(h) > opt.h_max) h = dir * opt.h_max;
        } else {
            double fac11 = std::pow(s.err, 0.2 - 0.04 * 0.75);
            h = h / std::min(5.0, fac11 / 0.9);
        }
    }
    return y;
}

} // namespace detail

// Fixed-step DOPRI5 advance (tests use this to measure the convergence order).
inline flow_state integrate_fixed_steps(const flow_state& start, const sonic_parameter& p,
                                        double z_target, int n_steps,
                                        double eps_sonic = eps_sonic_default) {
    detail::rhs_fn f{p, eps_sonic};
    double h = (z_target - start.z) / n_steps;
    double z = start.z;
    detail::vec2 y{start.rho, start.omega};
    for (int i = 0; i < n_steps; ++i) {
        detail::vec2 f0 = f(z, y);
        auto s = detail::dopri5_step(f, z, y, f0, h, 1.0, 1.0);
        y = s.y1;
        z = start.z + (i + 1) * h;
    }
    return {z_target, y[0], y[1]};
}

// Core adaptive integration with events.  The profile stores every accepted
// point together with its RHS derivatives.
inline integration_outcome integrate(const flow_state& start, const sonic_parameter& p,
                                     double z_target, const event_spec& events,
                                     const ode_options& opt = {}) {
    using detail::vec2;
    if (start.z == z_target) throw invalid_parameter("integrate: z_target equals start.z");
    detail::rhs_fn f{p, opt.eps_sonic};

    integration_outcome out;
    out.profile.y_star = p.y_star;
    double dir = z_target > start.z ? 1.0 : -1.0;
    double z = start.z;
    vec2 y{start.rho, start.omega};

    auto indicator = [&](double zz, const vec2& yy) {
        return sonic_indicator({zz, yy[0], yy[1]}, p);
    };
    auto push_point = [&](double zz, const vec2& yy, const vec2& ff) {
        out.profile.pts.push_back({zz, yy[0], yy[1], ff[0], ff[1]});
        out.inf_omega = std::min(out.inf_omega, yy[1]);
    };
    auto finish = [&](terminal_event ev, double ze, const vec2& ye) {
        out.event = ev;
        out.z_event = ze;
        out.final_state = {ze, ye[0], ye[1]};
        return out;
    };

    // Events may already hold at the start.
    if (events.one_third && y[1] <= 1.0 / 3.0) {
        vec2 f0 = f(z, y);
        push_point(z, y, f0);
        return finish(terminal_event::hit_one_third, z, y);
    }
    if (std::abs(indicator(z, y)) <= opt.eps_event)
        throw sonic_singularity("integrate: start state on the sonic line");

    vec2 fc = f(z, y);
    push_point(z, y, fc);
    if (events.guard) {
        std::string reason = events.guard(out.profile.pts.back());
        if (!reason.empty()) {
            out.guard_reason = reason;
            return finish(terminal_event::bound_guard_tripped, z, y);
        }
    }

    double h = dir * std::min({opt.h_max, 0.25 * std::abs(z_target - z) + 1e-30, 0.01});
    double facold = 1e-4;

    // Event-time location.  g is > 0 at the step start za and <= 0 at zb.
    // First narrow by bisection on the quartic interpolant; optionally polish
    // with re-integrated evaluations (accuracy = integrator tolerance).
    auto locate = [&](const detail::dense_step& ds, double za, double zb,
                      const std::function<double(double, const vec2&)>& g, bool polish) {
        vec2 y0 = ds.eval(za);
        double a = za, b = zb;
        while (std::abs(b - a) > std::max(opt.event_tol, 1e-16 * std::abs(a))) {
            double m = 0.5 * (a + b);
            if (m == a || m == b) break;
            if (g(m, ds.eval(m)) > 0.0)
                a = m;
            else
                b = m;
        }
        double ze = 0.5 * (a + b);
        vec2 ye = ds.eval(ze);
        if (polish) {
            try {
                auto eval_g = [&](double zz) {
                    return g(zz, zz == za ? y0 : detail::advance_plain(f, za, y0, zz, opt));
                };
                // shrink the accurate bracket using the interpolant answer when
                // re-evaluation confirms its signs
                double a2 = za, b2 = zb;
                if (eval_g(a) > 0.0) a2 = a;
                if (eval_g(b) <= 0.0) b2 = b;
                while (std::abs(b2 - a2) > std::max(opt.event_tol, 1e-16 * std::abs(a2))) {
                    double m = 0.5 * (a2 + b2);
                    if (m == a2 || m == b2) break;
                    if (eval_g(m) > 0.0)
                        a2 = m;
                    else
                        b2 = m;
                }
                ze = 0.5 * (a2 + b2);
                ye = detail::advance_plain(f, za, y0, ze, opt);
            } catch (const solver_error&) {
                // keep the interpolant answer
            }
        }
        return std::make_pair(ze, ye);
    };

    while (true) {
        if (z == z_target) return finish(terminal_event::reached_target, z, y);
        if (++out.steps > opt.max_steps) throw solver_error("integrate: step limit exceeded");
        if (dir * (z + h - z_target) > 0.0) h = z_target - z;
        double h_min = 1e-14 * std::max(std::abs(z), 1e-10);
        if (std::abs(h) < h_min) {
            double ind = indicator(z, y);
            if (std::abs(ind) < 1e-4) {
                out.indicator_value = ind;
                return finish(terminal_event::hit_sonic_line, z, y);
            }
            return finish(terminal_event::step_underflow, z, y);
        }

        bool failed = false;
        detail::step_data s{};
        try {
            s = detail::dopri5_step(f, z, y, fc, h, opt.atol, opt.rtol);
            if (!std::isfinite(s.y1[0]) || !std::isfinite(s.y1[1])) failed = true;
        } catch (const solver_error&) {
            failed = true;
        }
        if (failed) {
            ++out.rejections;
            h *= 0.5;
            continue;
        }
        if (s.err > 1.0) {
            ++out.rejections;
            double fac11 = std::pow(s.err, 0.2 - 0.04 * 0.75);
            h = h / std::min(5.0, fac11 / 0.9);
            continue;
        }

        // accepted
        double z1 = z + h;
        if (z1 == z_target || std::abs(z1 - z_target) < 1e-15 * std::max(1.0, std::abs(z_target)))
            z1 = z_target;
        detail::dense_step ds;
        ds.z0 = z;
        ds.h = h;
        ds.build(y, s);

        // candidate events inside (z, z1]
        double best_z = z1;
        int best_kind = 0; // 0 none, 1 one_third, 2 sonic
        vec2 best_y = s.y1;
        if (events.one_third && s.y1[1] <= 1.0 / 3.0) {
            auto g = [](double, const vec2& yy) { return yy[1] - 1.0 / 3.0; };
            auto [ze, ye] = locate(ds, z, z1, g, true);
            best_z = ze;
            best_kind = 1;
            best_y = ye;
        }
        if (events.sonic_line && indicator(z1, s.y1) <= opt.eps_event) {
            // no re-integration polish: the RHS is stiff this close to the
            // sonic line, and the indicator's steep slope makes the
            // interpolant location accurate anyway
            auto g = [&](double zz, const vec2& yy) { return indicator(zz, yy) - opt.eps_event; };
            auto [ze, ye] = locate(ds, z, z1, g, false);
            if (best_kind == 0 || dir * (ze - best_z) < 0.0) {
                best_z = ze;
                best_kind = 2;
                best_y = ye;
            }
        }
        if (best_kind != 0) {
            vec2 fe{0.0, 0.0};
            try {
                fe = f(best_z, best_y);
            } catch (const solver_error&) {
                // event state may sit inside eps_sonic; keep zero derivatives
            }
            push_point(best_z, best_y, fe);
            if (best_kind == 1) return finish(terminal_event::hit_one_third, best_z, best_y);
            out.indicator_value = indicator(best_z, best_y);
            return finish(terminal_event::hit_sonic_line, best_z, best_y);
        }

        z = z1;
        y = s.y1;
        fc = s.f1;
        push_point(z, y, fc);
        if (events.guard) {
            std::string reason = events.guard(out.profile.pts.back());
            if (!reason.empty()) {
                out.guard_reason = reason;
                return finish(terminal_event::bound_guard_tripped, z, y);
            }
        }

        facold = std::max(s.err, 1e-4);
        double fac11 = std::pow(std::max(s.err, 1e-30), 0.2 - 0.04 * 0.75);
        double fac = fac11 / std::pow(facold, 0.04);
        fac = std::max(0.1, std::min(5.0, fac / 0.9));
        h = h / fac;
        if (std::abs(h) > opt.h_max) h = dir * opt.h_max;
    }
}

// Integrate through an ordered list of waypoints, concatenating profiles;
// stops early if any event fires.
inline integration_outcome integrate_path(const flow_state& start, const sonic_parameter& p,
                                          const std::vector<double>& targets,
                                          const event_spec& events, const ode_options& opt = {}) {
    integration_outcome acc;
    flow_state cur = start;
    bool first = true;
    for (double zt : targets) {
        integration_outcome leg = integrate(cur, p, zt, events, opt);
        acc.steps += leg.steps;
        acc.rejections += leg.rejections;
        acc.inf_omega = std::min(acc.inf_omega, leg.inf_omega);
        auto begin = leg.profile.pts.begin();
        if (!first && !leg.profile.pts.empty()) ++begin; // drop duplicated junction
        acc.profile.pts.insert(acc.profile.pts.end(), begin, leg.profile.pts.end());
        acc.profile.y_star = p.y_star;
        acc.event = leg.event;
        acc.z_event = leg.z_event;
        acc.indicator_value = leg.indicator_value;
        acc.guard_reason = leg.guard_reason;
        acc.final_state = leg.final_state;
        first = false;
        if (leg.event != terminal_event::reached_target) break;
        cur = leg.final_state;
    }
    return acc;
}

inline double handoff_offset(double radius) { return std::min(0.05, 0.5 * radius); }

// Guard of the inner a priori bounds: rho < 1/(y*z), |omega| < 1/(y*z).
inline guard_fn inner_apriori_guard(const sonic_parameter& p, double tol_guard = 1e-8) {
    return [p, tol_guard](const profile_point& pt) -> std::string {
        double lim = 1.0 + tol_guard;
        double q = p.y_star * pt.z;
        if (pt.rho * q >= lim) return "rho >= 1/(y*z)";
        if (std::abs(pt.omega) * q >= lim) return "|omega| >= 1/(y*z)";
        return {};
    };
}

// Leftward integration from the sonic series toward the origin.
inline integration_outcome integrate_inner(const sonic_parameter& p, const sonic_series& series,
                                           double z_min, const event_spec& events,
                                           const ode_options& opt = {}) {
    double h = handoff_offset(series.radius);
    if (!(h > 0.0)) throw insufficient_coefficients("integrate_inner: series has no radius");
    flow_state start = eval_series(series, 1.0 - h);
    integration_outcome out = integrate(start, p, z_min, events, opt);
    if (out.event == terminal_event::reached_target)
        out.event = terminal_event::reached_origin_window;
    return out;
}

// Least-squares fit of z^2 rho ~ C (1 + c1/z) over [z_lo, z_hi].
inline double fit_farfield_c(const solution_profile& profile, double z_lo, double z_hi) {
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    for (const auto& pt : profile.pts) {
        if (pt.z < z_lo || pt.z > z_hi) continue;
        double x = 1.0 / pt.z, v = pt.z * pt.z * pt.rho;
        s11 += 1.0;
        s12 += x;
        s22 += x * x;
        b1 += v;
        b2 += v * x;
    }
    double det = s11 * s22 - s12 * s12;
    if (s11 < 4 || std::abs(det) < 1e-14) throw solver_error("fit_farfield_c: degenerate fit window");
    return (b1 * s22 - b2 * s12) / det; // C; the second unknown is C*c1
}

// Rightward integration from the sonic series to z_max, guarded by the outer
// invariant set (violations mean integration error, hence an exception).
inline std::pair<solution_profile, double> integrate_outer(const sonic_parameter& p,
                                                           const sonic_series& series,
                                                           double z_max,
                                                           const ode_options& opt_in = {},
                                                           double tol_guard = 1e-8) {
    if (z_max < 10.0) throw invalid_parameter("integrate_outer: z_max must be >= 10");
    double h = handoff_offset(series.radius);
    if (!(h > 0.0)) throw insufficient_coefficients("integrate_outer: series has no radius");
    flow_state start = eval_series(series, 1.0 + h);
    event_spec ev;
    ev.guard = [p, tol_guard](const profile_point& pt) -> std::string {
        double q = p.y_star * pt.z;
        if (pt.rho * q >= 1.0 + tol_guard) return "rho >= 1/(y*z)";
        if (pt.rho * pt.omega * q * q <= 1.0 - tol_guard) return "rho*omega <= 1/(y*z)^2";
        return {};
    };
    ode_options opt = opt_in;
    opt.h_max = std::max(opt.h_max, 0.25); // far field is smooth; let steps grow
    integration_outcome out = integrate(start, p, z_max, ev, opt);
    if (out.event == terminal_event::bound_guard_tripped)
        throw guard_violation("integrate_outer: invariant-set guard tripped (" + out.guard_reason +
                              ") at z=" + std::to_string(out.z_event));
    if (out.event != terminal_event::reached_target)
        throw solver_error(std::string("integrate_outer: unexpected terminal event ") +
                           terminal_name(out.event));
    double c = fit_farfield_c(out.profile, z_max / 4.0, z_max);
    out.profile.farfield_c = c;
    return {out.profile, c};
}

// Guard of the left-family bounds (only meaningful for rho0 > 1/3).
inline guard_fn left_apriori_guard(double rho0, double tol = 1e-8) {
    return [rho0, tol](const profile_point& pt) -> std::string {
        if (pt.omega <= 1.0 / 3.0 - tol) return "omega <= 1/3";
        if (pt.rho + pt.omega >= rho0 + 1.0 / 3.0 + tol) return "rho+omega >= rho0+1/3";
        if (pt.rho * pt.omega >= rho0 / 3.0 + tol) return "rho*omega >= rho0/3";
        if (pt.rho <= pt.omega - tol) return "rho <= omega";
        if (pt.drho >= tol) return "rho not decreasing";
        return {};
    };
}

// Rightward integration of a left-family member from its origin series.
inline integration_outcome integrate_left(const origin_series& origin, double z_target,
                                          const event_spec& events, const ode_options& opt = {}) {
    double z_h = handoff_offset(origin.radius);
    if (!(z_h > 0.0))
        throw insufficient_coefficients("integrate_left: origin series has no radius");
    z_h = std::min(z_h, 0.5 * z_target);
    flow_state start = eval_origin_series(origin, z_h);
    if (z_target <= start.z) throw invalid_parameter("integrate_left: z_target inside handoff");
    return integrate(start, origin.p, z_target, events, opt);
}

} // namespace lp
