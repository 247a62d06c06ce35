#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lp/config.hpp"
#include "lp/integrate.hpp"
#include "lp/model.hpp"
#include "lp/origin_series.hpp"
#include "lp/shooting.hpp"
#include "lp/sonic_series.hpp"

namespace lp {

enum class check_status { pass, fail, boundary, skipped };

inline const char* status_name(check_status s) {
    switch (s) {
        case check_status::pass: return "pass";
        case check_status::fail: return "fail";
        case check_status::boundary: return "boundary";
        default: return "skipped";
    }
}

struct check_entry {
    std::string name;
    std::string region;
    std::string anchor; // the inequality being enforced, as a formula
    double margin = 0.0; // signed: positive = satisfied with slack
    check_status status = check_status::pass;
};

struct invariant_report {
    std::vector<check_entry> entries;

    bool ok() const {
        for (const auto& e : entries)
            if (e.status == check_status::fail) return false;
        return true;
    }
};

namespace detail {

constexpr double margin_slack = 1e-9; // strict inequalities get this much roundoff room

inline check_entry make_check(std::string name, std::string region, std::string anchor,
                              double margin) {
    check_entry e{std::move(name), std::move(region), std::move(anchor), margin,
                  check_status::pass};
    if (margin < -margin_slack)
        e.status = check_status::fail;
    else if (std::abs(margin) <= margin_slack)
        e.status = check_status::boundary;
    return e;
}

} // namespace detail

// Bounds on the inner region s(y*) < z < 1:
//   0 < rho < 1/(y* z),  |omega| < 1/(y* z),  (z rho)' > 0.
inline std::vector<check_entry> check_inner_apriori(const solution_profile& pr,
                                                    const sonic_parameter& p) {
    double m_pos = std::numeric_limits<double>::infinity();
    double m_rho = m_pos, m_omega = m_pos, m_mono = m_pos;
    for (const auto& pt : pr.pts) {
        if (pt.z <= 0.0 || pt.z >= 1.0) continue;
        double cap = 1.0 / (p.y_star * pt.z);
        m_pos = std::min(m_pos, pt.rho);
        m_rho = std::min(m_rho, cap - pt.rho);
        m_omega = std::min(m_omega, cap - std::abs(pt.omega));
        m_mono = std::min(m_mono, pt.rho + pt.z * pt.drho); // (z rho)'
    }
    return {
        detail::make_check("inner_rho_positive", "(s,1)", "rho > 0", m_pos),
        detail::make_check("inner_rho_bound", "(s,1)", "rho < 1/(y z)", m_rho),
        detail::make_check("inner_omega_bound", "(s,1)", "|omega| < 1/(y z)", m_omega),
        detail::make_check("inner_zrho_monotone", "(s,1)", "(z rho)' > 0", m_mono),
    };
}

// Outer region z > 1:
//   1/3 < omega < 1,  -2 < rho' z / rho < -1,  rho < 1/(y z),  rho omega > 1/(y z)^2,
// plus the residual of the identity
//   rho' omega z^2 + rho omega' z^2 + 2 rho omega z = (1 - omega) rho z.
inline std::vector<check_entry> check_outer_invariants(const solution_profile& pr,
                                                       const sonic_parameter& p) {
    double inf = std::numeric_limits<double>::infinity();
    double m_wlo = inf, m_whi = inf, m_slo = inf, m_shi = inf, m_c5 = inf, m_c6 = inf;
    double worst_id = 0.0;
    for (const auto& pt : pr.pts) {
        if (pt.z <= 1.0) continue;
        m_wlo = std::min(m_wlo, pt.omega - 1.0 / 3.0);
        m_whi = std::min(m_whi, 1.0 - pt.omega);
        double slope = pt.drho * pt.z / pt.rho;
        m_slo = std::min(m_slo, slope + 2.0);
        m_shi = std::min(m_shi, -1.0 - slope);
        double q = p.y_star * pt.z;
        m_c5 = std::min(m_c5, 1.0 / q - pt.rho);
        m_c6 = std::min(m_c6, pt.rho * pt.omega - 1.0 / (q * q));
        double id = pt.drho * pt.omega * pt.z * pt.z + pt.rho * pt.domega * pt.z * pt.z +
                    2.0 * pt.rho * pt.omega * pt.z - (1.0 - pt.omega) * pt.rho * pt.z;
        worst_id = std::max(worst_id, std::abs(id) / std::max(1.0, pt.rho * pt.z));
    }
    std::vector<check_entry> out = {
        detail::make_check("outer_omega_lower", "(1,zmax]", "omega > 1/3", m_wlo),
        detail::make_check("outer_omega_upper", "(1,zmax]", "omega < 1", m_whi),
        detail::make_check("outer_slope_lower", "(1,zmax]", "rho' z / rho > -2", m_slo),
        detail::make_check("outer_slope_upper", "(1,zmax]", "rho' z / rho < -1", m_shi),
        detail::make_check("outer_rho_cap", "(1,zmax]", "rho < 1/(y z)", m_c5),
        detail::make_check("outer_mass_flux", "(1,zmax]", "rho omega > 1/(y z)^2", m_c6),
    };
    check_entry id_e{"outer_identity", "(1,zmax]",
                     "rho' w z^2 + rho w' z^2 + 2 rho w z = (1-w) rho z",
                     1e-9 - worst_id, check_status::pass};
    if (worst_id > 1e-9) id_e.status = check_status::fail;
    out.push_back(id_e);
    return out;
}

// Left-family bounds for rho0 > 1/3:
//   omega > 1/3, rho+omega < rho0+1/3, rho*omega < rho0/3, rho > omega, rho' < 0.
inline std::vector<check_entry> check_left_apriori(const solution_profile& pr, double rho0) {
    double inf = std::numeric_limits<double>::infinity();
    double m1 = inf, m2 = inf, m3 = inf, m4 = inf, m5 = inf;
    for (const auto& pt : pr.pts) {
        if (pt.z <= 0.0) continue;
        m1 = std::min(m1, pt.omega - 1.0 / 3.0);
        m2 = std::min(m2, rho0 + 1.0 / 3.0 - pt.rho - pt.omega);
        m3 = std::min(m3, rho0 / 3.0 - pt.rho * pt.omega);
        m4 = std::min(m4, pt.rho - pt.omega);
        m5 = std::min(m5, -pt.drho);
    }
    std::vector<check_entry> out = {
        detail::make_check("left_omega_above_third", "(0,z0]", "omega > 1/3", m1),
        detail::make_check("left_sum_bound", "(0,z0]", "rho+omega < rho0+1/3", m2),
        detail::make_check("left_product_bound", "(0,z0]", "rho*omega < rho0/3", m3),
        detail::make_check("left_rho_dominates", "(0,z0]", "rho > omega", m4),
        detail::make_check("left_rho_decreasing", "(0,z0]", "rho' < 0", m5),
    };
    if (std::abs(rho0 - 1.0 / 3.0) < 1e-12)
        for (auto& e : out) e.status = check_status::boundary; // Friedman saturates everything
    return out;
}

// Geometric growth of the series coefficients: C_hat finite, tail ratios decaying.
inline check_entry check_coefficient_growth(const std::vector<double>& rho,
                                            const std::vector<double>& omega) {
    int n = static_cast<int>(std::min(rho.size(), omega.size())) - 1;
    double c_hat = 0.0;
    bool any = false;
    for (int k = 2; k <= n; ++k) {
        double m = std::max(std::abs(rho[static_cast<size_t>(k)]),
                            std::abs(omega[static_cast<size_t>(k)]));
        if (m == 0.0) continue;
        any = true;
        c_hat = std::max(c_hat, std::pow(k * k * m, 1.0 / (k - 1)));
    }
    if (!any) {
        check_entry e{"coefficient_growth", "series", "N^2 |c_N| <= C^(N-1)", 1.0,
                      check_status::boundary};
        return e; // constant solution: trivially geometric
    }
    // tail check: the last-quarter bound must not exceed the overall bound
    double c_tail = 0.0;
    for (int k = std::max(2, 3 * n / 4); k <= n; ++k) {
        double m = std::max(std::abs(rho[static_cast<size_t>(k)]),
                            std::abs(omega[static_cast<size_t>(k)]));
        if (m > 0.0) c_tail = std::max(c_tail, std::pow(k * k * m, 1.0 / (k - 1)));
    }
    double margin = std::isfinite(c_hat) ? (c_hat - c_tail) / c_hat + 1e-6 : -1.0;
    return detail::make_check("coefficient_growth", "series", "N^2 |c_N| <= C^(N-1)", margin);
}

// Monotone dependence of the left family on the central density, checked by
// centered differences on a grid of rho0 values within the admissible window.
inline check_entry check_monotonicity_rho0(const sonic_parameter& p, const solver_config& cfg) {
    double worst = std::numeric_limits<double>::infinity();
    bool sampled = false;
    for (double rho0 : {1.0 / 3.0 + 0.1, 1.0, 2.0, 5.0, 10.0}) {
        double z_lim = cfg.eta_monotone * std::pow(rho0, -0.75);
        double d = 1e-5 * rho0;
        for (int i = 1; i <= 8; ++i) {
            double z = z_lim * i / 8.0;
            double rp = left_state_at(p, rho0 + d, z, cfg).rho;
            double rm = left_state_at(p, rho0 - d, z, cfg).rho;
            worst = std::min(worst, (rp - rm) / (2.0 * d));
            sampled = true;
        }
    }
    check_entry e = detail::make_check("monotone_in_rho0", "z <= eta rho0^(-3/4)",
                                       "d rho/d rho0 > 0", sampled ? worst : 0.0);
    if (!sampled) e.status = check_status::skipped;
    return e;
}

// Residual of the defining system along a stored profile, using the stored
// dense-output derivatives.
inline check_entry check_residual(const solution_profile& pr, const sonic_parameter& p,
                                  double tol = 1e-8) {
    double worst = 0.0;
    for (const auto& pt : pr.pts) {
        if (pt.z <= 0.0) continue;
        flow_state st{pt.z, pt.rho, pt.omega};
        if (std::abs(sonic_indicator(st, p)) < 1e-6) continue; // rhs ill-conditioned there
        derivs d = eval_rhs(st, p);
        double sc_r = std::max({1.0, std::abs(d.drho), std::abs(pt.drho)});
        double sc_w = std::max({1.0, std::abs(d.domega), std::abs(pt.domega)});
        worst = std::max(worst, std::abs(d.drho - pt.drho) / sc_r);
        worst = std::max(worst, std::abs(d.domega - pt.domega) / sc_w);
    }
    check_entry e{"ode_residual", "profile", "profile derivatives satisfy the system",
                  tol - worst, check_status::pass};
    if (worst > tol) e.status = check_status::fail;
    return e;
}

// Full suite run against a solved profile.
inline invariant_report verify_solution(const lp_solution& sol, const solver_config& cfg) {
    sonic_parameter p(sol.y_bar);
    invariant_report rep;
    auto add = [&](std::vector<check_entry> v) {
        for (auto& e : v) rep.entries.push_back(std::move(e));
    };
    add(check_inner_apriori(sol.profile, p));
    add(check_outer_invariants(sol.profile, p));

    sonic_series series = extend_series(p, branch_kind::lp, cfg.n_max, cfg.radius_safety,
                                        cfg.radius_cap);
    rep.entries.push_back(check_coefficient_growth(series.rho, series.omega));
    rep.entries.push_back(check_residual(sol.profile, p));
    rep.entries.push_back(check_monotonicity_rho0(p, cfg));
    return rep;
}

} // namespace lp
