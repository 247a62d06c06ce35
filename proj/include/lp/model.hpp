#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lp/errors.hpp"

namespace lp {

// A point (z, rho, omega) of the self-similar flow.  z is the similarity
// coordinate rescaled so the sonic point sits at z = 1; omega is the relative
// velocity (omega = 1/3 at a regular center, omega -> 1 far out).
struct flow_state {
    double z = 0.0;
    double rho = 0.0;
    double omega = 0.0;
};

struct sonic_parameter {
    double y_star;
    double omega0; // 1/y_star, cached

    explicit sonic_parameter(double ys) : y_star(ys), omega0(1.0 / ys) {
        if (!(ys > 0.0) || !std::isfinite(ys))
            throw invalid_parameter("sonic parameter must be positive and finite");
    }
};

struct derivs {
    double drho = 0.0;
    double domega = 0.0;
};

constexpr double eps_sonic_default = 1e-12;

// 1 - y*^2 z^2 omega^2; zero exactly on the sonic line.
inline double sonic_indicator(const flow_state& s, const sonic_parameter& p) {
    double q = p.y_star * s.z * s.omega;
    return 1.0 - q * q;
}

// Right-hand side of the z-system:
//   rho'   = -2 y*^2 z omega rho (rho - omega) / (1 - y*^2 z^2 omega^2)
//   omega' = (1 - 3 omega)/z + 2 y*^2 z omega^2 (rho - omega) / (1 - y*^2 z^2 omega^2)
inline derivs eval_rhs(const flow_state& s, const sonic_parameter& p,
                       double eps_sonic = eps_sonic_default) {
    if (s.z <= 0.0)
        throw origin_singularity("eval_rhs: z must be positive, got z=" + std::to_string(s.z));
    double denom = sonic_indicator(s, p);
    if (std::abs(denom) <= eps_sonic)
        throw sonic_singularity("eval_rhs: state within eps_sonic of the sonic line at z=" +
                                std::to_string(s.z));
    double y2 = p.y_star * p.y_star;
    double common = 2.0 * y2 * s.z * s.omega * (s.rho - s.omega) / denom;
    derivs d;
    d.drho = -common * s.rho;
    d.domega = (1.0 - 3.0 * s.omega) / s.z + common * s.omega;
    return d;
}

// Exact constant solution rho = omega = 1/3 (regular at the origin).
inline flow_state friedman_state(double z) { return {z, 1.0 / 3.0, 1.0 / 3.0}; }

// Exact far-field solution rho = 1/y^2 with y = y* z, omega = 1.
inline flow_state farfield_state(double z, const sonic_parameter& p) {
    if (z <= 0.0)
        throw origin_singularity("farfield_state: 1/y^2 diverges at z=0");
    double y = p.y_star * z;
    return {z, 1.0 / (y * y), 1.0};
}

// One grid row of a constructed solution.  Derivatives are the RHS values at
// the point (dense-output data), used by the residual and monotonicity checks.
struct profile_point {
    double z = 0.0;
    double rho = 0.0;
    double omega = 0.0;
    double drho = 0.0;
    double domega = 0.0;
};

struct solution_profile {
    std::vector<profile_point> pts;
    double y_star = 0.0;
    double rho_center = 0.0;  // filled for assembled LP profiles
    double farfield_c = 0.0;  // filled when an outer fit was done
    std::vector<std::string> events;

    bool empty() const { return pts.empty(); }
    const profile_point& front() const { return pts.front(); }
    const profile_point& back() const { return pts.back(); }
};

struct physical_sample {
    double r, varrho, u, m;
};

struct physical_snapshot {
    double k = 0.0;
    double t = 0.0;
    std::vector<physical_sample> samples;
};

// Map a similarity profile back to fluid variables at fixed time t < 0:
//   r = y*z (-sqrt(k) t),  varrho = rho/(2 pi k t^2),  u = sqrt(k) y (omega-1),
// and enclosed mass by composite trapezoid of 4 pi sigma^2 varrho.
inline physical_snapshot to_physical(const solution_profile& profile, double k, double t) {
    if (!(k > 0.0)) throw invalid_pressure("to_physical: k must be positive");
    if (!(t < 0.0)) throw invalid_time("to_physical: t must be negative");
    if (profile.empty()) throw invalid_parameter("to_physical: empty profile");

    const double pi = 3.14159265358979323846;
    double sqrtk = std::sqrt(k);
    double rho_scale = 1.0 / (2.0 * pi * k * t * t);

    physical_snapshot snap;
    snap.k = k;
    snap.t = t;
    snap.samples.reserve(profile.pts.size());
    double m = 0.0;
    double r_prev = 0.0, integrand_prev = 0.0;
    bool have_prev = false;
    for (const auto& pt : profile.pts) {
        double y = profile.y_star * pt.z;
        double r = y * (-sqrtk * t);
        double varrho = pt.rho * rho_scale;
        double u = sqrtk * y * (pt.omega - 1.0);
        double integrand = 4.0 * pi * r * r * varrho;
        if (have_prev)
            m += 0.5 * (integrand + integrand_prev) * (r - r_prev);
        else if (r > 0.0)
            m += integrand * r / 3.0; // 4/3 pi r^3 varrho for the first cell, rho ~ const near 0
        snap.samples.push_back({r, varrho, u, m});
        r_prev = r;
        integrand_prev = integrand;
        have_prev = true;
    }
    return snap;
}

} // namespace lp
