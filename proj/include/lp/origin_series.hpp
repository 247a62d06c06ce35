#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lp/dual.hpp"
#include "lp/errors.hpp"
#include "lp/model.hpp"
#include "lp/sonic_series.hpp"

namespace lp {

// Taylor data at z = 0 of the left-family member with rho(0) = rho0,
// omega(0) = 1/3.  The recursion is fully explicit (divide by N+1 and N+4).
struct origin_series {
    sonic_parameter p;
    double rho0;
    std::vector<double> rho;
    std::vector<double> omega;
    double radius = 0.0;

    int n_max() const { return static_cast<int>(rho.size()) - 1; }
};

namespace detail {

template <class T>
void build_origin_coeffs(T y2, T rho0, int n_max, std::vector<T>& rho, std::vector<T>& omega) {
    rho.assign(1, rho0);
    omega.assign(1, T(1.0 / 3.0));
    for (int n = 0; n < n_max; ++n) {
        // order n relation determines the index-(n+1) coefficients
        T f(0.0), g(0.0);
        for (int k = 0; k <= n - 2; ++k) {
            T w2 = w2_at(omega, n - 2 - k);
            f += T(static_cast<double>(k + 1)) * at(rho, k + 1) * w2;
            g += (T(static_cast<double>(k + 1)) * at(omega, k + 1) + T(3.0) * at(omega, k + 1)) * w2;
        }
        f = y2 * f - T(2.0) * y2 * conv3(omega, rho, rho, omega, n - 1);
        g = y2 * g + T(2.0) * y2 * conv3(omega, omega, rho, omega, n - 1);
        rho.push_back(f / T(static_cast<double>(n + 1)));
        omega.push_back(g / T(static_cast<double>(n + 4)));
    }
}

} // namespace detail

inline origin_series extend_origin_series(const sonic_parameter& p, double rho0, int n_max,
                                          double radius_safety = 0.8, double radius_cap = 0.5) {
    if (!(rho0 > 0.0))
        throw invalid_parameter("extend_origin_series: rho0 must be positive, got " +
                                std::to_string(rho0));
    if (n_max < 2)
        throw invalid_parameter("extend_origin_series: N_max must be >= 2");
    origin_series s{p, rho0, {}, {}, 0.0};
    detail::build_origin_coeffs(p.y_star * p.y_star, rho0, n_max, s.rho, s.omega);
    // the expansion is even in z, so 10 nonzero coefficients need 20 orders
    if (n_max >= 20)
        s.radius = detail::radius_from_coeffs(s.rho, s.omega, radius_safety, radius_cap);
    return s;
}

inline flow_state eval_origin_series(const origin_series& s, double z, derivs* d = nullptr) {
    if (z < 0.0 || (z != 0.0 && z >= s.radius))
        throw outside_radius("eval_origin_series: z = " + std::to_string(z) +
                             " outside [0, " + std::to_string(s.radius) + ")");
    int n = s.n_max();
    double r = s.rho[n], w = s.omega[n], dr = 0.0, dw = 0.0;
    for (int k = n - 1; k >= 0; --k) {
        dr = dr * z + (k + 1) * s.rho[k + 1];
        dw = dw * z + (k + 1) * s.omega[k + 1];
        r = r * z + s.rho[k];
        w = w * z + s.omega[k];
    }
    if (d) *d = {dr, dw};
    return {z, r, w};
}

// d/d rho0 of every coefficient, by the same recursion over dual numbers.
inline std::vector<std::pair<double, double>> origin_param_derivative(const origin_series& s) {
    std::vector<dual> rho, omega;
    dual y2(s.p.y_star * s.p.y_star);
    detail::build_origin_coeffs(y2, dual(s.rho0, 1.0), s.n_max(), rho, omega);
    std::vector<std::pair<double, double>> out;
    out.reserve(rho.size());
    for (size_t i = 0; i < rho.size(); ++i) out.emplace_back(rho[i].d, omega[i].d);
    return out;
}

// A priori spatial window z0(rho0): sqrt3/(sqrt2 y* rho0) for rho0 > 1,
// sqrt3/(sqrt2 y*) for 1/3 < rho0 <= 1.
inline double z_zero_scale(const sonic_parameter& p, double rho0) {
    double base = std::sqrt(3.0) / (std::sqrt(2.0) * p.y_star);
    return rho0 > 1.0 ? base / rho0 : base;
}

} // namespace lp
