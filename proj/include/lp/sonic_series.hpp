#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lp/dual.hpp"
#include "lp/errors.hpp"
#include "lp/model.hpp"

namespace lp {

enum class branch_kind { lp, hunter };

inline const char* branch_name(branch_kind b) {
    return b == branch_kind::lp ? "lp" : "hunter";
}

struct sonic_series {
    sonic_parameter p;
    branch_kind branch;
    std::vector<double> rho;   // rho_N, N = 0..n_max
    std::vector<double> omega; // omega_N
    double radius = 0.0;

    int n_max() const { return static_cast<int>(rho.size()) - 1; }
};

struct solvability_matrix {
    double a11, a12, a21, a22;
    double det;
};

// A_N from the order-N solvability system A_N (rho_N, omega_N)^T = (F_N, G_N)^T.
inline solvability_matrix coeff_matrix(int n, double omega0, double omega1, double rho1) {
    solvability_matrix m;
    m.a11 = -2.0 * n + 2.0 - 2.0 * n * omega1 / omega0;
    m.a12 = -2.0 * rho1 / omega0 - 2.0;
    m.a21 = -2.0;
    m.a22 = -2.0 * n - 4.0 + 2.0 / omega0 - (2.0 * n + 2.0) * omega1 / omega0;
    m.det = m.a11 * m.a22 - m.a12 * m.a21;
    return m;
}

struct lp_seed_coeffs {
    double rho0, omega0, rho1, omega1, rho2, omega2;
};

// Closed-form LP branch data at the sonic point.
inline lp_seed_coeffs lp_seed(const sonic_parameter& p) {
    double ys = p.y_star;
    if (!(ys > 1.5))
        throw unsupported_parameter("lp_seed: LP branch needs y* > 3/2, got " +
                                    std::to_string(ys));
    lp_seed_coeffs s;
    s.rho0 = s.omega0 = 1.0 / ys;
    s.rho1 = -1.0 / ys;
    s.omega1 = 1.0 - 2.0 / ys;
    double denom = 2.0 * ys * (2.0 * ys - 3.0);
    s.rho2 = (-ys * ys + 6.0 * ys - 7.0) / denom;
    s.omega2 = (-5.0 * ys * ys + 19.0 * ys - 17.0) / denom;
    return s;
}

struct hunter_seed_coeffs {
    double rho0, omega0, rho1, omega1;
};

inline hunter_seed_coeffs hunter_seed(const sonic_parameter& p, int n_max = 2,
                                      double tol_degenerate = 1e-8) {
    double ys = p.y_star;
    // det A_N^H / 4 = N (N + 1 - y*), singular exactly at y* = N + 1, N >= 2.
    for (int n = 2; n <= std::max(n_max, 2); ++n) {
        if (std::abs(ys - (n + 1)) < tol_degenerate)
            throw degenerate_parameter("hunter_seed: y* = " + std::to_string(ys) +
                                       " degenerate at order N=" + std::to_string(n));
    }
    hunter_seed_coeffs s;
    s.rho0 = s.omega0 = 1.0 / ys;
    s.rho1 = 1.0 - 3.0 / ys;
    s.omega1 = 0.0;
    return s;
}

namespace detail {

template <class T>
T at(const std::vector<T>& v, int i) {
    return (i >= 0 && i < static_cast<int>(v.size())) ? v[static_cast<size_t>(i)] : T(0.0);
}

// (omega^2)_l with zero padding beyond the stored coefficients.
template <class T>
T w2_at(const std::vector<T>& om, int l) {
    T s(0.0);
    for (int a = 0; a <= l; ++a) s += at(om, a) * at(om, l - a);
    return s;
}

// sum_{k+l+n=M} om_k rh_l (rho_n - omega_n)
template <class T>
T conv3(const std::vector<T>& om, const std::vector<T>& rh, const std::vector<T>& rho,
        const std::vector<T>& omega, int m) {
    T s(0.0);
    for (int k = 0; k <= m; ++k)
        for (int l = 0; l + k <= m; ++l) {
            int n = m - k - l;
            s += at(om, k) * at(rh, l) * (at(rho, n) - at(omega, n));
        }
    return s;
}

// pairwise convolution (ab)_m over zero-padded vectors
template <class T>
T conv2(const std::vector<T>& a, const std::vector<T>& b, int m) {
    T s(0.0);
    for (int k = 0; k <= m; ++k) s += at(a, k) * at(b, m - k);
    return s;
}

inline double sgn_pm(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

// Order-N relation for the density series about z=1 (multiplied form).
// Vanishes on exact coefficient sequences; with indices >= N zero-padded it
// equals -F_N of the solvability system.
template <class T>
T sonic_rho_relation(int n, T y2, const std::vector<T>& rho, const std::vector<T>& omega) {
    std::vector<T> w2(static_cast<size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) w2[l] = w2_at(omega, l);
    std::vector<T> rd(static_cast<size_t>(n) + 1); // (rho (rho-omega))_m
    for (int m = 0; m <= n; ++m) rd[m] = conv2(rho, rho, m) - conv2(rho, omega, m);
    std::vector<T> wrd(static_cast<size_t>(n) + 1); // (omega rho (rho-omega))_m
    for (int m = 0; m <= n; ++m) {
        T acc(0.0);
        for (int k = 0; k <= m; ++k) acc += at(omega, k) * rd[m - k];
        wrd[m] = acc;
    }
    T s = T(static_cast<double>(n + 1)) * at(rho, n + 1);
    T sum1(0.0), sum2(0.0), sum3(0.0);
    for (int k = 0; k <= n; ++k) sum1 += T(static_cast<double>(k + 1)) * at(rho, k + 1) * w2[n - k];
    for (int k = 0; k <= n - 1; ++k) sum2 += T(static_cast<double>(k + 1)) * at(rho, k + 1) * w2[n - 1 - k];
    for (int k = 0; k <= n - 2; ++k) sum3 += T(static_cast<double>(k + 1)) * at(rho, k + 1) * w2[n - 2 - k];
    s -= y2 * (sum1 + T(2.0) * sum2 + sum3);
    s += T(2.0) * y2 * (wrd[n] + (n >= 1 ? wrd[n - 1] : T(0.0)));
    return s;
}

// Order-N relation for the velocity series about z=1 (multiplied form).
template <class T>
T sonic_omega_relation(int n, T y2, const std::vector<T>& rho, const std::vector<T>& omega) {
    std::vector<T> w2(static_cast<size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) w2[l] = w2_at(omega, l);
    // (omega^2 (rho-omega))_m and (omega (omega^2))_m = (omega^3)_m
    std::vector<T> w2d(static_cast<size_t>(n) + 1), w3(static_cast<size_t>(n) + 1);
    for (int m = 0; m <= n; ++m) {
        T acc(0.0), acc3(0.0);
        for (int k = 0; k <= m; ++k) {
            acc += w2[k] * (at(rho, m - k) - at(omega, m - k));
            acc3 += w2[k] * at(omega, m - k);
        }
        w2d[m] = acc;
        w3[m] = acc3;
    }
    T s = T(static_cast<double>(n + 1)) * at(omega, n + 1);
    T sum1(0.0), sum2(0.0), sum3(0.0);
    for (int k = 0; k <= n; ++k) sum1 += T(static_cast<double>(k + 1)) * at(omega, k + 1) * w2[n - k];
    for (int k = 0; k <= n - 1; ++k) sum2 += T(static_cast<double>(k + 1)) * at(omega, k + 1) * w2[n - 1 - k];
    for (int k = 0; k <= n - 2; ++k) sum3 += T(static_cast<double>(k + 1)) * at(omega, k + 1) * w2[n - 2 - k];
    s -= y2 * (sum1 + T(2.0) * sum2 + sum3);

    s -= T(sgn_pm(n));
    T lin(0.0);
    for (int k = 0; k <= n; ++k) lin += T(sgn_pm(n - k)) * at(omega, k);
    s += T(3.0) * lin;

    T u2(0.0), u1(0.0), u0(0.0);
    for (int l = 0; l <= n - 2; ++l) u2 += T(sgn_pm(n - 2 - l)) * w2[l];
    for (int l = 0; l <= n - 1; ++l) u1 += T(sgn_pm(n - 1 - l)) * w2[l];
    for (int l = 0; l <= n; ++l) u0 += T(sgn_pm(n - l)) * w2[l];
    s += y2 * (u2 + T(2.0) * u1 + u0);

    T v2(0.0), v1(0.0), v0(0.0);
    for (int m = 0; m <= n - 2; ++m) v2 += T(sgn_pm(n - 2 - m)) * w3[m];
    for (int m = 0; m <= n - 1; ++m) v1 += T(sgn_pm(n - 1 - m)) * w3[m];
    for (int m = 0; m <= n; ++m) v0 += T(sgn_pm(n - m)) * w3[m];
    s -= T(3.0) * y2 * (v2 + T(2.0) * v1 + v0);

    s -= T(2.0) * y2 * (w2d[n] + (n >= 1 ? w2d[n - 1] : T(0.0)));
    return s;
}

// F_N, G_N: known side of A_N (rho_N, omega_N)^T = (F_N, G_N)^T, computed by
// zero-padding the order-N relations at indices N and N+1.  Every term the
// solvability matrix absorbs carries a factor of a padded coefficient, so this
// equals the explicit restricted convolution sums.
template <class T>
void source_terms_t(int n, T y2, const std::vector<T>& rho, const std::vector<T>& omega,
                    T& f, T& g) {
    std::vector<T> r(rho.begin(), rho.begin() + std::min<size_t>(rho.size(), static_cast<size_t>(n)));
    std::vector<T> w(omega.begin(), omega.begin() + std::min<size_t>(omega.size(), static_cast<size_t>(n)));
    f = -sonic_rho_relation(n, y2, r, w);
    g = -sonic_omega_relation(n, y2, r, w);
}

// Shared recurrence over a scalar type (double, or dual for d/d omega0).
// Returns coefficient vectors 0..n_max.
template <class T>
void build_sonic_coeffs(branch_kind branch, T omega0, int n_max,
                        std::vector<T>& rho, std::vector<T>& omega) {
    T one(1.0);
    T ystar = one / omega0;
    T y2 = ystar * ystar;
    rho.assign(1, omega0);
    omega.assign(1, omega0);
    T rho1, omega1;
    if (branch == branch_kind::lp) {
        rho1 = -omega0;
        omega1 = one - T(2.0) * omega0;
    } else {
        rho1 = one - T(3.0) * omega0;
        omega1 = T(0.0);
    }
    if (n_max >= 1) {
        rho.push_back(rho1);
        omega.push_back(omega1);
    }
    for (int n = 2; n <= n_max; ++n) {
        T f, g;
        source_terms_t(n, y2, rho, omega, f, g);
        T rn, wn;
        if (branch == branch_kind::lp) {
            // triangular closed form: A_N^LP = 2 [[N(1-1/w0)+1, 0], [-1, N(1-1/w0)]]
            T q = T(static_cast<double>(n)) * (one - one / omega0);
            rn = f / (T(2.0) * (q + one));
            wn = g / (T(2.0) * q) + f / (T(2.0) * q * (q + one));
        } else {
            T a11 = T(-2.0 * n + 2.0) - T(2.0 * n) * omega1 / omega0;
            T a12 = T(-2.0) * rho1 / omega0 - T(2.0);
            T a21 = T(-2.0);
            T a22 = T(-2.0 * n - 4.0) + T(2.0) / omega0 - T(2.0 * n + 2.0) * omega1 / omega0;
            T det = a11 * a22 - a12 * a21;
            double norm = std::max(std::max(std::abs(value_of(a11)), std::abs(value_of(a12))),
                                   std::max(std::abs(value_of(a21)), std::abs(value_of(a22))));
            if (std::abs(value_of(det)) < 1e-10 * norm)
                throw degenerate_parameter("extend_series: singular solvability matrix at N=" +
                                           std::to_string(n));
            rn = (a22 * f - a12 * g) / det;
            wn = (a11 * g - a21 * f) / det;
        }
        rho.push_back(rn);
        omega.push_back(wn);
    }
}

// Root-test radius: coefficients obey |c_N| <= Chat^{N-1}/N^2 with
// Chat = sup_N (N^2 max|c_N|)^{1/(N-1)}, so 1/Chat is a guaranteed
// (conservative) lower bound on the analyticity radius.
inline double radius_from_coeffs(const std::vector<double>& rho, const std::vector<double>& omega,
                                 double safety, double cap) {
    int n_max = static_cast<int>(rho.size()) - 1;
    int nonzero = 0;
    for (int n = 1; n <= n_max; ++n)
        if (std::max(std::abs(rho[n]), std::abs(omega[n])) > 0.0) ++nonzero;
    if (nonzero == 0) return cap; // constant series, infinite radius
    if (nonzero < 10)
        throw insufficient_coefficients("estimate_radius: need >= 10 nonzero coefficients, have " +
                                        std::to_string(nonzero));
    double chat = 0.0;
    for (int n = 2; n <= n_max; ++n) {
        double c = std::max(std::abs(rho[n]), std::abs(omega[n]));
        if (c == 0.0) continue;
        chat = std::max(chat, std::pow(n * n * c, 1.0 / (n - 1)));
    }
    if (chat == 0.0) return cap;
    return std::min(safety / chat, cap);
}

} // namespace detail

inline std::pair<double, double> source_terms(int n, const sonic_parameter& p,
                                              const std::vector<double>& rho,
                                              const std::vector<double>& omega) {
    double f, g;
    detail::source_terms_t(n, p.y_star * p.y_star, rho, omega, f, g);
    return {f, g};
}

inline sonic_series extend_series(const sonic_parameter& p, branch_kind branch, int n_max,
                                  double radius_safety = 0.8, double radius_cap = 0.5) {
    if (branch == branch_kind::lp)
        (void)lp_seed(p); // validates y* > 3/2
    else
        (void)hunter_seed(p, n_max);
    sonic_series s{p, branch, {}, {}, 0.0};
    detail::build_sonic_coeffs(branch, p.omega0, n_max, s.rho, s.omega);
    if (n_max >= 10)
        s.radius = detail::radius_from_coeffs(s.rho, s.omega, radius_safety, radius_cap);
    else
        s.radius = 0.0; // caller must not hand off from a stub series
    return s;
}

inline double estimate_radius(const sonic_series& s, double safety = 0.8, double cap = 0.5) {
    return detail::radius_from_coeffs(s.rho, s.omega, safety, cap);
}

// Horner evaluation in dz = z - 1, plus term-by-term derivative.
inline flow_state eval_series(const sonic_series& s, double z, derivs* d = nullptr) {
    double dz = z - 1.0;
    if (s.radius <= 0.0 || std::abs(dz) >= s.radius)
        throw outside_radius("eval_series: |z-1| = " + std::to_string(std::abs(dz)) +
                             " outside radius " + std::to_string(s.radius));
    int n = s.n_max();
    double r = s.rho[n], w = s.omega[n], dr = 0.0, dw = 0.0;
    for (int k = n - 1; k >= 0; --k) {
        dr = dr * dz + (k + 1) * s.rho[k + 1];
        dw = dw * dz + (k + 1) * s.omega[k + 1];
        r = r * dz + s.rho[k];
        w = w * dz + s.omega[k];
    }
    if (d) *d = {dr, dw};
    return {z, r, w};
}

// d/d omega0 of every coefficient of the LP series (same recursion,
// realized by running the construction over dual numbers seeded with
// d omega0 = 1).
inline std::vector<std::pair<double, double>> param_derivative_series(const sonic_series& s) {
    if (s.branch != branch_kind::lp)
        throw unsupported_parameter("param_derivative_series: LP branch only");
    if (!(s.p.omega0 > 0.0 && s.p.omega0 < 2.0 / 3.0))
        throw unsupported_parameter("param_derivative_series: omega0 must lie in (0, 2/3)");
    std::vector<dual> rho, omega;
    detail::build_sonic_coeffs(branch_kind::lp, dual(s.p.omega0, 1.0), s.n_max(), rho, omega);
    std::vector<std::pair<double, double>> out;
    out.reserve(rho.size());
    for (size_t i = 0; i < rho.size(); ++i) out.emplace_back(rho[i].d, omega[i].d);
    return out;
}

} // namespace lp
