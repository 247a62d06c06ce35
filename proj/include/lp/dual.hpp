#pragma once

#include <cmath>

namespace lp {

// Minimal forward-mode dual number: carries a value and a single directional
// derivative.  Running the series recurrences over this type applies the
// product rule term by term, which is exactly how the parameter-derivative
// recursions are defined.
struct dual {
    double v = 0.0; // value
    double d = 0.0; // derivative w.r.t. the seeded parameter

    dual() = default;
    dual(double value) : v(value) {} // NOLINT: implicit from constants is intended
    dual(double value, double deriv) : v(value), d(deriv) {}
};

inline dual operator+(dual a, dual b) { return {a.v + b.v, a.d + b.d}; }
inline dual operator-(dual a, dual b) { return {a.v - b.v, a.d - b.d}; }
inline dual operator-(dual a) { return {-a.v, -a.d}; }
inline dual operator*(dual a, dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline dual operator/(dual a, dual b) {
    double inv = 1.0 / b.v;
    return {a.v * inv, (a.d - a.v * b.d * inv) * inv};
}
inline dual& operator+=(dual& a, dual b) { a = a + b; return a; }
inline dual& operator-=(dual& a, dual b) { a = a - b; return a; }
inline dual& operator*=(dual& a, dual b) { a = a * b; return a; }
inline dual& operator/=(dual& a, dual b) { a = a / b; return a; }

inline bool operator==(dual a, dual b) { return a.v == b.v; }
inline bool operator<(dual a, dual b) { return a.v < b.v; }
inline bool operator>(dual a, dual b) { return a.v > b.v; }

inline double value_of(double x) { return x; }
inline double value_of(dual x) { return x.v; }
inline dual abs(dual a) { return a.v < 0 ? -a : a; }

} // namespace lp
