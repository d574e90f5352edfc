#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace shockfit {

// Parameter or domain violation (bad profile, point outside a region, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An iteration failed to converge or to contract.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace num {

inline constexpr double kExpFloor = -700.0;
inline constexpr double kExpCeil = 700.0;

// exp with the convention that exponents below -700 give exactly zero;
// large exponents saturate instead of overflowing.
inline double clamped_exp(double e)
{
    if (e < kExpFloor) return 0.0;
    if (e > kExpCeil) e = kExpCeil;
    return std::exp(e);
}

// Bisection on a sign change of f over [a, b] down to adjacent doubles.
template <class F>
double bisect(F&& f, double a, double b, double fa, int max_iter = 400)
{
    for (int i = 0; i < max_iter; ++i) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Safeguarded Newton iteration for an increasing function f on [a, b] with
// f(a) <= 0 <= f(b). A Newton step that leaves the bracket is replaced by a
// bisection step; every evaluation shrinks the bracket.
template <class F, class DF>
double newton_bisect(F&& f, DF&& df, double a, double b, double x0, int max_iter = 400)
{
    double x = (x0 > a && x0 < b) ? x0 : 0.5 * (a + b);
    int slow = 0;
    double last_width = b - a;
    for (int i = 0; i < max_iter; ++i) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (fx < 0.0)
            a = x;
        else
            b = x;
        if (std::nextafter(a, b) >= b) return x;
        const double d = df(x);
        double xn = x - fx / d;
        const double width = b - a;
        slow = (width > 0.5 * last_width) ? slow + 1 : 0;
        last_width = width;
        const bool inside = xn > a && xn < b;
        if (inside && std::abs(xn - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x))
            return xn;
        if (!inside || slow > 3) {
            xn = 0.5 * (a + b);
            slow = 0;
        }
        x = xn;
    }
    return x;
}

// Golden-section search with a user ordering: less(u, v) is true when u is a
// strictly better point than v. Returns the final midpoint.
template <class Less>
double golden_section(double a, double b, Less&& less, double tol, int max_iter = 2000)
{
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
        if (less(c, d)) {
            b = d;
            d = c;
            c = b - r * (b - a);
        } else {
            a = c;
            c = d;
            d = a + r * (b - a);
        }
        if (!(c > a) || !(d < b)) break;
    }
    return 0.5 * (a + b);
}

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

} // namespace num
} // namespace shockfit
