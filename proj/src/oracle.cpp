#include "shockfit/oracle.hpp"

#include "shockfit/characteristics.hpp"
#include "shockfit/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace shockfit {

namespace {

double default_window(const Profile& profile)
{
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        const double w = 0.05 + (2.0 / 0.9 - 0.05) * i / n;
        if (profile.slope_excess(w) < 0.0 || profile.slope_excess(-w) < 0.0) return std::min(2.0, 0.9 * w);
    }
    return 2.0;
}

} // namespace

VariationalState::VariationalState(const Profile& profile, double window, int grid)
    : profile_(profile), window_(window > 0.0 ? window : default_window(profile))
{
    if (grid < 8) throw DomainError("oracle grid must have at least 8 points");
    y_.resize(grid);
    u0_potential_.resize(grid);
    for (int j = 0; j < grid; ++j) {
        y_[j] = profile_.center() - window_ + 2.0 * window_ * j / (grid - 1);
        u0_potential_[j] = U0(y_[j]);
    }
}

double VariationalState::U0(double y) const { return profile_.potential_local(y - profile_.center()); }

double VariationalState::objective(double t, double x, double y) const
{
    const double d = x - y;
    return U0(y) + d * d / (2.0 * t);
}

VariationalState::Basin VariationalState::refine(double t, double x, int j) const
{
    const int last = grid_size() - 1;
    double a = y_[std::max(j - 1, 0)], b = y_[std::min(j + 1, last)];
    auto phi = [&](double y) { return objective(t, x, y); };
    auto less = [&](double p, double q) { return phi(p) < phi(q); };
    const double g = num::golden_section(a, b, less, 1e-9 * (b - a));
    // Polish on the stationarity condition u0(y) = (x - y)/t where it brackets.
    auto dphi = [&](double y) { return profile_.u0(y) - (x - y) / t; };
    const double lo = std::max(a, g - 4e-9 * (b - a)), hi = std::min(b, g + 4e-9 * (b - a));
    double y = g;
    const double dlo = dphi(lo), dhi = dphi(hi);
    if (dlo < 0.0 && dhi > 0.0)
        y = num::bisect(dphi, lo, hi, dlo);
    else if (dphi(a) < 0.0 && dphi(b) > 0.0)
        y = num::bisect(dphi, a, b, dphi(a));
    return {y, phi(y)};
}

std::vector<VariationalState::Basin> VariationalState::basins(double t, double x) const
{
    if (!(t > 0.0)) throw DomainError("Lax-Oleinik needs t > 0");
    const int n = grid_size();
    std::vector<double> f(n);
    for (int j = 0; j < n; ++j) {
        const double d = x - y_[j];
        f[j] = u0_potential_[j] + d * d / (2.0 * t);
    }
    const int jmin = static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
    if (jmin == 0 || jmin == n - 1)
        throw DomainError("Lax-Oleinik minimiser on the window boundary (window too small)");
    std::vector<Basin> out;
    for (int j = 1; j + 1 < n; ++j)
        if (f[j] < f[j - 1] && f[j] <= f[j + 1]) out.push_back(refine(t, x, j));
    return out;
}

LaxOleinikValue lax_oleinik_value(const VariationalState& state, double t, double x)
{
    const auto b = state.basins(t, x);
    if (b.empty()) throw NumericalError("no interior minimiser found");
    const auto best = std::min_element(b.begin(), b.end(), [](const auto& p, const auto& q) { return p.value < q.value; });
    return {(x - best->y) / t, best->y, static_cast<int>(b.size())};
}

LaxOleinikShock lax_oleinik_shock(const VariationalState& state, double t)
{
    const auto c = cusp_boundaries(state.profile(), t);
    return lax_oleinik_shock(state, t, c.x_plus, c.x_minus);
}

LaxOleinikShock lax_oleinik_shock(const VariationalState& state, double t, double x_lo, double x_hi)
{
    if (!(t > state.profile().t_star())) throw DomainError("the Lax-Oleinik shock needs t > t*");
    if (!(x_hi > x_lo)) throw DomainError("empty shock bracket");
    const double cen = state.profile().center();

    // Sign of Phi(right basin) - Phi(left basin); a lone basin decides by side.
    struct Split {
        double diff;
        VariationalState::Basin left, right;
        int count;
    };
    auto split = [&](double x) {
        const auto b = state.basins(t, x);
        if (b.empty() || b.size() > 2) throw NumericalError("basin detection failure: expected two basins");
        Split s{0.0, b.front(), b.back(), static_cast<int>(b.size())};
        if (b.size() == 2)
            s.diff = b[1].value - b[0].value;
        else
            s.diff = b[0].y < cen ? 1.0 : -1.0;
        return s;
    };
    auto diff = [&](double x) { return split(x).diff; };
    const double d_lo = diff(x_lo);
    if (!(d_lo > 0.0) || !(diff(x_hi) < 0.0)) throw NumericalError("basin minima do not change order across the bracket");
    const double phi = num::bisect(diff, x_lo, x_hi, d_lo);
    const auto s = split(phi);
    if (s.count != 2) throw NumericalError("basin detection failure at the shock");
    LaxOleinikShock out;
    out.phi = phi;
    out.y_minus = s.left.y;
    out.y_plus = s.right.y;
    out.u_left = (phi - s.left.y) / t;
    out.u_right = (phi - s.right.y) / t;
    out.speed = state.profile().flux().chord(out.u_right, out.u_left);
    out.entropy_margin = std::min(out.u_left - out.speed, out.speed - out.u_right);
    return out;
}

} // namespace shockfit
