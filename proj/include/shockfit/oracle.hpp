#pragma once

#include "shockfit/profile.hpp"

#include <vector>

namespace shockfit {

// Lax-Oleinik data for the Burgers pairing: u(t,x) = (x - y*)/t where y*
// minimises Phi(y) = U0(y) + (x - y)^2 / (2t) over the window [c-Y, c+Y].
class VariationalState {
public:
    // window <= 0 selects the default: min(2, 0.9 * nearest |y - c| > 0.05
    // where g' < -1), which keeps far folds of the profile out of the search.
    explicit VariationalState(const Profile& profile, double window = 0.0, int grid = 4096);

    const Profile& profile() const { return profile_; }
    double window() const { return window_; }
    int grid_size() const { return static_cast<int>(y_.size()); }

    // Antiderivative of u0 with U0(c) = 0.
    double U0(double y) const;
    double objective(double t, double x, double y) const;

    struct Basin {
        double y = 0.0;     // refined minimiser
        double value = 0.0; // Phi at the minimiser
    };
    // Local minima of Phi, refined and sorted by position. Throws DomainError
    // if the global grid minimum sits on the window boundary.
    std::vector<Basin> basins(double t, double x) const;

private:
    Basin refine(double t, double x, int j) const;

    Profile profile_;
    double window_;
    std::vector<double> y_, u0_potential_;
};

struct LaxOleinikValue {
    double u = 0.0;
    double y_star = 0.0;
    int basins = 0;
};

LaxOleinikValue lax_oleinik_value(const VariationalState& state, double t, double x);

struct LaxOleinikShock {
    double phi = 0.0;
    double y_minus = 0.0, y_plus = 0.0;  // the two tied minimisers
    double u_left = 0.0, u_right = 0.0;  // (phi - y_minus)/t, (phi - y_plus)/t
    double speed = 0.0;                  // Rankine-Hugoniot speed of the traces
    double entropy_margin = 0.0;         // min(u_left - speed, speed - u_right)
};

// The x in (x_lo, x_hi) where the two basin minima tie, by bisection on the
// sign of Phi(y+) - Phi(y-). The bracket defaults to the cusp (x+, x-).
LaxOleinikShock lax_oleinik_shock(const VariationalState& state, double t);
LaxOleinikShock lax_oleinik_shock(const VariationalState& state, double t, double x_lo, double x_hi);

} // namespace shockfit
