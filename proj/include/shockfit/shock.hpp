#pragma once

#include "shockfit/characteristics.hpp"
#include "shockfit/profile.hpp"

#include <vector>

namespace shockfit {

// Shock curve from the blow-up point. Node i carries the cusp variables
// (s, lambda) and the physical data at t = 1 + tau:
//   finite:   tau = s^(2k),        phi = c + s^(2k+1) lambda
//   infinite: tau = exp(-s^(-p)),  phi = c + s tau lambda
// tau is stored separately because 1 + tau rounds to 1 for small s.
struct ShockCurve {
    Family regime = Family::Finite;
    int k = 1;
    double p = 1.0;
    double center = 0.0;

    std::vector<double> s, lambda, lambda_prime;
    std::vector<double> tau, t, phi, phi_prime;
    std::vector<double> y_minus, y_plus;  // preimages of phi on the outer branches
    std::vector<double> u_left, u_right;  // u0(y_minus), u0(y_plus)
    std::vector<double> rh_residual;      // |phi' [u] - [f(u)]|
    std::vector<double> entropy_margin;   // min(u_left - phi', phi' - u_right)

    // Picard diagnostics (empty for curves built by ODE marching).
    int picard_sweeps = 0;
    std::vector<double> update_norms;
    std::vector<double> contraction_ratios;
    double start_value = 0.0; // lambda at the first node (infinite family)

    std::size_t size() const { return s.size(); }
    double s_of_tau(double tau) const;
    // Shock position at t* + tau by cubic Hermite interpolation of lambda in s.
    double phi_at_tau(double tau) const;
    double phi_at(double t) const { return phi_at_tau(t - 1.0); }
    double tau_min() const { return tau.front(); }
    double tau_max() const { return tau.back(); }
};

struct ShockTraces {
    double mu_minus = 0.0, mu_plus = 0.0;
    double u_left = 0.0, u_right = 0.0;
    double chord = 0.0;
};

// Outer-branch preimages of lambda in the cusp frame (l = s, rho = 1) and the
// chord speed of the states they carry.
ShockTraces cusp_traces(const Profile& profile, double s, double lambda, const FrameEnvelope* envelope = nullptr,
                        double guess_minus = -1.0, double guess_plus = 1.0);

// D(s, lambda) = lambda + (2k/s) a(s mu+, s mu-), so that
// s lambda' + (2k+2) lambda = D along the shock.
double rescaled_rhs_finite(const Profile& profile, double s, double lambda);

// d(s, lambda) = a(s mu+, s mu-)/s + (s^p/p) lambda, the source of
//   lambda(s) = p s^-2 int_0^s w^(1-p) exp(s^-p - w^-p) d(w, lambda(w)) dw.
double rescaled_rhs_infinite(const Profile& profile, double s, double lambda);

struct PicardOptions {
    int n_steps = 2000;
    double tol = 1e-13;
    int max_sweeps = 200;
};

// Default upper end of the s range: eps_max^(1/2k) or |ln eps_max|^(-1/p),
// the latter capped at 0.7.
double default_s_max(const Profile& profile);
// 0 for the finite family; max(0.05, s where t - 1 = 1e-300) otherwise.
double default_s_min(const Profile& profile);

ShockCurve integrate_shock_finite(const Profile& profile, double s_max, const PicardOptions& opt = {});
ShockCurve integrate_shock_infinite(const Profile& profile, double s_min, double s_max, const PicardOptions& opt = {});
// Dispatches on the family with default s range.
ShockCurve integrate_shock(const Profile& profile, const PicardOptions& opt = {});

struct OdeOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
    int min_nodes = 64;
};

// Marches phi' = a(y+(t,phi), y-(t,phi)) from (t0, phi0) to t_end with an
// adaptive Dormand-Prince stepper; steps that leave the cusp are rejected.
ShockCurve continue_shock_ode(const Profile& profile, double t0, double phi0, double t_end, const OdeOptions& opt = {});

struct EntropyValue {
    FieldSample sample;
    bool on_shock = false;
    double u_left = 0.0, u_right = 0.0; // both traces when on_shock
};

// Weak entropy solution: classical for t <= 1, otherwise branch Minus left of
// the shock and Plus right of it.
EntropyValue entropy_solution(const Profile& profile, const ShockCurve& curve, double t, double x);

// Integral of u(t, .) over [xl, xr] using the exact antiderivative along
// characteristics: int u dx = [U0(y) + t g(y)^2 / 2].
double mass(const Profile& profile, const ShockCurve& curve, double t, double xl, double xr);

// Flux balance over [t1, t2] x [xl, xr]; xl and xr must lie outside the cusp.
double weak_form_residual(const Profile& profile, const ShockCurve& curve, double t1, double t2, double xl, double xr);

} // namespace shockfit
