#pragma once

#include "shockfit/profile.hpp"
#include "shockfit/shock.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shockfit {

struct Sample {
    double h = 0.0;
    double v = 0.0;
};

struct ExponentFit {
    double exponent = 0.0;
    double coefficient = 0.0; // carries the common sign of the samples
    double r_squared = 0.0;
    double h_min = 0.0, h_max = 0.0;
    int n_samples = 0;
};

// v ~ coefficient * h^exponent by least squares of log|v| on log h.
// Needs >= 8 samples over >= 2 decades of h, all v of one sign and nonzero.
ExponentFit fit_power(const std::vector<Sample>& samples);

// v ~ coefficient * |ln tau|^(-exponent) by least squares of log|v| on
// log|ln tau|. Needs >= 8 samples with tau < 0.3 and a spread of at least
// 1.5 in |ln tau|.
ExponentFit fit_log_power(const std::vector<Sample>& samples);

struct LineFit {
    double intercept = 0.0, slope = 0.0, r_squared = 0.0;
};

// v = intercept + slope * h.
LineFit fit_line(const std::vector<Sample>& samples);

struct QuadraticFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};

// v = c0 + c1 h + c2 h^2.
QuadraticFit fit_quadratic(const std::vector<Sample>& samples);

// Log-spaced values lo * (hi/lo)^(i/(n-1)), i = 0..n-1.
std::vector<double> log_space(double lo, double hi, int n);

// Root of -mu + mu^(2k+1) = c above (2k+1)^(-1/2k): the outer preimage of c
// in the cusp frame at s = 0. Requires c > -2k (2k+1)^(-(2k+1)/(2k)).
double cusp_root(int k, double c);
// Root of mu + mu^(2k+1) = c: the preimage of c before blow-up at s = 0.
double pre_blowup_root(int k, double c);

enum class Comparison { Near, AtLeast, AtMost, Report };

const char* to_string(Comparison c);

struct Check {
    std::string name;
    std::optional<double> value; // empty when nothing measurable remains
    double target = 0.0;
    double tolerance = 0.0;
    Comparison comparison = Comparison::Report;
    bool relative = false; // tolerance scales with |target|
    bool pass = true;
    std::string note;
    std::optional<ExponentFit> fit;
};

// Near: |v - target| <= tol; AtLeast: v >= target - tol; AtMost:
// v <= target + tol; Report: always passes. A relative tolerance is
// multiplied by |target|. Non-finite values fail every comparison but Report.
Check make_check(std::string name, double value, double target, double tolerance, Comparison comparison,
                 bool relative = false);

struct Report {
    std::string name;
    std::string profile;
    std::vector<Check> checks;

    bool passed() const;
    const Check& at(const std::string& check_name) const;
};

// Deterministic JSON text for a list of reports (shortest round-trip floats).
std::string reports_json(const std::vector<Report>& reports, bool passed_flag = true);

struct FitWindow {
    double lo = 0.0, hi = 0.0; // tau = t - t*; 0 selects the family default
    int n = 40;
};

// Finite family: tau in [1e-6, 1e-2]; infinite: [1e-8, 1e-3].
FitWindow default_fit_window(const Profile& profile);

// Envelope and cusp-edge fits. Finite family: leading exponents fitted after
// removing the second-order term, leading coefficients extrapolated to tau = 0
// by a quadratic in tau^(1/2k), residual order and second-order coefficients.
// Infinite family: |ln tau| exponents (asserted for p = 1, reported otherwise).
Report verify_envelope(const Profile& profile, FitWindow window = {});

struct BranchOptions {
    double s_lo = 1e-4, s_hi = 1e-2;
    int n = 24;
};

// Compares branch inversion with every local expansion of the preimages
// (near the cusp centre, near lambda = +-c, along the x-axis and before
// blow-up). Per expansion: relative deviation at the smallest scale and the
// fitted order of the residual in the scale variable.
Report verify_branches(const Profile& profile, const BranchOptions& opt = {});

struct BoundOptions {
    double tau_lo = 1e-6;
    double small_hi = 1e-3, large_hi = 1e-2;
    int samples = 10000;
    std::uint64_t seed = 20240607;
    double exclusion = 1e-8; // radius around the shock
};

struct BoundReport {
    std::string quantity;
    double window_hi = 0.0;
    double max_ratio = 0.0, min_ratio = 0.0;
    int samples = 0;
    int excluded = 0;
    bool floor_bound = false; // min_ratio is the bounded side
    bool pass = false;        // ratios finite and, for a floor, min_ratio > 0
};

// Ratios of |u - u(t*,x*)|, |u_t|, |u_x| to their singular weights and of the
// characteristic denominator to its lower bound, over (t, x) samples at the
// cusp scale for tau in [tau_lo, small_hi] and [tau_lo, large_hi]; the larger
// window reuses the samples of the smaller.
std::vector<BoundReport> verify_field_bounds(const Profile& profile, const ShockCurve& curve,
                                             const BoundOptions& opt = {});
// Pass/fail view with window-shrinkage monotonicity.
Report field_bounds_report(const Profile& profile, const std::vector<BoundReport>& bounds);

struct DerivativeOptions {
    int points = 1000;
    double step = 1e-6;
    double min_denominator = 1e-2;
    std::uint64_t seed = 7;
};

struct DerivativeResult {
    int points = 0;
    double max_rel_dt = 0.0, max_rel_dx = 0.0;
};

// Analytic u_t, u_x against 5-point central differences on a fixed branch.
DerivativeResult check_field_derivatives(const Profile& profile, const DerivativeOptions& opt = {});

struct ShockVerifyOptions {
    PicardOptions picard;
    double fit_lo = 1e-6, fit_hi = 1e-2; // finite family; clipped to the curve
    double log_fit_lo = 1e-8, log_fit_hi = 1e-3;
    int n = 40;
};

// Exponent and coefficient of phi, Rankine-Hugoniot and entropy along the
// curve, symmetry for odd profiles and, for the infinite family, the bound
// |lambda|/s under grid refinement.
Report verify_shock(const Profile& profile, const ShockVerifyOptions& opt = {});

struct OracleRow {
    double tau = 0.0, t = 0.0, phi_ode = 0.0, phi_lo = 0.0, abs_diff = 0.0;
};

// Shock positions from the curve and from the Lax-Oleinik minimisation at n
// log-spaced tau in [tau_lo, min(tau_hi, tau_max of the curve)].
std::vector<OracleRow> oracle_comparison(const Profile& profile, const ShockCurve& curve, double tau_lo = 1e-3,
                                         double tau_hi = 0.1, int n = 13);

struct WeakFormCase {
    double t1 = 0.0, t2 = 0.0, xl = 0.0, xr = 0.0;
};

// Rectangle inside the trusted range that straddles the shock at the default
// scales of the profile.
WeakFormCase default_weak_form_case(const Profile& profile);

// Runs all sections; the families pick their own sample sets. Sections are
// computed concurrently and returned in a fixed order.
enum class Section { Envelope, Branches, Bounds, Shock, Oracle, WeakForm, Derivatives };
const char* to_string(Section s);
std::optional<Section> parse_section(const std::string& name);
std::vector<Report> verify_sections(const Profile& profile, const std::vector<Section>& sections);

} // namespace shockfit
