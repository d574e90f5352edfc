#pragma once

#include "shockfit/numerics.hpp"
#include "shockfit/profile.hpp"

#include <optional>
#include <string>
#include <vector>

namespace shockfit {

enum class Region { PreBlowup, LeftOnly, RightOnly, Triple, Boundary };
enum class Branch { Minus, Zero, Plus, Unique };

const char* to_string(Region r);
const char* to_string(Branch b);

// Largest t - t* (up to 10^0.5, else +inf) for which both envelope roots
// exist and the outer branches, inside the locality window, cover the whole
// cusp x+ <= x <= x-. Beyond it a secondary fold cuts a branch short.
double cusp_validity_limit(const Profile& profile);

// How far past t* the local cusp geometry is trusted: 0.25 (finite) or 0.1
// (infinite), capped at 0.8 times the cusp validity limit.
double default_eps_max(const Profile& profile);

// Characteristic map in scaled variables around the blow-up point:
//   y = c + l*mu,  t = 1 + rho*T(l),  x = c + l*T(l)*lambda,
// with T the profile time scale. rho > 0 is post-blowup, rho <= 0 pre-blowup.
// l = s and rho = 1 give the cusp variables (s, lambda); l = 1 gives the
// physical map up to the constant factor T(1).
struct ScaledFrame {
    double l = 1.0;
    double rho = 0.0;
};

double frame_position(const Profile& profile, const ScaledFrame& f, double mu);
// d lambda / d mu = (1 + t g'(y)) / T(l).
double frame_slope(const Profile& profile, const ScaledFrame& f, double mu);
// g(y) / l.
double frame_speed(const Profile& profile, const ScaledFrame& f, double mu);

struct FrameEnvelope {
    double mu_minus = 0.0, mu_plus = 0.0;         // zeros of the slope
    double lambda_plus = 0.0, lambda_minus = 0.0; // images of mu_plus, mu_minus
};

// Requires rho > 0.
FrameEnvelope frame_envelope(const Profile& profile, const ScaledFrame& f);

// Solves frame_position(mu) = lambda on the requested monotone piece.
// Branch::Unique is accepted pre-blowup and wherever a single root exists.
double frame_invert(const Profile& profile, const ScaledFrame& f, double lambda, Branch branch,
                    const FrameEnvelope* envelope = nullptr, double guess = 0.0);

// Physical-variable interface.
double characteristic_position(const Profile& profile, double t, double y);

struct EnvelopeRoots {
    double eta_minus = 0.0, eta_plus = 0.0;
};

struct CuspBoundaries {
    double x_plus = 0.0, x_minus = 0.0;
    double slope_plus = 0.0, slope_minus = 0.0; // g(eta_plus), g(eta_minus) = dx+/dt, dx-/dt
};

EnvelopeRoots envelope_roots(const Profile& profile, double t, std::optional<double> eps_max = std::nullopt);
CuspBoundaries cusp_boundaries(const Profile& profile, double t, std::optional<double> eps_max = std::nullopt);

struct BranchClassification {
    Region region = Region::PreBlowup;
    std::optional<double> y_minus, y_zero, y_plus, y_unique;
};

BranchClassification classify_point(const Profile& profile, double t, double x);

class BranchMissing : public DomainError {
public:
    BranchMissing(const std::string& what, Region region) : DomainError(what), region_(region) {}
    Region region() const { return region_; }

private:
    Region region_;
};

double invert_branch(const Profile& profile, double t, double x, Branch branch, Region* region = nullptr);

struct FieldSample {
    double t = 0.0, x = 0.0;
    Branch branch = Branch::Unique;
    Region region = Region::PreBlowup;
    double y = 0.0, u = 0.0, du_dt = 0.0, du_dx = 0.0, denom = 0.0;
};

class EnvelopePoint : public DomainError {
public:
    EnvelopePoint(const std::string& what, double u) : DomainError(what), u_(u) {}
    double u() const { return u_; }

private:
    double u_;
};

// 1 + t g'(y) with t = t* + tau, evaluated from the centred excess.
double characteristic_denominator(const Profile& profile, double tau, double w);

FieldSample solution_value(const Profile& profile, double t, double x, Branch branch, double denom_floor = 1e-12);

} // namespace shockfit
