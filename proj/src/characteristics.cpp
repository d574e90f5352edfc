#include "shockfit/characteristics.hpp"

#include "shockfit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shockfit {

const char* to_string(Region r)
{
    switch (r) {
    case Region::PreBlowup: return "PreBlowup";
    case Region::LeftOnly: return "LeftOnly";
    case Region::RightOnly: return "RightOnly";
    case Region::Triple: return "Triple";
    case Region::Boundary: return "Boundary";
    }
    return "?";
}

const char* to_string(Branch b)
{
    switch (b) {
    case Branch::Minus: return "Minus";
    case Branch::Zero: return "Zero";
    case Branch::Plus: return "Plus";
    case Branch::Unique: return "Unique";
    }
    return "?";
}

namespace {

// Both envelope roots exist and each outer monotone piece, followed outward
// inside the locality window up to any secondary fold, reaches past the
// opposite cusp edge.
bool cusp_is_valid(const Profile& profile, double tau)
{
    const double t = 1.0 + tau;
    EnvelopeRoots e;
    CuspBoundaries c;
    try {
        e = envelope_roots(profile, t);
        c = cusp_boundaries(profile, t);
    } catch (const DomainError&) {
        return false;
    }
    const double cen = profile.center(), R = profile.locality_radius();
    auto branch_end = [&](double eta, double edge) {
        const int n = 4000;
        double last = eta;
        for (int i = 1; i <= n; ++i) {
            const double y = eta + (edge - eta) * i / n;
            if (characteristic_denominator(profile, tau, y - cen) <= 0.0) break;
            last = y;
        }
        return characteristic_position(profile, t, last);
    };
    return branch_end(e.eta_minus, cen - R) <= c.x_plus && branch_end(e.eta_plus, cen + R) >= c.x_minus;
}

} // namespace

double cusp_validity_limit(const Profile& profile)
{
    double lo = 0.0;
    for (int j = 0; j <= 52; ++j) {
        const double tau = std::pow(10.0, -6.0 + j / 8.0);
        if (cusp_is_valid(profile, tau)) {
            lo = tau;
            continue;
        }
        if (lo == 0.0) return 0.0;
        double hi = tau;
        for (int i = 0; i < 40; ++i) {
            const double mid = 0.5 * (lo + hi);
            (cusp_is_valid(profile, mid) ? lo : hi) = mid;
        }
        return lo;
    }
    return std::numeric_limits<double>::infinity();
}

double default_eps_max(const Profile& profile)
{
    const double nominal = profile.family() == Family::Finite ? 0.25 : 0.1;
    return std::min(nominal, 0.8 * cusp_validity_limit(profile));
}

double frame_position(const Profile& profile, const ScaledFrame& f, double mu)
{
    const double a = profile.scaled_lift(f.l, mu);
    if (f.rho == 0.0) return a;
    return a + f.rho * frame_speed(profile, f, mu);
}

double frame_slope(const Profile& profile, const ScaledFrame& f, double mu)
{
    const double a = profile.scaled_excess(f.l, mu);
    if (f.rho == 0.0) return a;
    return a - f.rho * (1.0 - profile.slope_excess(f.l * mu));
}

double frame_speed(const Profile& profile, const ScaledFrame& f, double mu)
{
    return -mu + profile.lift(f.l * mu) / f.l;
}

namespace {

// Locality radius expressed in frame units.
double frame_radius(const Profile& profile, const ScaledFrame& f) { return profile.locality_radius() / f.l; }

// First zero of the slope on the ray sign*mu > 0, scanning inward from the
// locality radius so that a second fold far out does not confuse the bracket.
double envelope_root(const Profile& profile, const ScaledFrame& f, double sign)
{
    auto slope = [&](double m) { return frame_slope(profile, f, sign * m); };
    double m = 4.0 * frame_radius(profile, f);
    double last_positive = -1.0;
    const double factor = std::exp2(-0.125);
    for (int i = 0; i < 20000; ++i, m *= factor) {
        const double v = slope(m);
        if (v > 0.0) {
            last_positive = m;
        } else if (last_positive > 0.0) {
            const double root = num::bisect(slope, m, last_positive, v);
            return sign * root;
        }
        if (m < 1e-300) break;
    }
    throw DomainError("envelope root not bracketed (no sign change of 1 + t g')");
}

// Distance from the centre to the first fold on the ray sign*mu > 0, or
// 4 * radius if the slope stays positive that far.
double monotone_extent(const Profile& profile, const ScaledFrame& f, double sign, double radius)
{
    auto slope = [&](double m) { return frame_slope(profile, f, sign * m); };
    double prev = 0.0;
    for (int j = 1; j <= 256; ++j) {
        const double m = radius * j / 64.0;
        const double v = slope(m);
        if (v <= 0.0) return prev == 0.0 ? num::bisect(slope, 0.0, m, slope(0.0)) : num::bisect(slope, prev, m, slope(prev));
        prev = m;
    }
    return prev;
}

double solve_increasing(const Profile& profile, const ScaledFrame& f, double lambda, double lo, double hi,
                        double guess, double direction)
{
    auto fn = [&](double m) { return direction * (frame_position(profile, f, m) - lambda); };
    auto dfn = [&](double m) { return direction * frame_slope(profile, f, m); };
    return num::newton_bisect(fn, dfn, lo, hi, guess);
}

// Walks outward from the envelope root mu_edge until the map passes target.
// The walk stops at a secondary fold (slope <= 0): the outer monotone piece
// ends there, so a target beyond it has no root on this branch.
double outer_bracket(const Profile& profile, const ScaledFrame& f, double mu_edge, double target, double sign)
{
    auto beyond = [&](double m) {
        const double v = frame_position(profile, f, m);
        return sign > 0 ? v >= target : v <= target;
    };
    // A point just outside the edge with positive slope anchors the fold search.
    double prev = mu_edge;
    for (double d = 0.5; d > 1e-15; d *= 0.5) {
        if (frame_slope(profile, f, mu_edge * (1.0 + d)) > 0.0) {
            prev = mu_edge * (1.0 + d);
            break;
        }
    }
    if (beyond(prev)) return prev;
    double m = 2.0 * mu_edge;
    for (int i = 0; i < 200; ++i) {
        if (beyond(m)) return m;
        if (frame_slope(profile, f, m) <= 0.0) {
            auto slope = [&](double q) { return frame_slope(profile, f, q); };
            const double fold = num::bisect(slope, prev, m, frame_slope(profile, f, prev));
            if (beyond(fold)) return fold;
            throw DomainError("branch root lies beyond a secondary fold of the characteristic map");
        }
        prev = m;
        m *= 1.25;
        if (!std::isfinite(m)) break;
    }
    throw DomainError("branch root not bracketed");
}

} // namespace

FrameEnvelope frame_envelope(const Profile& profile, const ScaledFrame& f)
{
    if (!(f.rho > 0.0)) throw DomainError("no envelope before blowup");
    FrameEnvelope e;
    e.mu_plus = envelope_root(profile, f, 1.0);
    e.mu_minus = envelope_root(profile, f, -1.0);
    e.lambda_plus = frame_position(profile, f, e.mu_plus);
    e.lambda_minus = frame_position(profile, f, e.mu_minus);
    return e;
}

double frame_invert(const Profile& profile, const ScaledFrame& f, double lambda, Branch branch,
                    const FrameEnvelope* envelope, double guess)
{
    const double radius = frame_radius(profile, f);
    if (f.rho <= 0.0) {
        if (branch != Branch::Unique)
            throw BranchMissing(std::string("branch ") + to_string(branch) + " does not exist before blowup",
                                Region::PreBlowup);
        const double lo = -monotone_extent(profile, f, -1.0, radius);
        const double hi = monotone_extent(profile, f, 1.0, radius);
        if (!(frame_position(profile, f, hi) >= lambda && frame_position(profile, f, lo) <= lambda))
            throw DomainError("point outside the monotone piece of the characteristic map around the centre");
        return solve_increasing(profile, f, lambda, lo, hi, guess, 1.0);
    }

    FrameEnvelope local;
    if (envelope == nullptr) {
        local = frame_envelope(profile, f);
        envelope = &local;
    }
    const auto& e = *envelope;
    Region region = Region::Triple;
    if (lambda < e.lambda_plus)
        region = Region::LeftOnly;
    else if (lambda > e.lambda_minus)
        region = Region::RightOnly;
    if (branch == Branch::Unique) {
        if (region == Region::LeftOnly)
            branch = Branch::Minus;
        else if (region == Region::RightOnly)
            branch = Branch::Plus;
        else
            throw BranchMissing("three roots exist; a specific branch is required", region);
    }

    // Points just outside an edge are clamped so that the double root is
    // returned; callers decide the boundary band.
    switch (branch) {
    case Branch::Plus: {
        const double target = std::max(lambda, e.lambda_plus);
        const double hi = outer_bracket(profile, f, e.mu_plus, target, 1.0);
        return solve_increasing(profile, f, target, e.mu_plus, hi, guess, 1.0);
    }
    case Branch::Minus: {
        const double target = std::min(lambda, e.lambda_minus);
        const double lo = outer_bracket(profile, f, e.mu_minus, target, -1.0);
        return solve_increasing(profile, f, target, lo, e.mu_minus, guess, 1.0);
    }
    case Branch::Zero: {
        const double target = std::clamp(lambda, e.lambda_plus, e.lambda_minus);
        return solve_increasing(profile, f, target, e.mu_minus, e.mu_plus, guess, -1.0);
    }
    case Branch::Unique: break;
    }
    throw BranchMissing("branch not available", region);
}

double characteristic_position(const Profile& profile, double t, double y) { return y + t * profile.g(y); }

double characteristic_denominator(const Profile& profile, double tau, double w)
{
    const double e = profile.slope_excess(w);
    return (e - tau) + tau * e;
}

namespace {

struct PhysicalFrame {
    ScaledFrame frame;
    double scale = 1.0; // x - x* = scale * lambda
    double tau = 0.0;
};

PhysicalFrame physical_frame(const Profile& profile, double t)
{
    PhysicalFrame pf;
    pf.tau = t - profile.t_star();
    pf.scale = profile.time_scale(1.0);
    pf.frame = ScaledFrame{1.0, pf.tau / pf.scale};
    return pf;
}

void check_eps(const Profile& profile, double tau, std::optional<double> eps_max)
{
    if (!(tau > 0.0)) throw DomainError("no envelope yet: t <= t*");
    if (eps_max && tau > *eps_max * (1.0 + 1e-12))
        throw DomainError("t beyond the trusted range t* + eps_max = " + num::format_double(profile.t_star() + *eps_max));
}

} // namespace

EnvelopeRoots envelope_roots(const Profile& profile, double t, std::optional<double> eps_max)
{
    const auto pf = physical_frame(profile, t);
    check_eps(profile, pf.tau, eps_max);
    const auto e = frame_envelope(profile, pf.frame);
    return {profile.center() + e.mu_minus, profile.center() + e.mu_plus};
}

CuspBoundaries cusp_boundaries(const Profile& profile, double t, std::optional<double> eps_max)
{
    const auto pf = physical_frame(profile, t);
    check_eps(profile, pf.tau, eps_max);
    const auto e = frame_envelope(profile, pf.frame);
    CuspBoundaries c;
    c.x_plus = profile.x_star() + pf.scale * e.lambda_plus;
    c.x_minus = profile.x_star() + pf.scale * e.lambda_minus;
    c.slope_plus = profile.speed_local(e.mu_plus);
    c.slope_minus = profile.speed_local(e.mu_minus);
    return c;
}

BranchClassification classify_point(const Profile& profile, double t, double x)
{
    BranchClassification out;
    const auto pf = physical_frame(profile, t);
    const double lambda = (x - profile.x_star()) / pf.scale;
    const double c = profile.center();
    if (pf.tau <= 0.0) {
        out.region = Region::PreBlowup;
        out.y_unique = c + frame_invert(profile, pf.frame, lambda, Branch::Unique);
        return out;
    }
    const auto e = frame_envelope(profile, pf.frame);
    const double band = 1e-10 * std::max(e.lambda_minus - e.lambda_plus, 1e-300);
    auto root = [&](Branch b) { return c + frame_invert(profile, pf.frame, lambda, b, &e); };
    if (std::abs(lambda - e.lambda_plus) <= band) {
        out.region = Region::Boundary;
        out.y_minus = root(Branch::Minus);
        out.y_plus = c + e.mu_plus;
    } else if (std::abs(lambda - e.lambda_minus) <= band) {
        out.region = Region::Boundary;
        out.y_minus = c + e.mu_minus;
        out.y_plus = root(Branch::Plus);
    } else if (lambda < e.lambda_plus) {
        out.region = Region::LeftOnly;
        out.y_minus = root(Branch::Minus);
    } else if (lambda > e.lambda_minus) {
        out.region = Region::RightOnly;
        out.y_plus = root(Branch::Plus);
    } else {
        out.region = Region::Triple;
        out.y_minus = root(Branch::Minus);
        out.y_zero = root(Branch::Zero);
        out.y_plus = root(Branch::Plus);
    }
    return out;
}

double invert_branch(const Profile& profile, double t, double x, Branch branch, Region* region_out)
{
    const auto pf = physical_frame(profile, t);
    const double lambda = (x - profile.x_star()) / pf.scale;
    if (region_out) *region_out = Region::PreBlowup;
    if (pf.tau <= 0.0) return profile.center() + frame_invert(profile, pf.frame, lambda, branch);
    const auto e = frame_envelope(profile, pf.frame);
    const double band = 1e-10 * std::max(e.lambda_minus - e.lambda_plus, 1e-300);
    Region region = Region::Triple;
    if (lambda < e.lambda_plus - band)
        region = Region::LeftOnly;
    else if (lambda > e.lambda_minus + band)
        region = Region::RightOnly;
    else if (std::abs(lambda - e.lambda_plus) <= band || std::abs(lambda - e.lambda_minus) <= band)
        region = Region::Boundary;
    if (region_out) *region_out = region;
    if (region == Region::Boundary) {
        if (std::abs(lambda - e.lambda_plus) <= band && (branch == Branch::Plus || branch == Branch::Zero))
            return profile.center() + e.mu_plus;
        if (std::abs(lambda - e.lambda_minus) <= band && (branch == Branch::Minus || branch == Branch::Zero))
            return profile.center() + e.mu_minus;
    }
    const bool ok = branch == Branch::Unique ? region != Region::Triple
                    : branch == Branch::Minus ? region != Region::RightOnly
                    : branch == Branch::Plus  ? region != Region::LeftOnly
                                              : region == Region::Triple || region == Region::Boundary;
    if (!ok)
        throw BranchMissing(std::string("branch ") + to_string(branch) + " does not exist in region " + to_string(region),
                            region);
    return profile.center() + frame_invert(profile, pf.frame, lambda, branch, &e);
}

FieldSample solution_value(const Profile& profile, double t, double x, Branch branch, double denom_floor)
{
    FieldSample s;
    s.t = t;
    s.x = x;
    s.branch = branch;
    const double tau = t - profile.t_star();
    s.y = invert_branch(profile, t, x, branch, &s.region);
    const double w = s.y - profile.center();
    s.u = profile.u0(s.y);
    s.denom = characteristic_denominator(profile, tau, w);
    if (!(std::abs(s.denom) >= denom_floor))
        throw EnvelopePoint("point lies on the envelope: 1 + t g'(y) = " + num::format_double(s.denom), s.u);
    s.du_dx = profile.u0_prime(s.y) / s.denom;
    s.du_dt = -profile.speed_local(w) * s.du_dx;
    return s;
}

} // namespace shockfit
