#include "shockfit/shock.hpp"

#include "shockfit/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace shockfit {

namespace {

using GL16 = boost::math::quadrature::gauss<double, 16>;

// log(1e-300): smallest time scale the infinite-family start-up accepts.
constexpr double kLogTauFloor = -690.7755278982137;

double ipow(double x, int n)
{
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

double burgers_rh(const Profile& profile, double phi_prime, double ul, double ur)
{
    const auto& f = profile.flux();
    return std::abs(phi_prime * (ur - ul) - (f.value(ur) - f.value(ul)));
}

void require_family(const Profile& profile, Family fam, const char* what)
{
    if (profile.family() != fam) throw DomainError(std::string(what) + ": wrong profile family");
}

// Per-node state shared by both Picard solvers.
struct Grid {
    std::vector<double> s;
    std::vector<FrameEnvelope> env;
    std::vector<double> mu_minus, mu_plus; // last traces, reused as Newton guesses
};

Grid make_grid(const Profile& profile, std::vector<double> s)
{
    Grid g;
    g.s = std::move(s);
    const std::size_t n = g.s.size();
    g.env.resize(n);
    g.mu_minus.assign(n, -1.0);
    g.mu_plus.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (g.s[i] <= 0.0) continue;
        g.env[i] = frame_envelope(profile, ScaledFrame{g.s[i], 1.0});
        g.mu_minus[i] = g.env[i].mu_minus * 1.5;
        g.mu_plus[i] = g.env[i].mu_plus * 1.5;
    }
    return g;
}

ShockTraces traces_at(const Profile& profile, Grid& g, std::size_t i, double lambda)
{
    auto tr = cusp_traces(profile, g.s[i], lambda, &g.env[i], g.mu_minus[i], g.mu_plus[i]);
    g.mu_minus[i] = tr.mu_minus;
    g.mu_plus[i] = tr.mu_plus;
    return tr;
}

double finite_D(const Profile& profile, double s, double lambda, const ShockTraces& tr)
{
    return lambda + 2.0 * profile.k() * tr.chord / s;
}

double infinite_d(const Profile& profile, double s, double lambda, const ShockTraces& tr)
{
    const double p = profile.p();
    return tr.chord / s + std::pow(s, p) / p * lambda;
}

struct PicardResult {
    std::vector<double> lambda;
    std::vector<double> rhs; // D or d at the converged lambda
    int sweeps = 0;
    std::vector<double> updates, ratios;
};

// Sweeps lambda <- start * lambda_prev + w0 * rhs_i + w1 * rhs_(i+1) over the
// grid until the sup-norm update drops below tol.
template <class Rhs>
PicardResult picard(Grid& g, double lambda0, const std::vector<double>& carry, const std::vector<double>& w0,
                    const std::vector<double>& w1, Rhs&& rhs, const PicardOptions& opt)
{
    const std::size_t n = g.s.size();
    PicardResult r;
    r.lambda.assign(n, 0.0);
    r.lambda[0] = lambda0;
    r.rhs.assign(n, 0.0);
    int growth = 0;
    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) r.rhs[i] = rhs(i, r.lambda[i]);
        std::vector<double> next(n);
        next[0] = lambda0;
        double upd = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            next[i + 1] = carry[i] * next[i] + w0[i] * r.rhs[i] + w1[i] * r.rhs[i + 1];
            upd = std::max(upd, std::abs(next[i + 1] - r.lambda[i + 1]));
        }
        r.lambda = std::move(next);
        r.sweeps = sweep;
        if (!r.updates.empty() && r.updates.back() > 0.0) {
            r.ratios.push_back(upd / r.updates.back());
            growth = upd > r.updates.back() ? growth + 1 : 0;
        }
        r.updates.push_back(upd);
        if (!std::isfinite(upd) || growth >= 5)
            throw NumericalError("Picard iteration does not contract (update grew over 5 sweeps)");
        if (upd < opt.tol) {
            for (std::size_t i = 0; i < n; ++i) r.rhs[i] = rhs(i, r.lambda[i]);
            return r;
        }
    }
    throw NumericalError("Picard iteration did not reach tolerance in " + std::to_string(opt.max_sweeps) + " sweeps");
}

void check_picard_options(const PicardOptions& opt)
{
    if (opt.n_steps < 8) throw DomainError("n_steps must be >= 8");
    if (!(opt.tol > 0.0)) throw DomainError("tol must be positive");
}

void check_inside(const Grid& g, const std::vector<double>& lambda)
{
    for (std::size_t i = 0; i < g.s.size(); ++i) {
        if (g.s[i] <= 0.0) continue;
        if (!(lambda[i] > g.env[i].lambda_plus && lambda[i] < g.env[i].lambda_minus))
            throw DomainError("shock left the cusp at s = " + num::format_double(g.s[i]));
    }
}

void fill_node_traces(const Profile& profile, ShockCurve& c, std::size_t i, const ShockTraces& tr)
{
    const double s = c.s[i];
    c.y_minus[i] = profile.center() + s * tr.mu_minus;
    c.y_plus[i] = profile.center() + s * tr.mu_plus;
    c.u_left[i] = tr.u_left;
    c.u_right[i] = tr.u_right;
    c.rh_residual[i] = burgers_rh(profile, c.phi_prime[i], tr.u_left, tr.u_right);
    c.entropy_margin[i] = std::min(tr.u_left - c.phi_prime[i], c.phi_prime[i] - tr.u_right);
}

void resize_curve(ShockCurve& c, std::size_t n)
{
    for (auto* v : {&c.s, &c.lambda, &c.lambda_prime, &c.tau, &c.t, &c.phi, &c.phi_prime, &c.y_minus, &c.y_plus,
                    &c.u_left, &c.u_right, &c.rh_residual, &c.entropy_margin})
        v->assign(n, 0.0);
}

ShockCurve empty_curve(const Profile& profile)
{
    ShockCurve c;
    c.regime = profile.family();
    c.k = profile.k();
    c.p = profile.p();
    c.center = profile.center();
    return c;
}

// Physical time scale and shock position at (s, lambda).
double tau_of_s(const ShockCurve& c, double s)
{
    if (c.regime == Family::Finite) return ipow(s, 2 * c.k);
    return num::clamped_exp(-std::pow(s, -c.p));
}

double phi_of(const ShockCurve& c, double s, double tau, double lambda)
{
    if (c.regime == Family::Finite) return c.center + ipow(s, 2 * c.k + 1) * lambda;
    return c.center + s * tau * lambda;
}

double phi_prime_of(const ShockCurve& c, double s, double lambda, double lambda_prime)
{
    if (c.regime == Family::Finite) return (s * s * lambda_prime + (2 * c.k + 1) * s * lambda) / (2 * c.k);
    const double sp = std::pow(s, c.p);
    return s * (sp * s / c.p * lambda_prime + (sp / c.p + 1.0) * lambda);
}

double lambda_prime_of(const ShockCurve& c, double s, double lambda, double phi_prime)
{
    if (c.regime == Family::Finite) return (2 * c.k * phi_prime - (2 * c.k + 1) * s * lambda) / (s * s);
    const double sp = std::pow(s, c.p);
    return (phi_prime - s * (sp / c.p + 1.0) * lambda) * c.p / (sp * s * s);
}

} // namespace

double ShockCurve::s_of_tau(double tau) const
{
    if (!(tau >= 0.0)) throw DomainError("tau must be nonnegative");
    if (tau == 0.0) return 0.0;
    if (regime == Family::Finite) return std::pow(tau, 1.0 / (2 * k));
    if (tau >= 1.0) throw DomainError("tau must be below 1 for the infinite family");
    return std::pow(-std::log(tau), -1.0 / p);
}

double ShockCurve::phi_at_tau(double tau_q) const
{
    if (s.empty()) throw DomainError("empty shock curve");
    const double sq = s_of_tau(tau_q);
    const double lo = s.front(), hi = s.back();
    const double slack = 1e-12 * (hi - lo);
    if (sq < lo - slack || sq > hi + slack)
        throw DomainError("t = 1 + " + num::format_double(tau_q) + " is outside the shock curve range");
    if (sq <= lo) return phi.front();
    if (sq >= hi) return phi.back();
    const auto it = std::upper_bound(s.begin(), s.end(), sq);
    const std::size_t i = static_cast<std::size_t>(it - s.begin()) - 1;
    const double h = s[i + 1] - s[i];
    const double u = (sq - s[i]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    const double lam = h00 * lambda[i] + h10 * h * lambda_prime[i] + h01 * lambda[i + 1] + h11 * h * lambda_prime[i + 1];
    return phi_of(*this, sq, tau_q, lam);
}

ShockTraces cusp_traces(const Profile& profile, double s, double lambda, const FrameEnvelope* envelope,
                        double guess_minus, double guess_plus)
{
    if (!(s > 0.0)) throw DomainError("cusp traces need s > 0");
    const ScaledFrame f{s, 1.0};
    FrameEnvelope local;
    if (!envelope) {
        local = frame_envelope(profile, f);
        envelope = &local;
    }
    ShockTraces tr;
    tr.mu_minus = frame_invert(profile, f, lambda, Branch::Minus, envelope, guess_minus);
    tr.mu_plus = frame_invert(profile, f, lambda, Branch::Plus, envelope, guess_plus);
    tr.u_left = profile.speed_local(s * tr.mu_minus);
    tr.u_right = profile.speed_local(s * tr.mu_plus);
    tr.chord = profile.flux().chord(tr.u_right, tr.u_left);
    return tr;
}

namespace {

void require_inside(const FrameEnvelope& e, double lambda)
{
    if (!(lambda > e.lambda_plus && lambda < e.lambda_minus)) throw DomainError("point lies outside the cusp");
}

} // namespace

double rescaled_rhs_finite(const Profile& profile, double s, double lambda)
{
    require_family(profile, Family::Finite, "rescaled_rhs_finite");
    if (!(s > 0.0)) throw DomainError("s must be positive");
    const auto e = frame_envelope(profile, ScaledFrame{s, 1.0});
    require_inside(e, lambda);
    return finite_D(profile, s, lambda, cusp_traces(profile, s, lambda, &e));
}

double rescaled_rhs_infinite(const Profile& profile, double s, double lambda)
{
    require_family(profile, Family::Infinite, "rescaled_rhs_infinite");
    if (!(s > 0.0)) throw DomainError("s must be positive");
    if (-std::pow(s, -profile.p()) < kLogTauFloor) throw DomainError("s too small: t - 1 underflows");
    const auto e = frame_envelope(profile, ScaledFrame{s, 1.0});
    require_inside(e, lambda);
    return infinite_d(profile, s, lambda, cusp_traces(profile, s, lambda, &e));
}

double default_s_max(const Profile& profile)
{
    const double eps = default_eps_max(profile);
    if (profile.family() == Family::Finite) return std::pow(eps, 1.0 / (2 * profile.k()));
    return std::min(0.7, std::pow(-std::log(eps), -1.0 / profile.p()));
}

double default_s_min(const Profile& profile)
{
    if (profile.family() == Family::Finite) return 0.0;
    return std::max(0.05, 1.0001 * std::pow(-kLogTauFloor, -1.0 / profile.p()));
}

ShockCurve integrate_shock_finite(const Profile& profile, double s_max, const PicardOptions& opt)
{
    require_family(profile, Family::Finite, "integrate_shock_finite");
    check_picard_options(opt);
    const int k = profile.k();
    const double s_cap = std::pow(default_eps_max(profile), 1.0 / (2 * k));
    if (!(s_max > 0.0) || s_max > s_cap * (1.0 + 1e-12))
        throw DomainError("s_max must lie in (0, eps_max^(1/2k)] = (0, " + num::format_double(s_cap) + "]");

    const int n = opt.n_steps;
    std::vector<double> s(n + 1);
    for (int i = 0; i <= n; ++i) s[i] = s_max * i / n;
    Grid g = make_grid(profile, s);

    // s^(2k+2) lambda = int_0^s w^(2k+1) D dw, product-integrated against the
    // piecewise-linear interpolant of D.
    std::vector<double> carry(n), w0(n), w1(n);
    for (int i = 0; i < n; ++i) {
        const double a = s[i], b = s[i + 1], h = b - a;
        const double inv = 1.0 / ipow(b, 2 * k + 2);
        carry[i] = ipow(a / b, 2 * k + 2);
        w0[i] = GL16::integrate([&](double w) { return ipow(w, 2 * k + 1) * (b - w) / h; }, a, b) * inv;
        w1[i] = GL16::integrate([&](double w) { return ipow(w, 2 * k + 1) * (w - a) / h; }, a, b) * inv;
    }
    std::vector<ShockTraces> tr(n + 1);
    auto rhs = [&](std::size_t i, double lam) {
        if (i == 0) return 0.0;
        tr[i] = traces_at(profile, g, i, lam);
        return finite_D(profile, g.s[i], lam, tr[i]);
    };
    auto r = picard(g, 0.0, carry, w0, w1, rhs, opt);
    check_inside(g, r.lambda);

    ShockCurve c = empty_curve(profile);
    resize_curve(c, n + 1);
    c.picard_sweeps = r.sweeps;
    c.update_norms = r.updates;
    c.contraction_ratios = r.ratios;
    for (int i = 0; i <= n; ++i) {
        c.s[i] = s[i];
        c.lambda[i] = r.lambda[i];
        c.tau[i] = ipow(s[i], 2 * k);
        c.t[i] = 1.0 + c.tau[i];
        c.phi[i] = phi_of(c, s[i], c.tau[i], r.lambda[i]);
    }
    for (int i = 1; i <= n; ++i) c.lambda_prime[i] = (r.rhs[i] - (2 * k + 2) * r.lambda[i]) / s[i];
    // lambda(s) = lambda'(0) s + O(s^2) with lambda(0) = 0.
    c.lambda_prime[0] = (4.0 * r.lambda[1] - r.lambda[2]) / (2.0 * s[1]);
    for (int i = 1; i <= n; ++i) {
        c.phi_prime[i] = phi_prime_of(c, s[i], r.lambda[i], c.lambda_prime[i]);
        fill_node_traces(profile, c, i, tr[i]);
    }
    const double u0c = profile.speed_local(0.0);
    c.y_minus[0] = c.y_plus[0] = profile.center();
    c.u_left[0] = c.u_right[0] = u0c;
    c.phi_prime[0] = u0c;
    return c;
}

namespace {

// K(s) = p s^-2 int_0^s w^(1-p) exp(s^-p - w^-p) dw
//      = int_0^inf (1 + s^p z)^(-2/p) exp(-z) dz   (z = w^-p - s^-p).
double start_kernel(double s, double p)
{
    const double sp = std::pow(s, p);
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double z) { return std::pow(1.0 + sp * z, -2.0 / p) * std::exp(-z); });
}

} // namespace

ShockCurve integrate_shock_infinite(const Profile& profile, double s_min, double s_max, const PicardOptions& opt)
{
    require_family(profile, Family::Infinite, "integrate_shock_infinite");
    check_picard_options(opt);
    const double p = profile.p();
    if (s_min < 0.05 || -std::pow(s_min, -p) < kLogTauFloor)
        throw DomainError("s_min must be >= 0.05 and keep t - 1 above 1e-300");
    if (!(s_max > s_min) || s_max > 0.7) throw DomainError("s_max must lie in (s_min, 0.7]");
    const double eps = default_eps_max(profile);
    if (-std::pow(s_max, -p) > std::log(eps) * (1.0 - 1e-12))
        throw DomainError("s_max puts t beyond t* + eps_max = " + num::format_double(1.0 + eps));

    const int n = opt.n_steps;
    std::vector<double> s(n + 1);
    for (int i = 0; i <= n; ++i) s[i] = s_min + (s_max - s_min) * i / n;
    Grid g = make_grid(profile, s);

    // Exponents are formed as differences s^-p - w^-p <= 0, never as ratios of
    // exponentials.
    std::vector<double> carry(n), w0(n), w1(n);
    for (int i = 0; i < n; ++i) {
        const double a = s[i], b = s[i + 1], h = b - a;
        const double bp = std::pow(b, -p);
        auto kern = [&](double w) { return p * std::pow(w, 1.0 - p) * std::exp(bp - std::pow(w, -p)) / (b * b); };
        carry[i] = (a / b) * (a / b) * std::exp(bp - std::pow(a, -p));
        w0[i] = GL16::integrate([&](double w) { return kern(w) * (b - w) / h; }, a, b);
        w1[i] = GL16::integrate([&](double w) { return kern(w) * (w - a) / h; }, a, b);
    }
    std::vector<ShockTraces> tr(n + 1);
    auto rhs = [&](std::size_t i, double lam) {
        tr[i] = traces_at(profile, g, i, lam);
        return infinite_d(profile, g.s[i], lam, tr[i]);
    };

    // Start value from the truncated integral over [0, s_min] with d frozen.
    const double K = start_kernel(s_min, p);
    double lambda0 = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double next = K * rhs(0, lambda0);
        const double d = std::abs(next - lambda0);
        lambda0 = next;
        if (d <= 1e-16 * (1.0 + std::abs(lambda0))) break;
    }

    auto r = picard(g, lambda0, carry, w0, w1, rhs, opt);
    check_inside(g, r.lambda);

    ShockCurve c = empty_curve(profile);
    resize_curve(c, n + 1);
    c.picard_sweeps = r.sweeps;
    c.update_norms = r.updates;
    c.contraction_ratios = r.ratios;
    c.start_value = lambda0;
    for (int i = 0; i <= n; ++i) {
        const double si = s[i], lam = r.lambda[i];
        c.s[i] = si;
        c.lambda[i] = lam;
        c.tau[i] = tau_of_s(c, si);
        c.t[i] = 1.0 + c.tau[i];
        c.phi[i] = phi_of(c, si, c.tau[i], lam);
        c.lambda_prime[i] = p * std::pow(si, -p - 1.0) * (r.rhs[i] - lam) - 2.0 * lam / si;
        c.phi_prime[i] = phi_prime_of(c, si, lam, c.lambda_prime[i]);
        fill_node_traces(profile, c, i, tr[i]);
    }
    return c;
}

ShockCurve integrate_shock(const Profile& profile, const PicardOptions& opt)
{
    if (profile.family() == Family::Finite) return integrate_shock_finite(profile, default_s_max(profile), opt);
    return integrate_shock_infinite(profile, default_s_min(profile), default_s_max(profile), opt);
}

ShockCurve continue_shock_ode(const Profile& profile, double t0, double phi0, double t_end, const OdeOptions& opt)
{
    namespace ode = boost::numeric::odeint;
    if (!(t0 > 1.0)) throw DomainError("continuation needs t0 > t*");
    if (!(t_end > t0)) throw DomainError("t_end must exceed t0");
    if (opt.min_nodes < 8) throw DomainError("min_nodes must be >= 8");

    auto inside = [&](double t, double x) {
        const auto c = cusp_boundaries(profile, t);
        return x > c.x_plus && x < c.x_minus;
    };
    if (!inside(t0, phi0)) throw DomainError("seed lies outside the cusp");

    struct Eval {
        double ul, ur, yl, yr;
    };
    auto traces = [&](double t, double x) {
        Eval e{};
        e.yl = invert_branch(profile, t, x, Branch::Minus);
        e.yr = invert_branch(profile, t, x, Branch::Plus);
        e.ul = profile.u0(e.yl);
        e.ur = profile.u0(e.yr);
        return e;
    };

    bool left_cusp = false;
    using State = std::vector<double>;
    auto sys = [&](const State& x, State& dxdt, double t) {
        const auto c = cusp_boundaries(profile, t);
        double phi = x[0];
        if (!(phi > c.x_plus && phi < c.x_minus)) {
            left_cusp = true;
            phi = std::clamp(phi, c.x_plus, c.x_minus);
        }
        const auto e = traces(t, phi);
        dxdt[0] = profile.flux().chord(e.ur, e.ul);
    };

    auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
    const double dt_max = (t_end - t0) / opt.min_nodes;
    double t = t0, dt = dt_max;
    State x{phi0};
    std::vector<double> ts{t0}, phis{phi0};
    int guard = 0;
    while (t < t_end) {
        if (++guard > 1000000) throw NumericalError("shock continuation exceeded the step budget");
        dt = std::min({dt, dt_max, t_end - t});
        if (t + dt >= t_end * (1.0 - 1e-15)) dt = t_end - t;
        const double t_prev = t;
        const State x_prev = x;
        left_cusp = false;
        if (stepper.try_step(sys, x, t, dt) != ode::success) continue;
        if (left_cusp || !inside(t, x[0])) {
            x = x_prev;
            dt = 0.5 * (t - t_prev);
            t = t_prev;
            stepper.reset();
            if (dt < 1e-15 * t) throw DomainError("shock leaves the cusp");
            continue;
        }
        ts.push_back(t);
        phis.push_back(x[0]);
    }

    ShockCurve c = empty_curve(profile);
    const std::size_t n = ts.size();
    resize_curve(c, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double tau = ts[i] - 1.0;
        const auto e = traces(ts[i], phis[i]);
        c.t[i] = ts[i];
        c.tau[i] = tau;
        c.s[i] = c.s_of_tau(tau);
        c.phi[i] = phis[i];
        c.phi_prime[i] = profile.flux().chord(e.ur, e.ul);
        c.lambda[i] = c.regime == Family::Finite ? (phis[i] - c.center) / ipow(c.s[i], 2 * c.k + 1)
                                                 : (phis[i] - c.center) / (c.s[i] * tau);
        c.lambda_prime[i] = lambda_prime_of(c, c.s[i], c.lambda[i], c.phi_prime[i]);
        c.y_minus[i] = e.yl;
        c.y_plus[i] = e.yr;
        c.u_left[i] = e.ul;
        c.u_right[i] = e.ur;
        c.rh_residual[i] = burgers_rh(profile, c.phi_prime[i], e.ul, e.ur);
        c.entropy_margin[i] = std::min(e.ul - c.phi_prime[i], c.phi_prime[i] - e.ur);
    }
    return c;
}

EntropyValue entropy_solution(const Profile& profile, const ShockCurve& curve, double t, double x)
{
    EntropyValue v;
    const double tau = t - 1.0;
    if (tau <= 0.0) {
        v.sample = solution_value(profile, t, x, Branch::Unique);
        v.u_left = v.u_right = v.sample.u;
        return v;
    }
    const double phi = curve.phi_at_tau(tau);
    if (x < phi) {
        v.sample = solution_value(profile, t, x, Branch::Minus);
        v.u_left = v.u_right = v.sample.u;
    } else if (x > phi) {
        v.sample = solution_value(profile, t, x, Branch::Plus);
        v.u_left = v.u_right = v.sample.u;
    } else {
        v.on_shock = true;
        v.sample = solution_value(profile, t, x, Branch::Minus);
        v.u_left = v.sample.u;
        v.u_right = solution_value(profile, t, x, Branch::Plus).u;
    }
    return v;
}

double mass(const Profile& profile, const ShockCurve& curve, double t, double xl, double xr)
{
    if (!(xr > xl)) throw DomainError("mass needs xl < xr");
    auto P = [&](double y) {
        const double u = profile.u0(y);
        return profile.potential_local(y - profile.center()) + 0.5 * t * u * u;
    };
    const double tau = t - 1.0;
    if (tau <= 0.0)
        return P(invert_branch(profile, t, xr, Branch::Unique)) - P(invert_branch(profile, t, xl, Branch::Unique));
    const double phi = curve.phi_at_tau(tau);
    if (phi <= xl)
        return P(invert_branch(profile, t, xr, Branch::Plus)) - P(invert_branch(profile, t, xl, Branch::Plus));
    if (phi >= xr)
        return P(invert_branch(profile, t, xr, Branch::Minus)) - P(invert_branch(profile, t, xl, Branch::Minus));
    return P(invert_branch(profile, t, phi, Branch::Minus)) - P(invert_branch(profile, t, xl, Branch::Minus)) +
           P(invert_branch(profile, t, xr, Branch::Plus)) - P(invert_branch(profile, t, phi, Branch::Plus));
}

double weak_form_residual(const Profile& profile, const ShockCurve& curve, double t1, double t2, double xl, double xr)
{
    if (!(t2 > t1) || !(t1 > 0.0)) throw DomainError("weak-form check needs 0 < t1 < t2");
    if (t2 > 1.0) {
        const auto c = cusp_boundaries(profile, t2);
        if (!(xl < c.x_plus && xr > c.x_minus)) throw DomainError("rectangle sides must lie outside the cusp");
    }
    const auto& f = profile.flux();
    auto flux_at = [&](double x, Branch post) {
        return [&, x, post](double t) {
            const Branch b = t <= 1.0 ? Branch::Unique : post;
            return f.value(profile.u0(invert_branch(profile, t, x, b)));
        };
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto integrate_time = [&](auto fn) {
        if (t1 < 1.0 && t2 > 1.0) return GK::integrate(fn, t1, 1.0, 10, 1e-10) + GK::integrate(fn, 1.0, t2, 10, 1e-10);
        return GK::integrate(fn, t1, t2, 10, 1e-10);
    };
    const double flux_r = integrate_time(flux_at(xr, Branch::Plus));
    const double flux_l = integrate_time(flux_at(xl, Branch::Minus));
    return mass(profile, curve, t2, xl, xr) - mass(profile, curve, t1, xl, xr) + flux_r - flux_l;
}

} // namespace shockfit
