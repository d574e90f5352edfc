#include "shockfit/shock.hpp"

#include "test_util.hpp"

#include <cmath>
#include <doctest.h>
#include <random>

using namespace shockfit;

namespace {

// Brute-force physical inversion by plain bisection, independent of the
// library's frame machinery.
double denom(const Profile& pr, double t, double y) { return 1.0 + t * pr.g_prime(y); }

double bisect_sign(auto f, double a, double b)
{
    double fa = f(a);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// First sign change of the denominator walking outward from the centre.
double brute_eta(const Profile& pr, double t, double dir)
{
    double y = 1e-9;
    while (denom(pr, t, dir * y * 1.05) <= 0.0) y *= 1.05;
    return bisect_sign([&](double q) { return denom(pr, t, dir * q); }, y, y * 1.05) * dir;
}

// Outer preimage of x on the side dir, searched between the envelope root
// and the next fold.
double brute_outer(const Profile& pr, double t, double x, double dir)
{
    const double eta = brute_eta(pr, t, dir);
    double far = eta;
    while (std::abs(far) < 0.95 && denom(pr, t, far + dir * 1e-2) > 0.0) far += dir * 1e-2;
    auto F = [&](double y) { return y + t * pr.g(y) - x; };
    return bisect_sign(F, eta, far);
}

double brute_speed(const Profile& pr, double t, double phi)
{
    return 0.5 * (pr.g(brute_outer(pr, t, phi, -1.0)) + pr.g(brute_outer(pr, t, phi, 1.0)));
}

// RK4 on log-spaced tau from tau0 with phi(tau0) = 0; the start error decays
// like (tau0/tau)^(1/2k).
double brute_shock(const Profile& pr, double tau_end, double tau0 = 1e-7, int n = 600)
{
    double phi = 0.0;
    const double r = std::pow(tau_end / tau0, 1.0 / n);
    double tau = tau0;
    for (int i = 0; i < n; ++i) {
        const double h = tau * (r - 1.0);
        auto F = [&](double tt, double ph) { return brute_speed(pr, 1.0 + tt, ph); };
        const double k1 = F(tau, phi);
        const double k2 = F(tau + 0.5 * h, phi + 0.5 * h * k1);
        const double k3 = F(tau + 0.5 * h, phi + 0.5 * h * k2);
        const double k4 = F(tau + h, phi + h * k3);
        phi += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
        tau *= r;
    }
    return phi;
}

} // namespace

TEST_CASE("rescaled finite right-hand side")
{
    const auto odd = Profile::finite(1);
    for (double s : {0.01, 0.1, 0.3}) CHECK(near(rescaled_rhs_finite(odd, s, 0.0), 0.0, 0.0, 1e-15));

    // D(s,0)/s -> g^(2k+2)(0)/(2k+2)! as s -> 0.
    for (int k : {1, 2, 3}) {
        const auto pr = Profile::finite(k, {{2 * k + 2, 1.5}});
        const double s = 1e-3;
        CHECK(rescaled_rhs_finite(pr, s, 0.0) / s == doctest::Approx(1.5).epsilon(5e-3));
    }
    const auto pr = Profile::finite(1, {{4, 1.0}});
    const auto e = frame_envelope(pr, ScaledFrame{0.1, 1.0});
    CHECK_THROWS_AS(rescaled_rhs_finite(pr, 0.1, e.lambda_minus + 0.01), DomainError);
    CHECK_THROWS_AS(rescaled_rhs_finite(pr, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(rescaled_rhs_finite(Profile::infinite(1.0), 0.1, 0.0), DomainError);
}

TEST_CASE("rescaled infinite right-hand side")
{
    CHECK(rescaled_rhs_infinite(Profile::infinite(1.0), 0.2, 0.0) == 0.0);
    const auto pr = Profile::infinite(1.0, Remainder0::Quadratic);
    // d = O(s + s^(2p+1)|lambda| + s^(p+1) lambda^2).
    double worst = 0.0;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> S(0.06, 0.3), L(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
        const double s = S(rng), lam = L(rng);
        const auto env = frame_envelope(pr, ScaledFrame{s, 1.0});
        if (!(lam > env.lambda_plus && lam < env.lambda_minus)) continue;
        const double d = rescaled_rhs_infinite(pr, s, lam);
        worst = std::max(worst, std::abs(d) / (s + std::pow(s, 3) * std::abs(lam) + s * s * lam * lam));
    }
    CHECK(worst < 10.0);

    // mu+ = 1 + (ln p) s^p / p + s^p lambda / p + o(s^p).
    for (double p : {1.0, 2.0}) {
        const auto q = Profile::infinite(p);
        for (double s : {0.06, 0.1}) {
            const double lam = 0.2;
            const auto tr = cusp_traces(q, s, lam);
            const double sp = std::pow(s, p);
            const double pred = 1.0 + std::log(p) * sp / p + sp * lam / p;
            CHECK(std::abs(tr.mu_plus - pred) < 0.5 * sp);
        }
    }
    CHECK_THROWS_AS(rescaled_rhs_infinite(Profile::infinite(3.0), 0.05, 0.0), DomainError);
}

TEST_CASE("symmetric profiles give a straight shock")
{
    const auto c = integrate_shock(Profile::finite(1));
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(std::abs(c.phi[i]) <= 1e-12);
        CHECK(std::abs(c.y_plus[i] + c.y_minus[i]) <= 1e-10);
    }
    const auto ci = integrate_shock(Profile::infinite(1.0));
    for (std::size_t i = 0; i < ci.size(); ++i) {
        CHECK(std::abs(ci.phi[i]) <= 1e-12);
        CHECK(std::abs(ci.lambda[i]) <= 1e-12);
    }

    // Seed (2, 0): the traces are u0(-+1/sqrt 2) = +-0.35355.
    const auto odd = Profile::finite(1);
    const auto cont = continue_shock_ode(odd, 2.0, 0.0, 2.2);
    for (std::size_t i = 0; i < cont.size(); ++i) CHECK(std::abs(cont.phi[i]) <= 1e-12);
    CHECK(cont.u_left.front() == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cont.u_right.front() == doctest::Approx(-0.5 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cont.entropy_margin.front() == doctest::Approx(0.35355339).epsilon(1e-8));
}

TEST_CASE("finite shock agrees with a brute-force Rankine-Hugoniot integration")
{
    struct Case {
        Profile pr;
        std::vector<double> taus;
    };
    const Case cases[] = {{Profile::finite(1, {{4, 1.0}}), {0.005, 0.02, 0.08}},
                          {Profile::finite(2, {{6, 1.0}}), {0.005, 0.03}},
                          {Profile::finite(1, {{4, -0.7}, {5, 2.0}}), {0.01, 0.05}}};
    for (const auto& cs : cases) {
        const auto curve = integrate_shock(cs.pr);
        for (double tau : cs.taus) {
            CAPTURE(cs.pr.describe());
            CAPTURE(tau);
            const double ref = brute_shock(cs.pr, tau);
            CHECK(near(curve.phi_at_tau(tau), ref, 1e-6, 1e-14));
        }
    }
}

TEST_CASE("leading shock coefficient is c4/(2k+3)")
{
    // phi = c4 tau^((k+1)/k)/(2k+3) + ..., c4 the x^(2k+2) coefficient.
    for (int k : {1, 2, 3}) {
        const auto pr = Profile::finite(k, {{2 * k + 2, 1.0}});
        const auto c = integrate_shock(pr);
        const double s = 0.01;
        const double tau = std::pow(s, 2 * k);
        CHECK(c.phi_at_tau(tau) / std::pow(tau, (k + 1.0) / k) == doctest::Approx(1.0 / (2 * k + 3)).epsilon(2e-3));
    }
    // Independent check at k=1 with the brute-force integration.
    const auto pr = Profile::finite(1, {{4, 1.0}});
    const double tau = 1e-4;
    CHECK(brute_shock(pr, tau, 1e-10) / (tau * tau) == doctest::Approx(0.2).epsilon(2e-3));
}

TEST_CASE("curve invariants")
{
    const Profile profiles[] = {Profile::finite(1, {{4, 1.0}}), Profile::finite(2, {{6, 1.0}}),
                                Profile::finite(3, {{8, 1.0}}), Profile::infinite(1.0, Remainder0::Quadratic),
                                Profile::infinite(2.0, Remainder0::Quadratic)};
    for (const auto& pr : profiles) {
        CAPTURE(pr.describe());
        const auto c = integrate_shock(pr);
        REQUIRE(c.size() == 2001);
        // Picard contraction after the second sweep.
        for (std::size_t j = 1; j < c.contraction_ratios.size(); ++j) CHECK(c.contraction_ratios[j] < 0.9);
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c.s[i] == 0.0) continue;
            const double jump = std::abs(0.5 * (c.u_right[i] * c.u_right[i] - c.u_left[i] * c.u_left[i]));
            CHECK(c.rh_residual[i] <= 1e-8 * (1.0 + jump));
            CHECK(c.entropy_margin[i] > 0.0);
            if (c.tau[i] > 1e-12) {
                const auto cb = cusp_boundaries(pr, c.t[i]);
                CHECK(c.phi[i] > cb.x_plus);
                CHECK(c.phi[i] < cb.x_minus);
            }
        }
        // phi' agrees with a difference quotient of phi in tau.
        for (std::size_t i = 200; i + 1 < c.size(); i += 200) {
            if (c.tau[i + 1] > 1.1 * c.tau[i - 1]) continue;
            const double fd = (c.phi[i + 1] - c.phi[i - 1]) / (c.tau[i + 1] - c.tau[i - 1]);
            CHECK(near(fd, c.phi_prime[i], 1e-3, 1e-9));
        }
    }
}

TEST_CASE("infinite family bounds")
{
    for (double p : {1.0, 2.0}) {
        const auto pr = Profile::infinite(p, Remainder0::Quadratic);
        const auto c = integrate_shock(pr);
        double C = 0.0, B = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            C = std::max(C, std::abs(c.lambda[i]) / c.s[i]);
            B = std::max(B, std::abs(c.phi[i]) / (c.s[i] * c.s[i] * c.tau[i]));
        }
        CHECK(C < 1.0);
        CHECK(B < 1.0);
        CHECK(std::abs(c.start_value) <= C * c.s.front());
    }
}

TEST_CASE("shock curve options are validated")
{
    const auto pr = Profile::finite(1, {{4, 1.0}});
    CHECK_THROWS_AS(integrate_shock_finite(pr, 0.9), DomainError);
    CHECK_THROWS_AS(integrate_shock_finite(pr, 0.1, PicardOptions{4, 1e-13, 200}), DomainError);
    const auto inf = Profile::infinite(1.0);
    CHECK_THROWS_AS(integrate_shock_infinite(inf, 0.04, 0.3), DomainError);
    CHECK_THROWS_AS(integrate_shock_infinite(inf, 0.05, 0.8), DomainError);
    CHECK_THROWS_AS(integrate_shock_finite(inf, 0.1), DomainError);
    CHECK(default_s_min(Profile::infinite(3.0)) > 0.11);
}

TEST_CASE("ODE continuation reproduces the Picard curve")
{
    const auto pr = Profile::finite(1, {{4, 1.0}});
    const auto c = integrate_shock(pr);
    const std::size_t mid = c.size() / 2;
    const auto cont = continue_shock_ode(pr, c.t[mid], c.phi[mid], c.t.back());
    for (std::size_t i = 0; i < cont.size(); ++i) {
        CHECK(near(cont.phi[i], c.phi_at_tau(cont.tau[i]), 0.0, 1e-8));
        CHECK(cont.entropy_margin[i] > 0.0);
    }
    CHECK_THROWS_AS(continue_shock_ode(pr, 1.05, 0.5, 1.1), DomainError);
}

TEST_CASE("interpolated shock position")
{
    const auto pr = Profile::finite(1, {{4, 1.0}});
    const auto c = integrate_shock(pr);
    for (std::size_t i = 0; i < c.size(); i += 97) CHECK(near(c.phi_at_tau(c.tau[i]), c.phi[i], 1e-12, 1e-18));
    for (double tau : {3e-5, 0.0123, 0.0777}) CHECK(near(c.phi_at_tau(tau), brute_shock(pr, tau), 1e-6, 1e-14));
    CHECK(c.phi_at(1.0) == 0.0);
    CHECK_THROWS_AS(c.phi_at(1.5), DomainError);
}

TEST_CASE("entropy solution")
{
    const auto odd = Profile::finite(1);
    const auto cont = continue_shock_ode(odd, 2.0, 0.0, 2.2);
    const auto left = entropy_solution(odd, cont, 2.0, -0.1);
    CHECK(left.sample.branch == Branch::Minus);
    CHECK(left.sample.u > 0.0);
    CHECK(left.sample.u == doctest::Approx(odd.u0(brute_outer(odd, 2.0, -0.1, -1.0))).epsilon(1e-12));
    const auto on = entropy_solution(odd, cont, 2.0, 0.0);
    CHECK(on.on_shock);
    CHECK(on.u_right - on.u_left == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
    const auto pre = entropy_solution(odd, cont, 0.5, 0.2);
    CHECK(pre.sample.branch == Branch::Unique);
    CHECK(pre.sample.u == doctest::Approx(odd.u0(pre.sample.y)).epsilon(1e-15));
}

TEST_CASE("weak form conservation")
{
    struct Case {
        Profile pr;
        double t1, t2, xl, xr;
    };
    const Case cases[] = {{Profile::finite(1), 0.9, 1.2, -0.3, 0.3},
                          {Profile::finite(1, {{4, 1.0}}), 0.9, 1.1, -0.03, 0.03},
                          {Profile::finite(1, {{4, 1.0}}), 1.02, 1.1, -0.03, 0.03},
                          {Profile::infinite(1.0, Remainder0::Quadratic), 0.9, 1.04, -0.02, 0.02}};
    for (const auto& cs : cases) {
        CAPTURE(cs.pr.describe());
        const auto c = integrate_shock(cs.pr);
        CHECK(std::abs(weak_form_residual(cs.pr, c, cs.t1, cs.t2, cs.xl, cs.xr)) < 1e-10);
    }
    // A displaced shock violates the balance.
    const auto pr = Profile::finite(1, {{4, 1.0}});
    auto c = integrate_shock(pr);
    for (auto& l : c.lambda) l += 0.01;
    for (std::size_t i = 0; i < c.size(); ++i) c.phi[i] = std::pow(c.s[i], 3) * c.lambda[i];
    CHECK(std::abs(weak_form_residual(pr, c, 0.9, 1.1, -0.03, 0.03)) > 1e-6);
    CHECK_THROWS_AS(weak_form_residual(pr, c, 0.9, 1.1, -0.005, 0.03), DomainError);
}
