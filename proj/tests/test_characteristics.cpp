#include "shockfit/characteristics.hpp"

#include "test_util.hpp"

#include <cmath>
#include <doctest.h>
#include <limits>
#include <random>
#include <string>

using namespace shockfit;

TEST_CASE("characteristic position")
{
    const auto pr = Profile::finite(1);
    CHECK(characteristic_position(pr, 0.0, 0.3) == 0.3);
    CHECK(characteristic_position(pr, 2.0, 1.0) == 1.0);
    CHECK(near(characteristic_position(pr, 2.0, 1.0 / std::sqrt(2.0)), 0.0, 0.0, 1e-15));
}

TEST_CASE("envelope and cusp for the cubic")
{
    const auto pr = Profile::finite(1);
    const double t = 1.03;
    const auto e = envelope_roots(pr, t, 0.25);
    const double eta = std::sqrt((t - 1) / (3 * t));
    CHECK(e.eta_plus == doctest::Approx(eta).epsilon(1e-13));
    CHECK(e.eta_minus == doctest::Approx(-eta).epsilon(1e-13));
    CHECK(eta == doctest::Approx(0.0985329).epsilon(1e-6));
    const auto c = cusp_boundaries(pr, t);
    const double xm = eta * (1 - t) + t * eta * eta * eta;
    CHECK(c.x_minus == doctest::Approx(-xm).epsilon(1e-12));
    CHECK(c.x_plus == doctest::Approx(xm).epsilon(1e-12));
    CHECK(c.x_minus == doctest::Approx(0.0019707).epsilon(1e-4));
    CHECK(c.x_plus < c.x_minus);
    // Leading coefficient 2*3^(-3/2)*(t-1)^(3/2).
    CHECK(c.x_minus == doctest::Approx(2 * std::pow(3.0, -1.5) * std::pow(t - 1, 1.5)).epsilon(0.03));
    CHECK_THROWS_AS(envelope_roots(pr, 1.0), DomainError);
    CHECK_THROWS_AS(envelope_roots(pr, 1.3, 0.25), DomainError);
}

TEST_CASE("envelope roots are zeros of the denominator")
{
    const Profile profiles[] = {Profile::finite(1, {{4, 1.0}}), Profile::finite(3), Profile::infinite(1.0),
                                Profile::infinite(2.0, Remainder0::Quadratic), Profile::finite(2, {}, -0.3)};
    for (const auto& pr : profiles) {
        for (double dt : {1e-8, 1e-5, 1e-3, 0.02}) {
            const double t = 1.0 + dt;
            const double tau = t - 1.0;
            CAPTURE(pr.describe());
            CAPTURE(tau);
            const auto e = envelope_roots(pr, t);
            CHECK(e.eta_minus < pr.center());
            CHECK(e.eta_plus > pr.center());
            for (double eta : {e.eta_minus, e.eta_plus}) {
                const double w = eta - pr.center();
                CHECK(std::abs(characteristic_denominator(pr, tau, w)) <= 1e-12 * tau);
                // Slope changes sign across the root.
                CHECK(characteristic_denominator(pr, tau, w * (1 - 1e-6)) < 0.0);
                CHECK(characteristic_denominator(pr, tau, w * (1 + 1e-6)) > 0.0);
            }
            const auto c = cusp_boundaries(pr, t);
            CHECK(c.x_plus < c.x_minus);
            CHECK(near(c.x_plus, characteristic_position(pr, t, e.eta_plus), 1e-12, 1e-14));
        }
    }
}

TEST_CASE("infinite envelope leading order")
{
    const auto pr = Profile::infinite(1.0);
    for (double tau : {1e-12, 1e-8, 1e-5}) {
        const auto e = envelope_roots(pr, 1.0 + tau);
        const double lead = 1.0 / std::abs(std::log(tau));
        CHECK(e.eta_plus / lead > 0.8);
        CHECK(e.eta_plus / lead < 1.0);
        CHECK(e.eta_minus == doctest::Approx(-e.eta_plus).epsilon(1e-14));
    }
}

TEST_CASE("slope identity dx/dt = g(eta)")
{
    const auto pr = Profile::finite(1, {{4, 1.0}});
    for (double t : {1.001, 1.01, 1.1}) {
        const double h = 1e-7;
        const auto c = cusp_boundaries(pr, t);
        const auto cp = cusp_boundaries(pr, t + h);
        const auto cm = cusp_boundaries(pr, t - h);
        CHECK((cp.x_plus - cm.x_plus) / (2 * h) == doctest::Approx(c.slope_plus).epsilon(1e-6));
        CHECK((cp.x_minus - cm.x_minus) / (2 * h) == doctest::Approx(c.slope_minus).epsilon(1e-6));
    }
}

TEST_CASE("classification examples")
{
    const auto pr = Profile::finite(1);
    auto c = classify_point(pr, 0.5, 0.3);
    CHECK(c.region == Region::PreBlowup);
    CHECK(c.y_unique.has_value());

    c = classify_point(pr, 2.0, 0.0);
    CHECK(c.region == Region::Triple);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(*c.y_minus == doctest::Approx(-r).epsilon(1e-14));
    CHECK(near(*c.y_zero, 0.0, 0.0, 1e-15));
    CHECK(*c.y_plus == doctest::Approx(r).epsilon(1e-14));

    const auto cb = cusp_boundaries(pr, 2.0);
    CHECK(cb.x_minus == doctest::Approx(0.2722).epsilon(1e-4));
    c = classify_point(pr, 2.0, 0.5);
    CHECK(c.region == Region::RightOnly);
    CHECK(!c.y_minus.has_value());
    c = classify_point(pr, 2.0, -0.5);
    CHECK(c.region == Region::LeftOnly);

    c = classify_point(pr, 2.0, cb.x_minus);
    CHECK(c.region == Region::Boundary);
    CHECK(c.y_minus.has_value());
    CHECK(c.y_plus.has_value());
    CHECK(!c.y_zero.has_value());
}

TEST_CASE("invert_branch examples")
{
    const auto pr = Profile::finite(1);
    CHECK(invert_branch(pr, 2.0, 0.0, Branch::Plus) == doctest::Approx(0.7071068).epsilon(1e-7));
    const double y = invert_branch(pr, 2.0, 0.1, Branch::Plus);
    CHECK(-y + 2 * y * y * y == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(y == doctest::Approx(0.7527).epsilon(1e-4));
    CHECK(near(invert_branch(pr, 0.5, 0.0, Branch::Unique), 0.0, 0.0, 1e-300));
    CHECK_THROWS_AS(invert_branch(pr, 2.0, 0.5, Branch::Minus), BranchMissing);
    CHECK_THROWS_AS(invert_branch(pr, 2.0, 0.5, Branch::Zero), BranchMissing);
    try {
        invert_branch(pr, 2.0, -0.5, Branch::Plus);
        FAIL("expected BranchMissing");
    } catch (const BranchMissing& e) {
        CHECK(e.region() == Region::LeftOnly);
    }
}

TEST_CASE("round trip through the characteristic map")
{
    const Profile profiles[] = {Profile::finite(1), Profile::finite(1, {{4, 1.0}}), Profile::finite(2, {{6, 1.0}}),
                                Profile::infinite(1.0), Profile::infinite(2.0, Remainder0::Quadratic)};
    std::mt19937_64 rng(21);
    for (const auto& pr : profiles) {
        std::uniform_real_distribution<double> T(0.0, 1.0 + default_eps_max(pr)), Y(-0.6, 0.6);
        int checked = 0;
        for (int i = 0; i < 1000; ++i) {
            const double t = T(rng), y = Y(rng);
            const double x = characteristic_position(pr, t, y);
            Branch b = Branch::Unique;
            const double tau = t - 1.0;
            if (tau > 0.0) {
                const auto e = envelope_roots(pr, t);
                if (y < e.eta_minus)
                    b = Branch::Minus;
                else if (y > e.eta_plus)
                    b = Branch::Plus;
                else
                    b = Branch::Zero;
                // Stay clear of the double roots.
                if (std::abs(y - e.eta_minus) < 1e-6 || std::abs(y - e.eta_plus) < 1e-6) continue;
                // The branch must exist at x (the map can fold back outside the locality window).
                const auto c = cusp_boundaries(pr, t);
                if ((b == Branch::Minus && x > c.x_minus) || (b == Branch::Plus && x < c.x_plus)) continue;
            }
            CAPTURE(pr.describe());
            CAPTURE(t);
            CAPTURE(y);
            const double back = invert_branch(pr, t, x, b);
            CHECK(near(back, y, 1e-10, 1e-10));
            CHECK(std::abs(characteristic_position(pr, t, back) - x) <= 1e-12 * (1 + std::abs(x)));
            ++checked;
        }
        CHECK(checked > 900);
    }
}

TEST_CASE("branch monotonicity")
{
    const auto pr = Profile::finite(1, {{4, 1.0}});
    const double t = 1.1;
    const auto c = cusp_boundaries(pr, t);
    double prev_m = -1, prev_z = 1, prev_p = -1;
    for (int i = 1; i < 50; ++i) {
        const double x = c.x_plus + (c.x_minus - c.x_plus) * i / 50.0;
        const double ym = invert_branch(pr, t, x, Branch::Minus);
        const double yz = invert_branch(pr, t, x, Branch::Zero);
        const double yp = invert_branch(pr, t, x, Branch::Plus);
        CHECK(ym < yz);
        CHECK(yz < yp);
        CHECK(ym > prev_m);
        CHECK(yz < prev_z);
        CHECK(yp > prev_p);
        prev_m = ym;
        prev_z = yz;
        prev_p = yp;
    }
}

TEST_CASE("envelope pinch")
{
    const auto pr = Profile::finite(2, {{6, 1.0}});
    double prev_w = 1e9, prev_e = 1e9;
    for (double tau = 0.2; tau > 1e-9; tau *= 0.5) {
        const auto e = envelope_roots(pr, 1 + tau);
        const auto c = cusp_boundaries(pr, 1 + tau);
        CHECK(c.x_minus - c.x_plus < prev_w);
        CHECK(e.eta_plus - e.eta_minus < prev_e);
        prev_w = c.x_minus - c.x_plus;
        prev_e = e.eta_plus - e.eta_minus;
    }
}

TEST_CASE("solution value")
{
    const auto pr = Profile::finite(1);
    const auto s = solution_value(pr, 0.5, 0.0, Branch::Unique);
    CHECK(s.u == 0.0);
    CHECK(s.du_dx == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(s.du_dt + pr.g(s.y) * s.du_dx == 0.0);

    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> Y(-0.6, 0.6);
    for (int i = 0; i < 100; ++i) {
        const double y = Y(rng);
        const double t = 0.7;
        const auto v = solution_value(pr, t, characteristic_position(pr, t, y), Branch::Unique);
        CHECK(near(v.u, pr.u0(y), 1e-10, 1e-12));
        CHECK(v.du_dx * v.denom == doctest::Approx(pr.u0_prime(v.y)).epsilon(1e-14));
    }
    const auto c = cusp_boundaries(pr, 1.2);
    const auto e = envelope_roots(pr, 1.2);
    CHECK_THROWS_AS(solution_value(pr, 1.2, c.x_minus, Branch::Minus), EnvelopePoint);
    (void)e;
}

TEST_CASE("scaled frame agrees with the physical map")
{
    const Profile profiles[] = {Profile::finite(1, {{4, 1.0}}), Profile::infinite(1.0, Remainder0::Quadratic),
                                Profile::infinite(2.0)};
    for (const auto& pr : profiles) {
        for (double s : {0.08, 0.15, 0.3, 0.45}) {
            const ScaledFrame f{s, 1.0};
            const double T = pr.time_scale(s);
            if (T < 1e-10 || T > default_eps_max(pr)) continue;
            const double t = 1.0 + T;
            const auto fe = frame_envelope(pr, f);
            const auto pe = envelope_roots(pr, t);
            CHECK(s * fe.mu_plus == doctest::Approx(pe.eta_plus).epsilon(1e-12));
            CHECK(s * fe.mu_minus == doctest::Approx(pe.eta_minus).epsilon(1e-12));
            for (double lam : {-0.1, 0.0, 0.05}) {
                const double x = s * T * lam;
                for (Branch b : {Branch::Minus, Branch::Plus}) {
                    CAPTURE(pr.describe());
                    CAPTURE(s);
                    CAPTURE(lam);
                    CAPTURE(std::string(to_string(b)));
                    const double mu = frame_invert(pr, f, lam, b, &fe);
                    const double y = invert_branch(pr, t, x, b);
                    CHECK(s * mu == doctest::Approx(y).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("default trusted range keeps a complete cusp")
{
    const Profile profiles[] = {Profile::finite(1), Profile::finite(1, {{4, 1.0}}), Profile::finite(2, {{6, 1.0}}),
                                Profile::infinite(1.0), Profile::infinite(1.0, Remainder0::Quadratic),
                                Profile::infinite(2.0, Remainder0::Quadratic), Profile::infinite(3.0, Remainder0::Quadratic)};
    for (const auto& pr : profiles) {
        CAPTURE(pr.describe());
        const double eps = default_eps_max(pr);
        CHECK(eps > 0.0);
        CHECK(eps <= (pr.family() == Family::Finite ? 0.25 : 0.1));
        const double t = 1.0 + eps;
        const auto c = cusp_boundaries(pr, t, eps);
        // Every cusp point has both outer preimages.
        for (int i = 0; i <= 20; ++i) {
            const double x = c.x_plus + (c.x_minus - c.x_plus) * i / 20.0;
            CHECK_NOTHROW(invert_branch(pr, t, x, Branch::Minus));
            CHECK_NOTHROW(invert_branch(pr, t, x, Branch::Plus));
        }
    }
}

TEST_CASE("cusp validity limit")
{
    CHECK(cusp_validity_limit(Profile::finite(1, {}, 0.0)) > 0.7);
    // r = x^4: past the limit the Minus branch ends at a secondary fold before
    // reaching x+.
    const auto pr = Profile::finite(1, {{4, 1.0}});
    const double lim = cusp_validity_limit(pr);
    CHECK(lim == doctest::Approx(0.14).epsilon(0.03));
    const double t_in = 1.0 + 0.98 * lim, t_out = 1.0 + 1.05 * lim;
    CHECK_NOTHROW(invert_branch(pr, t_in, cusp_boundaries(pr, t_in).x_plus * 0.999, Branch::Minus));
    CHECK_THROWS_AS(invert_branch(pr, t_out, cusp_boundaries(pr, t_out).x_plus * 0.999, Branch::Minus), DomainError);
}
