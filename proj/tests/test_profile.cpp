#include "shockfit/numerics.hpp"
#include "shockfit/profile.hpp"

#include "test_util.hpp"

#include <cmath>
#include <doctest.h>
#include <random>

using namespace shockfit;

TEST_CASE("finite profile assembles -x + x^(2k+1) + r")
{
    const auto g0 = Profile::finite(1);
    const auto g4 = Profile::finite(1, {{4, 1.0}});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    for (int i = 0; i < 200; ++i) {
        const double x = U(rng);
        CHECK(g0.g(x) == doctest::Approx(-x + x * x * x).epsilon(1e-15));
        CHECK(g0.g_prime(x) == doctest::Approx(-1 + 3 * x * x).epsilon(1e-15));
        CHECK(g4.g(x) == doctest::Approx(-x + x * x * x + x * x * x * x).epsilon(1e-14));
        CHECK(g4.g_prime(x) == doctest::Approx(-1 + 3 * x * x + 4 * x * x * x).epsilon(1e-14));
        CHECK(g0.u0(x) == g0.g(x));
    }
    CHECK(g4.leading_remainder() == 1.0);
    CHECK(g0.leading_remainder() == 0.0);
}

TEST_CASE("finite profile rejects low-degree remainders")
{
    CHECK_THROWS_AS(Profile::finite(2, {{3, 1.0}}), DomainError);
    CHECK_THROWS_AS(Profile::finite(2, {{5, 1.0}}), DomainError);
    CHECK_NOTHROW(Profile::finite(2, {{6, 1.0}}));
    CHECK_THROWS_AS(Profile::finite(0), DomainError);
}

TEST_CASE("infinite profile")
{
    CHECK_THROWS_AS(Profile::infinite(0.0), DomainError);
    CHECK_THROWS_AS(Profile::infinite(-1.0), DomainError);

    const auto odd = Profile::infinite(1.0);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(-0.75, 0.75);
    for (int i = 0; i < 500; ++i) {
        const double x = U(rng);
        CHECK(odd.g(-x) == -odd.g(x));
    }

    const auto p2 = Profile::infinite(2.0);
    CHECK(p2.g(0.0) == 0.0);
    CHECK(p2.g_prime(0.0) == -1.0);
    CHECK(p2.g(1e-3) == -1e-3); // exponential part is below exp(-700)

    const auto quad = Profile::infinite(1.0, Remainder0::Quadratic);
    for (int i = 0; i < 200; ++i) {
        const double x = U(rng);
        if (x == 0.0) continue;
        const double ref = -x + std::exp(-1.0 / std::abs(x)) * (x + x * x);
        CHECK(quad.g(x) == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("slope stays above -1 away from the centre inside the locality radius")
{
    const Profile profiles[] = {Profile::finite(1, {{4, 1.0}}),
                                Profile::finite(2, {{6, 0.5}}),
                                Profile::infinite(1.0, Remainder0::Quadratic),
                                Profile::infinite(2.0, Remainder0::Quadratic),
                                Profile::infinite(3.0, Remainder0::Quadratic),
                                Profile::infinite(2.0)};
    for (const auto& pr : profiles) {
        for (int i = 1; i <= 1000; ++i) {
            const double w = 0.7 * i / 1000.0;
            CHECK(pr.slope_excess(w) >= 0.0);
            CHECK(pr.slope_excess(-w) >= 0.0);
        }
    }
}

TEST_CASE("derivatives agree with difference quotients")
{
    const Profile profiles[] = {Profile::finite(1, {{4, 1.0}}), Profile::finite(3, {{8, -0.5}, {9, 2.0}}),
                                Profile::infinite(1.0, Remainder0::Quadratic), Profile::infinite(2.0)};
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.05, 0.7);
    for (const auto& pr : profiles) {
        for (int i = 0; i < 100; ++i) {
            const double w = (i % 2 ? -1 : 1) * U(rng);
            const double h = 1e-5;
            const double fd = (pr.lift(w + h) - pr.lift(w - h)) / (2 * h);
            CHECK(pr.slope_excess(w) == doctest::Approx(fd).epsilon(1e-7));
            const double pd = (pr.potential_local(w + h) - pr.potential_local(w - h)) / (2 * h);
            CHECK(near(pd, pr.speed_local(w), 1e-7, 1e-9));
            if (pr.slope_excess(w) > 0.0)
                CHECK(pr.log_slope_excess(w) == doctest::Approx(std::log(pr.slope_excess(w))).epsilon(1e-12));
        }
    }
}

TEST_CASE("infinite-family potential matches composite Simpson")
{
    for (const auto& pr : {Profile::infinite(1.0, Remainder0::Quadratic), Profile::infinite(2.0),
                           Profile::infinite(0.5, Remainder0::Quadratic)}) {
        for (double w : {-0.7, -0.3, -0.05, 0.02, 0.2, 0.75}) {
            const int n = 20000;
            const double h = w / n;
            double acc = pr.speed_local(0.0) + pr.speed_local(w);
            for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * pr.speed_local(i * h);
            CHECK(near(pr.potential_local(w), acc * h / 3.0, 1e-12, 1e-16));
        }
    }
}

TEST_CASE("scaled kernels reproduce the physical ones")
{
    const Profile profiles[] = {Profile::finite(1, {{4, 1.0}}), Profile::finite(2, {{6, 3.0}}),
                                Profile::infinite(1.0, Remainder0::Quadratic), Profile::infinite(2.0)};
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> L(0.05, 0.3), M(-2.0, 2.0);
    for (const auto& pr : profiles) {
        for (int i = 0; i < 200; ++i) {
            const double l = L(rng), mu = M(rng);
            const double T = pr.time_scale(l);
            REQUIRE(T > 0.0);
            CHECK(near(pr.scaled_lift(l, mu) * l * T, pr.lift(l * mu), 1e-11, 1e-290));
            CHECK(near(pr.scaled_excess(l, mu) * T, pr.slope_excess(l * mu), 1e-11, 1e-290));
        }
    }
}

TEST_CASE("scaled kernels stay finite when the time scale underflows")
{
    const auto pr = Profile::infinite(2.0);
    const double l = 0.01; // T = exp(-10000)
    CHECK(pr.time_scale(l) == 0.0);
    CHECK(pr.log_time_scale(l) == doctest::Approx(-1e4));
    // At mu = 1 the exponential factor is exactly 1.
    CHECK(pr.scaled_lift(l, 1.0) == doctest::Approx(0.5));
    CHECK(pr.scaled_excess(l, 1.0) == doctest::Approx(1e4 + 0.5));
}

TEST_CASE("locate_blowup")
{
    auto b = locate_blowup(Profile::finite(1));
    CHECK(near(b.x_min, 0.0, 0.0, 1e-12));
    CHECK(b.t_star == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(near(b.x_star, 0.0, 0.0, 1e-12));
    CHECK(b.g_min == doctest::Approx(-1.0).epsilon(1e-14));

    b = locate_blowup(Profile::infinite(1.0));
    CHECK(std::abs(b.x_min) < 1e-12);
    CHECK(b.t_star == 1.0);
    CHECK(b.g_min == -1.0);

    b = locate_blowup(Profile::finite(1, {}, 0.5));
    CHECK(b.x_min == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b.t_star == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.x_star == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b.g_min == doctest::Approx(-1.0).epsilon(1e-14));

    for (const auto& pr : {Profile::finite(1, {{4, 1.0}}), Profile::finite(3), Profile::infinite(2.0, Remainder0::Quadratic)}) {
        b = locate_blowup(pr);
        CHECK(b.t_star * (-pr.g_prime(b.x_min)) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(b.x_star == doctest::Approx(b.x_min + b.t_star * pr.g(b.x_min)).epsilon(1e-14));
    }
}

TEST_CASE("chord speed")
{
    const auto pr = Profile::finite(1);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(near(chord_speed(pr, r, -r), 0.0, 0.0, 1e-15));
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
        const double x = U(rng), y = U(rng);
        CHECK(chord_speed(pr, x, x) == doctest::Approx(pr.g(x)).epsilon(1e-15));
        CHECK(chord_speed(pr, x, y) == doctest::Approx(0.5 * (pr.u0(x) + pr.u0(y))).epsilon(1e-14));
        // Near-coincident states go through the quadrature path.
        CHECK(chord_speed(pr, x, x + 1e-12) == doctest::Approx(pr.g(x)).epsilon(1e-10));
    }
    // a(x,y) + (x+y)/2 = O(x^2 + y^2) near the origin.
    const auto p4 = Profile::finite(1, {{4, 1.0}});
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double sc = std::pow(10.0, -1.0 - 3.0 * (i / 200.0));
        const double x = sc * U(rng), y = sc * U(rng);
        const double q = x * x + y * y;
        if (q == 0.0) continue;
        worst = std::max(worst, std::abs(chord_speed(p4, x, y) + 0.5 * (x + y)) / q);
    }
    CHECK(worst < 1.0);
}

TEST_CASE("profile text")
{
    const auto spec = parse_profile_spec("family = finite\n# comment\nk=2\nr=\"6:1.5, 7:-2\"\ncenter=0.25\n");
    CHECK(spec.family == Family::Finite);
    CHECK(spec.k == 2);
    REQUIRE(spec.r.size() == 2);
    CHECK(spec.r[0].degree == 6);
    CHECK(spec.r[1].coef == -2.0);
    CHECK(spec.center == 0.25);
    const auto inf = parse_profile_spec("family=infinite\np=2\nr0=quadratic\n");
    CHECK(inf.family == Family::Infinite);
    CHECK(inf.p == 2.0);
    CHECK(inf.r0 == Remainder0::Quadratic);
    CHECK_THROWS_AS(parse_profile_spec("family=weird"), DomainError);
    CHECK_THROWS_AS(parse_profile_spec("colour=blue"), DomainError);
    CHECK_THROWS_AS(parse_monomials("4-1"), DomainError);
    CHECK(num::format_double(0.1) == "0.1");
    CHECK(num::format_double(-0.0) == "0");
    CHECK(num::format_double(1.0 / 3.0) == "0.3333333333333333");
}
