#include "shockfit/asymptotics.hpp"
#include "shockfit/characteristics.hpp"
#include "shockfit/numerics.hpp"
#include "shockfit/oracle.hpp"
#include "shockfit/profile.hpp"
#include "shockfit/shock.hpp"

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace shockfit;

namespace {

// Pinned tolerances.
namespace tol {
constexpr double envelope_exponent = 0.02;     // relative
constexpr double envelope_eta_coef = 0.01;     // relative
constexpr double envelope_x_coef = 0.02;       // relative
constexpr double second_order = 0.10;          // relative
constexpr double shock_exponent = 0.05;        // relative
constexpr double shock_coefficient = 0.10;     // relative
constexpr double rh = 1e-8;                    // times (1 + |[f(u)]|)
constexpr double entropy_tau = 1e-6;           // margin > 0 from here on
constexpr double oracle = 1e-5;                // absolute
constexpr double symmetry_phi = 1e-12;         // absolute
constexpr double symmetry_y = 1e-10;           // absolute
constexpr double refinement = 0.20;            // relative change of the bound
constexpr double branch_deviation = 0.10;      // relative, smallest scale
constexpr double branch_order = 0.10;          // below the stated order
constexpr double window_monotone = 1e-9;       // absolute
constexpr int bound_samples = 10000;
constexpr double weak_form = 1e-6;             // absolute
constexpr double derivative = 1e-6;            // relative
constexpr int derivative_points = 1000;
} // namespace tol

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        detail << "  " << (ok ? "ok   " : "FAIL ") << what << "\n";
    }
};

std::string fmt(double v) { return num::format_double(v); }

bool near_rel(double v, double target, double rel) { return std::abs(v - target) <= rel * std::abs(target); }

std::vector<Profile> standard_profiles()
{
    return {Profile::finite(1),
            Profile::finite(2),
            Profile::finite(3),
            Profile::finite(1, {{4, 1.0}}),
            Profile::finite(2, {{6, 1.0}}),
            Profile::finite(3, {{8, 1.0}}),
            Profile::infinite(1.0),
            Profile::infinite(2.0),
            Profile::infinite(1.0, Remainder0::Quadratic),
            Profile::infinite(2.0, Remainder0::Quadratic)};
}

std::string value_of(const Report& rep, const std::string& name, double& out)
{
    const auto& c = rep.at(name);
    out = c.value.value_or(NAN);
    return fmt(out);
}

void envelope_exponents(Outcome& o)
{
    for (int k = 1; k <= 3; ++k) {
        const auto rep = verify_envelope(Profile::finite(k), {1e-6, 1e-2, 40});
        const double kk = 2.0 * k;
        const double a1 = std::pow(kk + 1.0, -1.0 / kk), b1 = kk * std::pow(kk + 1.0, -(kk + 1.0) / kk);
        const std::string tag = "k=" + std::to_string(k) + " ";
        double v = 0.0;
        for (const char* side : {"eta_plus", "eta_minus"}) {
            const std::string s = side;
            auto txt = value_of(rep, s + " exponent", v);
            o.check(near_rel(v, 1.0 / kk, tol::envelope_exponent), tag + s + " exponent " + txt + " vs " + fmt(1.0 / kk));
            txt = value_of(rep, s + " coefficient", v);
            o.check(near_rel(std::abs(v), a1, tol::envelope_eta_coef), tag + s + " |coefficient| " + txt + " vs " + fmt(a1));
        }
        for (const char* side : {"x_plus", "x_minus"}) {
            const std::string s = side;
            auto txt = value_of(rep, s + " exponent", v);
            o.check(near_rel(v, (kk + 1.0) / kk, tol::envelope_exponent),
                    tag + s + " exponent " + txt + " vs " + fmt((kk + 1.0) / kk));
            txt = value_of(rep, s + " coefficient", v);
            o.check(near_rel(std::abs(v), b1, tol::envelope_x_coef), tag + s + " |coefficient| " + txt + " vs " + fmt(b1));
        }
    }
}

void second_order_envelope(Outcome& o)
{
    // g = -x + x^3 + x^4: g''''(0) = 24, coefficient -g''''(0) 3^-3 / (2 * 2!).
    const double target = -24.0 * std::pow(3.0, -3.0) / (2.0 * 2.0);
    const auto rep = verify_envelope(Profile::finite(1, {{4, 1.0}}), {1e-6, 1e-2, 40});
    double v = 0.0;
    for (const char* side : {"eta_plus", "eta_minus"}) {
        const std::string s = side;
        const auto txt = value_of(rep, s + " second-order coefficient", v);
        o.check(near_rel(v, target, tol::second_order), s + " second-order coefficient " + txt + " vs " + fmt(target));
    }
}

void shock_regularity(Outcome& o)
{
    for (int k = 1; k <= 3; ++k) {
        const auto pr = Profile::finite(k, {{2 * k + 2, 1.0}});
        const auto curve = integrate_shock(pr);
        const double q = (k + 1.0) / k;
        const double hi = std::min(1e-2, curve.tau_max());
        std::vector<Sample> pts, scaled;
        for (double tau : log_space(1e-6, hi, 40)) {
            const double phi = curve.phi_at_tau(tau) - pr.center();
            pts.push_back({tau, phi});
            scaled.push_back({std::pow(tau, 1.0 / (2 * k)), phi / std::pow(tau, q)});
        }
        const auto f = fit_power(pts);
        const std::string tag = "k=" + std::to_string(k) + " ";
        o.check(near_rel(f.exponent, q, tol::shock_exponent), tag + "|phi| exponent " + fmt(f.exponent) + " vs " + fmt(q));
        if (k == 1) {
            const double c = fit_line(scaled).intercept;
            o.check(near_rel(c, -1.0 / k, tol::shock_coefficient), tag + "phi coefficient " + fmt(c) + " vs " + fmt(-1.0 / k));
        }
    }
}

void rankine_hugoniot_entropy(Outcome& o)
{
    for (const auto& pr : standard_profiles()) {
        const auto curve = integrate_shock(pr);
        double rh = 0.0, margin = INFINITY;
        int bad_rh = 0, bad_margin = 0;
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double jump = std::abs(pr.flux().value(curve.u_left[i]) - pr.flux().value(curve.u_right[i]));
            const double r = curve.rh_residual[i] / (1.0 + jump);
            rh = std::max(rh, r);
            if (!(curve.rh_residual[i] <= tol::rh * (1.0 + jump))) ++bad_rh;
            if (curve.tau[i] >= tol::entropy_tau) {
                margin = std::min(margin, curve.entropy_margin[i]);
                if (!(curve.entropy_margin[i] > 0.0)) ++bad_margin;
            }
        }
        o.check(bad_rh == 0, pr.describe() + ": max rh/(1+|[f]|) " + fmt(rh) + ", " + std::to_string(curve.size()) + " nodes");
        o.check(bad_margin == 0, pr.describe() + ": min entropy margin " + fmt(margin));
    }
}

void oracle_equivalence(Outcome& o)
{
    for (int k = 1; k <= 2; ++k) {
        const auto pr = Profile::finite(k, {{2 * k + 2, 1.0}});
        const auto curve = integrate_shock(pr);
        const auto rows = oracle_comparison(pr, curve, 1e-3, 0.1, 25);
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, r.abs_diff);
        o.check(worst <= tol::oracle, pr.describe() + ": sup |phi_ode - phi_lo| " + fmt(worst) + " over t - 1 in [1e-3, " +
                                          fmt(rows.back().tau) + "]");
    }
}

void symmetry(Outcome& o)
{
    for (const auto& pr : {Profile::finite(1), Profile::finite(2), Profile::finite(3), Profile::infinite(1.0),
                           Profile::infinite(2.0)}) {
        const auto curve = integrate_shock(pr);
        double dphi = 0.0, dy = 0.0;
        for (std::size_t i = 0; i < curve.size(); ++i) {
            dphi = std::max(dphi, std::abs(curve.phi[i] - pr.center()));
            dy = std::max(dy, std::abs(curve.y_plus[i] + curve.y_minus[i] - 2.0 * pr.center()));
        }
        o.check(dphi <= tol::symmetry_phi, pr.describe() + ": max |phi| " + fmt(dphi));
        o.check(dy <= tol::symmetry_y, pr.describe() + ": max |y+ + y-| " + fmt(dy));
    }
}

void infinite_boundedness(Outcome& o)
{
    for (double p : {1.0, 2.0}) {
        const auto pr = Profile::infinite(p, Remainder0::Quadratic);
        PicardOptions coarse, fine;
        fine.n_steps = 2 * coarse.n_steps;
        const auto a = integrate_shock(pr, coarse), b = integrate_shock(pr, fine);
        auto bounds = [&](const ShockCurve& c) {
            double lam = 0.0, phi = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                lam = std::max(lam, std::abs(c.lambda[i]) / c.s[i]);
                if (c.tau[i] > 0.0) phi = std::max(phi, std::abs(c.phi[i] - c.center) / (c.s[i] * c.s[i] * c.tau[i]));
            }
            return std::array<double, 2>{lam, phi};
        };
        const auto ba = bounds(a), bb = bounds(b);
        const std::string tag = pr.describe() + ": ";
        o.check(std::isfinite(ba[0]) && near_rel(bb[0], ba[0], tol::refinement),
                tag + "max |lambda|/s " + fmt(ba[0]) + " -> " + fmt(bb[0]) + " under 2x refinement");
        o.check(std::isfinite(ba[1]) && near_rel(bb[1], ba[1], tol::refinement),
                tag + "max |phi|/(s^2 tau) " + fmt(ba[1]) + " -> " + fmt(bb[1]) + " under 2x refinement");
        std::vector<Sample> pts;
        const double lo = std::max(1e-8, a.tau_min()), hi = std::min(1e-3, a.tau_max());
        for (double tau : log_space(lo, hi, 40)) pts.push_back({tau, (a.phi_at_tau(tau) - a.center) / tau});
        const auto f = fit_log_power(pts);
        o.detail << "  info " << tag << "|phi|/tau log exponent " << fmt(f.exponent) << " (2/p = " << fmt(2.0 / p)
                 << ", 1+2/p = " << fmt(1.0 + 2.0 / p) << ")\n";
    }
}

void branch_expansions(Outcome& o)
{
    for (const auto& pr : standard_profiles()) {
        const auto rep = verify_branches(pr);
        for (const auto& c : rep.checks) {
            bool ok = c.pass;
            if (c.comparison == Comparison::AtMost)
                ok = c.value && *c.value <= tol::branch_deviation;
            else if (c.comparison == Comparison::AtLeast)
                ok = c.value && *c.value >= c.target - tol::branch_order;
            const std::string v = c.value ? fmt(*c.value) : std::string("n/a");
            o.check(ok, pr.describe() + ": " + c.name + " " + v + (c.note.empty() ? "" : " (" + c.note + ")"));
        }
    }
}

void field_bounds(Outcome& o)
{
    for (const auto& pr : standard_profiles()) {
        const auto curve = integrate_shock(pr);
        BoundOptions opt;
        opt.samples = tol::bound_samples;
        const auto b = verify_field_bounds(pr, curve, opt);
        for (const auto& r : b) {
            const bool finite = std::isfinite(r.max_ratio) && std::isfinite(r.min_ratio);
            const bool floor_ok = !r.floor_bound || r.min_ratio > 0.0;
            o.check(finite && floor_ok && r.samples > 0,
                    pr.describe() + ": " + r.quantity + " (tau <= " + fmt(r.window_hi) + ") ratio in [" +
                        fmt(r.min_ratio) + ", " + fmt(r.max_ratio) + "], " + std::to_string(r.samples) + " samples");
        }
        for (const auto& s : b)
            for (const auto& l : b) {
                if (s.quantity != l.quantity || !(s.window_hi < l.window_hi)) continue;
                const bool ok = s.floor_bound ? s.min_ratio >= l.min_ratio - tol::window_monotone
                                              : s.max_ratio <= l.max_ratio + tol::window_monotone;
                o.check(ok, pr.describe() + ": " + s.quantity + " monotone under window shrinkage");
            }
    }
}

void weak_form(Outcome& o)
{
    struct Case {
        Profile profile;
        double t1, t2, xl, xr;
    };
    const std::vector<Case> cases = {{Profile::finite(1), 0.9, 1.2, -0.3, 0.3},
                                     {Profile::finite(1, {{4, 1.0}}), 0.9, 1.1, -0.03, 0.03},
                                     {Profile::infinite(1.0, Remainder0::Quadratic), 0.9, 1.04, -0.02, 0.02}};
    for (const auto& c : cases) {
        const auto curve = integrate_shock(c.profile);
        const double r = weak_form_residual(c.profile, curve, c.t1, c.t2, c.xl, c.xr);
        o.check(std::abs(r) <= tol::weak_form, c.profile.describe() + ": flux balance on [" + fmt(c.t1) + ", " +
                                                   fmt(c.t2) + "] x [" + fmt(c.xl) + ", " + fmt(c.xr) + "] residual " +
                                                   fmt(r));
    }
}

void derivatives(Outcome& o)
{
    for (const auto& pr : standard_profiles()) {
        DerivativeOptions opt;
        opt.points = tol::derivative_points;
        const auto r = check_field_derivatives(pr, opt);
        o.check(r.points == tol::derivative_points && r.max_rel_dt <= tol::derivative && r.max_rel_dx <= tol::derivative,
                pr.describe() + ": " + std::to_string(r.points) + " points, max rel error u_t " + fmt(r.max_rel_dt) +
                    ", u_x " + fmt(r.max_rel_dx));
    }
}

std::string tool_path;

std::string capture(const std::string& cmd, int& status)
{
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    status = pclose(pipe);
    return out;
}

void determinism(Outcome& o)
{
    if (tool_path.empty()) {
        o.check(false, "no --tool path given");
        return;
    }
    const std::vector<std::string> runs = {
        "verify --family finite --k 1 --r 4:1 --lemma all",
        "verify --family infinite --p 1 --r0 quadratic --lemma envelope --lemma shock --lemma bounds",
        "--format csv shock --family finite --k 2 --r 6:1",
        "--format json sample-field --family finite --k 1 --r 4:1",
    };
    for (const auto& args : runs) {
        const std::string cmd = "'" + tool_path + "' " + args + " 2>/dev/null";
        int s1 = 0, s2 = 0;
        const auto a = capture(cmd, s1);
        const auto b = capture(cmd, s2);
        o.check(!a.empty() && a == b && s1 == s2,
                "shockfit " + args + ": " + std::to_string(a.size()) + " bytes, identical " + (a == b ? "yes" : "no"));
    }
}

struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria()
{
    static const std::vector<Criterion> list = {
        {"envelope exponents and coefficients", envelope_exponents},
        {"second-order envelope coefficient", second_order_envelope},
        {"shock regularity exponent and coefficient", shock_regularity},
        {"Rankine-Hugoniot and entropy along the curves", rankine_hugoniot_entropy},
        {"oracle equivalence", oracle_equivalence},
        {"symmetry of odd profiles", symmetry},
        {"infinite-case boundedness under refinement", infinite_boundedness},
        {"branch expansions", branch_expansions},
        {"field bounds", field_bounds},
        {"weak-solution conservation", weak_form},
        {"derivative consistency", derivatives},
        {"determinism of repeated runs", determinism},
    };
    return list;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria for shockfit", "acceptance"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "criterion numbers to run (default: all)")
        ->check(CLI::Range(1, static_cast<int>(criteria().size())));
    app.add_option("--tool", tool_path, "path of the shockfit binary (criterion 12)");
    CLI11_PARSE(app, argc, argv);
    if (selected.empty())
        for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) selected.push_back(i);

    bool all = true;
    for (int id : selected) {
        const auto& c = criteria()[id - 1];
        Outcome o;
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::cerr << o.detail.str();
        std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << c.name << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
