#include "shockfit/profile.hpp"

#include "shockfit/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace shockfit {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_real(std::string_view s, const char* what)
{
    s = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DomainError(std::string("cannot parse ") + what + ": '" + std::string(s) + "'");
    return v;
}

int parse_int(std::string_view s, const char* what)
{
    s = trim(s);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DomainError(std::string("cannot parse ") + what + ": '" + std::string(s) + "'");
    return v;
}

double ipow(double x, int n)
{
    double r = 1.0;
    double b = x;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

} // namespace

std::vector<Monomial> parse_monomials(std::string_view text)
{
    std::vector<Monomial> out;
    text = trim(text);
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string_view::npos)
            throw DomainError("monomial must be written degree:coef, got '" + std::string(item) + "'");
        out.push_back({parse_int(item.substr(0, colon), "degree"), parse_real(item.substr(colon + 1), "coefficient")});
    }
    return out;
}

std::string format_monomials(const std::vector<Monomial>& r)
{
    std::string s;
    for (const auto& m : r) {
        if (!s.empty()) s += ',';
        s += std::to_string(m.degree) + ':' + num::format_double(m.coef);
    }
    return s;
}

ProfileSpec parse_profile_spec(std::string_view text)
{
    ProfileSpec spec;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::string_view l = line;
        if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos) throw DomainError("expected key=value, got '" + std::string(l) + "'");
        const auto key = trim(l.substr(0, eq));
        auto value = trim(l.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key == "family") {
            if (value == "finite")
                spec.family = Family::Finite;
            else if (value == "infinite")
                spec.family = Family::Infinite;
            else
                throw DomainError("family must be finite or infinite");
        } else if (key == "k") {
            spec.k = parse_int(value, "k");
        } else if (key == "r") {
            spec.r = parse_monomials(value);
        } else if (key == "p") {
            spec.p = parse_real(value, "p");
        } else if (key == "r0") {
            if (value == "zero")
                spec.r0 = Remainder0::Zero;
            else if (value == "quadratic")
                spec.r0 = Remainder0::Quadratic;
            else
                throw DomainError("r0 must be zero or quadratic");
        } else if (key == "center") {
            spec.center = parse_real(value, "center");
        } else if (key == "locality") {
            spec.locality_radius = parse_real(value, "locality");
        } else {
            throw DomainError("unknown profile key '" + std::string(key) + "'");
        }
    }
    return spec;
}

double Flux::chord(double a, double b) const
{
    const double du = a - b;
    if (std::abs(du) >= 1e-9) return (value(a) - value(b)) / du;
    // Mean of f' over the segment; exact for the quadratic flux.
    auto fp = [&](double th) { return speed(th * a + (1.0 - th) * b); };
    return boost::math::quadrature::gauss<double, 16>::integrate(fp, 0.0, 1.0);
}

Profile::Profile(const ProfileSpec& spec) : spec_(spec)
{
    if (!(spec_.locality_radius > 0.0)) throw DomainError("locality radius must be positive");
    if (!std::isfinite(spec_.center)) throw DomainError("center must be finite");
    if (spec_.family == Family::Finite) {
        if (spec_.k < 1) throw DomainError("k must be >= 1");
        for (const auto& m : spec_.r) {
            if (m.degree < 2 * spec_.k + 2)
                throw DomainError("monomial x^" + std::to_string(m.degree) + " has degree below 2k+2 = " +
                                  std::to_string(2 * spec_.k + 2));
            if (!std::isfinite(m.coef)) throw DomainError("non-finite coefficient");
        }
        // Merge equal degrees and drop zeros so the polynomial is canonical.
        std::vector<Monomial> merged;
        auto r = spec_.r;
        std::sort(r.begin(), r.end(), [](const Monomial& a, const Monomial& b) { return a.degree < b.degree; });
        for (const auto& m : r) {
            if (!merged.empty() && merged.back().degree == m.degree)
                merged.back().coef += m.coef;
            else
                merged.push_back(m);
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Monomial& m) { return m.coef == 0.0; }),
                     merged.end());
        spec_.r = merged;
    } else {
        if (!(spec_.p > 0.0) || !std::isfinite(spec_.p)) throw DomainError("p must be positive");
    }
}

Profile Profile::finite(int k, std::vector<Monomial> r, double center)
{
    ProfileSpec s;
    s.family = Family::Finite;
    s.k = k;
    s.r = std::move(r);
    s.center = center;
    return Profile(s);
}

Profile Profile::infinite(double p, Remainder0 r0, double center)
{
    ProfileSpec s;
    s.family = Family::Infinite;
    s.p = p;
    s.r0 = r0;
    s.center = center;
    return Profile(s);
}

std::string Profile::describe() const
{
    std::string s;
    if (spec_.family == Family::Finite) {
        s = "finite k=" + std::to_string(spec_.k);
        s += " r=" + (spec_.r.empty() ? std::string("0") : format_monomials(spec_.r));
    } else {
        s = "infinite p=" + num::format_double(spec_.p);
        s += spec_.r0 == Remainder0::Zero ? " r0=zero" : " r0=quadratic";
    }
    if (spec_.center != 0.0) s += " center=" + num::format_double(spec_.center);
    return s;
}

double Profile::r0(double w) const { return spec_.r0 == Remainder0::Quadratic ? w * w / spec_.p : 0.0; }

double Profile::r0_prime(double w) const { return spec_.r0 == Remainder0::Quadratic ? 2.0 * w / spec_.p : 0.0; }

double Profile::infinite_bracket(double w) const
{
    const double p = spec_.p;
    const double aw = std::abs(w);
    return std::pow(aw, -p) * (1.0 + p * r0(w) / w) + 1.0 / p + r0_prime(w);
}

double Profile::lift(double w) const
{
    if (spec_.family == Family::Finite) {
        double v = ipow(w, 2 * spec_.k + 1);
        for (const auto& m : spec_.r) v += m.coef * ipow(w, m.degree);
        return v;
    }
    if (w == 0.0) return 0.0;
    const double e = num::clamped_exp(-std::pow(std::abs(w), -spec_.p));
    if (e == 0.0) return 0.0;
    return e * (w / spec_.p + r0(w));
}

double Profile::slope_excess(double w) const
{
    if (spec_.family == Family::Finite) {
        const int n = 2 * spec_.k + 1;
        double v = n * ipow(w, n - 1);
        for (const auto& m : spec_.r) v += m.coef * m.degree * ipow(w, m.degree - 1);
        return v;
    }
    if (w == 0.0) return 0.0;
    const double e = num::clamped_exp(-std::pow(std::abs(w), -spec_.p));
    if (e == 0.0) return 0.0;
    return e * infinite_bracket(w);
}

double Profile::log_slope_excess(double w) const
{
    if (spec_.family == Family::Finite) {
        const double v = slope_excess(w);
        if (v > 0.0 || w == 0.0) return std::log(v);
        // Underflow of w^(2k): use the leading term, which dominates r'.
        return std::log(2.0 * spec_.k + 1.0) + 2.0 * spec_.k * std::log(std::abs(w));
    }
    if (w == 0.0) return -std::numeric_limits<double>::infinity();
    const double b = infinite_bracket(w);
    if (!(b > 0.0)) return std::log(slope_excess(w));
    return -std::pow(std::abs(w), -spec_.p) + std::log(b);
}

double Profile::potential_local(double w) const
{
    if (spec_.family == Family::Finite) {
        const int n = 2 * spec_.k + 1;
        double v = -0.5 * w * w + ipow(w, n + 1) / (n + 1);
        for (const auto& m : spec_.r) v += m.coef * ipow(w, m.degree + 1) / (m.degree + 1);
        return v;
    }
    if (w == 0.0) return 0.0;
    // int_0^w lift dv in the variable z = |v|^-p, which removes the flat
    // exp(-|v|^-p) layer: sign * exp(-Z) int_0^inf exp(-u) H(Z + u) du.
    const double p = spec_.p;
    const double sg = w > 0.0 ? 1.0 : -1.0;
    const double Z = std::pow(std::abs(w), -p);
    if (Z > 745.0) return -0.5 * w * w;
    auto H = [&](double z) {
        const double v = sg * std::pow(z, -1.0 / p);
        return (v / p + r0(v)) * std::pow(z, -1.0 / p - 1.0) / p;
    };
    static thread_local boost::math::quadrature::exp_sinh<double> quad;
    const double tail = quad.integrate([&](double u) { return std::exp(-u) * H(Z + u); }, 1e-15);
    return -0.5 * w * w + sg * std::exp(-Z) * tail;
}

double Profile::leading_remainder() const
{
    if (spec_.family != Family::Finite) return 0.0;
    for (const auto& m : spec_.r)
        if (m.degree == 2 * spec_.k + 2) return m.coef;
    return 0.0;
}

double Profile::time_scale(double l) const
{
    if (spec_.family == Family::Finite) return ipow(l, 2 * spec_.k);
    return num::clamped_exp(-std::pow(l, -spec_.p));
}

double Profile::log_time_scale(double l) const
{
    if (spec_.family == Family::Finite) return 2.0 * spec_.k * std::log(l);
    return -std::pow(l, -spec_.p);
}

double Profile::exp_factor(double l, double mu) const
{
    if (mu == 0.0) return 0.0;
    const double p = spec_.p;
    // l^-p (1 - |mu|^-p) evaluated without cancellation near |mu| = 1.
    const double e = -std::pow(l, -p) * std::expm1(-p * std::log(std::abs(mu)));
    return num::clamped_exp(e);
}

double Profile::scaled_lift(double l, double mu) const
{
    if (spec_.family == Family::Finite) {
        const int n = 2 * spec_.k + 1;
        double v = ipow(mu, n);
        for (const auto& m : spec_.r) v += m.coef * ipow(l, m.degree - n) * ipow(mu, m.degree);
        return v;
    }
    const double f = exp_factor(l, mu);
    if (f == 0.0) return 0.0;
    return f * (mu / spec_.p + r0(l * mu) / l);
}

double Profile::scaled_excess(double l, double mu) const
{
    if (spec_.family == Family::Finite) {
        const int n = 2 * spec_.k + 1;
        double v = n * ipow(mu, n - 1);
        for (const auto& m : spec_.r) v += m.coef * m.degree * ipow(l, m.degree - n) * ipow(mu, m.degree - 1);
        return v;
    }
    const double f = exp_factor(l, mu);
    if (f == 0.0) return 0.0;
    return f * infinite_bracket(l * mu);
}

BlowupData locate_blowup(const Profile& profile, double half_width)
{
    if (!(half_width > 0.0)) throw DomainError("search interval must be non-empty");
    // Order points by g' + 1; where both excesses are tiny or zero the
    // log-space values keep the ordering resolvable.
    auto less = [&](double a, double b) {
        const double ea = profile.slope_excess(a);
        const double eb = profile.slope_excess(b);
        if (ea > 1e-200 || eb > 1e-200 || ea < 0.0 || eb < 0.0) return ea < eb;
        return profile.log_slope_excess(a) < profile.log_slope_excess(b);
    };
    const double w = num::golden_section(-half_width, half_width, less, 1e-15 * half_width);
    const double edge = 1e-6 * half_width;
    if (w <= -half_width + edge || w >= half_width - edge)
        throw DomainError("minimiser of g' lies on the search interval boundary");
    BlowupData b;
    b.x_min = profile.center() + w;
    b.g_min = profile.slope_excess(w) - 1.0;
    if (!(b.g_min < 0.0)) throw DomainError("no blowup: min g' >= 0 on the search interval");
    b.t_star = -1.0 / b.g_min;
    b.x_star = b.x_min + b.t_star * profile.speed_local(w);
    return b;
}

double chord_speed(const Profile& profile, double x, double y)
{
    return profile.flux().chord(profile.u0(x), profile.u0(y));
}

} // namespace shockfit
