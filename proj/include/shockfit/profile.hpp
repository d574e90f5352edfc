#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace shockfit {

enum class Family { Finite, Infinite };

// Extra term r0 of the infinitely degenerate family: 0 or x^2/p.
enum class Remainder0 { Zero, Quadratic };

struct Monomial {
    int degree = 0;
    double coef = 0.0;
};

// Plain description of a profile, as read from a key=value text.
struct ProfileSpec {
    Family family = Family::Finite;
    int k = 1;
    std::vector<Monomial> r;
    double p = 1.0;
    Remainder0 r0 = Remainder0::Zero;
    double center = 0.0;
    double locality_radius = 0.75;
};

// "4:1,5:-0.5" -> {{4,1},{5,-0.5}}. Empty text gives an empty list.
std::vector<Monomial> parse_monomials(std::string_view text);
std::string format_monomials(const std::vector<Monomial>& r);

// key=value lines; '#' starts a comment. Recognised keys: family, k, r, p,
// r0, center, locality. Unknown keys are rejected.
ProfileSpec parse_profile_spec(std::string_view text);

// Burgers flux f(u) = u^2/2. Only the chord speed is used by the solver.
struct Flux {
    double value(double u) const { return 0.5 * u * u; }
    double speed(double u) const { return u; }
    // (f(a)-f(b))/(a-b), with f'(a) in the coincident limit.
    double chord(double a, double b) const;
};

// Initial profile u0 = g with g(x) = -(x-c) + h(x-c), where h is the
// degenerate part x^(2k+1) + r(x) or exp(-|x|^-p)(x/p + r0(x)).
// Quantities named *_local take the centred variable w = x - c and are
// evaluated without cancellation: lift(w) = g(c+w) + w and
// slope_excess(w) = g'(c+w) + 1.
class Profile {
public:
    explicit Profile(const ProfileSpec& spec);
    static Profile finite(int k, std::vector<Monomial> r = {}, double center = 0.0);
    static Profile infinite(double p, Remainder0 r0 = Remainder0::Zero, double center = 0.0);

    const ProfileSpec& spec() const { return spec_; }
    Family family() const { return spec_.family; }
    int k() const { return spec_.k; }
    double p() const { return spec_.p; }
    double center() const { return spec_.center; }
    double locality_radius() const { return spec_.locality_radius; }
    const Flux& flux() const { return flux_; }
    std::string describe() const;

    // Blow-up data of the normalised family: t* = 1 at x* = c.
    double t_star() const { return 1.0; }
    double x_star() const { return spec_.center; }

    double g(double x) const { return speed_local(x - spec_.center); }
    double g_prime(double x) const { return slope_excess(x - spec_.center) - 1.0; }
    double u0(double x) const { return g(x); }
    double u0_prime(double x) const { return g_prime(x); }

    double lift(double w) const;
    double speed_local(double w) const { return -w + lift(w); }
    double slope_excess(double w) const;
    // log(g'(c+w) + 1); -inf where the excess vanishes exactly.
    double log_slope_excess(double w) const;
    // Antiderivative of speed_local from 0.
    double potential_local(double w) const;

    // Coefficient of w^(2k+2) in r (finite family), i.e. g^(2k+2)(0)/(2k+2)!.
    double leading_remainder() const;

    // Scaled kernels for y = c + l*mu with time scale T(l):
    // T = l^(2k) (finite) or exp(-l^-p) (infinite).
    //   scaled_lift   = lift(l*mu) / (l*T)
    //   scaled_excess = slope_excess(l*mu) / T
    // Both are computed without forming T, so they stay finite when T
    // underflows.
    double time_scale(double l) const;
    double log_time_scale(double l) const;
    double scaled_lift(double l, double mu) const;
    double scaled_excess(double l, double mu) const;

private:
    double exp_factor(double l, double mu) const; // exp(l^-p (1-|mu|^-p))
    double r0(double w) const;
    double r0_prime(double w) const;
    // |w|^-p (1 + p r0(w)/w) + 1/p + r0'(w)
    double infinite_bracket(double w) const;

    ProfileSpec spec_;
    Flux flux_;
};

struct BlowupData {
    double t_star = 0.0;
    double x_star = 0.0;
    double x_min = 0.0;
    double g_min = 0.0;
};

// Minimises g' over [center - half_width, center + half_width] and returns the
// first blow-up point. Throws DomainError if the minimiser sits on the
// interval boundary or g' has no negative minimum.
BlowupData locate_blowup(const Profile& profile, double half_width = 0.5);

// Burgers chord speed between the initial states at x and y.
double chord_speed(const Profile& profile, double x, double y);

} // namespace shockfit
