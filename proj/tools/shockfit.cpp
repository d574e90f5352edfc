#include "shockfit/asymptotics.hpp"
#include "shockfit/characteristics.hpp"
#include "shockfit/numerics.hpp"
#include "shockfit/oracle.hpp"
#include "shockfit/profile.hpp"
#include "shockfit/shock.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

using namespace shockfit;
using json = nlohmann::ordered_json;

namespace {

// Every default of the tool. The README mirrors this table.
struct Defaults {
    // profile
    std::string family = "finite";
    int k = 1;
    std::string r = "";
    double p = 1.0;
    std::string r0 = "zero";
    double center = 0.0;
    double locality = 0.75;
    // output
    std::string format = "csv";
    std::string out = "-";
    // envelope
    double env_tau_lo = 1e-6, env_tau_hi = 1e-2;
    int env_n = 40;
    // branches and sample-field grids
    double grid_tau_lo = 1e-4, grid_tau_hi = 1e-2;
    int grid_nt = 5;
    double grid_x_half = 0.01;
    int grid_nx = 41;
    double field_t_lo = 0.99, field_t_hi = 1.01;
    // shock
    int picard_steps = 2000;
    double picard_tol = 1e-13;
    int picard_sweeps = 200;
    // oracle-compare
    double oracle_tau_lo = 1e-3, oracle_tau_hi = 0.1;
    int oracle_n = 13;
    // verify
    std::vector<std::string> lemma = {"all"};
};

constexpr int kUsageError = 2;
constexpr int kVerifyFailure = 1;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options : Defaults {
    std::string subcommand;
};

using Cell = std::variant<double, std::string, std::monostate>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string csv_cell(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return num::format_double(*d);
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return "";
}

json json_cell(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? json(*d) : json(nullptr);
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return nullptr;
}

std::string table_csv(const Table& t)
{
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
        out += "\n";
    }
    return out;
}

json table_json(const Table& t)
{
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r;
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = json_cell(row[i]);
        rows.push_back(r);
    }
    return rows;
}

Cell opt_cell(const std::optional<double>& v) { return v ? Cell(*v) : Cell(std::monostate{}); }

class Output {
public:
    explicit Output(const std::string& path) : path_(path)
    {
        if (path_ == "-") return;
        file_.open(path_, std::ios::binary | std::ios::trunc);
        if (!file_) throw UsageError("cannot write output file " + path_);
    }
    bool to_stdout() const { return path_ == "-"; }
    void write(const std::string& text)
    {
        if (to_stdout()) {
            std::cout << text;
            return;
        }
        file_ << text;
        if (!file_) throw UsageError("write failed for " + path_);
    }
    // The summary goes to stdout unless stdout carries the data.
    std::ostream& summary() { return to_stdout() ? std::cerr : std::cout; }

private:
    std::string path_;
    std::ofstream file_;
};

Profile make_profile(const Options& o)
{
    ProfileSpec spec;
    if (o.family == "finite")
        spec.family = Family::Finite;
    else if (o.family == "infinite")
        spec.family = Family::Infinite;
    else
        throw UsageError("--family must be finite or infinite");
    spec.k = o.k;
    spec.r = parse_monomials(o.r);
    spec.p = o.p;
    if (o.r0 == "zero")
        spec.r0 = Remainder0::Zero;
    else if (o.r0 == "quadratic")
        spec.r0 = Remainder0::Quadratic;
    else
        throw UsageError("--r0 must be zero or quadratic");
    spec.center = o.center;
    spec.locality_radius = o.locality;
    return Profile(spec);
}

json profile_json(const Profile& pr)
{
    json j;
    j["family"] = pr.family() == Family::Finite ? "finite" : "infinite";
    if (pr.family() == Family::Finite) {
        j["k"] = pr.k();
        j["r"] = format_monomials(pr.spec().r);
    } else {
        j["p"] = pr.p();
        j["r0"] = pr.spec().r0 == Remainder0::Zero ? "zero" : "quadratic";
    }
    j["center"] = pr.center();
    return j;
}

void emit(Output& out, const Options& o, const Table& t, json meta)
{
    if (o.format == "csv") {
        out.write(table_csv(t));
        return;
    }
    meta["rows"] = table_json(t);
    out.write(meta.dump(2) + "\n");
}

// Runs f(i) for i in [0, n) on worker threads; results keep index order.
template <class F>
auto parallel_rows(int n, F f)
{
    std::vector<std::future<decltype(f(0))>> jobs;
    for (int i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, f, i));
    std::vector<decltype(f(0))> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

int cmd_blowup(const Options& o, Output& out)
{
    const auto pr = make_profile(o);
    const auto b = locate_blowup(pr);
    if (o.format == "json") {
        json j;
        j["profile"] = profile_json(pr);
        j["t_star"] = b.t_star;
        j["x_star"] = b.x_star;
        j["x_min"] = b.x_min;
        j["g_min"] = b.g_min;
        out.write(j.dump(2) + "\n");
    } else {
        out.write("t*=" + num::format_double(b.t_star) + " x*=" + num::format_double(b.x_star) + "\n");
    }
    if (!out.to_stdout()) out.summary() << "blow-up point written to " << o.out << "\n";
    return 0;
}

int cmd_envelope(const Options& o, Output& out)
{
    const auto pr = make_profile(o);
    if (!(o.env_tau_lo > 0.0) || !(o.env_tau_hi > o.env_tau_lo)) throw UsageError("need 0 < --tau-lo < --tau-hi");
    if (o.env_n < 8) throw UsageError("--n must be at least 8");
    Table t{{"t", "eta_minus", "eta_plus", "x_plus", "x_minus"}, {}};
    const double c = pr.center();
    for (double tau : log_space(o.env_tau_lo, o.env_tau_hi, o.env_n)) {
        const double time = pr.t_star() + tau;
        const auto e = envelope_roots(pr, time);
        const auto b = cusp_boundaries(pr, time);
        t.rows.push_back({time, c + e.eta_minus, c + e.eta_plus, b.x_plus, b.x_minus});
    }
    json meta;
    meta["profile"] = profile_json(pr);
    emit(out, o, t, meta);
    out.summary() << "envelope: " << t.rows.size() << " rows\n";
    return 0;
}

std::vector<double> grid_times(const Options& o)
{
    if (!(o.grid_tau_lo > 0.0) || !(o.grid_tau_hi >= o.grid_tau_lo)) throw UsageError("need 0 < --tau-lo <= --tau-hi");
    if (o.grid_nt < 1) throw UsageError("--nt must be at least 1");
    if (o.grid_nt == 1) return {o.grid_tau_lo};
    return log_space(o.grid_tau_lo, o.grid_tau_hi, o.grid_nt);
}

std::vector<double> grid_x(const Options& o, double c)
{
    if (o.grid_nx < 2 || !(o.grid_x_half > 0.0)) throw UsageError("need --nx >= 2 and --x-half > 0");
    std::vector<double> xs;
    for (int j = 0; j < o.grid_nx; ++j) xs.push_back(c + o.grid_x_half * (2.0 * j - (o.grid_nx - 1)) / (o.grid_nx - 1));
    return xs;
}

int cmd_branches(const Options& o, Output& out)
{
    const auto pr = make_profile(o);
    const auto taus = grid_times(o);
    const auto xs = grid_x(o, pr.center());
    const auto blocks = parallel_rows(static_cast<int>(taus.size()), [&](int i) {
        std::vector<std::vector<Cell>> rows;
        const double time = pr.t_star() + taus[i];
        for (double x : xs) {
            const auto b = classify_point(pr, time, x);
            rows.push_back({time, x, std::string(to_string(b.region)), opt_cell(b.y_minus), opt_cell(b.y_zero),
                            opt_cell(b.y_plus)});
        }
        return rows;
    });
    Table t{{"t", "x", "region", "y_minus", "y_zero", "y_plus"}, {}};
    for (const auto& b : blocks) t.rows.insert(t.rows.end(), b.begin(), b.end());
    json meta;
    meta["profile"] = profile_json(pr);
    emit(out, o, t, meta);
    out.summary() << "branches: " << t.rows.size() << " points\n";
    return 0;
}

PicardOptions picard_options(const Options& o)
{
    if (o.picard_steps < 8) throw UsageError("--n-steps must be at least 8");
    if (!(o.picard_tol > 0.0)) throw UsageError("--tol must be positive");
    if (o.picard_sweeps < 1) throw UsageError("--max-sweeps must be at least 1");
    return {o.picard_steps, o.picard_tol, o.picard_sweeps};
}

int cmd_shock(const Options& o, Output& out)
{
    const auto pr = make_profile(o);
    const auto curve = integrate_shock(pr, picard_options(o));
    Table t{{"s", "t", "phi", "phi_prime", "u_left", "u_right", "rh_residual", "entropy_margin"}, {}};
    for (std::size_t i = 0; i < curve.size(); ++i)
        t.rows.push_back({curve.s[i], curve.t[i], curve.phi[i], curve.phi_prime[i], curve.u_left[i], curve.u_right[i],
                          curve.rh_residual[i], curve.entropy_margin[i]});
    json meta;
    meta["profile"] = profile_json(pr);
    meta["regime"] = curve.regime == Family::Finite ? "finite" : "infinite";
    if (curve.regime == Family::Finite)
        meta["k"] = curve.k;
    else
        meta["p"] = curve.p;
    meta["n_steps"] = o.picard_steps;
    meta["nodes"] = curve.size();
    meta["picard_sweeps"] = curve.picard_sweeps;
    json ratios = json::array();
    for (double r : curve.contraction_ratios) ratios.push_back(std::isfinite(r) ? json(r) : json(nullptr));
    meta["contraction_ratios"] = ratios;
    if (curve.regime == Family::Infinite) meta["start_value"] = curve.start_value;
    emit(out, o, t, meta);
    out.summary() << "shock: " << curve.size() << " nodes, " << curve.picard_sweeps << " Picard sweeps, t in ["
                  << num::format_double(curve.t.front()) << ", " << num::format_double(curve.t.back()) << "]\n";
    return 0;
}

int cmd_oracle(const Options& o, Output& out)
{
    const auto pr = make_profile(o);
    if (!(o.oracle_tau_lo > 0.0) || !(o.oracle_tau_hi > o.oracle_tau_lo)) throw UsageError("need 0 < --tau-lo < --tau-hi");
    if (o.oracle_n < 2) throw UsageError("--n must be at least 2");
    const auto curve = integrate_shock(pr, picard_options(o));
    const auto rows = oracle_comparison(pr, curve, o.oracle_tau_lo, o.oracle_tau_hi, o.oracle_n);
    Table t{{"t", "phi_ode", "phi_lo", "abs_diff"}, {}};
    double worst = 0.0;
    for (const auto& r : rows) {
        t.rows.push_back({r.t, r.phi_ode, r.phi_lo, r.abs_diff});
        worst = std::max(worst, r.abs_diff);
    }
    json meta;
    meta["profile"] = profile_json(pr);
    emit(out, o, t, meta);
    out.summary() << "oracle-compare: " << rows.size() << " times, max |phi_ode - phi_lo| = " << num::format_double(worst)
                  << "\n";
    return 0;
}

int cmd_sample_field(const Options& o, Output& out)
{
    const auto pr = make_profile(o);
    if (o.grid_nt < 1 || !(o.field_t_hi >= o.field_t_lo) || !(o.field_t_lo > 0.0))
        throw UsageError("need 0 < --t-lo <= --t-hi and --nt >= 1");
    std::vector<double> times;
    for (int i = 0; i < o.grid_nt; ++i)
        times.push_back(o.grid_nt == 1 ? o.field_t_lo : o.field_t_lo + (o.field_t_hi - o.field_t_lo) * i / (o.grid_nt - 1));
    const auto xs = grid_x(o, pr.center());
    std::optional<ShockCurve> curve;
    if (o.field_t_hi > pr.t_star()) curve = integrate_shock(pr, picard_options(o));
    const auto blocks = parallel_rows(static_cast<int>(times.size()), [&](int i) {
        std::vector<std::vector<Cell>> rows;
        const double time = times[i];
        for (double x : xs) {
            try {
                const auto v = time > pr.t_star() ? entropy_solution(pr, *curve, time, x).sample
                                                  : solution_value(pr, time, x, Branch::Unique);
                rows.push_back({time, x, std::string(to_string(v.region)), v.y, v.u, v.du_dt, v.du_dx, v.denom});
            } catch (const DomainError&) {
                // no classical value here (shock range exceeded or a degenerate point)
            }
        }
        return rows;
    });
    Table t{{"t", "x", "region", "y", "u", "du_dt", "du_dx", "denom"}, {}};
    for (const auto& b : blocks) t.rows.insert(t.rows.end(), b.begin(), b.end());
    json meta;
    meta["profile"] = profile_json(pr);
    emit(out, o, t, meta);
    const std::size_t total = times.size() * xs.size();
    out.summary() << "sample-field: " << t.rows.size() << " of " << total << " points\n";
    return 0;
}

int cmd_verify(const Options& o, Output& out)
{
    const auto pr = make_profile(o);
    std::vector<Section> sections;
    for (const auto& name : o.lemma) {
        if (name == "all") {
            sections = {Section::Envelope, Section::Branches, Section::Bounds, Section::Shock,
                        Section::Oracle,   Section::WeakForm, Section::Derivatives};
            break;
        }
        const auto s = parse_section(name);
        if (!s) throw UsageError("unknown --lemma " + name);
        sections.push_back(*s);
    }
    const auto reports = verify_sections(pr, sections);
    out.write(reports_json(reports));
    int failed = 0, checks = 0;
    for (const auto& r : reports)
        for (const auto& c : r.checks) {
            ++checks;
            failed += c.pass ? 0 : 1;
        }
    out.summary() << "verify " << pr.describe() << ": " << (checks - failed) << "/" << checks << " checks passed\n";
    return failed == 0 ? 0 : kVerifyFailure;
}

int run(Options& o)
{
    if (o.format != "csv" && o.format != "json") throw UsageError("--format must be csv or json");
    Output out(o.out);
    if (o.subcommand == "blowup") return cmd_blowup(o, out);
    if (o.subcommand == "envelope") return cmd_envelope(o, out);
    if (o.subcommand == "branches") return cmd_branches(o, out);
    if (o.subcommand == "shock") return cmd_shock(o, out);
    if (o.subcommand == "oracle-compare") return cmd_oracle(o, out);
    if (o.subcommand == "sample-field") return cmd_sample_field(o, out);
    if (o.subcommand == "verify") return cmd_verify(o, out);
    throw UsageError("unknown subcommand " + o.subcommand);
}

void add_picard(CLI::App* app, Options& o)
{
    app->add_option("--n-steps", o.picard_steps, "Picard grid intervals in s")->capture_default_str();
    app->add_option("--tol", o.picard_tol, "Picard sup-norm update tolerance")->capture_default_str();
    app->add_option("--max-sweeps", o.picard_sweeps, "maximum Picard sweeps")->capture_default_str();
}

void add_grid(CLI::App* app, Options& o)
{
    app->add_option("--nt", o.grid_nt, "number of times")->capture_default_str();
    app->add_option("--x-half", o.grid_x_half, "half-width of the x grid around the centre")->capture_default_str();
    app->add_option("--nx", o.grid_nx, "number of x points")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    Options o;
    CLI::App app{"Shock construction and asymptotic checks for degenerate blow-up in Burgers-type equations", "shockfit"};
    app.set_config("--config", "", "key=value file mirroring the flags ([subcommand] sections for subcommand flags)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    app.add_option("--family", o.family, "finite or infinite")->capture_default_str();
    app.add_option("--k", o.k, "degeneracy order (finite family)")->capture_default_str();
    app.add_option("--r", o.r, "remainder monomials degree:coef,... (finite family)");
    app.add_option("--p", o.p, "exponent p > 0 (infinite family)")->capture_default_str();
    app.add_option("--r0", o.r0, "zero or quadratic (infinite family)")->capture_default_str();
    app.add_option("--center", o.center, "cusp centre c")->capture_default_str();
    app.add_option("--locality", o.locality, "locality radius")->capture_default_str();
    app.add_option("--format", o.format, "csv or json")->capture_default_str();
    app.add_option("--out", o.out, "output path, - for stdout")->capture_default_str();

    auto* blowup = app.add_subcommand("blowup", "print the blow-up point");
    auto* envelope = app.add_subcommand("envelope", "envelope roots and cusp boundaries");
    envelope->add_option("--tau-lo", o.env_tau_lo, "smallest t - t*")->capture_default_str();
    envelope->add_option("--tau-hi", o.env_tau_hi, "largest t - t*")->capture_default_str();
    envelope->add_option("--n", o.env_n, "log-spaced samples")->capture_default_str();

    auto* branches = app.add_subcommand("branches", "branch preimages on a (t, x) grid");
    branches->add_option("--tau-lo", o.grid_tau_lo, "smallest t - t*")->capture_default_str();
    branches->add_option("--tau-hi", o.grid_tau_hi, "largest t - t*")->capture_default_str();
    add_grid(branches, o);

    auto* shock = app.add_subcommand("shock", "shock curve from the rescaled fixed point");
    add_picard(shock, o);

    auto* oracle = app.add_subcommand("oracle-compare", "shock position against the Lax-Oleinik minimisation");
    oracle->add_option("--tau-lo", o.oracle_tau_lo, "smallest t - t*")->capture_default_str();
    oracle->add_option("--tau-hi", o.oracle_tau_hi, "largest t - t* (clipped to the curve)")->capture_default_str();
    oracle->add_option("--n", o.oracle_n, "log-spaced times")->capture_default_str();
    add_picard(oracle, o);

    auto* field = app.add_subcommand("sample-field", "entropy solution and derivatives on a (t, x) grid");
    field->add_option("--t-lo", o.field_t_lo, "first time")->capture_default_str();
    field->add_option("--t-hi", o.field_t_hi, "last time")->capture_default_str();
    add_grid(field, o);
    add_picard(field, o);

    auto* verify = app.add_subcommand("verify", "asymptotic and consistency checks as a JSON report");
    verify->add_option("--lemma", o.lemma,
                       "envelope|branches|bounds|shock|oracle|weak-form|derivatives|all (repeatable)")
        ->capture_default_str();

    for (auto* sub : {blowup, envelope, branches, shock, oracle, field, verify}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }
    o.subcommand = app.get_subcommands().front()->get_name();

    try {
        return run(o);
    } catch (const UsageError& e) {
        std::cerr << "shockfit: " << e.what() << "\n";
        return kUsageError;
    } catch (const DomainError& e) {
        std::cerr << "shockfit: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "shockfit: " << e.what() << "\n";
        return kVerifyFailure;
    }
}
