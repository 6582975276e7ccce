#pragma once

// Run configuration: a sectioned key = value text format.
//
//   schema = 1
//   [grid]
//   n = 32
//   L = 8
//   [model]
//   s = 9
//
// '#' starts a comment. Every key has a default; unknown sections or keys are
// errors. load_config validates cross-field consistency.

#include "collide.hpp"
#include "error.hpp"
#include "evolve.hpp"
#include "model.hpp"
#include "selfsim.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace kinshock {

inline constexpr int config_schema_version = 1;

enum class InitialKind { maxwellian, two_bump, bimaxwellian, bkw, random_bumps };

struct InitialConfig {
    InitialKind kind = InitialKind::maxwellian;
    double density = 1.0;
    double temperature = 1.0;
    Vec3 velocity{};
    double separation = 1.0;   // two_bump: bumps at +-separation/2 along v1; random_bumps: spread of centres
    double t_par = 1.44;       // bimaxwellian
    double t_perp = 1.0;
    double bkw_t0 = 6.0;       // bkw: starting time of the closed-form family
};

struct VerifyConfig {
    int oracle_n = 8;
    double oracle_L = 4.6;
    int oracle_refine = 2;
    std::string oracle_interp = "spectral";
    double tol_oracle = 5e-3;
    double tol_conservation = 1e-5;
    double tol_equilibrium = 1e-6;
    double tol_stretch = 1e-6;
    double tol_contradiction = 1e-3;
};

struct EigenConfig {
    double lo = 0.1;
    double hi = 1.0;
    int scan_points = 8;
    double window = 0.25;
    double drho = 0.025;
    double lambda_tol = 1e-7;
};

struct RunConfig {
    int schema = config_schema_version;

    // [grid]
    int n = 32;
    double L = 8.0;

    // [model]
    InteractionModel model = InteractionModel::maxwell();
    std::string angular = "isotropic";

    // [collision]
    CollisionConfig collision{};

    // [selfsim]
    SelfSimilarConfig selfsim{};
    bool lambda_auto = true;

    // [evolve]
    StepControl step{};
    int tau_cells = 16;
    double tau_spacing = 0.1;
    Inflow inflow = Inflow::frozen;

    // [initial]
    InitialConfig initial{};

    // [eigen]
    EigenConfig eigen{};

    // [output]
    std::string directory = "out";
    bool write_csv = true;
    bool write_json = true;
    bool write_fields = false;
    int precision = 17;

    // [run]
    unsigned long seed = 0;
    int workers = 1;
    bool deterministic = true;
    std::string log_level = "info";

    // [verify]
    VerifyConfig verify{};

    VelocityGrid grid() const { return make_grid(n, L); }
};

namespace detail {

inline std::string trim(std::string s)
{
    auto const b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto const e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s)
{
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

class ConfigTable {
public:
    void put(std::string const& key, std::string value, int line)
    {
        auto [it, inserted] = map_.try_emplace(key, Entry{std::move(value), line, false});
        if (!inserted) throw ConfigError("duplicate key '" + key + "'", line);
    }

    bool has(std::string const& key) const { return map_.count(key) != 0; }

    std::optional<Entry> take(std::string const& key)
    {
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        it->second.used = true;
        return it->second;
    }

    void reject_unused() const
    {
        for (auto const& [k, e] : map_)
            if (!e.used) throw ConfigError("unknown key '" + k + "'", e.line);
    }

private:
    std::map<std::string, Entry> map_;
};

inline double parse_double(Entry const& e, std::string const& key)
{
    std::istringstream is(e.value);
    double v;
    std::string rest;
    if (!(is >> v) || (is >> rest)) throw ConfigError("'" + key + "' expects a number, got '" + e.value + "'", e.line);
    if (!std::isfinite(v) && lower(e.value) != "inf") throw ConfigError("'" + key + "' must be finite", e.line);
    return v;
}

inline long parse_int(Entry const& e, std::string const& key)
{
    std::istringstream is(e.value);
    long v;
    std::string rest;
    if (!(is >> v) || (is >> rest)) throw ConfigError("'" + key + "' expects an integer, got '" + e.value + "'", e.line);
    return v;
}

inline bool parse_bool(Entry const& e, std::string const& key)
{
    auto const v = lower(e.value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("'" + key + "' expects true/false, got '" + e.value + "'", e.line);
}

inline std::vector<double> parse_list(Entry const& e, std::string const& key)
{
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(Entry{trim(item), e.line, true}, key));
    return out;
}

} // namespace detail

// Parse and validate configuration text.
inline RunConfig parse_config(std::string const& text)
{
    using namespace detail;
    ConfigTable tab;
    std::istringstream in(text);
    std::string raw, section;
    int lineno = 0;
    static std::vector<std::string> const sections = {"grid",   "model",   "collision", "selfsim", "evolve",
                                                      "initial", "eigen", "output",    "run",     "verify"};
    while (std::getline(in, raw)) {
        ++lineno;
        auto const hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header '" + line + "'", lineno);
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (std::find(sections.begin(), sections.end(), section) == sections.end())
                throw ConfigError("unknown section [" + section + "]", lineno);
            continue;
        }
        auto const eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
        std::string key = lower(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", lineno);
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", lineno);
        tab.put(section.empty() ? key : section + "." + key, value, lineno);
    }

    RunConfig c;
    auto num = [&](std::string const& k, double& dst) {
        if (auto e = tab.take(k)) dst = parse_double(*e, k);
    };
    auto integer = [&](std::string const& k, auto& dst) {
        if (auto e = tab.take(k)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(parse_int(*e, k));
    };
    auto flag = [&](std::string const& k, bool& dst) {
        if (auto e = tab.take(k)) dst = parse_bool(*e, k);
    };
    auto text_of = [&](std::string const& k, std::string& dst) {
        if (auto e = tab.take(k)) dst = e->value;
    };
    auto choice = [&](std::string const& k, std::vector<std::string> const& allowed, std::string def) {
        auto e = tab.take(k);
        if (!e) return std::pair{def, 0};
        auto v = lower(e->value);
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            std::string all;
            for (auto const& a : allowed) all += (all.empty() ? "" : "|") + a;
            throw ConfigError("'" + k + "' must be one of " + all + ", got '" + e->value + "'", e->line);
        }
        return std::pair{v, e->line};
    };

    if (auto e = tab.take("schema")) {
        c.schema = static_cast<int>(parse_int(*e, "schema"));
        if (c.schema != config_schema_version)
            throw ConfigError("unsupported schema version " + e->value + " (expected " + std::to_string(config_schema_version) + ")",
                              e->line);
    }

    // [grid]
    if (auto e = tab.take("grid.n")) {
        c.n = static_cast<int>(parse_int(*e, "grid.n"));
        if (c.n < 4 || c.n % 2) throw ConfigError("grid.n must be even and >= 4", e->line);
    }
    if (auto e = tab.take("grid.l")) {
        c.L = parse_double(*e, "grid.L");
        if (!(c.L > 0.0)) throw ConfigError("grid.L must be positive", e->line);
    }

    // [model]
    {
        auto es = tab.take("model.s");
        auto eg = tab.take("model.gamma");
        double ks = 1.0;
        int ks_line = 0;
        if (auto e = tab.take("model.kernel_scale")) {
            ks = parse_double(*e, "model.kernel_scale");
            ks_line = e->line;
        }
        AngularWeight ang;
        if (auto e = tab.take("model.angular")) {
            c.angular = e->value;
            auto const v = lower(e->value);
            try {
                if (v.rfind("poly:", 0) == 0) {
                    ang = AngularWeight::polynomial(parse_list(Entry{e->value.substr(5), e->line, true}, "model.angular"));
                } else if (v != "isotropic") {
                    throw ConfigError("model.angular must be 'isotropic' or 'poly:c0,c1,...'", e->line);
                }
            } catch (InvalidArgument const& ex) {
                throw ConfigError(std::string("model.angular: ") + ex.what(), e->line);
            }
        }
        try {
            if (es && eg) {
                double const s = parse_double(*es, "model.s"), g = parse_double(*eg, "model.gamma");
                if (std::abs(gamma_from_s(s) - g) > 1e-12)
                    throw ConfigError("model.s and model.gamma are inconsistent (s = " + es->value + " gives gamma = " +
                                          std::to_string(gamma_from_s(s)) + ")",
                                      eg->line);
                c.model = InteractionModel::from_s(s, ang, ks);
            } else if (eg) {
                c.model = InteractionModel::from_gamma(parse_double(*eg, "model.gamma"), ang, ks);
            } else {
                c.model = InteractionModel::from_s(es ? parse_double(*es, "model.s") : 5.0, ang, ks);
            }
        } catch (InvalidArgument const& ex) {
            int const line = es ? es->line : eg ? eg->line : ks_line;
            throw ConfigError(std::string("model: ") + ex.what(), line);
        }
    }

    // [collision]
    {
        auto [m, ml] = choice("collision.method", {"spectral", "direct"}, "spectral");
        c.collision.method = m == "direct" ? CollisionMethod::direct : CollisionMethod::spectral;
        integer("collision.angular_nodes", c.collision.angular_nodes);
        flag("collision.strict_boundary", c.collision.spectral.strict_boundary);
        integer("collision.radial_nodes", c.collision.spectral.radial_nodes);
        integer("collision.sphere_theta", c.collision.spectral.sphere_theta);
        flag("collision.dealias", c.collision.spectral.dealias);
        integer("collision.refine", c.collision.spectral.refine);
        num("collision.support_radius", c.collision.spectral.support_radius);
        auto [ip, il] = choice("collision.interp", {"trilinear", "spectral"}, "trilinear");
        c.collision.direct.interp = ip == "spectral" ? Interp::spectral : Interp::trilinear;
        flag("collision.force", c.collision.direct.force);
        (void)ml;
        (void)il;
    }

    // [selfsim]
    int case_line = 0, lambda_line = 0;
    {
        auto [cs, cl] = choice("selfsim.case", {"auto", "hard", "soft", "maxwell"}, "auto");
        case_line = cl;
        if (cs == "auto")
            c.selfsim.kind = c.model.gamma > 0 ? TailCase::hard : c.model.gamma < 0 ? TailCase::soft : TailCase::maxwell;
        else
            c.selfsim.kind = cs == "hard" ? TailCase::hard : cs == "soft" ? TailCase::soft : TailCase::maxwell;
        if (auto e = tab.take("selfsim.lambda")) {
            lambda_line = e->line;
            if (lower(e->value) == "auto") {
                c.lambda_auto = true;
            } else {
                c.lambda_auto = false;
                c.selfsim.lambda = parse_double(*e, "selfsim.lambda");
            }
        }
        num("selfsim.beta", c.selfsim.beta);
        num("selfsim.u0", c.selfsim.u0);
        num("selfsim.x_star", c.selfsim.x_star);
    }

    // [evolve]
    {
        auto [sc, sl] = choice("evolve.scheme", {"euler", "rk2", "rk4"}, "rk2");
        c.step.scheme = sc == "euler" ? Scheme::euler : sc == "rk4" ? Scheme::rk4 : Scheme::rk2;
        (void)sl;
        num("evolve.dt", c.step.dt);
        num("evolve.t_end", c.step.t_end);
        num("evolve.cfl_advect", c.step.cfl_advect);
        integer("evolve.snapshot_every", c.step.snapshot_every);
        integer("evolve.tau_cells", c.tau_cells);
        num("evolve.tau_spacing", c.tau_spacing);
        auto [in, inl] = choice("evolve.inflow", {"zero", "frozen", "periodic"}, "frozen");
        c.inflow = in == "zero" ? Inflow::zero : in == "periodic" ? Inflow::periodic : Inflow::frozen;
        (void)inl;
    }

    // [initial]
    {
        auto [k, kl] = choice("initial.kind", {"maxwellian", "two_bump", "bimaxwellian", "bkw", "random_bumps"},
                                 "maxwellian");
        c.initial.kind = k == "two_bump" ? InitialKind::two_bump
                         : k == "bimaxwellian" ? InitialKind::bimaxwellian
                         : k == "bkw" ? InitialKind::bkw
                         : k == "random_bumps" ? InitialKind::random_bumps
                                              : InitialKind::maxwellian;
        (void)kl;
        num("initial.density", c.initial.density);
        num("initial.temperature", c.initial.temperature);
        if (auto e = tab.take("initial.velocity")) {
            auto v = parse_list(*e, "initial.velocity");
            if (v.size() != 3) throw ConfigError("initial.velocity expects three comma-separated numbers", e->line);
            c.initial.velocity = {v[0], v[1], v[2]};
        }
        num("initial.separation", c.initial.separation);
        num("initial.t_par", c.initial.t_par);
        num("initial.t_perp", c.initial.t_perp);
        num("initial.bkw_t0", c.initial.bkw_t0);
    }

    // [eigen]
    num("eigen.lo", c.eigen.lo);
    num("eigen.hi", c.eigen.hi);
    integer("eigen.scan_points", c.eigen.scan_points);
    num("eigen.window", c.eigen.window);
    num("eigen.drho", c.eigen.drho);
    num("eigen.lambda_tol", c.eigen.lambda_tol);

    // [output]
    text_of("output.directory", c.directory);
    if (auto e = tab.take("output.formats")) {
        c.write_csv = c.write_json = false;
        std::stringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto const f = lower(trim(item));
            if (f == "csv")
                c.write_csv = true;
            else if (f == "json")
                c.write_json = true;
            else
                throw ConfigError("output.formats: unknown format '" + f + "' (csv, json)", e->line);
        }
    }
    flag("output.fields", c.write_fields);
    if (auto e = tab.take("output.precision")) {
        c.precision = static_cast<int>(parse_int(*e, "output.precision"));
        if (c.precision < 1 || c.precision > 17) throw ConfigError("output.precision must lie in [1, 17]", e->line);
    }

    // [run]
    integer("run.seed", c.seed);
    if (auto e = tab.take("run.workers")) {
        c.workers = static_cast<int>(parse_int(*e, "run.workers"));
        if (c.workers < 1) throw ConfigError("run.workers must be >= 1", e->line);
    }
    flag("run.deterministic", c.deterministic);
    {
        auto [lv, ll] = choice("run.log_level", {"trace", "debug", "info", "warn", "error", "off"}, "info");
        c.log_level = lv;
        (void)ll;
    }

    // [verify]
    integer("verify.oracle_n", c.verify.oracle_n);
    num("verify.oracle_l", c.verify.oracle_L);
    integer("verify.oracle_refine", c.verify.oracle_refine);
    {
        auto [vi, vl] = choice("verify.oracle_interp", {"trilinear", "spectral"}, "spectral");
        c.verify.oracle_interp = vi;
        (void)vl;
    }
    num("verify.tol_oracle", c.verify.tol_oracle);
    num("verify.tol_conservation", c.verify.tol_conservation);
    num("verify.tol_equilibrium", c.verify.tol_equilibrium);
    num("verify.tol_stretch", c.verify.tol_stretch);
    num("verify.tol_contradiction", c.verify.tol_contradiction);

    tab.reject_unused();

    // cross-field checks
    c.collision.spectral.workers = c.workers;
    c.collision.spectral.deterministic = c.deterministic;
    try {
        if (c.lambda_auto) {
            if (auto lam = balance_lambda(c.selfsim.kind, c.model.gamma)) c.selfsim.lambda = *lam;
            else c.selfsim.lambda = 0.25; // Maxwell: placeholder seed for reduced runs, overridden by eigen results
        }
        c.selfsim.validate(c.model, c.lambda_auto);
    } catch (InvalidArgument const& ex) {
        throw ConfigError(std::string("selfsim: ") + ex.what(), lambda_line ? lambda_line : case_line);
    }
    try {
        c.step.validate();
    } catch (InvalidArgument const& ex) {
        throw ConfigError(std::string("evolve: ") + ex.what(), 0);
    }
    if (c.tau_cells < 1) throw ConfigError("evolve.tau_cells must be >= 1", 0);
    if (!(c.tau_spacing > 0.0)) throw ConfigError("evolve.tau_spacing must be positive", 0);
    if (c.step.dt > c.step.cfl_advect * c.tau_spacing * (1.0 + 1e-12))
        throw ConfigError("evolve.dt exceeds cfl_advect * tau_spacing (unit advection speed)", 0);
    if (c.collision.spectral.refine < 1) throw ConfigError("collision.refine must be >= 1", 0);
    if (c.collision.angular_nodes < 6) throw ConfigError("collision.angular_nodes must be >= 6", 0);
    if (c.initial.density <= 0.0 || c.initial.temperature <= 0.0) throw ConfigError("initial: density and temperature must be positive", 0);
    if (c.eigen.lo >= c.eigen.hi) throw ConfigError("eigen.lo must be below eigen.hi", 0);
    if (c.verify.oracle_n < 4 || c.verify.oracle_n % 2) throw ConfigError("verify.oracle_n must be even and >= 4", 0);

    // support heuristic: |u| + 4 sqrt(T) <= L (1 - margin)
    double const margin = 0.125;
    double T = c.initial.temperature;
    if (c.initial.kind == InitialKind::bimaxwellian) T = std::max(c.initial.t_par, c.initial.t_perp);
    double const reach = norm(c.initial.velocity) + (c.initial.kind == InitialKind::two_bump || c.initial.kind == InitialKind::random_bumps
                              ? 0.5 * std::sqrt(3.0) * c.initial.separation
                              : 0.0) +
                         4.0 * std::sqrt(T);
    if (reach > c.L * (1.0 - margin))
        spdlog::warn("config: initial state reaches |v| = {:.3g}, beyond the grid support heuristic {:.3g}", reach,
                     c.L * (1.0 - margin));
    return c;
}

inline RunConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// Fully resolved configuration in the same format (re-parses to itself).
inline std::string render_config(RunConfig const& c)
{
    std::ostringstream os;
    os.precision(17);
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "schema = " << c.schema << "\n\n[grid]\nn = " << c.n << "\nL = " << c.L << "\n";
    os << "\n[model]\ns = " << c.model.s << "\ngamma = " << c.model.gamma << "\nangular = " << c.angular
       << "\nkernel_scale = " << c.model.kernel_scale << "\n";
    auto const& cs = c.collision.spectral;
    os << "\n[collision]\nmethod = " << (c.collision.method == CollisionMethod::direct ? "direct" : "spectral")
       << "\nangular_nodes = " << c.collision.angular_nodes << "\nstrict_boundary = " << b(cs.strict_boundary)
       << "\nradial_nodes = " << cs.radial_nodes << "\nsphere_theta = " << cs.sphere_theta << "\ndealias = " << b(cs.dealias)
       << "\nrefine = " << cs.refine << "\nsupport_radius = " << cs.support_radius
       << "\ninterp = " << interp_name(c.collision.direct.interp) << "\nforce = " << b(c.collision.direct.force) << "\n";
    os << "\n[selfsim]\ncase = " << case_name(c.selfsim.kind) << "\nlambda = ";
    if (c.lambda_auto && c.selfsim.kind != TailCase::maxwell) os << "auto";
    else os << c.selfsim.lambda;
    os << "\nbeta = " << c.selfsim.beta << "\nu0 = " << c.selfsim.u0 << "\nx_star = " << c.selfsim.x_star << "\n";
    if (c.lambda_auto && c.selfsim.kind != TailCase::maxwell) os << "# resolved lambda = " << c.selfsim.lambda << "\n";
    os << "\n[evolve]\nscheme = " << scheme_name(c.step.scheme) << "\ndt = " << c.step.dt << "\nt_end = " << c.step.t_end
       << "\ncfl_advect = " << c.step.cfl_advect << "\nsnapshot_every = " << c.step.snapshot_every << "\ntau_cells = " << c.tau_cells
       << "\ntau_spacing = " << c.tau_spacing << "\ninflow = " << inflow_name(c.inflow) << "\n";
    static char const* kinds[] = {"maxwellian", "two_bump", "bimaxwellian", "bkw", "random_bumps"};
    os << "\n[initial]\nkind = " << kinds[static_cast<int>(c.initial.kind)] << "\ndensity = " << c.initial.density
       << "\ntemperature = " << c.initial.temperature << "\nvelocity = " << c.initial.velocity.x << "," << c.initial.velocity.y << ","
       << c.initial.velocity.z << "\nseparation = " << c.initial.separation << "\nt_par = " << c.initial.t_par
       << "\nt_perp = " << c.initial.t_perp << "\nbkw_t0 = " << c.initial.bkw_t0 << "\n";
    os << "\n[eigen]\nlo = " << c.eigen.lo << "\nhi = " << c.eigen.hi << "\nscan_points = " << c.eigen.scan_points
       << "\nwindow = " << c.eigen.window << "\ndrho = " << c.eigen.drho << "\nlambda_tol = " << c.eigen.lambda_tol << "\n";
    os << "\n[output]\ndirectory = " << c.directory << "\nformats = ";
    std::string f;
    if (c.write_csv) f += "csv";
    if (c.write_json) f += f.empty() ? "json" : ",json";
    os << (f.empty() ? "csv" : f) << "\nfields = " << b(c.write_fields) << "\nprecision = " << c.precision << "\n";
    os << "\n[run]\nseed = " << c.seed << "\nworkers = " << c.workers << "\ndeterministic = " << b(c.deterministic)
       << "\nlog_level = " << c.log_level << "\n";
    os << "\n[verify]\noracle_n = " << c.verify.oracle_n << "\noracle_L = " << c.verify.oracle_L
       << "\noracle_refine = " << c.verify.oracle_refine << "\noracle_interp = " << c.verify.oracle_interp
       << "\ntol_oracle = " << c.verify.tol_oracle << "\ntol_conservation = " << c.verify.tol_conservation
       << "\ntol_equilibrium = " << c.verify.tol_equilibrium << "\ntol_stretch = " << c.verify.tol_stretch
       << "\ntol_contradiction = " << c.verify.tol_contradiction << "\n";
    return os.str();
}

} // namespace kinshock
