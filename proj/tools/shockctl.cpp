// shockctl: config-driven front end for the kinshock solvers.
//
//   shockctl verify   --config run.ini
//   shockctl relax    --config run.ini --output out/relax
//   shockctl reduced  --config run.ini
//   shockctl two-time --config run.ini --workers 2
//   shockctl eigen    --config run.ini
//
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 verification failure.

#include <kinshock/run.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace kinshock;
using nlohmann::json;

namespace {

enum Exit { ok = 0, config_error = 2, numerical_failure = 3, verification_failure = 4 };

struct Cli {
    std::string config_path;
    std::string output;
    int workers = 0;
    std::optional<bool> deterministic;
    std::string log_level;
};

struct Outcome {
    int code = Exit::ok;
    json results = json::object();
    std::string message;
};

void write_fields(fs::path const& dir, std::string const& stem, std::size_t index, Distribution const& d, int precision)
{
    fs::create_directories(dir);
    std::ostringstream name;
    name << stem << '_' << std::setw(5) << std::setfill('0') << index << ".txt";
    auto os = open_output(dir / name.str());
    write_distribution(os, d, precision);
}

Outcome cmd_verify(RunConfig const& c, fs::path const& out)
{
    Outcome o;
    auto checks = run_verification(c);
    json arr = json::array();
    bool all = true;
    for (auto const& r : checks) {
        arr.push_back(to_json(r));
        all = all && r.passed;
        spdlog::info("verify {:<26} {:>12.4e} (tol {:.1e})  {}", r.name, r.measured, r.tolerance, r.passed ? "PASS" : "FAIL");
    }
    json rep = {{"schema_version", summary_schema_version}, {"provenance", provenance(c)}, {"passed", all}, {"checks", arr}};
    write_json(out / "verify.json", rep);
    o.results = {{"passed", all}, {"checks", arr}};
    if (!all) {
        o.code = Exit::verification_failure;
        o.message = "one or more verification checks failed";
    }
    return o;
}

Outcome cmd_relax(RunConfig const& c, fs::path const& out)
{
    Outcome o;
    auto const g = c.grid();
    auto const f0 = initial_state(c, g);
    auto const Q = make_collision(g, c.model, c.collision);
    auto const res = relax_homogeneous(f0, Q, c.step);

    if (c.write_csv) {
        auto os = open_output(out / "moments.csv");
        write_moments_csv(os, res.history, c.precision);
    }
    if (c.write_fields)
        for (std::size_t i = 0; i < res.snapshots.size(); ++i) write_fields(out / "fields", "relax", i, res.snapshots[i].f, c.precision);
    {
        auto os = open_output(out / "final_state.txt");
        write_distribution(os, res.last_good, c.precision);
    }

    double drift = 0.0, entropy_rise = 0.0;
    for (std::size_t i = 0; i < f0.values().size(); ++i) drift = std::max(drift, std::abs(res.last_good[i] - f0[i]));
    for (std::size_t i = 1; i < res.history.size(); ++i)
        entropy_rise = std::max(entropy_rise, res.history[i].entropy - res.history[i - 1].entropy);
    o.results = {{"steps", res.history.size() - 1},
                 {"final_t", res.history.back().t},
                 {"initial_moments", moments_json(res.history.front().moments)},
                 {"final_moments", moments_json(res.history.back().moments)},
                 {"linf_change", drift},
                 {"max_entropy_increase", entropy_rise},
                 {"halted", res.halted}};
    if (res.halted) {
        o.code = Exit::numerical_failure;
        o.message = res.reason;
    }
    return o;
}

Outcome cmd_reduced(RunConfig const& c, fs::path const& out)
{
    Outcome o;
    auto const g = c.grid();
    auto const F0 = initial_state(c, g, Role::F);
    auto const Q = make_collision(g, c.model, c.collision);
    auto const tr = march_reduced(F0, c.selfsim, Q, c.step);

    if (c.write_csv) {
        auto os = open_output(out / "reduced.csv");
        write_reduced_csv(os, tr, c.step.dt, c.precision);
    }
    if (c.write_fields)
        for (std::size_t i = 0; i < tr.profiles.size(); ++i) write_fields(out / "fields", "profile", i, tr.profiles[i].F, c.precision);
    {
        auto os = open_output(out / "final_state.txt");
        write_distribution(os, tr.profiles.back().F, c.precision);
    }

    double worst = 0.0;
    if (tr.energy.size() >= 3 && !tr.halted) {
        auto const gap = tr.identity_gap(c.step.dt);
        for (std::size_t i = 0; i < gap.size(); ++i) worst = std::max(worst, std::abs(gap[i]) / tr.energy[i + 1]);
    }
    o.results = {{"case", case_name(c.selfsim.kind)},
                 {"lambda", c.selfsim.lambda},
                 {"beta", c.selfsim.beta},
                 {"u0", c.selfsim.u0},
                 {"drho", c.step.dt},
                 {"rho_end", tr.rho.back()},
                 {"energy_end", tr.energy.back()},
                 {"mass_end", tr.mass.back()},
                 {"max_identity_gap", worst},
                 {"halted", tr.halted}};
    if (tr.halted) {
        o.code = Exit::numerical_failure;
        o.message = tr.reason;
    }
    return o;
}

Outcome cmd_two_time(RunConfig const& c, fs::path const& out)
{
    Outcome o;
    auto const g = c.grid();
    std::vector<Distribution> slices(static_cast<std::size_t>(c.tau_cells), initial_state(c, g, Role::K));
    auto const st = make_two_time_state(std::move(slices), c.tau_spacing);
    auto const Q = make_collision(g, c.model, c.collision);
    TwoTimeOptions topt;
    topt.inflow = c.inflow;
    auto const res = solve_two_time(st, c.model, Q, c.step, topt);

    if (c.write_csv) {
        auto os = open_output(out / "two_time.csv");
        os.precision(c.precision);
        os << "index,t,total_mass,balance_error\n";
        for (std::size_t i = 0; i < res.times.size(); ++i)
            os << i << ',' << res.times[i] << ',' << res.total_mass[i] << ',' << (i > 0 ? res.balance_error[i - 1] : 0.0) << '\n';
        auto ss = open_output(out / "slices.csv");
        ss.precision(c.precision);
        ss << "slice,tau,density,px,py,pz,energy,entropy\n";
        auto const& fin = res.snapshots.back();
        for (int i = 0; i < fin.tau_cells(); ++i) {
            auto const m = moments(fin.slices[i]);
            ss << i << ',' << fin.tau0 + i * fin.tau_spacing << ',' << m.density << ',' << m.momentum.x << ',' << m.momentum.y << ','
               << m.momentum.z << ',' << m.energy << ',' << entropy(fin.slices[i]) << '\n';
        }
    }
    if (c.write_fields)
        for (std::size_t s = 0; s < res.snapshots.size(); ++s)
            for (int i = 0; i < res.snapshots[s].tau_cells(); ++i)
                write_fields(out / "fields" / ("snapshot_" + std::to_string(s)), "slice", static_cast<std::size_t>(i),
                             res.snapshots[s].slices[i], c.precision);

    double worst = 0.0;
    for (double e : res.balance_error) worst = std::max(worst, e);
    o.results = {{"inflow", inflow_name(c.inflow)},
                 {"tau_cells", c.tau_cells},
                 {"final_t", res.times.back()},
                 {"initial_total_mass", res.total_mass.front()},
                 {"final_total_mass", res.total_mass.back()},
                 {"max_balance_error", worst},
                 {"halted", res.halted}};
    if (res.halted) {
        o.code = Exit::numerical_failure;
        o.message = res.reason;
    }
    return o;
}

Outcome cmd_eigen(RunConfig const& c, fs::path const& out)
{
    Outcome o;
    EigenOptions eo;
    eo.grid = c.grid();
    eo.seed = anisotropic_seed(eo.grid, c.initial.t_par, c.initial.t_perp);
    eo.window = c.eigen.window;
    eo.drho = c.eigen.drho;
    eo.scheme = c.step.scheme;
    eo.scan_points = c.eigen.scan_points;
    eo.lambda_tol = c.eigen.lambda_tol;
    eo.collision = c.collision;
    auto const res = eigen_search_maxwell(c.selfsim.beta, c.selfsim.u0, c.model, c.eigen.lo, c.eigen.hi, eo);

    json samples = json::array(), roots = json::array(), residuals = json::array();
    for (auto const& s : res.samples)
        samples.push_back({{"lambda", s.lambda}, {"g", s.finite ? json(s.g) : json(nullptr)}, {"finite", s.finite}});
    for (auto const& r : res.roots) {
        roots.push_back({{"lambda", r.lambda}, {"g", r.g}, {"residual", r.residual}});
        residuals.push_back(r.residual);
    }
    json rep = {{"bracket", {res.lo, res.hi}}, {"samples", samples}, {"roots", roots}, {"residuals", residuals}};
    write_json(out / "eigen.json", rep);
    if (c.write_csv) {
        auto os = open_output(out / "eigen_samples.csv");
        os.precision(c.precision);
        os << "lambda,g\n";
        for (auto const& s : res.samples) os << s.lambda << ',' << (s.finite ? s.g : std::numeric_limits<double>::quiet_NaN()) << '\n';
    }
    o.results = rep;
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    auto console = spdlog::stderr_color_mt("shockctl");
    spdlog::set_default_logger(console);

    CLI::App app{"Self-similar shock-tail and collision-operator solver"};
    app.require_subcommand(1);
    app.fallthrough();
    Cli cli;
    app.add_option("-c,--config", cli.config_path, "Run configuration file")->required(); // a missing file is a config error (exit 2)
    app.add_option("-o,--output", cli.output, "Output directory (overrides output.directory)");
    app.add_option("-w,--workers", cli.workers, "Worker threads (overrides run.workers)")->check(CLI::PositiveNumber);
    app.add_flag("--deterministic,!--fast", cli.deterministic, "Fixed-order reductions (overrides run.deterministic)");
    app.add_option("--log-level", cli.log_level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    std::map<std::string, Outcome (*)(RunConfig const&, fs::path const&)> const commands = {
        {"verify", cmd_verify}, {"relax", cmd_relax}, {"reduced", cmd_reduced}, {"two-time", cmd_two_time}, {"eigen", cmd_eigen}};
    app.add_subcommand("verify", "Run the invariant and oracle checks");
    app.add_subcommand("relax", "Homogeneous relaxation df/dt = Q(f,f)");
    app.add_subcommand("reduced", "March the reduced self-similar equation in rho");
    app.add_subcommand("two-time", "Two-time transport-collision solver (Maxwell molecules)");
    app.add_subcommand("eigen", "Maxwell-molecule eigenvalue search over a lambda bracket");

    CLI11_PARSE(app, argc, argv);
    std::string const command = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        cfg = load_config(cli.config_path);
    } catch (ConfigError const& e) {
        spdlog::error("{}: {}", cli.config_path, e.what());
        // the config never resolved, so a summary only goes where --output points
        if (!cli.output.empty()) {
            try {
                fs::create_directories(cli.output);
                write_json(fs::path(cli.output) / "summary.json", {{"schema_version", summary_schema_version},
                                                                   {"command", command},
                                                                   {"status", "config_error"},
                                                                   {"exit_code", int(Exit::config_error)},
                                                                   {"message", e.what()}});
            } catch (std::exception const& w) {
                spdlog::error("{}", w.what());
            }
        }
        return Exit::config_error;
    }
    if (!cli.output.empty()) cfg.directory = cli.output;
    if (cli.workers > 0) cfg.workers = cli.workers;
    if (cli.deterministic) cfg.deterministic = *cli.deterministic;
    if (!cli.log_level.empty()) cfg.log_level = cli.log_level;
    cfg.collision.spectral.workers = cfg.workers;
    cfg.collision.spectral.deterministic = cfg.deterministic;
    spdlog::set_level(spdlog::level::from_str(cfg.log_level));

    fs::path const out = cfg.directory;
    try {
        fs::create_directories(out);
        auto os = open_output(out / "config.resolved.ini");
        os << "# " << provenance(cfg) << "\n" << render_config(cfg);
    } catch (std::exception const& e) {
        spdlog::error("cannot prepare output directory {}: {}", out.string(), e.what());
        return Exit::config_error;
    }
    spdlog::info("{} | {}", command, provenance(cfg));

    auto const t0 = std::chrono::steady_clock::now();
    Outcome res;
    std::string status = "ok";
    try {
        res = commands.at(command)(cfg, out);
        if (res.code == Exit::numerical_failure) status = "numerical_failure";
        if (res.code == Exit::verification_failure) status = "verification_failure";
    } catch (ConfigError const& e) {
        res.code = Exit::config_error;
        res.message = e.what();
        status = "config_error";
    } catch (InvalidArgument const& e) {
        res.code = Exit::config_error;
        res.message = e.what();
        status = "config_error";
    } catch (std::exception const& e) {
        res.code = Exit::numerical_failure;
        res.message = e.what();
        status = "numerical_failure";
    }
    double const wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json summary = {{"schema_version", summary_schema_version},
                    {"provenance", provenance(cfg)},
                    {"command", command},
                    {"status", status},
                    {"exit_code", res.code},
                    {"wall_time_s", wall},
                    {"results", res.results}};
    if (!res.message.empty()) summary["message"] = res.message;
    try {
        write_json(out / "summary.json", summary);
    } catch (std::exception const& e) {
        spdlog::error("{}", e.what());
    }
    if (res.code != Exit::ok) spdlog::error("{}: {}", command, res.message);
    else spdlog::info("{} finished in {:.2f} s", command, wall);
    return res.code;
}
