#include "bsf/cli.hpp"

#include "bsf/calibrate.hpp"
#include "bsf/error.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace bsf {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what)
{
    throw Error(ErrorCode::ConfigError, field + ": " + what);
}

void reject_unknown_keys(const nlohmann::json& obj, const std::string& where, const std::set<std::string>& allowed)
{
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            config_error(where.empty() ? key : where + "." + key, "unknown field");
        }
    }
}

double number_at(const nlohmann::json& obj, const std::string& key, const std::string& path)
{
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        config_error(path, "must be a number");
    }
    return v.get<double>();
}

std::vector<double> daily_values(const nlohmann::json& v, int days, const std::string& path)
{
    if (v.is_number()) {
        return std::vector<double>(days, v.get<double>());
    }
    if (!v.is_array()) {
        config_error(path, "must be a number or an array of numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) {
            config_error(path, "array entries must be numbers");
        }
        out.push_back(e.get<double>());
    }
    if (static_cast<int>(out.size()) != days) {
        config_error(path, "has " + std::to_string(out.size()) + " entries, horizon_days is " + std::to_string(days));
    }
    return out;
}

ControlSchedule parse_schedule(const nlohmann::json& s, int days, const fs::path& base_dir)
{
    if (!s.is_object()) {
        config_error("schedule", "must be an object");
    }
    try {
        if (s.contains("csv")) {
            reject_unknown_keys(s, "schedule", {"csv"});
            fs::path p = s.at("csv").get<std::string>();
            if (p.is_relative()) {
                p = base_dir / p;
            }
            std::ifstream in(p);
            if (!in) {
                config_error("schedule.csv", "cannot open '" + p.string() + "'");
            }
            ControlSchedule sched = read_schedule_csv(in);
            if (sched.days() != days) {
                config_error("schedule.csv", "has " + std::to_string(sched.days()) + " days, horizon_days is " +
                                                 std::to_string(days));
            }
            return sched;
        }
        reject_unknown_keys(s, "schedule", {"T", "tau"});
        if (!s.contains("T") || !s.contains("tau")) {
            config_error("schedule", "needs both 'T' and 'tau' (or 'csv')");
        }
        return ControlSchedule(daily_values(s.at("T"), days, "schedule.T"),
                               daily_values(s.at("tau"), days, "schedule.tau"));
    }
    catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            throw;
        }
        config_error("schedule", e.what());
    }
}

MatedMortality parse_mated_mortality(const std::string& s)
{
    if (s == "mean") {
        return MatedMortality::Mean;
    }
    if (s == "female") {
        return MatedMortality::Female;
    }
    if (s == "male") {
        return MatedMortality::Male;
    }
    if (s == "max") {
        return MatedMortality::Max;
    }
    config_error("mated_mortality", "must be one of mean, female, male, max");
}

} // namespace

RunConfig parse_config(const nlohmann::json& doc, const fs::path& base_dir)
{
    if (!doc.is_object()) {
        config_error("<root>", "config must be a JSON object");
    }
    reject_unknown_keys(doc, "", {"diet", "horizon_days", "dt", "N_f0", "N_m0", "calibrate_mass_mg", "weights",
                                  "schedule", "seed", "optimizer", "mated_mortality"});
    RunConfig c;
    try {
        if (doc.contains("diet")) {
            try {
                c.diet = parse_diet(doc.at("diet").get<std::string>());
            }
            catch (const Error& e) {
                config_error("diet", e.what());
            }
        }
        if (doc.contains("horizon_days")) {
            const auto& h = doc.at("horizon_days");
            if (!h.is_number_integer()) {
                config_error("horizon_days", "must be an integer");
            }
            c.horizon_days = h.get<int>();
        }
        if (c.horizon_days < 1) {
            config_error("horizon_days", "horizon must be at least 1 day");
        }
        if (doc.contains("dt")) {
            c.dt = number_at(doc, "dt", "dt");
        }
        if (!(c.dt > 0.0)) {
            config_error("dt", "step must be positive");
        }
        if (c.dt > kMaxStep) {
            config_error("dt", "step " + std::to_string(c.dt) + " exceeds the 0.1 day bound");
        }
        const double per_day = 1.0 / c.dt;
        if (std::abs(per_day - std::round(per_day)) > 1e-9 * per_day) {
            config_error("dt", "step must divide one day evenly");
        }

        const bool has_f = doc.contains("N_f0");
        const bool has_m = doc.contains("N_m0");
        if (has_f != has_m) {
            config_error(has_f ? "N_m0" : "N_f0", "N_f0 and N_m0 must be given together");
        }
        if (has_f) {
            if (doc.contains("calibrate_mass_mg")) {
                config_error("calibrate_mass_mg", "cannot be combined with N_f0/N_m0");
            }
            c.N_f0 = number_at(doc, "N_f0", "N_f0");
            c.N_m0 = number_at(doc, "N_m0", "N_m0");
            if (!(*c.N_f0 > 0.0)) {
                config_error("N_f0", "must be positive");
            }
            if (!(*c.N_m0 > 0.0)) {
                config_error("N_m0", "must be positive");
            }
        }
        if (doc.contains("calibrate_mass_mg")) {
            c.calibrate_mass_mg = number_at(doc, "calibrate_mass_mg", "calibrate_mass_mg");
            if (!(c.calibrate_mass_mg > 0.0)) {
                config_error("calibrate_mass_mg", "must be positive");
            }
        }

        if (doc.contains("mated_mortality")) {
            c.mated_mortality = parse_mated_mortality(doc.at("mated_mortality").get<std::string>());
        }

        if (doc.contains("weights")) {
            const auto& w = doc.at("weights");
            if (!w.is_object()) {
                config_error("weights", "must be an object");
            }
            reject_unknown_keys(w, "weights", {"Q", "R", "S", "T_amb"});
            if (w.contains("Q")) {
                c.weights.Q = number_at(w, "Q", "weights.Q");
            }
            if (w.contains("S")) {
                c.weights.S = number_at(w, "S", "weights.S");
            }
            if (w.contains("T_amb")) {
                c.weights.T_amb = number_at(w, "T_amb", "weights.T_amb");
            }
            if (w.contains("R")) {
                const auto& R = w.at("R");
                if (!R.is_array() || R.size() != 2 || !R[0].is_number() || !R[1].is_number()) {
                    config_error("weights.R", "must be the two diagonal entries [R_T, R_tau]");
                }
                c.weights.R_T   = R[0].get<double>();
                c.weights.R_tau = R[1].get<double>();
            }
            try {
                c.weights.validate();
            }
            catch (const Error& e) {
                config_error("weights", e.what());
            }
        }

        c.schedule = doc.contains("schedule") ? parse_schedule(doc.at("schedule"), c.horizon_days, base_dir)
                                              : ControlSchedule::benchmark(c.horizon_days);

        c.solver.dt = c.dt;
        if (doc.contains("seed")) {
            const auto& s = doc.at("seed");
            if (!s.is_number_unsigned()) {
                config_error("seed", "must be a nonnegative integer");
            }
            c.solver.seed = s.get<std::uint64_t>();
        }
        if (doc.contains("optimizer")) {
            const auto& o = doc.at("optimizer");
            if (!o.is_object()) {
                config_error("optimizer", "must be an object");
            }
            reject_unknown_keys(o, "optimizer", {"max_iterations", "tolerance", "random_starts", "threads", "h_T", "h_tau"});
            if (o.contains("max_iterations")) {
                c.solver.max_iterations = o.at("max_iterations").get<int>();
                if (c.solver.max_iterations < 1) {
                    config_error("optimizer.max_iterations", "must be at least 1");
                }
            }
            if (o.contains("tolerance")) {
                c.solver.tolerance = number_at(o, "tolerance", "optimizer.tolerance");
                if (!(c.solver.tolerance >= 0.0)) {
                    config_error("optimizer.tolerance", "must be nonnegative");
                }
            }
            if (o.contains("random_starts")) {
                c.solver.random_starts = o.at("random_starts").get<int>();
                if (c.solver.random_starts < 0) {
                    config_error("optimizer.random_starts", "must be nonnegative");
                }
            }
            if (o.contains("threads")) {
                c.solver.threads = o.at("threads").get<unsigned>();
            }
            if (o.contains("h_T")) {
                c.solver.h_T = number_at(o, "h_T", "optimizer.h_T");
                if (!(c.solver.h_T > 0.0)) {
                    config_error("optimizer.h_T", "must be positive");
                }
            }
            if (o.contains("h_tau")) {
                c.solver.h_tau = number_at(o, "h_tau", "optimizer.h_tau");
                if (!(c.solver.h_tau > 0.0)) {
                    config_error("optimizer.h_tau", "must be positive");
                }
            }
        }
    }
    catch (const nlohmann::json::exception& e) {
        config_error("<config>", e.what());
    }
    return c;
}

RunConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "config: cannot open '" + path.string() + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, "config: " + std::string(e.what()));
    }
    return parse_config(doc, path.parent_path());
}

ModelParams model_params(const RunConfig& config)
{
    ModelParams params     = default_params(config.diet);
    params.mated_mortality = config.mated_mortality;
    if (config.N_f0) {
        params.set_initial_population(*config.N_f0, *config.N_m0);
    }
    else {
        const double n0 = calibrate_scale(config.calibrate_mass_mg, ControlSchedule::benchmark(config.horizon_days),
                                          params, config.dt);
        params.set_initial_population(n0, n0);
        spdlog::info("calibrated initial population: {:.6g} flies per sex", n0);
    }
    params.validate();
    return params;
}

void write_file_atomic(const fs::path& path, const std::string& contents)
{
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
        }
        out << contents;
        out.flush();
        if (!out) {
            throw Error(ErrorCode::IoError, "write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCode::IoError, "cannot move output into '" + path.string() + "': " + ec.message());
    }
}

void configure_logging()
{
    const char* env = std::getenv("BSF_LOG");
    // unrecognised names fall back to off inside spdlog, so map those to info explicitly
    const std::string level = env ? env : "info";
    const auto parsed       = spdlog::level::from_str(level);
    spdlog::set_level(parsed == spdlog::level::off && level != "off" ? spdlog::level::info : parsed);
}

namespace {

std::string dump(const nlohmann::json& j)
{
    return j.dump(2) + "\n";
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
    }
}

std::string trajectory_csv(const Trajectory& traj)
{
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    return os.str();
}

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir)
{
    const RunConfig config   = load_config(config_path);
    const ModelParams params = model_params(config);
    const Trajectory traj    = integrate(initial_state(params), config.schedule, params, config.dt);
    const Metrics m          = metrics(traj, params);
    ensure_dir(out_dir);
    write_file_atomic(out_dir / "trajectory.csv", trajectory_csv(traj));
    write_file_atomic(out_dir / "metrics.json", dump(to_json(m)));
    spdlog::info("final egg mass {:.4f} mg", m.m_e_final);
    return kExitOk;
}

int cmd_optimize(const fs::path& config_path, const fs::path& out_dir, std::optional<std::uint64_t> seed)
{
    RunConfig config = load_config(config_path);
    if (seed) {
        config.solver.seed = *seed;
    }
    const ModelParams params = model_params(config);
    const ControlSchedule reference = ControlSchedule::benchmark(config.horizon_days);
    const OCPResult result   = solve(params, config.weights, config.schedule, config.solver, reference);
    const ComparisonReport cmp = compare(reference, result.schedule, params, config.weights, config.dt);

    ensure_dir(out_dir);
    std::ostringstream sched;
    write_schedule_csv(sched, result.schedule);
    write_file_atomic(out_dir / "optimal_schedule.csv", sched.str());
    write_file_atomic(out_dir / "ocp_result.json", dump(to_json(result)));
    nlohmann::json comparison = {{"benchmark", to_json(cmp.a)}, {"optimal", to_json(cmp.b)}};
    write_file_atomic(out_dir / "comparison.json", dump(comparison));
    write_file_atomic(out_dir / "trajectory_optimal.csv",
                      trajectory_csv(integrate(initial_state(params), result.schedule, params, config.dt)));
    spdlog::info("objective {:.6g} (benchmark {:.6g}), egg mass {:.2f} mg vs {:.2f} mg", result.objective,
                 result.benchmark_objective, result.metrics.m_e_final, result.benchmark_metrics.m_e_final);
    return kExitOk;
}

int cmd_fit(const std::string& curve, const fs::path& data_path, const fs::path& init_path, const fs::path& out)
{
    std::ifstream data_in(data_path);
    if (!data_in) {
        throw Error(ErrorCode::IoError, "cannot open data '" + data_path.string() + "'");
    }
    const DataSet data = read_dataset_csv(data_in);

    std::ifstream init_in(init_path);
    if (!init_in) {
        throw Error(ErrorCode::IoError, "cannot open init '" + init_path.string() + "'");
    }
    nlohmann::json init;
    try {
        init = nlohmann::json::parse(init_in);
    }
    catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, "init: " + std::string(e.what()));
    }

    FitResult result;
    try {
        if (curve == "logan10") {
            Logan10Fixed fixed;
            if (init.contains("fixed")) {
                for (const auto& f : init.at("fixed")) {
                    const auto name = f.get<std::string>();
                    if (name == "Tlet") {
                        fixed.T_let = true;
                    }
                    else if (name == "TR") {
                        fixed.T_R = true;
                    }
                    else if (name == "dT") {
                        fixed.dT = true;
                    }
                    else {
                        config_error("init.fixed", "unknown field '" + name + "' (allowed: Tlet, TR, dT)");
                    }
                }
            }
            result = fit_logan10(data, logan10_from_json(init), fixed);
        }
        else {
            result = fit_light(data, light_from_json(init));
        }
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, "init: " + std::string(e.what()));
    }
    if (out.has_parent_path()) {
        ensure_dir(out.parent_path());
    }
    write_file_atomic(out, dump(to_json(result)));
    if (!result.converged) {
        spdlog::error("fit did not converge: {}", to_string(result.status));
        return kExitNotConverged;
    }
    spdlog::info("fit converged after {} iterations, rmse {:.3e}", result.iterations, result.rmse);
    return kExitOk;
}

int cmd_compare(const fs::path& config_path, const fs::path& a_path, const fs::path& b_path,
                const std::optional<fs::path>& out)
{
    const RunConfig config   = load_config(config_path);
    const ModelParams params = model_params(config);
    auto read = [&](const fs::path& p) {
        std::ifstream in(p);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot open schedule '" + p.string() + "'");
        }
        ControlSchedule s = read_schedule_csv(in);
        if (s.days() != config.horizon_days) {
            throw Error(ErrorCode::ConfigError, p.string() + ": schedule length differs from horizon_days");
        }
        return s;
    };
    const ComparisonReport report = compare(read(a_path), read(b_path), params, config.weights, config.dt);
    const std::string text        = dump(to_json(report));
    if (out) {
        write_file_atomic(*out, text);
    }
    else {
        std::cout << text;
    }
    return kExitOk;
}

int cmd_presets(const std::optional<fs::path>& out)
{
    const std::string text = dump(presets_json());
    if (out) {
        write_file_atomic(*out, text);
    }
    else {
        std::cout << text;
    }
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args)
{
    configure_logging();

    CLI::App app{"Black soldier fly egg production: simulation, curve fitting and optimal control"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    auto* sim = app.add_subcommand("simulate", "Simulate a schedule and write trajectory and metrics");
    sim->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sim->add_option("--out-dir", out_dir, "Output directory")->required();

    auto* opt = app.add_subcommand("optimize", "Compute the optimal daily temperature/light schedule");
    opt->add_option("--config", config_path, "Run configuration (JSON)")->required();
    opt->add_option("--out-dir", out_dir, "Output directory")->required();
    opt->add_option("--seed", seed, "Seed for the random starts");

    std::string curve;
    std::string data_path;
    std::string init_path;
    std::string fit_out;
    auto* fit = app.add_subcommand("fit", "Fit a response curve to tabular data");
    fit->add_option("--curve", curve, "Curve kind")->required()->check(CLI::IsMember({"logan10", "light"}));
    fit->add_option("--data", data_path, "CSV with header x,y[,w]")->required();
    fit->add_option("--init", init_path, "Initial parameters (JSON)")->required();
    fit->add_option("--out", fit_out, "Fit result (JSON)")->required();

    std::string a_path;
    std::string b_path;
    std::optional<std::string> cmp_out;
    auto* cmp = app.add_subcommand("compare", "Compare two schedules");
    cmp->add_option("--config", config_path, "Run configuration (JSON)")->required();
    cmp->add_option("--schedule-a", a_path, "Schedule CSV (day,T_degC,tau_h)")->required();
    cmp->add_option("--schedule-b", b_path, "Schedule CSV (day,T_degC,tau_h)")->required();
    cmp->add_option("--out", cmp_out, "Write the report here instead of stdout");

    std::optional<std::string> presets_out;
    auto* pre = app.add_subcommand("presets", "Print the shipped response-curve presets");
    pre->add_option("--out", presets_out, "Write to file instead of stdout");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(config_path, out_dir);
        }
        if (opt->parsed()) {
            return cmd_optimize(config_path, out_dir, seed);
        }
        if (fit->parsed()) {
            return cmd_fit(curve, data_path, init_path, fit_out);
        }
        if (cmp->parsed()) {
            return cmd_compare(config_path, a_path, b_path,
                               cmp_out ? std::optional<fs::path>(*cmp_out) : std::nullopt);
        }
        if (pre->parsed()) {
            return cmd_presets(presets_out ? std::optional<fs::path>(*presets_out) : std::nullopt);
        }
    }
    catch (const Error& e) {
        spdlog::error("{}", e.what());
        return is_numerical(e.code()) ? kExitNumerical : kExitConfig;
    }
    catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}

} // namespace bsf
