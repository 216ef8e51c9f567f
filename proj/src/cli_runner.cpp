#include "segwave/cli_runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "segwave/config.hpp"
#include "segwave/io.hpp"
#include "segwave/limits.hpp"
#include "segwave/speedsign.hpp"

namespace segwave {

namespace {

using nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::string preset_name;
    std::string out_dir;
    double k = 0.0;
    bool k_given = false;
    std::string schedule;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "config file path");
    cmd->add_option("--preset", args.preset_name,
                    "preset name (LotkaVolterra, PottsPetrovskii, SKT, "
                    "GeneralizedSKT)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--k", args.k, "competition strength for single solves")
        ->each([&args](const std::string&) { args.k_given = true; });
    cmd->add_option("--schedule", args.schedule,
                    "comma-separated k schedule");
    cmd->add_option("--set", args.sets,
                    "section.key=value override, repeatable");
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg;
    bool dir_from_file = false;
    if (!args.config_path.empty()) {
        cfg = parse_config_file(args.config_path);
        dir_from_file = true;  // directory may still be the default
    }
    if (!args.preset_name.empty()) {
        cfg.assign("preset.name", args.preset_name);
    }
    for (const std::string& kv : args.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects section.key=value");
        }
        cfg.assign(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.k_given) {
        cfg.preset.params["k"] = args.k;
    }
    if (!args.schedule.empty()) {
        cfg.assign("solver.k_schedule", args.schedule);
    }
    if (!args.out_dir.empty()) {
        cfg.out_dir = args.out_dir;
    } else if (!dir_from_file || cfg.out_dir == "out") {
        if (const char* env = std::getenv("SEGWAVE_OUT_DIR")) {
            cfg.out_dir = env;
        }
    }
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

json config_json(const RunConfig& cfg) {
    json preset;
    preset["name"] = to_string(cfg.preset.name);
    for (const auto& [key, value] : cfg.preset.params) preset[key] = value;
    json solver;
    solver["L"] = cfg.solver.L;
    solver["N"] = cfg.solver.N;
    solver["newton_tol"] = cfg.solver.newton_tol;
    solver["max_newton_iters"] = cfg.solver.max_newton_iters;
    solver["damping"] = cfg.solver.damping;
    solver["bc_tol"] = cfg.solver.bc_tol;
    solver["k_schedule"] = cfg.solver.k_schedule;
    solver["phase_anchor"] =
        cfg.solver.phase_anchor == PhaseAnchor::automatic
            ? "auto"
            : (cfg.solver.phase_anchor == PhaseAnchor::phi_half ? "phi_half"
                                                                : "psi_half");
    solver["analytic_jacobian"] = cfg.solver.analytic_jacobian;
    solver["speed_tol"] = cfg.match.speed_tol;
    solver["flux_tol_rel"] = cfg.match.flux_tol_rel;
    solver["front_tol"] = cfg.match.shoot.front_tol;
    solver["rk_tol"] = cfg.match.shoot.rel_tol;
    solver["xi_step"] = cfg.match.xi_step;
    solver["grid_n"] = cfg.grid_n;
    json output;
    output["directory"] = cfg.out_dir;
    output["formats"] = cfg.formats;
    return json{{"preset", preset}, {"solver", solver}, {"output", output}};
}

void write_json(const RunConfig& cfg, const std::string& name,
                const json& value) {
    for (const std::string& fmt : cfg.formats) {
        if (fmt == "json") {
            write_text_file(
                (std::filesystem::path(cfg.out_dir) / name).string(),
                value.dump(2) + "\n");
        }
    }
}

bool csv_enabled(const RunConfig& cfg) {
    for (const std::string& fmt : cfg.formats) {
        if (fmt == "csv") return true;
    }
    return false;
}

std::string csv_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::string k_tag(double k) {
    std::string s = format_double(k);
    for (char& c : s) {
        if (c == '.') c = 'p';
        if (c == '+') c = '_';
    }
    return s;
}

SpeedOptions speed_options(const RunConfig& cfg) {
    SpeedOptions so;
    so.speed_tol = cfg.match.speed_tol;
    so.shoot = cfg.match.shoot;
    return so;
}

PhaseAnchor anchor_by_speeds(const RunConfig& cfg, double c_inf,
                             double c_star_pos, double c_star_neg) {
    if (cfg.solver.phase_anchor != PhaseAnchor::automatic) {
        return cfg.solver.phase_anchor;
    }
    return c_inf <= 0.5 * (c_star_pos - c_star_neg) ? PhaseAnchor::phi_half
                                                    : PhaseAnchor::psi_half;
}

int cmd_validate(const RunConfig& cfg) {
    const CompetitionSystem sys = make_preset(cfg.preset);
    const ValidationReport report = validate_assumptions(sys, cfg.grid_n);
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back(json{{"name", c.name},
                              {"pass", c.pass},
                              {"worst_value", c.worst_value},
                              {"worst_u", c.worst_u},
                              {"worst_v", c.worst_v},
                              {"detail", c.detail}});
    }
    write_json(cfg, "validate.json",
               json{{"checks", checks},
                    {"all_pass", report.all_pass()},
                    {"config", config_json(cfg)}});
    for (const auto& c : report.checks) {
        std::cout << (c.pass ? "pass  " : "FAIL  ") << c.name << "\n";
    }
    return report.all_pass() ? 0 : 2;
}

json speed_json(const MinimalSpeedResult& r, const SpeedEstimates& est,
                const std::optional<double>& linear) {
    json j;
    j["side"] = to_string(r.side);
    j["c_star"] = r.c_star;
    j["bracket"] = {r.bracket_lo, r.bracket_hi};
    j["iterations"] = r.iterations;
    j["linearly_determined"] = r.linearly_determined;
    j["lower_estimate"] =
        r.side == Side::positive ? est.lower_pos : est.lower_neg;
    j["upper_estimate"] =
        r.side == Side::positive ? est.upper_pos : est.upper_neg;
    if (linear) {
        j["linear_value"] = *linear;
    } else {
        j["linear_value"] = nullptr;
    }
    return j;
}

int cmd_minimal_speed(const RunConfig& cfg, const std::string& side_arg) {
    const CompetitionSystem sys = make_preset(cfg.preset);
    const ScalarLimitProblem problem = reduce_to_scalar(sys);
    const SpeedEstimates est = speed_estimates(problem);
    std::vector<Side> sides;
    if (side_arg == "positive" || side_arg == "pos" || side_arg == "both") {
        sides.push_back(Side::positive);
    }
    if (side_arg == "negative" || side_arg == "neg" || side_arg == "both") {
        sides.push_back(Side::negative);
    }
    if (sides.empty()) {
        throw ConfigError("--side expects positive, negative or both");
    }
    for (Side side : sides) {
        const MinimalSpeedResult r = minimal_speed(problem, side,
                                                   speed_options(cfg));
        json j = speed_json(r, est, kpp_linear_speed(problem, side));
        j["config"] = config_json(cfg);
        const std::string name = side == Side::positive
                                     ? "cstar_positive.json"
                                     : "cstar_negative.json";
        write_json(cfg, name, j);
        std::cout << "c*" << (side == Side::positive ? "+" : "-") << " = "
                  << format_double(r.c_star) << "\n";
    }
    return 0;
}

struct Pipeline {
    CompetitionSystem sys;
    ScalarLimitProblem problem;
    MinimalSpeedResult pos;
    MinimalSpeedResult neg;
    LimitWave limit;
};

Pipeline run_pipeline(const RunConfig& cfg, double xi_half_span) {
    Pipeline p{make_preset(cfg.preset), {}, {}, {}, {}};
    p.problem = reduce_to_scalar(p.sys);
    p.pos = minimal_speed(p.problem, Side::positive, speed_options(cfg));
    p.neg = minimal_speed(p.problem, Side::negative, speed_options(cfg));
    MatchOptions mo = cfg.match;
    if (xi_half_span > 0.0) mo.xi_half_span = xi_half_span;
    p.limit = match_bistable(p.problem, p.pos, p.neg, mo);
    return p;
}

int cmd_limit_wave(const RunConfig& cfg) {
    const Pipeline p = run_pipeline(cfg, 0.0);
    if (csv_enabled(cfg)) {
        write_csv(csv_path(cfg, "limit_wave.csv"), {"xi", "z", "phi", "psi"},
                  {p.limit.xi_grid, p.limit.z_values, p.limit.phi_values,
                   p.limit.psi_values});
    }
    json j;
    j["c_inf"] = p.limit.c_inf;
    j["c_star_plus"] = p.pos.c_star;
    j["c_star_minus"] = p.neg.c_star;
    j["flux_at_zero"] = p.limit.flux_at_zero;
    j["free_boundary_residual"] = free_boundary_residual(p.limit, p.problem);
    j["match_gap"] = p.limit.match_gap;
    j["match_iterations"] = p.limit.match_iterations;
    j["config"] = config_json(cfg);
    write_json(cfg, "limit_wave.json", j);
    std::cout << "c_inf = " << format_double(p.limit.c_inf) << " in ("
              << format_double(-p.neg.c_star) << ", "
              << format_double(p.pos.c_star) << ")\n";
    return 0;
}

int cmd_system_wave(const RunConfig& cfg) {
    const Pipeline p = run_pipeline(cfg, cfg.solver.L);
    const double k = cfg.preset.get("k", 100.0);
    SolverConfig sc = cfg.solver;
    sc.phase_anchor =
        anchor_by_speeds(cfg, p.limit.c_inf, p.pos.c_star, p.neg.c_star);
    const DiscretizedWave guess = initial_guess_from_limit(p.limit, k, sc);
    const DiscretizedWave wave = solve_tw(p.sys, k, sc, guess);
    if (csv_enabled(cfg)) {
        write_csv(csv_path(cfg, "system_wave_k" + k_tag(k) + ".csv"),
                  {"xi", "phi", "psi"}, {wave.grid, wave.phi, wave.psi});
    }
    json j;
    j["k"] = k;
    j["c_k"] = wave.c;
    j["residual_norm"] = wave.residual_norm;
    j["monotone_ok"] = wave.monotone_ok;
    j["newton_iterations"] = wave.newton_iterations;
    j["segregation_max"] = wave.segregation_max();
    j["l2_phi_prime"] = wave.l2_phi_prime;
    j["l2_psi_prime"] = wave.l2_psi_prime;
    j["c_inf"] = p.limit.c_inf;
    j["config"] = config_json(cfg);
    write_json(cfg, "system_wave.json", j);
    std::cout << "c_k = " << format_double(wave.c) << " at k = "
              << format_double(k) << "\n";
    return 0;
}

int cmd_sweep_k(const RunConfig& cfg) {
    const CompetitionSystem sys = make_preset(cfg.preset);
    const ConvergenceReport report =
        convergence_study(sys, cfg.solver, cfg.match);

    if (csv_enabled(cfg)) {
        std::string csv = "k,c_k,dc,sup_dist,deriv_l1,segregation,status\n";
        for (const auto& row : report.rows) {
            csv += format_double(row.k) + ",";
            if (row.converged) {
                csv += format_double(row.c_k) + "," +
                       format_double(row.speed_gap) + "," +
                       format_double(row.sup_dist) + "," +
                       format_double(row.deriv_l1) + "," +
                       format_double(row.segregation) + ",ok\n";
            } else {
                csv += ",,,,,failed\n";
            }
        }
        write_text_file(csv_path(cfg, "sweep.csv"), csv);
    }

    // per-k profiles require re-solving along the same schedule; reuse the
    // continuation to keep the outputs consistent with the report
    if (csv_enabled(cfg)) {
        SpeedOptions so = speed_options(cfg);
        const ScalarLimitProblem problem = reduce_to_scalar(sys);
        const MinimalSpeedResult pos =
            minimal_speed(problem, Side::positive, so);
        const MinimalSpeedResult neg =
            minimal_speed(problem, Side::negative, so);
        MatchOptions mo = cfg.match;
        mo.xi_half_span = cfg.solver.L;
        const LimitWave limit = match_bistable(problem, pos, neg, mo);
        SolverConfig sc = cfg.solver;
        sc.phase_anchor =
            anchor_by_speeds(cfg, limit.c_inf, pos.c_star, neg.c_star);
        for (const ContinuationStep& step : continue_in_k(sys, sc, limit)) {
            if (!step.converged) break;
            write_csv(csv_path(cfg, "profile_k" + k_tag(step.k) + ".csv"),
                      {"xi", "phi", "psi"},
                      {step.wave.grid, step.wave.phi, step.wave.psi});
        }
    }

    json rows = json::array();
    for (const auto& row : report.rows) {
        json r;
        r["k"] = row.k;
        r["converged"] = row.converged;
        if (row.converged) {
            r["c_k"] = row.c_k;
            r["dc"] = row.speed_gap;
            r["sup_dist"] = row.sup_dist;
            r["deriv_l1"] = row.deriv_l1;
            r["segregation"] = row.segregation;
        } else {
            r["note"] = row.note;
        }
        rows.push_back(r);
    }
    write_json(cfg, "sweep.json",
               json{{"c_inf", report.c_inf},
                    {"c_star_plus", report.c_star_pos},
                    {"c_star_minus", report.c_star_neg},
                    {"flux_at_zero", report.flux_at_zero},
                    {"tail_bound_sup", report.tail_bound_sup},
                    {"rows", rows},
                    {"config", config_json(cfg)}});
    bool all_ok = true;
    for (const auto& row : report.rows) all_ok = all_ok && row.converged;
    std::cout << "sweep: " << report.rows.size() << " steps, c_inf = "
              << format_double(report.c_inf)
              << (all_ok ? "" : " (partial)") << "\n";
    return 0;
}

int cmd_speed_sign(const RunConfig& cfg, bool with_cross_check) {
    const CompetitionSystem sys = make_preset(cfg.preset);
    const SignReport report = sign_functional(sys);
    json j;
    j["applicable"] = report.applicable;
    j["I1"] = report.I1;
    j["I2"] = report.I2;
    j["S"] = report.S;
    j["h0"] = report.h0;
    j["predicted_sign"] = report.predicted_sign;
    j["quadrature_error"] = report.quadrature_error;
    if (!report.applicable) {
        j["inapplicable_reason"] = report.inapplicable_reason;
        j["config"] = config_json(cfg);
        write_json(cfg, "sign.json", j);
        std::cerr << "sign formula inapplicable: " << report.inapplicable_reason
                  << "\n";
        return 2;
    }
    if (with_cross_check) {
        const Pipeline p = run_pipeline(cfg, 0.0);
        const SignCrossCheck chk =
            cross_check_sign(report, p.limit.c_inf, cfg.match.speed_tol);
        j["c_inf"] = chk.c_inf;
        j["verdict"] = to_string(chk.verdict);
    }
    j["config"] = config_json(cfg);
    write_json(cfg, "sign.json", j);
    std::cout << "S = " << format_double(report.S) << " (sign "
              << report.predicted_sign << ")\n";
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"traveling-wave laboratory for strongly competitive "
                 "two-species systems"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string side = "both";
    bool cross_check = false;

    CLI::App* validate = app.add_subcommand(
        "validate", "sample the modeling assumptions on a grid");
    CLI::App* minimal = app.add_subcommand(
        "minimal-speed", "minimal speeds of the one-sided fronts");
    minimal->add_option("--side", side, "positive, negative or both");
    CLI::App* limitw = app.add_subcommand(
        "limit-wave", "segregated wave of the infinite-competition limit");
    CLI::App* systemw = app.add_subcommand(
        "system-wave", "finite-k two-species wave at one k");
    CLI::App* sweep = app.add_subcommand(
        "sweep-k", "waves along the k schedule with limit metrics");
    CLI::App* sign = app.add_subcommand(
        "speed-sign", "sign functional of the limiting speed");
    sign->add_flag("--cross-check", cross_check,
                   "also compute the limit wave and compare signs");
    for (CLI::App* cmd : {validate, minimal, limitw, systemw, sweep, sign}) {
        add_common(cmd, common);
    }

    std::vector<char*> argv;
    std::string prog = "segwave";
    argv.push_back(prog.data());
    for (std::string& a : args) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const RunConfig cfg = resolve_config(common);
        if (validate->parsed()) return cmd_validate(cfg);
        if (minimal->parsed()) return cmd_minimal_speed(cfg, side);
        if (limitw->parsed()) return cmd_limit_wave(cfg);
        if (systemw->parsed()) return cmd_system_wave(cfg);
        if (sweep->parsed()) return cmd_sweep_k(cfg);
        if (sign->parsed()) return cmd_speed_sign(cfg, cross_check);
    } catch (const A6ViolationError& e) {
        std::cerr << "hypothesis violation: " << e.what()
                  << " (c*+ = " << e.c_star_pos << ", c*- = " << e.c_star_neg
                  << ")\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace segwave
