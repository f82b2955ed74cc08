#pragma once

#include "gito/config.hpp"
#include "gito/harness.hpp"
#include "gito/ingest.hpp"
#include "gito/io.hpp"
#include "gito/metrics.hpp"
#include "gito/simulate.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace gito {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    exit_ok = 0,
    exit_other = 1,
    exit_config = 2,
    exit_data = 3,
    exit_fit = 4,
    exit_io = 5,
};

class FitFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace app {

namespace fs = std::filesystem;

inline fs::path output_dir(const RunConfig& cfg) {
    if (cfg.has("output_dir")) return cfg.str("output_dir");
    if (const char* env = std::getenv("GITO_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

/// Evaluate a parser from the library and report its InputError as a configuration error.
template <class F>
auto config_value(F&& parse) {
    try {
        return parse();
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
}

inline ModelOptions model_options(const RunConfig& cfg) {
    ModelOptions mo;
    mo.fit.optimizer.starts = static_cast<int>(cfg.uint("starts", 8));
    mo.fit.optimizer.max_iter = static_cast<int>(cfg.uint("max_iter", 2000));
    mo.fit.optimizer.tol = cfg.num("tol", 1e-8);
    mo.fit.optimizer.seed = cfg.uint("seed", 0);
    if (mo.fit.optimizer.starts < 1) throw ConfigError("starts must be >= 1");
    return mo;
}

inline RvOptions rv_options(const RunConfig& cfg, RvOptions fallback) {
    if (cfg.has("rv")) {
        const std::string s = cfg.str("rv");
        if (s == "naive") fallback.kind = RvKind::naive;
        else if (s == "tsrv") fallback.kind = RvKind::tsrv;
        else throw ConfigError("rv must be naive or tsrv");
    }
    fallback.slow_scale = cfg.uint("tsrv_k", fallback.slow_scale);
    return fallback;
}

inline unsigned threads(const RunConfig& cfg) {
    return static_cast<unsigned>(std::max<std::uint64_t>(1, cfg.uint("threads", 1)));
}

inline std::string require_model(const RunConfig& cfg) {
    const std::string m = cfg.require("model");
    if (!is_model_tag(m)) throw ConfigError("unknown model tag: " + m);
    return m;
}

/// Panel from `panel` or from the three ingestion files. Settings are checked
/// before any file is parsed.
inline DailyPanel load_panel(const RunConfig& cfg, bool need_implied, std::ostream& log) {
    if (cfg.has("panel")) {
        for (const char* k : {"hf_csv", "daily_csv", "implied_csv"}) {
            if (cfg.has(k)) throw ConfigError(std::string("panel and ") + k + " are mutually exclusive");
        }
        DailyPanel p = parse_panel_csv(read_csv(cfg.str("panel")), cfg.str("panel"));
        if (need_implied && !p.has_implied()) throw ConfigError("model needs an implied series but the panel has none");
        return p;
    }
    const std::string hf = cfg.require("hf_csv");
    const std::string daily = cfg.require("daily_csv");
    const std::string implied = cfg.str("implied_csv");
    IngestOptions io;
    io.rv = rv_options(cfg, {});
    io.implied = config_value([&] { return parse_implied_convention(cfg.str("implied_convention", "variance")); });
    io.forward_fill = cfg.flag("forward_fill", false);
    io.min_ticks = cfg.uint("min_ticks", 2);
    if (need_implied) {
        if (implied.empty()) throw ConfigError("model needs implied data but implied_csv is not set");
        if (read_csv(implied).rows.empty()) throw ConfigError("model needs implied data but " + implied + " is empty");
    }
    IngestResult r = ingest(hf, daily, implied, io);
    const auto& d = r.diagnostics;
    log << "ingest: " << r.panel.n() << " days; high-frequency rows " << d.high_freq.rows_in << " in, "
        << d.high_freq.rows_used << " used, " << d.high_freq.rows_dropped << " dropped\n";
    for (const auto& m : d.messages) log << "ingest: " << m << '\n';
    return std::move(r.panel);
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    const Dgp dgp = config_value([&] { return parse_dgp(cfg.str("dgp", "garch_ito_oi")); });
    SimConfig sc;
    sc.n_days = cfg.uint("n_days", 150);
    sc.steps_per_day = cfg.has("interval")
                           ? steps_per_day(config_value([&] { return parse_sampling(cfg.str("interval")); }))
                           : cfg.uint("steps_per_day", 390);
    sc.seed = cfg.uint("seed", 0);
    const bool heston = dgp == Dgp::heston || dgp == Dgp::jump;
    sc.noise_var = cfg.num("noise_var", heston ? 0.0 : 1e-6);
    sc.x0 = cfg.num("x0", heston ? std::log(50.0) : 10.0);
    sc.sigma0_sq = cfg.num("sigma0_sq", heston ? 0.05 : 0.2);
    sc.day_length = cfg.num("day_length", heston ? kTradingDay : 1.0);
    sc.implied0 = cfg.num("implied0", dgp == Dgp::garch_ito_iv ? 0.25 : std::numeric_limits<double>::quiet_NaN());
    const RvOptions rv = rv_options(cfg, default_rv(sc.noise_var));
    config_value([&] {
        sc.check();
        return 0;
    });

    SimulationOutput sim;
    switch (dgp) {
        case Dgp::garch_ito_oi: {
            ThetaOI t{cfg.num("omega", kTheta0.omega), cfg.num("beta", kTheta0.beta), cfg.num("gamma", kTheta0.gamma),
                      cfg.num("alpha", kTheta0.alpha)};
            if (!validate_theta(t)) throw ConfigError("theta is outside the feasible region");
            NormalImplied gen{cfg.num("implied_mean", 0.0), cfg.num("implied_variance", 0.5)};
            if (!(gen.variance >= 0.0)) throw ConfigError("implied_variance must be >= 0");
            sim = simulate_garch_ito_oi(t, gen, sc);
            break;
        }
        case Dgp::garch_ito_iv: {
            PhiIV p{cfg.num("omega", kPhi0.omega), cfg.num("beta", kPhi0.beta), cfg.num("gamma", kPhi0.gamma),
                    cfg.num("rho", kPhi0.rho),     cfg.num("a", kPhi0.a),       cfg.num("b", kPhi0.b),
                    cfg.num("sigma_u2", kPhi0.sigma_u2)};
            if (!validate_phi(p)) throw ConfigError("phi is outside the feasible region");
            sim = simulate_garch_ito_iv(p, sc);
            break;
        }
        case Dgp::heston:
        case Dgp::jump: {
            HestonParams hp = heston_design(dgp);
            hp.r = cfg.num("heston_r", hp.r);
            hp.a = cfg.num("heston_a", hp.a);
            hp.b = cfg.num("heston_b", hp.b);
            hp.gamma_vol = cfg.num("heston_gamma", hp.gamma_vol);
            hp.rho = cfg.num("heston_rho", hp.rho);
            hp.lambda = cfg.num("heston_lambda", hp.lambda);
            hp.sigma_J = cfg.num("heston_sigma_j", hp.sigma_J);
            config_value([&] {
                hp.check();
                return 0;
            });
            sim = simulate_heston(hp, sc);
            for (double& v : sim.implied) v *= sc.day_length;
            break;
        }
    }
    const DailyPanel panel = make_panel(sim, rv);
    const fs::path dir = output_dir(cfg);
    write_file(dir / "paths.csv", paths_csv(sim.paths));
    write_file(dir / "implied.csv", implied_csv(sim.implied));
    write_file(dir / "panel.csv", panel_csv(panel));
    log << "simulate: " << panel.n() << " days x " << sc.steps_per_day << " steps; " << sim.clamped_implied
        << " implied values clamped; wrote " << (dir / "panel.csv").string() << '\n';
    return exit_ok;
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& log) {
    const std::string model = require_model(cfg);
    const ModelOptions mo = model_options(cfg);
    const DailyPanel panel = load_panel(cfg, model_uses_implied(model), log);
    const FittedModel fit = fit_model(model, panel, mo);
    const fs::path out = output_dir(cfg) / ("fit_" + model + ".json");
    write_file(out, fit_record(fit).dump(2) + "\n");
    log << "fit: " << model << " on " << panel.n() << " days; wrote " << out.string() << '\n';
    if (!fit.converged) throw FitFailure(model + ": optimizer did not converge (best iterate written)");
    return exit_ok;
}

inline int cmd_forecast(const RunConfig& cfg, std::ostream& log) {
    const std::string model = require_model(cfg);
    const ModelOptions mo = model_options(cfg);
    const std::size_t refit = cfg.uint("refit_every", 1);
    if (refit < 1) throw ConfigError("refit_every must be >= 1");
    const DailyPanel panel = load_panel(cfg, model_uses_implied(model), log);
    const std::size_t split = cfg.uint("split", panel.n() > 50 ? panel.n() - 50 : 0);
    if (split >= panel.n()) throw ConfigError("split must be smaller than the panel length");
    RollingResult r;
    try {
        r = rolling_forecast(model, panel, split, refit, mo);
    } catch (const HarnessError& e) {
        throw FitFailure(e.what());
    }
    const LossReport losses = evaluate_losses(r.forecasts, r.realized);
    const fs::path dir = output_dir(cfg);
    write_file(dir / ("forecasts_" + model + ".csv"), forecasts_csv(r, split + 1));
    write_file(dir / ("losses_" + model + ".csv"), loss_header() + loss_row(model, losses, 0));
    log << "forecast: " << model << " days " << split + 1 << ".." << panel.n() << "; " << r.fits << " fits, "
        << r.failed_fits << " failed\n";
    return exit_ok;
}

inline std::vector<double> read_column(const std::string& path, const std::string& column) {
    const CsvTable t = read_csv(path);
    const std::size_t c = t.column(column);
    std::vector<double> out;
    for (const auto& row : t.rows) out.push_back(parse_double(row.fields[c], path + ":" + std::to_string(row.line)));
    return out;
}

inline int cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
    const std::string fpath = cfg.require("forecast_csv");
    const std::string rpath = cfg.str("realized_csv", fpath);
    const std::string fcol = cfg.str("forecast_column", "forecast");
    const std::string rcol = cfg.str("realized_column", "realized");
    const std::string label = cfg.str("label", "model");
    const bool plot = cfg.flag("plot", false);
    const std::vector<double> F = read_column(fpath, fcol);
    const std::vector<double> RV = read_column(rpath, rcol);
    if (F.size() != RV.size()) {
        throw DataError("forecast and realized series differ in length (" + std::to_string(F.size()) + " vs " +
                        std::to_string(RV.size()) + ")");
    }
    const LossReport losses = evaluate_losses(F, RV);
    const fs::path dir = output_dir(cfg);
    write_file(dir / "losses.csv", loss_header() + loss_row(label, losses, 0));
    if (plot) write_file(dir / "losses.svg", bar_chart_svg({{label, losses.mae}}, "MAE"));
    log << "evaluate: " << losses.n_forecasts << " forecasts, " << losses.n_dropped_for_ll
        << " dropped from LL\n";
    return exit_ok;
}

inline int cmd_mc_study(const RunConfig& cfg, std::ostream& log) {
    const std::string design = cfg.str("design", "table");
    const ModelOptions mo = model_options(cfg);
    const fs::path dir = output_dir(cfg);
    const bool plot = cfg.flag("plot", false);
    if (design == "low_frequency") {
        LowFrequencyConfig lf;
        const std::string model = cfg.str("model", "oi");
        if (model != "oi" && model != "iv") throw ConfigError("model must be oi or iv");
        lf.model = model == "oi" ? ConsistencyModel::oi : ConsistencyModel::iv;
        lf.reps = cfg.uint("reps", 50);
        lf.seed = cfg.uint("seed", 0);
        lf.periods = cfg.uint("periods", 600);
        lf.steps_per_period = cfg.uint("steps_per_period", 780);
        lf.oos_days = cfg.uint("oos_days", 50);
        lf.refit_every = cfg.uint("refit_every", 1);
        lf.model_options = mo;
        lf.threads = threads(cfg);
        const auto rows = low_frequency_study(lf);
        write_file(dir / ("low_frequency_" + model + ".csv"), low_frequency_csv(rows));
        if (plot) {
            std::vector<std::pair<std::string, double>> bars;
            for (const auto& r : rows) bars.emplace_back("factor " + std::to_string(r.factor), r.losses.mae);
            write_file(dir / ("low_frequency_" + model + ".svg"), bar_chart_svg(bars, "MAE"));
        }
        log << "mc-study: low-frequency design, " << lf.reps << " reps\n";
        return exit_ok;
    }
    if (design != "table") throw ConfigError("design must be table or low_frequency");
    McConfig mc;
    mc.dgp = config_value([&] { return parse_dgp(cfg.str("dgp", "heston")); });
    mc.sampling = config_value([&] { return parse_sampling(cfg.str("interval", "5min")); });
    mc.reps = cfg.uint("reps", 100);
    mc.seed = cfg.uint("seed", 0);
    if (cfg.has("models")) mc.models = cfg.list("models");
    for (const auto& m : mc.models) {
        if (!is_model_tag(m)) throw ConfigError("unknown model tag: " + m);
    }
    mc.in_sample = cfg.uint("in_sample", 100);
    mc.model_options = mo;
    mc.threads = threads(cfg);
    const McTable table = mc_study(mc);
    const std::string stem = "mc_" + to_string(mc.dgp) + "_" + to_string(mc.sampling);
    write_file(dir / (stem + ".csv"), mc_table_csv(table));
    if (plot) {
        std::vector<std::pair<std::string, double>> bars;
        for (const auto& r : table.rows) bars.emplace_back(r.tag, r.losses.mae);
        write_file(dir / (stem + ".svg"), bar_chart_svg(bars, "mean MAE"));
    }
    log << "mc-study: " << to_string(mc.dgp) << " " << to_string(mc.sampling) << ", " << mc.reps << " reps, "
        << table.failed_simulations << " failed simulations\n";
    return exit_ok;
}

inline int cmd_consistency(const RunConfig& cfg, std::ostream& log) {
    ConsistencyConfig cc;
    const std::string model = cfg.str("model", "oi");
    if (model != "oi" && model != "iv") throw ConfigError("model must be oi or iv");
    cc.model = model == "oi" ? ConsistencyModel::oi : ConsistencyModel::iv;
    if (cfg.has("n_grid")) cc.n_grid = cfg.size_list("n_grid");
    cc.m = cfg.uint("m", 390);
    cc.reps = cfg.uint("reps", 50);
    cc.seed = cfg.uint("seed", 0);
    cc.truth_start = cfg.flag("truth_start", false);
    cc.model_options = model_options(cfg);
    cc.threads = threads(cfg);
    if (cc.n_grid.empty()) throw ConfigError("n_grid must not be empty");
    const auto rows = consistency_check(cc);
    write_file(output_dir(cfg) / ("consistency_" + model + ".csv"), consistency_csv(rows));
    log << "consistency: " << model << ", " << cc.reps << " reps\n";
    return exit_ok;
}

}  // namespace app

/// Dispatch one subcommand. Errors are reported on `err` and mapped to exit codes.
inline int run(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    try {
        const std::string& c = cfg.command();
        if (c == "simulate") return app::cmd_simulate(cfg, log);
        if (c == "fit") return app::cmd_fit(cfg, log);
        if (c == "forecast") return app::cmd_forecast(cfg, log);
        if (c == "evaluate") return app::cmd_evaluate(cfg, log);
        if (c == "mc-study") return app::cmd_mc_study(cfg, log);
        if (c == "consistency") return app::cmd_consistency(cfg, log);
        throw ConfigError("unknown subcommand: " + c);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return exit_io;
    } catch (const FitFailure& e) {
        err << "fit error: " << e.what() << '\n';
        return exit_fit;
    } catch (const InputError& e) {
        err << "data error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_other;
    }
}

}  // namespace gito
