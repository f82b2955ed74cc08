#pragma once

#include "gito/benchmarks.hpp"
#include "gito/core.hpp"
#include "gito/metrics.hpp"
#include "gito/models.hpp"
#include "gito/panel.hpp"
#include "gito/rng.hpp"
#include "gito/rv.hpp"
#include "gito/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace gito {

class HarnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Model registry
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& model_tags() {
    static const std::vector<std::string> tags{
        "garch_ito", "garch_ito_oi", "garch_ito_iv", "har_rv",   "har_rv_oi",
        "rgarch_rv", "rgarch_iv",    "rgarch_oi",    "garch_oi", "iv_reg",
    };
    return tags;
}

inline bool is_model_tag(std::string_view tag) {
    const auto& t = model_tags();
    return std::find(t.begin(), t.end(), tag) != t.end();
}

inline bool model_uses_implied(std::string_view tag) {
    return tag == "garch_ito_oi" || tag == "garch_ito_iv" || tag == "har_rv_oi" ||
           tag == "rgarch_iv" || tag == "rgarch_oi" || tag == "garch_oi" || tag == "iv_reg";
}

struct ModelOptions {
    FitOptions fit;
    BoxBounds bounds;
    RealizedGarchBounds rgarch_bounds;
    GarchOiBounds garch_oi_bounds;
};

/// A fitted model of any family, with a forecast closure over its parameters.
struct FittedModel {
    std::string tag;
    std::vector<std::pair<std::string, double>> params;
    double loglik = std::numeric_limits<double>::quiet_NaN();
    bool converged = true;
    int iterations = 0;
    std::vector<std::string> diagnostics;
    std::function<double(const DailyPanel&)> forecast;
};

namespace detail {

template <class P>
std::vector<std::pair<std::string, double>> named(const P& p) {
    std::vector<std::pair<std::string, double>> out;
    const auto values = p.to_array();
    for (std::size_t k = 0; k < values.size(); ++k) out.emplace_back(P::names[k], values[k]);
    return out;
}

template <class P, class Forecast>
FittedModel from_qmle(std::string tag, FitResult<P> fit, Forecast fc) {
    FittedModel m;
    m.tag = std::move(tag);
    m.params = named(fit.params);
    m.loglik = fit.loglik;
    m.converged = fit.converged;
    m.iterations = fit.iterations;
    m.diagnostics = fit.diagnostics;
    m.forecast = [fit = std::move(fit), fc](const DailyPanel& p) { return fc(fit, p); };
    return m;
}

inline FittedModel from_har(std::string tag, HarRvFit fit) {
    FittedModel m;
    m.tag = std::move(tag);
    m.params = {{"c", fit.c}, {"beta_d", fit.beta_d}, {"beta_w", fit.beta_w}, {"beta_m", fit.beta_m}};
    if (fit.beta_oi) m.params.emplace_back("beta_oi", *fit.beta_oi);
    m.params.emplace_back("residual_var", fit.residual_var);
    for (const auto& c : fit.collinear) m.diagnostics.push_back("collinear column: " + c);
    m.forecast = [fit = std::move(fit)](const DailyPanel& p) { return forecast_har_rv(fit, p); };
    return m;
}

}  // namespace detail

/// Fit the model family named by `tag`. Throws InputError for unknown tags.
inline FittedModel fit_model(std::string_view tag, const DailyPanel& panel,
                             const ModelOptions& opts = {}) {
    const std::string t(tag);
    if (tag == "garch_ito_oi") {
        return detail::from_qmle(t, fit_oi(panel, opts.bounds, opts.fit), forecast_oi);
    }
    if (tag == "garch_ito_iv") {
        return detail::from_qmle(t, fit_iv(panel, opts.bounds, opts.fit), forecast_iv);
    }
    if (tag == "garch_ito") {
        return detail::from_qmle(t, fit_garch_ito(panel, opts.bounds, opts.fit), forecast_garch_ito);
    }
    if (tag == "har_rv") return detail::from_har(t, fit_har_rv(panel, false));
    if (tag == "har_rv_oi") return detail::from_har(t, fit_har_rv(panel, true));
    if (tag == "rgarch_rv" || tag == "rgarch_iv" || tag == "rgarch_oi") {
        const Measure measure = tag == "rgarch_iv" ? Measure::iv : Measure::rv;
        const bool with_oi = tag == "rgarch_oi";
        return detail::from_qmle(
            t, fit_realized_garch(panel, measure, with_oi, opts.rgarch_bounds, opts.fit),
            forecast_realized_garch);
    }
    if (tag == "garch_oi") {
        return detail::from_qmle(t, fit_garch_plus_oi(panel, opts.garch_oi_bounds, opts.fit),
                                 forecast_garch_plus_oi);
    }
    if (tag == "iv_reg") {
        IvRegressionFit fit = fit_iv_regression(panel);
        FittedModel m;
        m.tag = t;
        m.params = {{"omega", fit.omega}, {"beta1", fit.beta1}, {"beta2", fit.beta2},
                    {"sigma_u2", fit.sigma_u2}};
        m.forecast = [fit](const DailyPanel& p) { return forecast_iv_regression(fit, p); };
        return m;
    }
    throw InputError("unknown model tag: " + t);
}

// ---------------------------------------------------------------------------
// Rolling forecasts
// ---------------------------------------------------------------------------

struct RollingResult {
    std::vector<double> forecasts;
    /// RV of each out-of-sample day.
    std::vector<double> realized;
    /// True integrated variance, when the panel carries it.
    std::vector<double> integrated_variance;
    std::size_t fits = 0;
    std::size_t failed_fits = 0;
    std::vector<std::string> diagnostics;
};

/// One-step forecasts for days split+1..n. Day d is forecast from a model fitted
/// on days 1..d-1; the model is refitted every `refit_every` days and otherwise
/// reused on the longer history. A failed refit keeps the previous model.
template <class Fitter>
    requires std::invocable<Fitter&, const DailyPanel&>
RollingResult rolling_forecast(Fitter&& fit, const DailyPanel& panel, std::size_t split,
                               std::size_t refit_every) {
    panel.check();
    if (split >= panel.n()) throw InputError("rolling_forecast: split must be < n");
    if (refit_every < 1) throw InputError("rolling_forecast: refit_every must be >= 1");
    RollingResult out;
    std::optional<FittedModel> current;
    for (std::size_t d = split; d < panel.n(); ++d) {
        const DailyPanel train = panel.head(d);
        if ((d - split) % refit_every == 0) {
            ++out.fits;
            try {
                current = fit(train);
            } catch (const std::exception& e) {
                ++out.failed_fits;
                out.diagnostics.push_back("day " + std::to_string(d + 1) + ": " + e.what());
            }
        }
        if (!current) throw HarnessError("rolling_forecast: no successful fit before day " + std::to_string(d + 1));
        out.forecasts.push_back(current->forecast(train));
        out.realized.push_back(panel.RV[d]);
        if (!panel.integrated_variance.empty()) out.integrated_variance.push_back(panel.integrated_variance[d]);
    }
    return out;
}

inline RollingResult rolling_forecast(std::string_view tag, const DailyPanel& panel,
                                      std::size_t split, std::size_t refit_every = 1,
                                      const ModelOptions& opts = {}) {
    return rolling_forecast([&](const DailyPanel& p) { return fit_model(tag, p, opts); }, panel,
                            split, refit_every);
}

// ---------------------------------------------------------------------------
// Data-generating processes
// ---------------------------------------------------------------------------

enum class Dgp { heston, jump, garch_ito_oi, garch_ito_iv };
enum class Sampling { min5, min1, sec10 };

inline std::size_t steps_per_day(Sampling s) {
    switch (s) {
        case Sampling::min5: return 78;
        case Sampling::min1: return 390;
        case Sampling::sec10: return 2340;
    }
    return 78;
}

inline std::string to_string(Dgp d) {
    switch (d) {
        case Dgp::heston: return "heston";
        case Dgp::jump: return "jump";
        case Dgp::garch_ito_oi: return "garch_ito_oi";
        case Dgp::garch_ito_iv: return "garch_ito_iv";
    }
    return "heston";
}

inline std::string to_string(Sampling s) {
    switch (s) {
        case Sampling::min5: return "5min";
        case Sampling::min1: return "1min";
        case Sampling::sec10: return "10sec";
    }
    return "5min";
}

inline Dgp parse_dgp(std::string_view s) {
    for (Dgp d : {Dgp::heston, Dgp::jump, Dgp::garch_ito_oi, Dgp::garch_ito_iv}) {
        if (s == to_string(d)) return d;
    }
    throw InputError("unknown dgp: " + std::string(s));
}

inline Sampling parse_sampling(std::string_view s) {
    for (Sampling v : {Sampling::min5, Sampling::min1, Sampling::sec10}) {
        if (s == to_string(v)) return v;
    }
    throw InputError("unknown interval: " + std::string(s));
}

inline constexpr ThetaOI kTheta0{0.2, 0.3, 0.4, 0.1};
inline constexpr PhiIV kPhi0{0.2, 0.3, 0.4, 0.2, 0.1, 0.001, 0.04};
inline constexpr double kTradingDay = 1.0 / 252.0;

inline HestonParams heston_design(Dgp dgp) {
    HestonParams p;
    if (dgp == Dgp::jump) {
        p.lambda = 1.0;
        p.sigma_J = 0.01;
    }
    return p;
}

/// RV estimator used for simulated data: TSRV when prices carry noise.
inline RvOptions default_rv(double noise_var) {
    return noise_var > 0.0 ? RvOptions{RvKind::tsrv, 0} : RvOptions{RvKind::naive, 0};
}

/// Simulate one panel from a named design.
///
/// Heston/jump: annual time unit with 252 trading days, S_0 = 50, V_0 = 0.05,
/// no noise; the implied series is V at day end expressed per day.
/// GARCH-Ito-OI: theta = (0.2, 0.3, 0.4, 0.1), O ~ N(0, 0.5) clamped at 0.
/// GARCH-Ito-IV: phi = (0.2, 0.3, 0.4, 0.2, 0.1, 0.001, 0.04), IV_0^2 = 0.25.
/// Both GARCH-Ito designs use X_0 = 10, sigma_0^2 = 0.2 and noise variance 1e-6.
inline DailyPanel simulate_design(Dgp dgp, std::size_t n_days, std::size_t steps,
                                  std::uint64_t seed, SimulationOutput* raw = nullptr) {
    SimConfig cfg;
    cfg.n_days = n_days;
    cfg.steps_per_day = steps;
    cfg.seed = seed;
    SimulationOutput sim;
    switch (dgp) {
        case Dgp::heston:
        case Dgp::jump: {
            cfg.noise_var = 0.0;
            cfg.x0 = std::log(50.0);
            cfg.sigma0_sq = 0.05;
            cfg.day_length = kTradingDay;
            sim = simulate_heston(heston_design(dgp), cfg);
            for (double& v : sim.implied) v *= kTradingDay;
            break;
        }
        case Dgp::garch_ito_oi:
            cfg.noise_var = 1e-6;
            cfg.x0 = 10.0;
            cfg.sigma0_sq = 0.2;
            sim = simulate_garch_ito_oi(kTheta0, NormalImplied{0.0, 0.5}, cfg);
            break;
        case Dgp::garch_ito_iv:
            cfg.noise_var = 1e-6;
            cfg.x0 = 10.0;
            cfg.sigma0_sq = 0.2;
            cfg.implied0 = 0.25;
            sim = simulate_garch_ito_iv(kPhi0, cfg);
            break;
    }
    DailyPanel panel = make_panel(sim, default_rv(cfg.noise_var));
    if (raw) *raw = std::move(sim);
    return panel;
}

// ---------------------------------------------------------------------------
// Parallel repetitions
// ---------------------------------------------------------------------------

/// Run body(rep) for rep in [0, reps) on up to `threads` workers. Each call must
/// write only its own slot, so results do not depend on scheduling.
template <class Body>
void for_each_rep(std::size_t reps, unsigned threads, Body&& body) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
    if (workers <= 1) {
        for (std::size_t r = 0; r < reps; ++r) body(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t r = next++; r < reps; r = next++) body(r);
        });
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo study
// ---------------------------------------------------------------------------

inline std::vector<std::string> default_mc_models() {
    return {"garch_ito", "garch_ito_oi", "garch_ito_iv", "har_rv", "rgarch_rv"};
}

struct McConfig {
    Dgp dgp = Dgp::heston;
    Sampling sampling = Sampling::min5;
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    std::vector<std::string> models = default_mc_models();
    std::size_t in_sample = 100;
    ModelOptions model_options;
    unsigned threads = 1;
};

struct McRow {
    std::string tag;
    LossReport losses;
    std::size_t n_excluded = 0;
};

struct McTable {
    std::vector<McRow> rows;
    std::size_t reps = 0;
    /// Repetitions whose simulation failed; also counted in every row's n_excluded.
    std::size_t failed_simulations = 0;
    double mean_integrated_variance = std::numeric_limits<double>::quiet_NaN();
};

/// Per repetition: simulate in_sample + 1 days, fit every model on the first
/// in_sample days, forecast the last day and score it against that day's RV.
/// Failed fits or non-finite forecasts are excluded and counted.
inline McTable mc_study(const McConfig& cfg) {
    if (cfg.reps < 1) throw InputError("mc_study: reps must be >= 1");
    if (cfg.models.empty()) throw InputError("mc_study: no models configured");
    for (const auto& m : cfg.models) {
        if (!is_model_tag(m)) throw InputError("mc_study: unknown model tag " + m);
    }
    const std::size_t n_models = cfg.models.size();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> forecast(cfg.reps * n_models, nan);
    std::vector<double> realized(cfg.reps, nan);
    std::vector<double> integrated(cfg.reps, nan);
    std::vector<char> sim_failed(cfg.reps, 0);

    for_each_rep(cfg.reps, cfg.threads, [&](std::size_t rep) {
        const std::uint64_t seed = repetition_seed(cfg.seed, rep);
        DailyPanel panel;
        try {
            panel = simulate_design(cfg.dgp, cfg.in_sample + 1, steps_per_day(cfg.sampling), seed);
        } catch (const SimulationError&) {
            sim_failed[rep] = 1;
            return;
        }
        const DailyPanel train = panel.head(cfg.in_sample);
        realized[rep] = panel.RV[cfg.in_sample];
        integrated[rep] = panel.integrated_variance[cfg.in_sample];
        ModelOptions mo = cfg.model_options;
        mo.fit.optimizer.seed = seed;
        for (std::size_t k = 0; k < n_models; ++k) {
            try {
                const FittedModel fit = fit_model(cfg.models[k], train, mo);
                forecast[rep * n_models + k] = fit.forecast(train);
            } catch (const std::exception&) {
                // excluded below
            }
        }
    });

    McTable table;
    table.reps = cfg.reps;
    double iv_sum = 0.0;
    std::size_t iv_n = 0;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        if (sim_failed[rep]) {
            ++table.failed_simulations;
        } else {
            iv_sum += integrated[rep];
            ++iv_n;
        }
    }
    if (iv_n > 0) table.mean_integrated_variance = iv_sum / static_cast<double>(iv_n);
    for (std::size_t k = 0; k < n_models; ++k) {
        McRow row;
        row.tag = cfg.models[k];
        std::vector<double> F, RV;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            const double f = forecast[rep * n_models + k];
            if (sim_failed[rep] || !std::isfinite(f) || !(realized[rep] > 0.0)) {
                ++row.n_excluded;
                continue;
            }
            F.push_back(f);
            RV.push_back(realized[rep]);
        }
        if (!F.empty()) {
            row.losses = evaluate_losses(F, RV);
        } else {
            row.losses = LossReport{nan, nan, nan, nan, nan, nan, 0, 0};
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Estimator consistency
// ---------------------------------------------------------------------------

enum class ConsistencyModel { oi, iv };

struct ConsistencyConfig {
    ConsistencyModel model = ConsistencyModel::oi;
    std::vector<std::size_t> n_grid{125, 500, 2000};
    std::size_t m = 390;
    std::size_t reps = 50;
    std::uint64_t seed = 0;
    /// Start the optimizer at the true parameters only.
    bool truth_start = false;
    ModelOptions model_options;
    unsigned threads = 1;
};

struct ConsistencyRow {
    std::size_t n = 0;
    double median_error = std::numeric_limits<double>::quiet_NaN();
    /// Max-norm estimation error per repetition (NaN where the fit failed).
    std::vector<double> errors;
    std::size_t failures = 0;
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

template <std::size_t N>
double max_abs_diff(const std::array<double, N>& a, const std::array<double, N>& b) {
    double e = 0.0;
    for (std::size_t k = 0; k < N; ++k) e = std::max(e, std::abs(a[k] - b[k]));
    return e;
}

}  // namespace detail

/// For each repetition simulate max(n_grid) days with m steps per day from the
/// design parameters, then fit every prefix of length n in n_grid.
inline std::vector<ConsistencyRow> consistency_check(const ConsistencyConfig& cfg) {
    if (cfg.n_grid.empty()) throw InputError("consistency_check: empty n_grid");
    for (std::size_t k = 1; k < cfg.n_grid.size(); ++k) {
        if (!(cfg.n_grid[k] > cfg.n_grid[k - 1])) throw InputError("consistency_check: n_grid must increase");
    }
    if (cfg.reps < 1) throw InputError("consistency_check: reps must be >= 1");
    const std::size_t n_max = cfg.n_grid.back();
    const std::size_t G = cfg.n_grid.size();
    std::vector<double> err(cfg.reps * G, std::numeric_limits<double>::quiet_NaN());

    for_each_rep(cfg.reps, cfg.threads, [&](std::size_t rep) {
        const std::uint64_t seed = repetition_seed(cfg.seed, rep);
        DailyPanel panel;
        try {
            panel = simulate_design(cfg.model == ConsistencyModel::oi ? Dgp::garch_ito_oi : Dgp::garch_ito_iv,
                                    n_max, cfg.m, seed);
        } catch (const SimulationError&) {
            return;
        }
        FitOptions fo = cfg.model_options.fit;
        fo.optimizer.seed = seed;
        if (cfg.truth_start) {
            fo.optimizer.starts = 1;
            fo.optimizer.initial_points.clear();
        }
        for (std::size_t g = 0; g < G; ++g) {
            const DailyPanel sub = panel.head(cfg.n_grid[g]);
            try {
                if (cfg.model == ConsistencyModel::oi) {
                    FitOptions f = fo;
                    if (cfg.truth_start) {
                        const auto t = kTheta0.to_array();
                        f.optimizer.initial_points.assign(1, std::vector<double>(t.begin(), t.end()));
                    }
                    const auto fit = fit_oi(sub, cfg.model_options.bounds, f);
                    err[rep * G + g] = detail::max_abs_diff(fit.params.to_array(), kTheta0.to_array());
                } else {
                    FitOptions f = fo;
                    if (cfg.truth_start) {
                        const auto t = kPhi0.to_array();
                        f.optimizer.initial_points.assign(1, std::vector<double>(t.begin(), t.end()));
                    }
                    const auto fit = fit_iv(sub, cfg.model_options.bounds, f);
                    err[rep * G + g] = detail::max_abs_diff(fit.params.to_array(), kPhi0.to_array());
                }
            } catch (const std::exception&) {
                // counted as a failure below
            }
        }
    });

    std::vector<ConsistencyRow> rows(G);
    for (std::size_t g = 0; g < G; ++g) {
        rows[g].n = cfg.n_grid[g];
        std::vector<double> ok;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            const double e = err[rep * G + g];
            rows[g].errors.push_back(e);
            if (std::isfinite(e)) {
                ok.push_back(e);
            } else {
                ++rows[g].failures;
            }
        }
        rows[g].median_error = detail::median(std::move(ok));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Low-frequency sampling study
// ---------------------------------------------------------------------------

struct LowFrequencyConfig {
    ConsistencyModel model = ConsistencyModel::oi;
    std::size_t reps = 50;
    std::uint64_t seed = 0;
    /// Quarter-day periods simulated (150 days).
    std::size_t periods = 600;
    std::size_t steps_per_period = 780;
    /// Out-of-sample length in days; the last 50 days by default.
    std::size_t oos_days = 50;
    std::size_t refit_every = 1;
    /// Periods per low-frequency observation: 1 = 1/4 day, 2 = 1/2 day, 4 = 1 day.
    std::vector<std::size_t> factors{1, 2, 4};
    ModelOptions model_options;
    unsigned threads = 1;
};

struct LowFrequencyRow {
    std::size_t factor = 1;
    LossReport losses;
    std::size_t failed_reps = 0;
    std::size_t fits = 0;
    std::size_t failed_fits = 0;
};

/// Simulate the model with quarter-day periods, aggregate to coarser sampling
/// intervals and compare rolling forecasts over the same final stretch of days.
inline std::vector<LowFrequencyRow> low_frequency_study(const LowFrequencyConfig& cfg) {
    if (cfg.reps < 1) throw InputError("low_frequency_study: reps must be >= 1");
    if (cfg.refit_every < 1) throw InputError("low_frequency_study: refit_every must be >= 1");
    const std::size_t finest = 4;
    for (std::size_t f : cfg.factors) {
        if (f < 1 || finest % f != 0 || cfg.periods % f != 0) {
            throw InputError("low_frequency_study: factors must divide 4 and the period count");
        }
    }
    if (cfg.oos_days * finest >= cfg.periods) throw InputError("low_frequency_study: out-of-sample window too long");
    const std::size_t G = cfg.factors.size();
    struct Slot {
        RollingResult result;
        bool ok = false;
    };
    std::vector<Slot> slots(cfg.reps * G);
    const std::string tag = cfg.model == ConsistencyModel::oi ? "garch_ito_oi" : "garch_ito_iv";

    for_each_rep(cfg.reps, cfg.threads, [&](std::size_t rep) {
        const std::uint64_t seed = repetition_seed(cfg.seed, rep);
        SimulationOutput sim;
        try {
            simulate_design(cfg.model == ConsistencyModel::oi ? Dgp::garch_ito_oi : Dgp::garch_ito_iv,
                            cfg.periods, cfg.steps_per_period, seed, &sim);
        } catch (const SimulationError&) {
            return;
        }
        ModelOptions mo = cfg.model_options;
        mo.fit.optimizer.seed = seed;
        for (std::size_t g = 0; g < G; ++g) {
            const std::size_t f = cfg.factors[g];
            const DailyPanel panel = make_panel(aggregate_days(sim, f), default_rv(1e-6));
            const std::size_t oos = cfg.oos_days * (finest / f);
            try {
                slots[rep * G + g].result = rolling_forecast(tag, panel, panel.n() - oos, cfg.refit_every, mo);
                slots[rep * G + g].ok = true;
            } catch (const std::exception&) {
                // counted below
            }
        }
    });

    std::vector<LowFrequencyRow> rows(G);
    for (std::size_t g = 0; g < G; ++g) {
        rows[g].factor = cfg.factors[g];
        std::vector<double> F, RV;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            const Slot& s = slots[rep * G + g];
            if (!s.ok) {
                ++rows[g].failed_reps;
                continue;
            }
            rows[g].fits += s.result.fits;
            rows[g].failed_fits += s.result.failed_fits;
            for (std::size_t i = 0; i < s.result.forecasts.size(); ++i) {
                if (!std::isfinite(s.result.forecasts[i]) || !(s.result.realized[i] > 0.0)) continue;
                F.push_back(s.result.forecasts[i]);
                RV.push_back(s.result.realized[i]);
            }
        }
        if (!F.empty()) {
            rows[g].losses = evaluate_losses(F, RV);
        } else {
            constexpr double nan = std::numeric_limits<double>::quiet_NaN();
            rows[g].losses = LossReport{nan, nan, nan, nan, nan, nan, 0, 0};
        }
    }
    return rows;
}

}  // namespace gito
