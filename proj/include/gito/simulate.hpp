#pragma once

#include "gito/core.hpp"
#include "gito/rng.hpp"

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace gito {

struct SimConfig {
    std::size_t n_days = 100;
    std::size_t steps_per_day = 390;
    double noise_var = 0.0;
    std::uint64_t seed = 0;
    double x0 = 0.0;
    /// sigma_0^2 for GARCH-Ito paths, V_0 for Heston paths.
    double sigma0_sq = 0.2;
    /// O_0 / IV_0^2. NaN means "draw from the implied generator" (OI model).
    double implied0 = std::numeric_limits<double>::quiet_NaN();
    /// Length of one day in model time units. Only the Heston generator uses it
    /// (GARCH-Ito models are specified per day).
    double day_length = 1.0;

    void check() const {
        if (n_days < 1) throw InputError("SimConfig: n_days must be >= 1");
        if (steps_per_day < 1) throw InputError("SimConfig: steps_per_day must be >= 1");
        if (!(noise_var >= 0.0)) throw InputError("SimConfig: noise_var must be >= 0");
        if (!(day_length > 0.0)) throw InputError("SimConfig: day_length must be > 0");
    }
};

struct HestonParams {
    double r = 0.0;
    double a = 0.01;
    double b = 0.001;
    double gamma_vol = 0.075;
    double rho = -0.8;
    double lambda = 0.0;
    double sigma_J = 0.0;

    void check() const {
        if (!(rho >= -1.0 && rho <= 1.0)) throw InputError("HestonParams: rho outside [-1, 1]");
        if (!(lambda >= 0.0)) throw InputError("HestonParams: lambda must be >= 0");
        if (!(sigma_J >= 0.0)) throw InputError("HestonParams: sigma_J must be >= 0");
        if (!(gamma_vol >= 0.0)) throw InputError("HestonParams: gamma_vol must be >= 0");
    }
};

/// Anything that draws one implied variance from a generator.
template <class G>
concept ImpliedGenerator = requires(G g, Rng& rng) {
    { g(rng) } -> std::convertible_to<double>;
};

/// O_n ~ N(mean, variance), clamped to zero afterwards by the simulator.
struct NormalImplied {
    double mean = 0.0;
    double variance = 0.5;
    double operator()(Rng& rng) const {
        std::normal_distribution<double> d(mean, std::sqrt(variance));
        return d(rng);
    }
};

struct ConstantImplied {
    double value = 0.0;
    double operator()(Rng&) const { return value; }
};

struct SimulationOutput {
    std::vector<IntradayPath> paths;
    /// implied[k] = O_k (or IV_k^2, or V(k)), k = 0..n.
    std::vector<double> implied;
    /// True integrated variance of each day.
    std::vector<double> integrated_variance;
    /// GARCH-Ito-IV only: model conditional variances h_1..h_{n+1}.
    std::vector<double> cond_var;
    std::size_t clamped_implied = 0;
};

namespace detail {

/// Adds N(0, noise_var) to every grid point. Consecutive days share their
/// boundary observation, so day i's first point reuses day i-1's last draw.
inline void apply_noise(std::vector<IntradayPath>& paths, double noise_var, Rng& rng) {
    const double sd = std::sqrt(noise_var);
    std::normal_distribution<double> nd(0.0, 1.0);
    double carried = 0.0;
    bool have_carry = false;
    for (auto& p : paths) {
        p.observed_log_price.resize(p.true_log_price.size());
        for (std::size_t j = 0; j < p.size(); ++j) {
            double eps;
            if (j == 0 && have_carry) {
                eps = carried;
            } else {
                eps = noise_var > 0.0 ? sd * nd(rng) : 0.0;
            }
            p.observed_log_price[j] = p.true_log_price[j] + eps;
            if (j + 1 == p.size()) {
                carried = eps;
                have_carry = true;
            }
        }
    }
}

inline std::vector<double> day_grid(std::size_t day, std::size_t steps) {
    std::vector<double> g(steps + 1);
    const double start = static_cast<double>(day - 1);
    for (std::size_t j = 0; j <= steps; ++j) {
        g[j] = start + static_cast<double>(j) / static_cast<double>(steps);
    }
    g[steps] = static_cast<double>(day);
    return g;
}

/// GARCH-Ito(-OI) price paths with piecewise-constant variance over each step.
/// `exogenous` is O_0..O_{n-1} (day i uses O_{i-1}); empty means alpha * O = 0.
inline SimulationOutput simulate_garch_ito_paths(const ThetaOI& theta,
                                                 const std::vector<double>& exogenous,
                                                 const SimConfig& cfg) {
    cfg.check();
    SimulationOutput out;
    out.paths.reserve(cfg.n_days);
    out.integrated_variance.reserve(cfg.n_days);

    Rng price_rng = make_rng(cfg.seed, stream::price);
    std::normal_distribution<double> nd(0.0, 1.0);

    const std::size_t m = cfg.steps_per_day;
    const double dt = 1.0 / static_cast<double>(m);
    const double sqrt_dt = std::sqrt(dt);

    double x = cfg.x0;
    double s2_day = cfg.sigma0_sq;
    for (std::size_t day = 1; day <= cfg.n_days; ++day) {
        IntradayPath p;
        p.day_index = day;
        p.grid = day_grid(day, m);
        p.true_log_price.resize(m + 1);
        p.true_log_price[0] = x;

        const double o = exogenous.empty() ? 0.0 : exogenous[day - 1];
        const double drift = theta.omega + (theta.gamma - 1.0) * s2_day + theta.alpha * o;
        double s2 = s2_day;
        double mart = 0.0;
        double iv = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            const double incr = std::sqrt(s2) * sqrt_dt * nd(price_rng);
            x += incr;
            mart += incr;
            iv += s2 * dt;
            p.true_log_price[j] = x;
            const double s = static_cast<double>(j) * dt;
            s2 = s2_day + s * drift + theta.beta * mart * mart;
            if (!std::isfinite(s2) || !(s2 > 0.0)) {
                throw SimulationError("GARCH-Ito variance left (0, inf)", day, j);
            }
        }
        s2_day = s2;
        out.integrated_variance.push_back(iv);
        out.paths.push_back(std::move(p));
    }

    Rng noise_rng = make_rng(cfg.seed, stream::noise);
    apply_noise(out.paths, cfg.noise_var, noise_rng);
    return out;
}

}  // namespace detail

/// GARCH-Ito-OI paths. Returns O_0..O_n (clamped at zero) in `implied`.
template <ImpliedGenerator Gen>
SimulationOutput simulate_garch_ito_oi(const ThetaOI& theta, Gen&& oi_gen, const SimConfig& cfg) {
    cfg.check();
    Rng implied_rng = make_rng(cfg.seed, stream::implied);
    std::vector<double> implied;
    implied.reserve(cfg.n_days + 1);
    if (std::isnan(cfg.implied0)) {
        implied.push_back(static_cast<double>(oi_gen(implied_rng)));
    } else {
        implied.push_back(cfg.implied0);
    }
    for (std::size_t k = 1; k <= cfg.n_days; ++k) {
        implied.push_back(static_cast<double>(oi_gen(implied_rng)));
    }
    const std::size_t clamped = sanitize_implied(implied);

    std::vector<double> exogenous(implied.begin(), implied.end() - 1);
    SimulationOutput out = detail::simulate_garch_ito_paths(theta, exogenous, cfg);
    out.implied = std::move(implied);
    out.clamped_implied = clamped;
    return out;
}

/// Plain GARCH-Ito paths (no implied series).
inline SimulationOutput simulate_garch_ito(double omega, double beta, double gamma,
                                           const SimConfig& cfg) {
    return detail::simulate_garch_ito_paths({omega, beta, gamma, 0.0}, {}, cfg);
}

/// GARCH-Ito-IV: GARCH-Ito paths plus IV_n^2 from the AR(1) measurement equation.
/// The implied series is the Gaussian measurement itself and is not clamped.
inline SimulationOutput simulate_garch_ito_iv(const PhiIV& phi, const SimConfig& cfg) {
    cfg.check();
    SimulationOutput out = simulate_garch_ito(phi.omega, phi.beta, phi.gamma, cfg);

    const ExpPhi e = exp_phi(phi.beta);
    const double omega_g = e.phi1 * phi.omega;
    const double beta_gv = beta_g(phi.beta, phi.gamma);
    // h_1 = E[int_0^1 sigma_t^2 dt | sigma_0^2]
    const double h1 = (e.phi1 + e.phi2 * (phi.gamma - 1.0)) * cfg.sigma0_sq + e.phi2 * phi.omega;

    const std::size_t n = cfg.n_days;
    std::vector<double> h(n + 1);
    h[0] = h1;
    for (std::size_t k = 1; k <= n; ++k) {
        const auto& p = out.paths[k - 1];
        const double z = p.true_log_price.back() - p.true_log_price.front();
        h[k] = omega_g + phi.gamma * h[k - 1] + beta_gv * z * z;
    }

    Rng implied_rng = make_rng(cfg.seed, stream::implied);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double sd_u = std::sqrt(phi.sigma_u2);
    std::vector<double> iv2(n + 1);
    iv2[0] = std::isnan(cfg.implied0) ? phi.a * h1 + phi.b : cfg.implied0;
    for (std::size_t k = 1; k <= n; ++k) {
        // IV_k^2 = rho IV_{k-1}^2 + a h_{k+1} - rho a h_k + b(1 - rho) + u_k
        iv2[k] = phi.rho * iv2[k - 1] + phi.a * h[k] - phi.rho * phi.a * h[k - 1] +
                 phi.b * (1.0 - phi.rho) + sd_u * nd(implied_rng);
    }
    out.implied = std::move(iv2);
    out.cond_var = std::move(h);
    return out;
}

/// Euler discretization of the Heston (optionally jump-diffusion) model with
/// full truncation. Returns V(0)..V(n) at day ends in `implied`.
inline SimulationOutput simulate_heston(const HestonParams& p, const SimConfig& cfg) {
    cfg.check();
    p.check();
    SimulationOutput out;
    out.paths.reserve(cfg.n_days);

    Rng price_rng = make_rng(cfg.seed, stream::price);
    Rng jump_rng = make_rng(cfg.seed, stream::jumps);
    std::normal_distribution<double> nd(0.0, 1.0);

    const std::size_t m = cfg.steps_per_day;
    const double dt = cfg.day_length / static_cast<double>(m);
    const double sqrt_dt = std::sqrt(dt);
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    std::poisson_distribution<int> jumps(p.lambda * dt);
    std::normal_distribution<double> jump_size(0.0, p.sigma_J);

    double x = cfg.x0;
    double v = cfg.sigma0_sq;
    out.implied.push_back(v);
    for (std::size_t day = 1; day <= cfg.n_days; ++day) {
        IntradayPath path;
        path.day_index = day;
        path.grid = detail::day_grid(day, m);
        path.true_log_price.resize(m + 1);
        path.true_log_price[0] = x;
        double iv = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            const double vp = std::max(v, 0.0);
            const double z1 = nd(price_rng);
            const double z2 = p.rho * z1 + rho_c * nd(price_rng);
            const double sv = std::sqrt(vp);
            x += (p.r - 0.5 * vp) * dt + sv * sqrt_dt * z1;
            iv += vp * dt;
            double dv = (p.a - p.b * vp) * dt + p.gamma_vol * sv * sqrt_dt * z2;
            if (p.lambda > 0.0) {
                const int k = jumps(jump_rng);
                for (int q = 0; q < k; ++q) dv += jump_size(jump_rng);
            }
            v += dv;
            if (!std::isfinite(v) || !std::isfinite(x)) {
                throw SimulationError("Heston state is not finite", day, j);
            }
            path.true_log_price[j] = x;
        }
        out.integrated_variance.push_back(iv);
        out.implied.push_back(v);
        out.paths.push_back(std::move(path));
    }
    out.clamped_implied = sanitize_implied(out.implied);

    Rng noise_rng = make_rng(cfg.seed, stream::noise);
    detail::apply_noise(out.paths, cfg.noise_var, noise_rng);
    return out;
}

/// Copy of `path` with observed = true + i.i.d. N(0, noise_var).
inline IntradayPath add_microstructure_noise(const IntradayPath& path, double noise_var,
                                             std::uint64_t seed) {
    if (!(noise_var >= 0.0)) throw InputError("add_microstructure_noise: noise_var must be >= 0");
    IntradayPath out = path;
    Rng rng = make_rng(seed, stream::noise);
    std::normal_distribution<double> nd(0.0, std::sqrt(noise_var));
    for (std::size_t j = 0; j < out.size(); ++j) {
        out.observed_log_price[j] = out.true_log_price[j] + (noise_var > 0.0 ? nd(rng) : 0.0);
    }
    return out;
}

/// Merge consecutive groups of `factor` days into one coarser day. Day k of the
/// result spans original days (k-1)*factor+1 .. k*factor; the implied series is
/// subsampled as implied'[k] = implied[k * factor].
inline SimulationOutput aggregate_days(const SimulationOutput& in, std::size_t factor) {
    if (factor < 1) throw InputError("aggregate_days: factor must be >= 1");
    const std::size_t n = in.paths.size() / factor;
    if (n < 1) throw InputError("aggregate_days: fewer days than the aggregation factor");
    SimulationOutput out;
    out.paths.reserve(n);
    for (std::size_t k = 1; k <= n; ++k) {
        IntradayPath merged;
        merged.day_index = k;
        double iv = 0.0;
        for (std::size_t q = 0; q < factor; ++q) {
            const IntradayPath& src = in.paths[(k - 1) * factor + q];
            const std::size_t from = q == 0 ? 0 : 1;
            for (std::size_t j = from; j < src.size(); ++j) {
                const double frac = src.grid[j] - static_cast<double>(src.day_index - 1);
                merged.grid.push_back(static_cast<double>(k - 1) +
                                      (static_cast<double>(q) + frac) / static_cast<double>(factor));
                merged.true_log_price.push_back(src.true_log_price[j]);
                merged.observed_log_price.push_back(src.observed_log_price[j]);
            }
            if (!in.integrated_variance.empty()) iv += in.integrated_variance[(k - 1) * factor + q];
        }
        merged.grid.back() = static_cast<double>(k);
        out.paths.push_back(std::move(merged));
        out.integrated_variance.push_back(iv);
    }
    if (!in.implied.empty()) {
        for (std::size_t k = 0; k <= n; ++k) out.implied.push_back(in.implied[k * factor]);
    }
    out.clamped_implied = in.clamped_implied;
    return out;
}

}  // namespace gito
