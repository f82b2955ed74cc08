#pragma once

#include "gito/core.hpp"
#include "gito/models.hpp"
#include "gito/optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gito {

/// Rank-deficient least-squares design.
class SingularDesignError : public InputError {
public:
    SingularDesignError(const std::string& what, std::vector<std::string> columns)
        : InputError(what), columns_(std::move(columns)) {}
    [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

// ---------------------------------------------------------------------------
// Ordinary least squares
// ---------------------------------------------------------------------------

enum class RankPolicy {
    /// Minimum-norm solution; collinear columns are reported, not fatal.
    pseudo_inverse,
    /// Throw SingularDesignError naming the collinear columns.
    strict,
};

struct OlsResult {
    Eigen::VectorXd coef;
    /// Empty when the design is rank deficient.
    Eigen::VectorXd std_errors;
    double residual_var = 0.0;
    Eigen::Index rank = 0;
    std::vector<std::string> collinear;
};

inline OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::span<const std::string_view> names, RankPolicy policy) {
    if (X.rows() != y.size()) throw InputError("ols: design and target differ in length");
    if (X.rows() < X.cols()) throw InputError("ols: fewer observations than regressors");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    OlsResult r;
    r.rank = qr.rank();
    if (r.rank < X.cols()) {
        for (Eigen::Index k = r.rank; k < X.cols(); ++k) {
            const auto col = qr.colsPermutation().indices()(k);
            r.collinear.emplace_back(names[static_cast<std::size_t>(col)]);
        }
        if (policy == RankPolicy::strict) {
            std::string list;
            for (const auto& c : r.collinear) list += (list.empty() ? "" : ", ") + c;
            throw SingularDesignError("singular regression design; collinear columns: " + list,
                                      r.collinear);
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
        cod.setThreshold(1e-10);
        r.coef = cod.solve(y);
    } else {
        r.coef = qr.solve(y);
    }
    const Eigen::VectorXd resid = y - X * r.coef;
    const double dof = static_cast<double>(std::max<Eigen::Index>(X.rows() - r.rank, 1));
    r.residual_var = resid.squaredNorm() / dof;
    if (r.rank == X.cols()) {
        const Eigen::MatrixXd xtx_inv =
            (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
        r.std_errors = (xtx_inv.diagonal() * r.residual_var).cwiseSqrt();
    }
    return r;
}

// ---------------------------------------------------------------------------
// HAR-RV
// ---------------------------------------------------------------------------

inline constexpr std::size_t kHarWeek = 5;
inline constexpr std::size_t kHarMonth = 22;

struct HarRvFit {
    double c = 0.0;
    double beta_d = 0.0;
    double beta_w = 0.0;
    double beta_m = 0.0;
    std::optional<double> beta_oi;
    double residual_var = 0.0;
    /// Same order as the coefficients; empty for rank-deficient designs.
    std::vector<double> std_errors;
    std::vector<std::string> collinear;
    std::size_t n_obs = 0;
};

namespace detail {

inline double window_mean(const std::vector<double>& v, std::size_t end, std::size_t len) {
    double s = 0.0;
    for (std::size_t k = end + 1 - len; k <= end; ++k) s += v[k];
    return s / static_cast<double>(len);
}

/// Regressors known at the end of day index t (0-based).
inline void har_row(const DailyPanel& panel, std::size_t t, bool with_oi, double* out) {
    out[0] = 1.0;
    out[1] = panel.RV[t];
    out[2] = window_mean(panel.RV, t, kHarWeek);
    out[3] = window_mean(panel.RV, t, kHarMonth);
    if (with_oi) out[4] = panel.implied[t];
}

}  // namespace detail

/// OLS of RV_{n+1} on [1, RV_n^(d), RV_n^(w), RV_n^(m)] (plus O_n when with_oi).
inline HarRvFit fit_har_rv(const DailyPanel& panel, bool with_oi,
                           RankPolicy policy = RankPolicy::pseudo_inverse) {
    panel.check();
    if (panel.n() < kHarMonth + 1) {
        throw InputError("fit_har_rv: need at least " + std::to_string(kHarMonth + 1) + " days");
    }
    if (with_oi && !panel.has_implied()) throw InputError("fit_har_rv: panel has no implied series");
    const std::size_t first = kHarMonth - 1;
    const std::size_t rows = panel.n() - 1 - first;
    const Eigen::Index cols = with_oi ? 5 : 4;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    std::array<double, 5> row{};
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        detail::har_row(panel, t, with_oi, row.data());
        for (Eigen::Index c = 0; c < cols; ++c) X(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
        y(static_cast<Eigen::Index>(r)) = panel.RV[t + 1];
    }
    static constexpr std::array<std::string_view, 5> names{"const", "rv_d", "rv_w", "rv_m",
                                                           "implied"};
    const OlsResult r = ols(X, y, std::span(names.data(), static_cast<std::size_t>(cols)), policy);
    HarRvFit fit;
    fit.c = r.coef(0);
    fit.beta_d = r.coef(1);
    fit.beta_w = r.coef(2);
    fit.beta_m = r.coef(3);
    if (with_oi) fit.beta_oi = r.coef(4);
    fit.residual_var = r.residual_var;
    fit.std_errors.assign(r.std_errors.data(), r.std_errors.data() + r.std_errors.size());
    fit.collinear = r.collinear;
    fit.n_obs = rows;
    return fit;
}

inline double forecast_har_rv(const HarRvFit& fit, const DailyPanel& panel) {
    if (panel.n() < kHarMonth) throw InputError("forecast_har_rv: need at least 22 days");
    std::array<double, 5> row{};
    const bool with_oi = fit.beta_oi.has_value();
    if (with_oi && !panel.has_implied()) throw InputError("forecast_har_rv: panel has no implied series");
    detail::har_row(panel, panel.n() - 1, with_oi, row.data());
    double f = fit.c + fit.beta_d * row[1] + fit.beta_w * row[2] + fit.beta_m * row[3];
    if (with_oi) f += *fit.beta_oi * row[4];
    return f;
}

// ---------------------------------------------------------------------------
// GARCH-Ito (no option information)
// ---------------------------------------------------------------------------

struct GarchItoParams {
    double omega = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    static constexpr std::array<std::string_view, 3> names{"omega", "beta", "gamma"};
    [[nodiscard]] std::array<double, 3> to_array() const { return {omega, beta, gamma}; }
};

/// h_n = omega_g + gamma h_{n-1} + beta_g Z_{n-1}^2, h_1 = sigma0_sq.
inline std::vector<double> garch_ito_series(const GarchItoParams& p, const DailyPanel& panel) {
    if (!(p.beta > 0.0)) throw std::domain_error("garch_ito_series: beta must be > 0");
    const ExpPhi e = exp_phi(p.beta);
    const double omega_g = e.phi1 * p.omega;
    const double bg = (p.gamma - 1.0) * p.beta * e.phi2 + std::expm1(p.beta);
    const std::size_t n = panel.n();
    std::vector<double> h(n + 1);
    h[0] = panel.sigma0_sq;
    for (std::size_t k = 1; k <= n; ++k) {
        const double z = panel.Z[k - 1];
        h[k] = omega_g + p.gamma * h[k - 1] + bg * z * z;
        if (!std::isfinite(h[k]) || !(h[k] > 0.0)) {
            throw EvaluationError("garch_ito_series: non-positive variance");
        }
    }
    return h;
}

inline double qlik_garch_ito(const GarchItoParams& p, const DailyPanel& panel) {
    panel.check();
    if (panel.n() < 1 || !(panel.sigma0_sq > 0.0)) throw InputError("qlik_garch_ito: bad panel");
    const std::vector<double> h = garch_ito_series(p, panel);
    double s = 0.0;
    for (std::size_t i = 0; i < panel.n(); ++i) {
        const double rv = std::max(panel.RV[i], kRvFloor);
        s += std::log(h[i]) + rv / h[i];
    }
    const double value = -s / (2.0 * static_cast<double>(panel.n()));
    if (!std::isfinite(value)) throw EvaluationError("qlik_garch_ito: non-finite objective");
    return value;
}

inline FitResult<GarchItoParams> fit_garch_ito(const DailyPanel& panel, const BoxBounds& bounds = {},
                                               const FitOptions& opts = {}) {
    panel.check();
    if (panel.n() < opts.min_length) throw InputError("fit_garch_ito: panel too short");
    const std::array<Interval, 3> box{bounds.omega, bounds.beta, bounds.gamma};
    MaximizeOptions mo = opts.optimizer;
    for (const auto& g : detail::oi_guesses(panel, bounds, false)) {
        mo.initial_points.push_back({g.omega, g.beta, g.gamma});
    }
    auto objective = [&](std::span<const double> x) {
        return qlik_garch_ito({x[0], x[1], x[2]}, panel);
    };
    auto feasible = [&](std::span<const double> x) {
        return x[2] + beta_g(x[1], x[2]) < 1.0;
    };
    const MaximizeResult r = maximize(objective, box, feasible, mo);
    FitResult<GarchItoParams> fit;
    fit.params = {r.argmax[0], r.argmax[1], r.argmax[2]};
    fit.loglik = r.value;
    fit.iterations = r.iterations;
    fit.converged = r.converged;
    fit.restarts_used = r.restarts_used;
    return fit;
}

inline double forecast_garch_ito(const FitResult<GarchItoParams>& fit, const DailyPanel& panel) {
    return garch_ito_series(fit.params, panel).back();
}

// ---------------------------------------------------------------------------
// Realized GARCH (RV or IV measure, optional implied regressor)
// ---------------------------------------------------------------------------

enum class Measure { rv, iv };

struct RealizedGarchParams {
    double omega = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
    double eta_oi = 0.0;
    double a = 1.0;
    double b = 0.0;
    double sigma_u2 = 1.0;
    Measure measure = Measure::rv;
    bool with_oi = false;

    static constexpr std::array<std::string_view, 7> names{"omega", "gamma", "eta", "eta_oi",
                                                           "a",     "b",     "sigma_u2"};
    [[nodiscard]] std::array<double, 7> to_array() const {
        return {omega, gamma, eta, eta_oi, a, b, sigma_u2};
    }
};

struct RealizedGarchBounds {
    Interval omega{1e-8, 10.0};
    Interval gamma{1e-6, 0.999};
    Interval eta{0.0, 5.0};
    Interval eta_oi{0.0, 5.0};
    Interval a{1e-6, 10.0};
    Interval b{-1.0, 1.0};
    Interval sigma_u2{1e-12, 10.0};
};

namespace detail {

inline double mean_square(const std::vector<double>& z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::max(s / static_cast<double>(std::max<std::size_t>(z.size(), 1)), kRvFloor);
}

inline const std::vector<double>& measure_series(const DailyPanel& panel, Measure m) {
    return m == Measure::rv ? panel.RV : panel.implied;
}

}  // namespace detail

/// h_n = omega + gamma h_{n-1} + eta x_{n-1} (+ eta_oi O_{n-1}); h_1 = mean Z^2.
inline std::vector<double> realized_garch_series(const RealizedGarchParams& p,
                                                 const DailyPanel& panel) {
    const auto& x = detail::measure_series(panel, p.measure);
    const std::size_t n = panel.n();
    std::vector<double> h(n + 1);
    h[0] = detail::mean_square(panel.Z);
    for (std::size_t k = 1; k <= n; ++k) {
        double v = p.omega + p.gamma * h[k - 1] + p.eta * x[k - 1];
        if (p.with_oi) v += p.eta_oi * panel.implied[k - 1];
        if (!std::isfinite(v) || !(v > 0.0)) {
            throw EvaluationError("realized_garch_series: non-positive variance");
        }
        h[k] = v;
    }
    return h;
}

/// Gaussian log-likelihood of Z_n ~ N(0, h_n) and x_j = a h_{j+1} + b + u_j,
/// normalized by 2n. x_j also drives h_{j+1}, so the measurement density
/// carries the Jacobian |1 - a eta|.
inline double realized_garch_loglik(const RealizedGarchParams& p, const DailyPanel& panel) {
    if (!(p.sigma_u2 > 0.0)) throw EvaluationError("realized_garch_loglik: sigma_u2 must be > 0");
    const double jac = std::abs(1.0 - p.a * p.eta);
    if (!(jac > 0.0)) throw EvaluationError("realized_garch_loglik: singular measurement system");
    const auto& x = detail::measure_series(panel, p.measure);
    const std::vector<double> h = realized_garch_series(p, panel);
    const std::size_t n = panel.n();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::log(h[i]) + panel.Z[i] * panel.Z[i] / h[i];
    const double log_s = std::log(p.sigma_u2);
    const double log_jac = std::log(jac);
    for (std::size_t j = 1; j + 1 <= n; ++j) {
        const double r = x[j - 1] - p.a * h[j] - p.b;
        s += log_s + r * r / p.sigma_u2 - 2.0 * log_jac;
    }
    const double value = -s / (2.0 * static_cast<double>(n));
    if (!std::isfinite(value)) throw EvaluationError("realized_garch_loglik: non-finite objective");
    return value;
}

inline FitResult<RealizedGarchParams> fit_realized_garch(const DailyPanel& panel, Measure measure,
                                                         bool with_oi,
                                                         const RealizedGarchBounds& bounds = {},
                                                         const FitOptions& opts = {}) {
    panel.check();
    if (panel.n() < opts.min_length) throw InputError("fit_realized_garch: panel too short");
    if ((measure == Measure::iv || with_oi) && !panel.has_implied()) {
        throw InputError("fit_realized_garch: panel has no implied series");
    }
    const auto& x = detail::measure_series(panel, measure);
    const double level = detail::mean_square(panel.Z);
    const double x_mean = std::max(detail::mean_of(x), kRvFloor);
    double x_var = 0.0;
    for (double v : x) x_var += (v - x_mean) * (v - x_mean);
    x_var /= static_cast<double>(x.size());

    std::array<Interval, 7> box{bounds.omega, bounds.gamma, bounds.eta, bounds.eta_oi,
                                bounds.a,     bounds.b,     bounds.sigma_u2};
    MaximizeOptions mo = opts.optimizer;
    const double a0 = detail::clamp_into(x_mean / level, bounds.a);
    for (auto [gamma, persist] : {std::pair{0.5, 0.9}, std::pair{0.8, 0.95}, std::pair{0.2, 0.6}}) {
        const double eta = detail::clamp_into((persist - gamma) / a0, bounds.eta);
        const double omega = detail::clamp_into(level * (1.0 - gamma) - eta * x_mean, bounds.omega);
        const double s2 = detail::clamp_into(std::max(0.5 * x_var, 1e-300), bounds.sigma_u2);
        std::vector<double> p{omega, gamma, eta, 0.0, a0, detail::clamp_into(0.0, bounds.b), s2};
        if (with_oi) p[3] = detail::clamp_into(0.0, bounds.eta_oi);
        mo.initial_points.push_back(p);
    }

    // eta_oi is pinned at zero without the implied regressor.
    std::vector<Interval> active;
    std::vector<std::size_t> index;
    for (std::size_t k = 0; k < box.size(); ++k) {
        if (k == 3 && !with_oi) continue;
        active.push_back(box[k]);
        index.push_back(k);
    }
    for (auto& p : mo.initial_points) {
        std::vector<double> q;
        for (std::size_t k : index) q.push_back(p[k]);
        p = q;
    }
    auto expand = [&](std::span<const double> v) {
        RealizedGarchParams p;
        std::array<double, 7> full{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
        for (std::size_t k = 0; k < index.size(); ++k) full[index[k]] = v[k];
        p.omega = full[0];
        p.gamma = full[1];
        p.eta = full[2];
        p.eta_oi = full[3];
        p.a = full[4];
        p.b = full[5];
        p.sigma_u2 = full[6];
        p.measure = measure;
        p.with_oi = with_oi;
        return p;
    };
    auto objective = [&](std::span<const double> v) { return realized_garch_loglik(expand(v), panel); };
    auto feasible = [&](std::span<const double> v) {
        const RealizedGarchParams p = expand(v);
        return p.gamma + p.eta * p.a < 1.0;
    };
    const MaximizeResult r = maximize(objective, std::span<const Interval>(active), feasible, mo);
    FitResult<RealizedGarchParams> fit;
    fit.params = expand(r.argmax);
    fit.loglik = r.value;
    fit.iterations = r.iterations;
    fit.converged = r.converged;
    fit.restarts_used = r.restarts_used;
    return fit;
}

inline double forecast_realized_garch(const FitResult<RealizedGarchParams>& fit,
                                      const DailyPanel& panel) {
    return realized_garch_series(fit.params, panel).back();
}

// ---------------------------------------------------------------------------
// GARCH + OI (low-frequency GARCH(1,1) with the implied variance as regressor)
// ---------------------------------------------------------------------------

struct GarchOiParams {
    double omega = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    double eta = 0.0;

    static constexpr std::array<std::string_view, 4> names{"omega", "gamma", "beta", "eta"};
    [[nodiscard]] std::array<double, 4> to_array() const { return {omega, gamma, beta, eta}; }
};

struct GarchOiBounds {
    Interval omega{1e-8, 10.0};
    Interval gamma{1e-6, 0.999};
    Interval beta{1e-6, 0.999};
    Interval eta{0.0, 5.0};
};

/// h_n = omega + gamma h_{n-1} + beta Z_{n-1}^2 + eta O_{n-1}; h_1 = mean Z^2.
/// Without an implied series the eta term is dropped.
inline std::vector<double> garch_oi_series(const GarchOiParams& p, const DailyPanel& panel) {
    const std::size_t n = panel.n();
    const bool use_o = panel.has_implied();
    std::vector<double> h(n + 1);
    h[0] = detail::mean_square(panel.Z);
    for (std::size_t k = 1; k <= n; ++k) {
        const double z = panel.Z[k - 1];
        double v = p.omega + p.gamma * h[k - 1] + p.beta * z * z;
        if (use_o) v += p.eta * panel.implied[k - 1];
        if (!std::isfinite(v) || !(v > 0.0)) throw EvaluationError("garch_oi_series: non-positive variance");
        h[k] = v;
    }
    return h;
}

inline double garch_oi_loglik(const GarchOiParams& p, const DailyPanel& panel) {
    const std::vector<double> h = garch_oi_series(p, panel);
    double s = 0.0;
    for (std::size_t i = 0; i < panel.n(); ++i) s += std::log(h[i]) + panel.Z[i] * panel.Z[i] / h[i];
    const double value = -s / (2.0 * static_cast<double>(panel.n()));
    if (!std::isfinite(value)) throw EvaluationError("garch_oi_loglik: non-finite objective");
    return value;
}

inline FitResult<GarchOiParams> fit_garch_plus_oi(const DailyPanel& panel,
                                                  const GarchOiBounds& bounds = {},
                                                  const FitOptions& opts = {}) {
    panel.check();
    if (!panel.has_implied()) throw InputError("fit_garch_plus_oi: panel has no implied series");
    if (panel.n() < opts.min_length) throw InputError("fit_garch_plus_oi: panel too short");
    const bool identified =
        std::any_of(panel.implied.begin(), panel.implied.end(), [](double o) { return o != 0.0; });
    const double level = detail::mean_square(panel.Z);
    double o_mean = 0.0;
    for (double o : panel.implied) o_mean += std::max(o, 0.0);
    o_mean /= static_cast<double>(panel.n());

    std::vector<Interval> box{bounds.omega, bounds.gamma, bounds.beta};
    if (identified) box.push_back(bounds.eta);
    MaximizeOptions mo = opts.optimizer;
    for (auto [gamma, beta] : {std::pair{0.8, 0.1}, std::pair{0.5, 0.2}, std::pair{0.2, 0.1}}) {
        const double share = identified && o_mean > 0.0 ? 0.2 * level * (1.0 - gamma - beta) : 0.0;
        const double eta = identified && o_mean > 0.0 ? share / o_mean : 0.0;
        std::vector<double> p{detail::clamp_into(level * (1.0 - gamma - beta) - share, bounds.omega),
                              gamma, beta};
        if (identified) p.push_back(detail::clamp_into(eta, bounds.eta));
        mo.initial_points.push_back(p);
    }
    const double eta_pinned = bounds.eta.lo;
    auto expand = [&](std::span<const double> v) {
        return GarchOiParams{v[0], v[1], v[2], identified ? v[3] : eta_pinned};
    };
    auto objective = [&](std::span<const double> v) { return garch_oi_loglik(expand(v), panel); };
    auto feasible = [&](std::span<const double> v) { return v[1] + v[2] < 1.0; };
    const MaximizeResult r = maximize(objective, std::span<const Interval>(box), feasible, mo);
    FitResult<GarchOiParams> fit;
    fit.params = expand(r.argmax);
    fit.loglik = r.value;
    fit.iterations = r.iterations;
    fit.converged = r.converged;
    fit.restarts_used = r.restarts_used;
    if (!identified) fit.diagnostics.emplace_back("unidentified regressor: implied series is identically zero");
    return fit;
}

inline double forecast_garch_plus_oi(const FitResult<GarchOiParams>& fit, const DailyPanel& panel) {
    return garch_oi_series(fit.params, panel).back();
}

// ---------------------------------------------------------------------------
// IV regression
// ---------------------------------------------------------------------------

struct IvRegressionFit {
    double omega = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double sigma_u2 = 0.0;
    std::vector<double> std_errors;
};

/// OLS of RV_n on [1, IV_{n-1}^2, IV_{n-2}^2], n = 2..N (IV_0^2 = implied0).
inline IvRegressionFit fit_iv_regression(const DailyPanel& panel,
                                         RankPolicy policy = RankPolicy::strict) {
    panel.check();
    if (!panel.has_implied()) throw InputError("fit_iv_regression: panel has no implied series");
    if (panel.n() < 5) throw InputError("fit_iv_regression: need at least 5 days");
    const std::vector<double> iv2 = panel.implied_with_initial();
    const std::size_t N = panel.n();
    const auto rows = static_cast<Eigen::Index>(N - 1);
    Eigen::MatrixXd X(rows, 3);
    Eigen::VectorXd y(rows);
    for (std::size_t n = 2; n <= N; ++n) {
        const auto r = static_cast<Eigen::Index>(n - 2);
        X(r, 0) = 1.0;
        X(r, 1) = iv2[n - 1];
        X(r, 2) = iv2[n - 2];
        y(r) = panel.RV[n - 1];
    }
    static constexpr std::array<std::string_view, 3> names{"const", "implied_lag1", "implied_lag2"};
    const OlsResult r = ols(X, y, names, policy);
    IvRegressionFit fit;
    fit.omega = r.coef(0);
    fit.beta1 = r.coef(1);
    fit.beta2 = r.coef(2);
    fit.sigma_u2 = r.residual_var;
    fit.std_errors.assign(r.std_errors.data(), r.std_errors.data() + r.std_errors.size());
    return fit;
}

/// omega + beta1 IV_N^2 + beta2 IV_{N-1}^2. May be <= 0.
inline double forecast_iv_regression(const IvRegressionFit& fit, const DailyPanel& panel) {
    const std::vector<double> iv2 = panel.implied_with_initial();
    const std::size_t N = panel.n();
    return fit.omega + fit.beta1 * iv2[N] + fit.beta2 * iv2[N - 1];
}

}  // namespace gito
