#pragma once

#include "gito/core.hpp"
#include "gito/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace gito {

/// Smallest realized variance entering the quasi-likelihoods.
inline constexpr double kRvFloor = 1e-12;

/// Daily GARCH(1,1) coefficients implied by the intraday dynamics:
/// h_n = omega_g + gamma h_{n-1} + beta_g Z_{n-1}^2 + eta_g O_{n-1} + xi_g O_{n-2}.
struct GCoeffs {
    double omega_g = 0.0;
    double beta_g = 0.0;
    double eta_g = 0.0;
    double xi_g = 0.0;
};

/// Partial derivatives of GCoeffs. Only the non-zero entries are stored.
struct GCoeffsJacobian {
    double omega_g_d_omega = 0.0;
    double omega_g_d_beta = 0.0;
    double beta_g_d_beta = 0.0;
    double beta_g_d_gamma = 0.0;
    double eta_g_d_beta = 0.0;
    double eta_g_d_alpha = 0.0;
    double xi_g_d_beta = 0.0;
    double xi_g_d_alpha = 0.0;
};

inline GCoeffs coeff_transform(const ThetaOI& theta) {
    if (!(theta.beta > 0.0)) throw std::domain_error("coeff_transform: beta must be > 0");
    const ExpPhi e = exp_phi(theta.beta);
    GCoeffs c;
    c.omega_g = e.phi1 * theta.omega;
    c.beta_g = (theta.gamma - 1.0) * theta.beta * e.phi2 + std::expm1(theta.beta);
    c.eta_g = e.phi2 * theta.alpha;
    c.xi_g = (e.phi1 - e.phi2) * theta.alpha;
    return c;
}

inline GCoeffsJacobian coeff_jacobian(const ThetaOI& theta) {
    if (!(theta.beta > 0.0)) throw std::domain_error("coeff_jacobian: beta must be > 0");
    const ExpPhi e = exp_phi(theta.beta);
    // beta * phi2 = phi1 - 1, so d(beta phi2)/d beta = dphi1.
    GCoeffsJacobian j;
    j.omega_g_d_omega = e.phi1;
    j.omega_g_d_beta = e.dphi1 * theta.omega;
    j.beta_g_d_beta = (theta.gamma - 1.0) * e.dphi1 + std::exp(theta.beta);
    j.beta_g_d_gamma = e.phi1 - 1.0;
    j.eta_g_d_beta = e.dphi2 * theta.alpha;
    j.eta_g_d_alpha = e.phi2;
    j.xi_g_d_beta = (e.dphi1 - e.dphi2) * theta.alpha;
    j.xi_g_d_alpha = e.phi1 - e.phi2;
    return j;
}

namespace detail {

inline void require_panel(const DailyPanel& panel, bool need_implied, const char* who) {
    panel.check();
    if (panel.n() < 1) throw InputError(std::string(who) + ": empty panel");
    if (need_implied && !panel.has_implied()) {
        throw InputError(std::string(who) + ": panel has no implied series");
    }
    if (!(panel.sigma0_sq > 0.0)) throw InputError(std::string(who) + ": sigma0_sq must be > 0");
}

inline double implied_at(const DailyPanel& panel, std::size_t k) {
    // O_k with O_0 = implied0
    return k == 0 ? panel.implied0 : panel.implied[k - 1];
}

inline void check_variance(double h, std::size_t n) {
    if (!std::isfinite(h) || !(h > 0.0)) {
        throw EvaluationError("conditional variance h_" + std::to_string(n) +
                              " is not a positive finite number");
    }
}

}  // namespace detail

/// h_1..h_{n+1}; h_1 = panel.sigma0_sq and the last entry is the one-step forecast.
inline std::vector<double> cond_var_series_oi(const ThetaOI& theta, const DailyPanel& panel) {
    detail::require_panel(panel, theta.alpha != 0.0, "cond_var_series_oi");
    const GCoeffs c = coeff_transform(theta);
    const bool use_o = panel.has_implied();
    const std::size_t n = panel.n();
    std::vector<double> h(n + 1);
    h[0] = panel.sigma0_sq;
    for (std::size_t k = 1; k <= n; ++k) {
        // h_{k+1} = omega_g + gamma h_k + beta_g Z_k^2 + eta_g O_k + xi_g O_{k-1}
        const double z = panel.Z[k - 1];
        double v = c.omega_g + theta.gamma * h[k - 1] + c.beta_g * z * z;
        if (use_o) v += c.eta_g * panel.implied[k - 1] + c.xi_g * detail::implied_at(panel, k - 1);
        detail::check_variance(v, k + 1);
        h[k] = v;
    }
    return h;
}

/// -(1/2n) sum_i [log g_i + RV_i / g_i] with g_i = h_i from the OI recursion.
inline double qlik_oi(const ThetaOI& theta, const DailyPanel& panel) {
    const std::vector<double> h = cond_var_series_oi(theta, panel);
    const std::size_t n = panel.n();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double rv = std::max(panel.RV[i], kRvFloor);
        s += std::log(h[i]) + rv / h[i];
    }
    const double value = -s / (2.0 * static_cast<double>(n));
    if (!std::isfinite(value)) throw EvaluationError("qlik_oi: non-finite objective");
    return value;
}

/// Analytic gradient of qlik_oi with respect to (omega, beta, gamma, alpha).
inline std::array<double, 4> qlik_oi_gradient(const ThetaOI& theta, const DailyPanel& panel) {
    detail::require_panel(panel, theta.alpha != 0.0, "qlik_oi_gradient");
    const GCoeffs c = coeff_transform(theta);
    const GCoeffsJacobian J = coeff_jacobian(theta);
    const bool use_o = panel.has_implied();
    const std::size_t n = panel.n();

    double h = panel.sigma0_sq;
    std::array<double, 4> dh{0.0, 0.0, 0.0, 0.0};
    std::array<double, 4> grad{0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double rv = std::max(panel.RV[i], kRvFloor);
        const double w = 1.0 / h - rv / (h * h);
        for (int p = 0; p < 4; ++p) grad[p] += w * dh[p];

        const double z2 = panel.Z[i] * panel.Z[i];
        const double o1 = use_o ? panel.implied[i] : 0.0;
        const double o2 = use_o ? detail::implied_at(panel, i) : 0.0;
        const double next = c.omega_g + theta.gamma * h + c.beta_g * z2 + c.eta_g * o1 + c.xi_g * o2;
        std::array<double, 4> dnext{};
        dnext[0] = J.omega_g_d_omega + theta.gamma * dh[0];
        dnext[1] = J.omega_g_d_beta + theta.gamma * dh[1] + J.beta_g_d_beta * z2 +
                   J.eta_g_d_beta * o1 + J.xi_g_d_beta * o2;
        dnext[2] = h + theta.gamma * dh[2] + J.beta_g_d_gamma * z2;
        dnext[3] = theta.gamma * dh[3] + J.eta_g_d_alpha * o1 + J.xi_g_d_alpha * o2;
        detail::check_variance(next, i + 2);
        h = next;
        dh = dnext;
    }
    const double scale = -1.0 / (2.0 * static_cast<double>(n));
    for (double& g : grad) g *= scale;
    return grad;
}

/// GARCH-Ito recursion (no implied term) used by the IV model: h_1..h_{n+1}.
inline std::vector<double> cond_var_series_iv(const PhiIV& phi, const DailyPanel& panel) {
    const ThetaOI theta = phi.theta();
    const GCoeffs c = coeff_transform(theta);
    panel.check();
    if (!(panel.sigma0_sq > 0.0)) throw InputError("cond_var_series_iv: sigma0_sq must be > 0");
    const std::size_t n = panel.n();
    std::vector<double> h(n + 1);
    h[0] = panel.sigma0_sq;
    for (std::size_t k = 1; k <= n; ++k) {
        const double z = panel.Z[k - 1];
        const double v = c.omega_g + theta.gamma * h[k - 1] + c.beta_g * z * z;
        detail::check_variance(v, k + 1);
        h[k] = v;
    }
    return h;
}

/// f_j = rho IV_{j-1}^2 + a h_{j+1} - rho a h_j + b (1 - rho).
/// `h[k]` holds h_{k+1}; `iv2[k]` holds IV_k^2 (k = 0 is the initial value).
inline double measurement_f(const PhiIV& phi, std::span<const double> h,
                            std::span<const double> iv2, std::size_t j) {
    if (j < 1 || j >= h.size() || j - 1 >= iv2.size()) {
        throw InputError("measurement_f: index j = " + std::to_string(j) + " out of range");
    }
    return phi.rho * iv2[j - 1] + phi.a * h[j] - phi.rho * phi.a * h[j - 1] +
           phi.b * (1.0 - phi.rho);
}

/// Joint quasi-likelihood of returns (through RV) and the implied-variance
/// measurement equation, both normalized by 2n.
inline double qlik_iv(const PhiIV& phi, const DailyPanel& panel) {
    detail::require_panel(panel, true, "qlik_iv");
    if (!(phi.sigma_u2 > 0.0)) throw EvaluationError("qlik_iv: sigma_u2 must be > 0");
    const std::vector<double> h = cond_var_series_iv(phi, panel);
    const std::size_t n = panel.n();
    double s1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double rv = std::max(panel.RV[i], kRvFloor);
        s1 += std::log(h[i]) + rv / h[i];
    }
    double s2 = 0.0;
    const double log_s = std::log(phi.sigma_u2);
    double iv_prev = panel.implied0;
    for (std::size_t j = 1; j + 1 <= n; ++j) {
        const double f = phi.rho * iv_prev + phi.a * h[j] - phi.rho * phi.a * h[j - 1] +
                         phi.b * (1.0 - phi.rho);
        const double r = panel.implied[j - 1] - f;
        s2 += log_s + r * r / phi.sigma_u2;
        iv_prev = panel.implied[j - 1];
    }
    const double value = -(s1 + s2) / (2.0 * static_cast<double>(n));
    if (!std::isfinite(value)) throw EvaluationError("qlik_iv: non-finite objective");
    return value;
}

/// Analytic gradient of qlik_iv in the PhiIV::names order.
inline std::array<double, 7> qlik_iv_gradient(const PhiIV& phi, const DailyPanel& panel) {
    detail::require_panel(panel, true, "qlik_iv_gradient");
    const ThetaOI theta = phi.theta();
    const GCoeffs c = coeff_transform(theta);
    const GCoeffsJacobian J = coeff_jacobian(theta);
    const std::size_t n = panel.n();

    std::vector<double> h(n + 1);
    std::vector<std::array<double, 3>> dh(n + 1, {0.0, 0.0, 0.0});
    h[0] = panel.sigma0_sq;
    for (std::size_t k = 1; k <= n; ++k) {
        const double z2 = panel.Z[k - 1] * panel.Z[k - 1];
        h[k] = c.omega_g + theta.gamma * h[k - 1] + c.beta_g * z2;
        detail::check_variance(h[k], k + 1);
        dh[k][0] = J.omega_g_d_omega + theta.gamma * dh[k - 1][0];
        dh[k][1] = J.omega_g_d_beta + theta.gamma * dh[k - 1][1] + J.beta_g_d_beta * z2;
        dh[k][2] = h[k - 1] + theta.gamma * dh[k - 1][2] + J.beta_g_d_gamma * z2;
    }

    std::array<double, 7> grad{};
    for (std::size_t i = 0; i < n; ++i) {
        const double rv = std::max(panel.RV[i], kRvFloor);
        const double w = 1.0 / h[i] - rv / (h[i] * h[i]);
        for (int p = 0; p < 3; ++p) grad[p] += w * dh[i][p];
    }
    const double s = phi.sigma_u2;
    double iv_prev = panel.implied0;
    for (std::size_t j = 1; j + 1 <= n; ++j) {
        const double f = phi.rho * iv_prev + phi.a * h[j] - phi.rho * phi.a * h[j - 1] +
                         phi.b * (1.0 - phi.rho);
        const double r = panel.implied[j - 1] - f;
        const double w = -2.0 * r / s;  // d(r^2/s)/df
        for (int p = 0; p < 3; ++p) grad[p] += w * (phi.a * dh[j][p] - phi.rho * phi.a * dh[j - 1][p]);
        grad[3] += w * (iv_prev - phi.a * h[j - 1] - phi.b);
        grad[4] += w * (h[j] - phi.rho * h[j - 1]);
        grad[5] += w * (1.0 - phi.rho);
        grad[6] += 1.0 / s - r * r / (s * s);
        iv_prev = panel.implied[j - 1];
    }
    const double scale = -1.0 / (2.0 * static_cast<double>(n));
    for (double& g : grad) g *= scale;
    return grad;
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

struct FitOptions {
    MaximizeOptions optimizer;
    std::size_t min_length = 30;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double clamp_into(double x, const Interval& iv) {
    const double width = iv.hi - iv.lo;
    const double lo = iv.lo + 1e-6 * width;
    const double hi = iv.hi - 1e-6 * width;
    return std::clamp(x, lo, hi);
}

/// Starting values matching the sample level of RV for a few (beta, gamma) pairs.
inline std::vector<ThetaOI> oi_guesses(const DailyPanel& panel, const BoxBounds& bounds,
                                       bool with_alpha) {
    const double level = std::max(mean_of(panel.RV), kRvFloor);
    double o_mean = 0.0;
    if (with_alpha && panel.has_implied()) {
        for (double o : panel.implied) o_mean += std::max(o, 0.0);
        o_mean /= static_cast<double>(panel.n());
    }
    std::vector<ThetaOI> out;
    for (auto [beta, gamma] : {std::pair{0.3, 0.4}, std::pair{0.1, 0.7}, std::pair{1.0, 0.2}}) {
        ThetaOI t{0.0, beta, gamma, 0.0};
        const GCoeffs c0 = coeff_transform(t);
        const double persist = 1.0 - gamma - c0.beta_g;
        if (!(persist > 0.0)) continue;
        const ExpPhi e = exp_phi(beta);
        double share_o = 0.0;
        if (with_alpha) {
            if (o_mean > 0.0) {
                t.alpha = clamp_into(0.2 * level * persist / (e.phi1 * o_mean), bounds.alpha);
                share_o = e.phi1 * t.alpha * o_mean;
            } else {
                t.alpha = clamp_into(1e-3, bounds.alpha);
            }
        }
        t.omega = clamp_into(std::max(level * persist - share_o, 0.05 * level * persist) / e.phi1,
                             bounds.omega);
        out.push_back(t);
    }
    return out;
}

}  // namespace detail

inline FitResult<ThetaOI> fit_oi(const DailyPanel& panel, const BoxBounds& bounds = {},
                                 const FitOptions& opts = {}) {
    detail::require_panel(panel, true, "fit_oi");
    if (panel.n() < opts.min_length) {
        throw InputError("fit_oi: panel shorter than the minimum length " +
                         std::to_string(opts.min_length));
    }
    const std::array<Interval, 4> box{bounds.omega, bounds.beta, bounds.gamma, bounds.alpha};
    MaximizeOptions mo = opts.optimizer;
    for (const auto& g : detail::oi_guesses(panel, bounds, true)) {
        mo.initial_points.push_back({g.omega, g.beta, g.gamma, g.alpha});
    }
    auto objective = [&](std::span<const double> x) {
        return qlik_oi({x[0], x[1], x[2], x[3]}, panel);
    };
    auto feasible = [&](std::span<const double> x) {
        return validate_theta({x[0], x[1], x[2], x[3]}, bounds);
    };
    const MaximizeResult r = maximize(objective, box, feasible, mo);
    FitResult<ThetaOI> fit;
    fit.params = {r.argmax[0], r.argmax[1], r.argmax[2], r.argmax[3]};
    fit.loglik = r.value;
    fit.iterations = r.iterations;
    fit.converged = r.converged && validate_theta(fit.params, bounds);
    fit.restarts_used = r.restarts_used;
    if (!r.converged) fit.diagnostics.emplace_back("optimizer did not meet tolerance");
    return fit;
}

inline FitResult<PhiIV> fit_iv(const DailyPanel& panel, const BoxBounds& bounds = {},
                               const FitOptions& opts = {}) {
    detail::require_panel(panel, true, "fit_iv");
    if (panel.n() < opts.min_length) {
        throw InputError("fit_iv: panel shorter than the minimum length " +
                         std::to_string(opts.min_length));
    }
    const std::array<Interval, 7> box{bounds.omega, bounds.beta, bounds.gamma, bounds.rho,
                                      bounds.a,     bounds.b,    bounds.sigma_u2};
    MaximizeOptions mo = opts.optimizer;
    const std::vector<double> iv2 = panel.implied_with_initial();
    for (const auto& g : detail::oi_guesses(panel, bounds, false)) {
        // Measurement starting values: OLS of IV_j^2 on h_{j+1}, then the lag-1
        // autocorrelation of its residuals.
        PhiIV p{g.omega, g.beta, g.gamma, 0.0, 0.0, 0.0, 0.0};
        const std::vector<double> h = cond_var_series_iv(p, panel);
        const std::size_t n = panel.n();
        double mh = 0.0, mi = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            mh += h[j];
            mi += iv2[j];
        }
        mh /= static_cast<double>(n);
        mi /= static_cast<double>(n);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            sxy += (h[j] - mh) * (iv2[j] - mi);
            sxx += (h[j] - mh) * (h[j] - mh);
        }
        const double a = sxx > 0.0 ? sxy / sxx : 1.0;
        p.a = detail::clamp_into(a, bounds.a);
        p.b = detail::clamp_into(mi - p.a * mh, bounds.b);
        std::vector<double> e(n + 1);
        for (std::size_t j = 0; j <= n; ++j) e[j] = iv2[j] - p.a * h[j] - p.b;
        double num = 0.0, den = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            num += e[j] * e[j - 1];
            den += e[j - 1] * e[j - 1];
        }
        p.rho = detail::clamp_into(den > 0.0 ? num / den : 0.0, Interval{-0.95, 0.95});
        double ss = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            const double u = e[j] - p.rho * e[j - 1];
            ss += u * u;
        }
        p.sigma_u2 = detail::clamp_into(std::max(ss / static_cast<double>(n), 1e-300), bounds.sigma_u2);
        const auto v = p.to_array();
        mo.initial_points.emplace_back(v.begin(), v.end());
    }
    auto objective = [&](std::span<const double> x) {
        return qlik_iv({x[0], x[1], x[2], x[3], x[4], x[5], x[6]}, panel);
    };
    auto feasible = [&](std::span<const double> x) {
        return validate_phi({x[0], x[1], x[2], x[3], x[4], x[5], x[6]}, bounds);
    };
    const MaximizeResult r = maximize(objective, box, feasible, mo);
    FitResult<PhiIV> fit;
    fit.params = {r.argmax[0], r.argmax[1], r.argmax[2], r.argmax[3],
                  r.argmax[4], r.argmax[5], r.argmax[6]};
    fit.loglik = r.value;
    fit.iterations = r.iterations;
    fit.converged = r.converged && validate_phi(fit.params, bounds);
    fit.restarts_used = r.restarts_used;
    if (!r.converged) fit.diagnostics.emplace_back("optimizer did not meet tolerance");
    return fit;
}

/// One-step-ahead variance forecast h_{n+1} from a fitted OI model.
inline double forecast_oi(const FitResult<ThetaOI>& fit, const DailyPanel& panel) {
    return cond_var_series_oi(fit.params, panel).back();
}

/// One-step-ahead variance forecast h_{n+1} from a fitted IV model.
inline double forecast_iv(const FitResult<PhiIV>& fit, const DailyPanel& panel) {
    return cond_var_series_iv(fit.params, panel).back();
}

}  // namespace gito
