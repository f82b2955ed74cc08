#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gito {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Bad caller input (too-short series, malformed paths, out-of-range index).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Objective could not be evaluated (non-finite value, non-positive variance).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simulated state left the valid region. Carries the day/step where it happened.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::size_t day, std::size_t step)
        : std::runtime_error(what + " (day " + std::to_string(day) + ", step " +
                             std::to_string(step) + ")"),
          day_(day),
          step_(step) {}

    [[nodiscard]] std::size_t day() const noexcept { return day_; }
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t day_;
    std::size_t step_;
};

// ---------------------------------------------------------------------------
// Parameter spaces
// ---------------------------------------------------------------------------

/// Open interval (lo, hi).
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    [[nodiscard]] constexpr bool contains(double x) const noexcept { return lo < x && x < hi; }
    [[nodiscard]] bool finite() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
};

/// Box bounds for both parameter spaces. Defaults contain every parameter value
/// used by the simulation designs while keeping e^beta well away from overflow.
struct BoxBounds {
    Interval omega{1e-8, 10.0};
    Interval beta{1e-6, 3.0};
    Interval gamma{1e-6, 0.999};
    Interval alpha{0.0, 5.0};
    Interval rho{-1.0, 1.0};
    Interval a{1e-6, 10.0};
    Interval b{0.0, 1.0};
    Interval sigma_u2{1e-12, 10.0};
};

/// GARCH-Ito-OI parameters (omega, beta, gamma, alpha). omega is a per-day variance rate.
struct ThetaOI {
    double omega = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double alpha = 0.0;

    static constexpr std::array<std::string_view, 4> names{"omega", "beta", "gamma", "alpha"};
    [[nodiscard]] std::array<double, 4> to_array() const { return {omega, beta, gamma, alpha}; }
    static ThetaOI from_array(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }
    friend bool operator==(const ThetaOI&, const ThetaOI&) = default;
};

/// GARCH-Ito-IV parameters: the GARCH-Ito triple plus the implied-variance
/// measurement equation (rho, a, b) and its innovation variance sigma_u2.
struct PhiIV {
    double omega = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double rho = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sigma_u2 = 0.0;

    static constexpr std::array<std::string_view, 7> names{"omega", "beta", "gamma", "rho",
                                                           "a",     "b",    "sigma_u2"};
    [[nodiscard]] std::array<double, 7> to_array() const {
        return {omega, beta, gamma, rho, a, b, sigma_u2};
    }
    static PhiIV from_array(const std::array<double, 7>& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }
    [[nodiscard]] ThetaOI theta() const { return {omega, beta, gamma, 0.0}; }
    friend bool operator==(const PhiIV&, const PhiIV&) = default;
};

// ---------------------------------------------------------------------------
// Exponential helper functions
// ---------------------------------------------------------------------------

/// phi1(x) = (e^x - 1)/x, phi2(x) = (e^x - 1 - x)/x^2 and their derivatives.
/// Both are entire; the series branch avoids the cancellation near x = 0.
struct ExpPhi {
    double phi1 = 1.0;
    double phi2 = 0.5;
    double dphi1 = 0.5;
    double dphi2 = 1.0 / 6.0;
};

inline ExpPhi exp_phi(double x) {
    ExpPhi r;
    if (std::abs(x) < 0.5) {
        // phi_j(x) = sum_k x^k / (k + j)!
        double p1 = 0.0, p2 = 0.0, d1 = 0.0, d2 = 0.0;
        double fact1 = 1.0;  // (k+1)!
        double fact2 = 2.0;  // (k+2)!
        double xk = 1.0;     // x^k
        double xkm1 = 0.0;   // x^(k-1), zero for k = 0
        for (int k = 0; k < 24; ++k) {
            p1 += xk / fact1;
            p2 += xk / fact2;
            if (k > 0) {
                d1 += k * xkm1 / fact1;
                d2 += k * xkm1 / fact2;
            }
            xkm1 = xk;
            xk *= x;
            fact1 *= (k + 2);
            fact2 *= (k + 3);
        }
        r.phi1 = p1;
        r.phi2 = p2;
        r.dphi1 = d1;
        r.dphi2 = d2;
        return r;
    }
    const double em1 = std::expm1(x);
    r.phi1 = em1 / x;
    r.phi2 = (r.phi1 - 1.0) / x;
    r.dphi1 = (em1 + 1.0 - r.phi1) / x;
    r.dphi2 = (r.dphi1 - r.phi2) / x;
    return r;
}

/// beta^g = beta^{-1}(gamma - 1)(e^beta - 1 - beta) + e^beta - 1.
inline double beta_g(double beta, double gamma) {
    const ExpPhi p = exp_phi(beta);
    return (gamma - 1.0) * beta * p.phi2 + std::expm1(beta);
}

// ---------------------------------------------------------------------------
// Feasibility
// ---------------------------------------------------------------------------

inline bool validate_theta(const ThetaOI& t, const BoxBounds& bounds = {}) {
    if (!(bounds.omega.contains(t.omega) && bounds.beta.contains(t.beta) &&
          bounds.gamma.contains(t.gamma) && bounds.alpha.contains(t.alpha))) {
        return false;
    }
    return t.gamma + beta_g(t.beta, t.gamma) < 1.0;
}

inline bool validate_phi(const PhiIV& p, const BoxBounds& bounds = {}) {
    if (!(bounds.omega.contains(p.omega) && bounds.beta.contains(p.beta) &&
          bounds.gamma.contains(p.gamma) && bounds.a.contains(p.a) && bounds.b.contains(p.b) &&
          bounds.sigma_u2.contains(p.sigma_u2))) {
        return false;
    }
    if (!(std::abs(p.rho) < 1.0) || !bounds.rho.contains(p.rho)) {
        return false;
    }
    return p.gamma + beta_g(p.beta, p.gamma) < 1.0;
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

/// One day of intraday log prices on the grid t_{i,0} = i-1 < ... < t_{i,m} = i.
/// Both endpoints are stored, so consecutive days share a boundary point.
struct IntradayPath {
    std::size_t day_index = 1;
    std::vector<double> grid;
    std::vector<double> true_log_price;
    std::vector<double> observed_log_price;

    [[nodiscard]] std::size_t size() const noexcept { return grid.size(); }
    [[nodiscard]] std::size_t increments() const noexcept {
        return grid.empty() ? 0 : grid.size() - 1;
    }

    /// Throws InputError when lengths disagree or the grid is not strictly increasing.
    void check() const {
        if (true_log_price.size() != grid.size() || observed_log_price.size() != grid.size()) {
            throw InputError("IntradayPath: grid and price vectors differ in length");
        }
        for (std::size_t j = 1; j < grid.size(); ++j) {
            if (!(grid[j] > grid[j - 1])) {
                throw InputError("IntradayPath: grid is not strictly increasing");
            }
        }
    }
};

/// Aligned daily series. Index k holds day k+1: Z[k] = X_{k+1} - X_k,
/// RV[k] = RV_{k+1}, implied[k] = O_{k+1} (or IV_{k+1}^2).
struct DailyPanel {
    std::vector<double> Z;
    std::vector<double> RV;
    std::vector<double> implied;
    double sigma0_sq = 0.0;
    double implied0 = 0.0;
    /// True integrated variance per day, when known (simulation only).
    std::vector<double> integrated_variance;

    [[nodiscard]] std::size_t n() const noexcept { return Z.size(); }
    [[nodiscard]] bool has_implied() const noexcept { return !implied.empty(); }

    void check() const {
        if (RV.size() != Z.size()) {
            throw InputError("DailyPanel: RV and Z differ in length");
        }
        if (!implied.empty() && implied.size() != Z.size()) {
            throw InputError("DailyPanel: implied and Z differ in length");
        }
        for (double v : RV) {
            if (!(v >= 0.0)) {
                throw InputError("DailyPanel: negative or NaN realized variance");
            }
        }
    }

    /// First `days` days with the same initial values.
    [[nodiscard]] DailyPanel head(std::size_t days) const {
        if (days > n()) {
            throw InputError("DailyPanel::head: requested more days than available");
        }
        DailyPanel out;
        out.Z.assign(Z.begin(), Z.begin() + static_cast<std::ptrdiff_t>(days));
        out.RV.assign(RV.begin(), RV.begin() + static_cast<std::ptrdiff_t>(days));
        if (!implied.empty()) {
            out.implied.assign(implied.begin(), implied.begin() + static_cast<std::ptrdiff_t>(days));
        }
        if (!integrated_variance.empty()) {
            out.integrated_variance.assign(integrated_variance.begin(),
                                           integrated_variance.begin() +
                                               static_cast<std::ptrdiff_t>(days));
        }
        out.sigma0_sq = sigma0_sq;
        out.implied0 = implied0;
        return out;
    }

    /// Implied series with the initial value prepended: out[k] = O_k, k = 0..n.
    [[nodiscard]] std::vector<double> implied_with_initial() const {
        std::vector<double> out;
        out.reserve(implied.size() + 1);
        out.push_back(implied0);
        out.insert(out.end(), implied.begin(), implied.end());
        return out;
    }
};

/// Clamp negative implied variances to zero. Returns the number of clamped entries.
inline std::size_t sanitize_implied(std::vector<double>& implied) {
    std::size_t clamped = 0;
    for (double& v : implied) {
        if (v < 0.0) {
            v = 0.0;
            ++clamped;
        }
    }
    return clamped;
}

/// Outcome of a quasi-likelihood fit.
template <class Params>
struct FitResult {
    Params params{};
    double loglik = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    int restarts_used = 0;
    std::vector<std::string> diagnostics;
};

}  // namespace gito
