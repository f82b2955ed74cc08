#pragma once

#include "gito/core.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace gito {

struct LossReport {
    double mae = 0.0;
    double mse = 0.0;
    double hmae = 0.0;
    double hmse = 0.0;
    double amape = 0.0;
    /// Mean squared log error over the positive forecasts; NaN if there are none.
    double ll = 0.0;
    std::size_t n_forecasts = 0;
    std::size_t n_dropped_for_ll = 0;
};

/// MAE, MSE, HMAE, HMSE, AMAPE and LL of forecasts F against realized RV.
inline LossReport evaluate_losses(std::span<const double> F, std::span<const double> RV) {
    if (F.size() != RV.size()) throw InputError("evaluate_losses: forecast and realized lengths differ");
    if (F.empty()) throw InputError("evaluate_losses: empty input");
    for (double r : RV) {
        if (!(r > 0.0) || !std::isfinite(r)) throw InputError("evaluate_losses: realized values must be > 0");
    }
    LossReport out;
    out.n_forecasts = F.size();
    double ll = 0.0;
    std::size_t n_ll = 0;
    for (std::size_t i = 0; i < F.size(); ++i) {
        const double e = RV[i] - F[i];
        const double rel = 1.0 - F[i] / RV[i];
        out.mae += std::abs(e);
        out.mse += e * e;
        out.hmae += std::abs(rel);
        out.hmse += rel * rel;
        out.amape += std::abs((F[i] - RV[i]) / (F[i] + RV[i]));
        if (F[i] > 0.0) {
            const double d = std::log(F[i]) - std::log(RV[i]);
            ll += d * d;
            ++n_ll;
        }
    }
    const auto n = static_cast<double>(F.size());
    out.mae /= n;
    out.mse /= n;
    out.hmae /= n;
    out.hmse /= n;
    out.amape /= n;
    out.ll = n_ll > 0 ? ll / static_cast<double>(n_ll) : std::numeric_limits<double>::quiet_NaN();
    out.n_dropped_for_ll = F.size() - n_ll;
    return out;
}

}  // namespace gito
