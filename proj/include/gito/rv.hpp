#pragma once

#include "gito/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace gito {

/// Sum of squared increments of the observed log prices.
inline double naive_rv(const IntradayPath& path) {
    if (path.observed_log_price.size() < 2) {
        throw InputError("naive_rv: path needs at least 2 grid points");
    }
    const auto& y = path.observed_log_price;
    double s = 0.0;
    for (std::size_t j = 1; j < y.size(); ++j) {
        const double d = y[j] - y[j - 1];
        s += d * d;
    }
    return s;
}

/// Two-scale realized variance: mean of the K offset subsampled RVs minus
/// (m_bar / m) times the all-increments RV, with m_bar = (m - K + 1) / K,
/// scaled by the small-sample factor 1 / (1 - m_bar / m). Floored at zero.
inline double tsrv(const IntradayPath& path, std::size_t slow_scale) {
    const std::size_t m = path.increments();
    if (slow_scale < 2) throw InputError("tsrv: slow scale K must be >= 2");
    if (m < 2 * slow_scale) {
        throw InputError("tsrv: need at least 2K increments (m = " + std::to_string(m) +
                         ", K = " + std::to_string(slow_scale) + ")");
    }
    const auto& y = path.observed_log_price;
    const std::size_t K = slow_scale;
    double slow = 0.0;
    for (std::size_t j = K; j <= m; ++j) {
        const double d = y[j] - y[j - K];
        slow += d * d;
    }
    slow /= static_cast<double>(K);
    const double fast = naive_rv(path);
    const double m_bar = static_cast<double>(m - K + 1) / static_cast<double>(K);
    const double ratio = m_bar / static_cast<double>(m);
    return std::max(0.0, (slow - ratio * fast) / (1.0 - ratio));
}

enum class RvKind { naive, tsrv };

struct RvOptions {
    RvKind kind = RvKind::naive;
    /// Slow scale for TSRV; 0 selects it per day from the data (see auto_tsrv_scale).
    std::size_t slow_scale = 0;
};

/// Slow scale K = c * m^{2/3} with the noise-to-signal constant
/// c = (12 noise_var^2 / quarticity)^{1/3}; noise_var is estimated as RV/(2m)
/// and the quarticity by the squared RV of a roughly 20-step sparse grid.
/// Clamped to [2, m/2].
inline std::size_t auto_tsrv_scale(const IntradayPath& path) {
    const std::size_t m = path.increments();
    if (m < 4) return 2;
    const double fast = naive_rv(path);
    const double noise = fast / (2.0 * static_cast<double>(m));
    const auto& y = path.observed_log_price;
    const std::size_t sparse_step = std::max<std::size_t>(1, m / 20);
    double sparse = 0.0;
    for (std::size_t j = sparse_step; j <= m; j += sparse_step) {
        const double d = y[j] - y[j - sparse_step];
        sparse += d * d;
    }
    const double quarticity = sparse * sparse;
    if (!(quarticity > 0.0)) return 2;
    const double c = std::cbrt(12.0 * noise * noise / quarticity);
    const double k = std::round(c * std::pow(static_cast<double>(m), 2.0 / 3.0));
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 2.0)), 2, m / 2);
}

inline double realized_variance(const IntradayPath& path, const RvOptions& opts) {
    switch (opts.kind) {
        case RvKind::naive:
            return naive_rv(path);
        case RvKind::tsrv: {
            const std::size_t K = opts.slow_scale == 0 ? auto_tsrv_scale(path) : opts.slow_scale;
            return tsrv(path, K);
        }
    }
    return naive_rv(path);
}

}  // namespace gito
