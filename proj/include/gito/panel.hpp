#pragma once

#include "gito/core.hpp"
#include "gito/rv.hpp"
#include "gito/simulate.hpp"

#include <algorithm>
#include <vector>

namespace gito {

/// Smallest value allowed for h_1 when it defaults to Z_1^2.
inline constexpr double kVarianceFloor = 1e-12;

/// Daily panel from a run of intraday paths and the implied series O_0..O_n.
/// Z_n is the difference of the day-boundary true log prices; RV_n comes from
/// the observed prices; sigma0_sq defaults to Z_1^2.
inline DailyPanel make_panel(const std::vector<IntradayPath>& paths,
                             const std::vector<double>& implied, const RvOptions& rv = {}) {
    if (paths.empty()) throw InputError("make_panel: no paths");
    if (!implied.empty() && implied.size() != paths.size() + 1) {
        throw InputError("make_panel: implied series must hold O_0..O_n");
    }
    DailyPanel panel;
    panel.Z.reserve(paths.size());
    panel.RV.reserve(paths.size());
    for (const auto& p : paths) {
        if (p.size() < 2) throw InputError("make_panel: day with fewer than 2 grid points");
        panel.Z.push_back(p.true_log_price.back() - p.true_log_price.front());
        panel.RV.push_back(realized_variance(p, rv));
    }
    if (!implied.empty()) {
        panel.implied0 = implied.front();
        panel.implied.assign(implied.begin() + 1, implied.end());
    }
    panel.sigma0_sq = std::max(panel.Z.front() * panel.Z.front(), kVarianceFloor);
    return panel;
}

inline DailyPanel make_panel(const SimulationOutput& sim, const RvOptions& rv = {}) {
    DailyPanel panel = make_panel(sim.paths, sim.implied, rv);
    panel.integrated_variance = sim.integrated_variance;
    return panel;
}

}  // namespace gito
