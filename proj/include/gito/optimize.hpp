#pragma once

#include "gito/core.hpp"
#include "gito/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace gito {

struct MaximizeOptions {
    int starts = 8;
    int max_iter = 2000;
    /// Convergence: spread of objective values over the simplex.
    double tol = 1e-8;
    /// Convergence: simplex diameter in the unconstrained coordinates.
    double xtol = 1e-7;
    std::uint64_t seed = 0;
    /// Restarts from the best vertex after a start converges.
    int max_restarts = 3;
    /// Caller-supplied starting points, used before random ones when feasible.
    std::vector<std::vector<double>> initial_points;
    bool record_trace = false;
};

struct MaximizeResult {
    std::vector<double> argmax;
    double value = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    int restarts_used = 0;
    int starts_run = 0;
    int starts_converged = 0;
    /// Best value reached by each start.
    std::vector<double> start_values;
    /// Best-so-far value after every iteration (record_trace only).
    std::vector<double> trace;
};

namespace detail {

/// Coordinate map between a box and R: logistic for finite boxes, exponential
/// for half-lines, identity otherwise.
struct BoxMap {
    std::vector<Interval> box;

    [[nodiscard]] double to_box(std::size_t i, double y) const {
        const Interval& iv = box[i];
        const bool lo = std::isfinite(iv.lo), hi = std::isfinite(iv.hi);
        if (lo && hi) {
            const double s = y >= 0.0 ? 1.0 / (1.0 + std::exp(-y)) : std::exp(y) / (1.0 + std::exp(y));
            return iv.lo + (iv.hi - iv.lo) * s;
        }
        if (lo) return iv.lo + std::exp(y);
        if (hi) return iv.hi - std::exp(-y);
        return y;
    }

    [[nodiscard]] double from_box(std::size_t i, double x) const {
        const Interval& iv = box[i];
        const bool lo = std::isfinite(iv.lo), hi = std::isfinite(iv.hi);
        if (lo && hi) return std::log((x - iv.lo) / (iv.hi - x));
        if (lo) return std::log(x - iv.lo);
        if (hi) return -std::log(iv.hi - x);
        return x;
    }
};

template <class F, class C>
double evaluate(F& objective, C& feasible, std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
    }
    if (!feasible(x)) return -std::numeric_limits<double>::infinity();
    double f;
    try {
        f = objective(x);
    } catch (const EvaluationError&) {
        return -std::numeric_limits<double>::infinity();
    }
    return std::isfinite(f) ? f : -std::numeric_limits<double>::infinity();
}

inline bool in_box(const std::vector<Interval>& box, std::span<const double> x) {
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (!box[i].contains(x[i])) return false;
    }
    return true;
}

struct SimplexRun {
    std::vector<double> best_y;
    double best_value = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// One adaptive Nelder-Mead run (maximizing) in unconstrained coordinates.
template <class F, class C>
SimplexRun nelder_mead(F& objective, C& feasible, const BoxMap& map, std::vector<double> y0,
                       const MaximizeOptions& opts, double& global_best,
                       std::vector<double>* trace) {
    const std::size_t n = y0.size();
    const double dn = static_cast<double>(n);
    const double c_refl = 1.0;
    const double c_exp = 1.0 + 2.0 / dn;
    const double c_con = 0.75 - 1.0 / (2.0 * dn);
    const double c_shr = 1.0 - 1.0 / dn;

    std::vector<double> xbuf(n);
    auto value_at = [&](const std::vector<double>& y) {
        for (std::size_t i = 0; i < n; ++i) xbuf[i] = map.to_box(i, y[i]);
        return evaluate(objective, feasible, std::span<const double>(xbuf));
    };

    // Simplex stored as minimization of g = -f.
    std::vector<std::vector<double>> pts(n + 1, y0);
    std::vector<double> g(n + 1);
    g[0] = -value_at(pts[0]);
    for (std::size_t i = 0; i < n; ++i) {
        double step = 0.5;
        for (int attempt = 0; attempt < 8; ++attempt) {
            pts[i + 1] = y0;
            pts[i + 1][i] += (attempt % 2 == 0) ? step : -step;
            g[i + 1] = -value_at(pts[i + 1]);
            if (std::isfinite(g[i + 1])) break;
            if (attempt % 2 == 1) step *= 0.25;
        }
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), yr(n), ye(n), yc(n);
    SimplexRun run;
    for (int it = 0; it < opts.max_iter; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return g[a] < g[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        if (std::isfinite(g[best])) global_best = std::max(global_best, -g[best]);
        if (trace) trace->push_back(global_best);
        run.iterations = it + 1;

        double diam = 0.0;
        for (std::size_t k = 0; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i) diam = std::max(diam, std::abs(pts[k][i] - pts[best][i]));
        }
        const bool fspread_ok = std::isfinite(g[worst]) && (g[worst] - g[best]) <= opts.tol;
        if (fspread_ok && diam <= opts.xtol) {
            run.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[order[k]][i] / dn;
        }
        for (std::size_t i = 0; i < n; ++i) yr[i] = centroid[i] + c_refl * (centroid[i] - pts[worst][i]);
        const double gr = -value_at(yr);

        if (gr < g[best]) {
            for (std::size_t i = 0; i < n; ++i) ye[i] = centroid[i] + c_exp * (yr[i] - centroid[i]);
            const double ge = -value_at(ye);
            if (ge < gr) {
                pts[worst] = ye;
                g[worst] = ge;
            } else {
                pts[worst] = yr;
                g[worst] = gr;
            }
            continue;
        }
        if (gr < g[second]) {
            pts[worst] = yr;
            g[worst] = gr;
            continue;
        }
        if (gr < g[worst]) {
            for (std::size_t i = 0; i < n; ++i) yc[i] = centroid[i] + c_con * (yr[i] - centroid[i]);
            const double gc = -value_at(yc);
            if (gc <= gr) {
                pts[worst] = yc;
                g[worst] = gc;
                continue;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) yc[i] = centroid[i] - c_con * (yr[i] - centroid[i]);
            const double gc = -value_at(yc);
            if (gc < g[worst]) {
                pts[worst] = yc;
                g[worst] = gc;
                continue;
            }
        }
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == best) continue;
            for (std::size_t i = 0; i < n; ++i) {
                pts[k][i] = pts[best][i] + c_shr * (pts[k][i] - pts[best][i]);
            }
            g[k] = -value_at(pts[k]);
        }
    }
    const auto best_it = std::min_element(g.begin(), g.end());
    const std::size_t best = static_cast<std::size_t>(best_it - g.begin());
    run.best_y = pts[best];
    run.best_value = -g[best];
    if (std::isfinite(run.best_value)) global_best = std::max(global_best, run.best_value);
    return run;
}

}  // namespace detail

/// Maximize `objective` over the open box intersected with `feasible`.
///
/// Each start runs an adaptive Nelder-Mead simplex in logit coordinates, then
/// restarts from its best vertex until a restart stops improving. Points that
/// leave the feasible set or make the objective throw EvaluationError count as
/// -inf. The best start wins; ties go to the lexicographically smallest point.
/// Throws InputError when no feasible start is found in 10^4 draws.
template <class F, class C>
MaximizeResult maximize(F&& objective, std::span<const Interval> box, C&& feasible,
                        const MaximizeOptions& opts = {}) {
    if (box.empty()) throw InputError("maximize: empty box");
    for (const auto& iv : box) {
        if (!(iv.lo < iv.hi)) throw InputError("maximize: empty interval in box");
    }
    const std::size_t n = box.size();
    detail::BoxMap map{std::vector<Interval>(box.begin(), box.end())};

    auto is_feasible = [&](std::span<const double> x) {
        return detail::in_box(map.box, x) && feasible(x);
    };

    std::vector<std::vector<double>> starts;
    for (const auto& p : opts.initial_points) {
        if (static_cast<int>(starts.size()) >= std::max(opts.starts, 1)) break;
        if (p.size() == n && is_feasible(p)) starts.push_back(p);
    }
    Rng rng = make_rng(opts.seed, stream::optimizer);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    while (static_cast<int>(starts.size()) < std::max(opts.starts, 1)) {
        bool found = false;
        std::vector<double> x(n);
        for (int draw = 0; draw < 10000 && !found; ++draw) {
            for (std::size_t i = 0; i < n; ++i) {
                const Interval& iv = map.box[i];
                if (iv.finite()) {
                    x[i] = iv.lo + (iv.hi - iv.lo) * unit(rng);
                } else {
                    x[i] = map.to_box(i, normal(rng));
                }
            }
            found = is_feasible(x);
        }
        if (!found) throw InputError("maximize: no feasible start found in 10^4 draws");
        starts.push_back(x);
    }

    MaximizeResult result;
    double global_best = -std::numeric_limits<double>::infinity();
    std::vector<double> best_x;
    bool best_converged = false;
    std::vector<double> xbuf(n);
    for (const auto& x0 : starts) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = map.from_box(i, x0[i]);

        double start_best = -std::numeric_limits<double>::infinity();
        bool start_converged = false;
        for (int restart = 0; restart <= opts.max_restarts; ++restart) {
            auto run = detail::nelder_mead(objective, is_feasible, map, y, opts, global_best,
                                           opts.record_trace ? &result.trace : nullptr);
            result.iterations += run.iterations;
            const double gain = run.best_value - start_best;
            if (run.best_value > start_best) {
                start_best = run.best_value;
                y = run.best_y;
            }
            start_converged = run.converged;
            if (restart > 0) ++result.restarts_used;
            if (!run.converged || !(gain > opts.tol)) break;
        }
        ++result.starts_run;
        if (start_converged) ++result.starts_converged;
        result.start_values.push_back(start_best);

        for (std::size_t i = 0; i < n; ++i) xbuf[i] = map.to_box(i, y[i]);
        const bool better = start_best > result.value;
        const bool tie = start_best == result.value &&
                         std::lexicographical_compare(xbuf.begin(), xbuf.end(), best_x.begin(),
                                                      best_x.end());
        if (better || tie) {
            result.value = start_best;
            best_x = xbuf;
            best_converged = start_converged;
        }
    }
    if (best_x.empty()) best_x = starts.front();
    result.argmax = best_x;
    result.converged = best_converged && std::isfinite(result.value);
    return result;
}

}  // namespace gito
