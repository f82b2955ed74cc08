#pragma once

#include "gito/core.hpp"
#include "gito/io.hpp"
#include "gito/panel.hpp"
#include "gito/rv.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gito {

/// How the implied column is turned into a daily variance.
enum class ImpliedConvention {
    variance,      ///< already a variance
    vol_squared,   ///< a volatility; squared
    index_points,  ///< volatility index points; squared and scaled by 1e-4
};

inline ImpliedConvention parse_implied_convention(std::string_view s) {
    if (s == "variance") return ImpliedConvention::variance;
    if (s == "vol_squared") return ImpliedConvention::vol_squared;
    if (s == "index_points" || s == "vix") return ImpliedConvention::index_points;
    throw InputError("unknown implied convention: " + std::string(s));
}

inline double convert_implied(double x, ImpliedConvention c) {
    switch (c) {
        case ImpliedConvention::variance: return x;
        case ImpliedConvention::vol_squared: return x * x;
        case ImpliedConvention::index_points: return x * x * 1e-4;
    }
    return x;
}

struct IngestOptions {
    RvOptions rv;
    ImpliedConvention implied = ImpliedConvention::variance;
    /// Carry the previous implied value over missing days instead of failing.
    bool forward_fill = false;
    std::size_t min_ticks = 2;
};

struct SourceCounts {
    std::size_t rows_in = 0;
    std::size_t rows_used = 0;
    std::size_t rows_dropped = 0;
};

struct IngestDiagnostics {
    SourceCounts high_freq;
    SourceCounts daily;
    SourceCounts implied;
    std::size_t days_below_min_ticks = 0;
    std::size_t implied_forward_filled = 0;
    std::size_t implied_clamped = 0;
    std::vector<std::string> messages;
};

struct IngestResult {
    DailyPanel panel;
    /// Date of each panel day.
    std::vector<std::string> dates;
    IngestDiagnostics diagnostics;
};

namespace detail {

/// Seconds since midnight from HH:MM[:SS[.fff]], or a plain decimal.
inline double parse_time(const std::string& s, const std::string& where) {
    if (s.find(':') == std::string::npos) return parse_double(s, where);
    double total = 0.0;
    std::size_t start = 0;
    int parts = 0;
    const double scale[3] = {3600.0, 60.0, 1.0};
    while (start <= s.size() && parts < 3) {
        const std::size_t colon = s.find(':', start);
        const std::string piece = s.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
        total += scale[parts] * parse_double(piece, where);
        ++parts;
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    if (parts < 2 || std::count(s.begin(), s.end(), ':') > 2) {
        throw DataError(where + ": cannot parse time '" + s + "'");
    }
    return total;
}

struct Tick {
    double time;
    double log_price;
    std::size_t line;
};

}  // namespace detail

/// Build a daily panel from high-frequency prices, daily closes and an optional
/// implied series. Daily returns are close-to-close log differences; the daily
/// close preceding the first intraday day anchors the first return, otherwise
/// the first day only serves as the anchor.
inline IngestResult ingest_tables(const CsvTable& hf, const CsvTable& daily,
                                  const std::optional<CsvTable>& implied, const IngestOptions& opts,
                                  const std::string& hf_name = "high_freq",
                                  const std::string& daily_name = "daily",
                                  const std::string& implied_name = "implied") {
    IngestResult res;
    IngestDiagnostics& diag = res.diagnostics;

    // Intraday ticks grouped by date.
    std::map<std::string, std::vector<detail::Tick>> days;
    {
        const std::size_t c_date = hf.column("date"), c_time = hf.column("time"), c_price = hf.column("price");
        diag.high_freq.rows_in = hf.rows.size();
        for (const auto& row : hf.rows) {
            const std::string where = hf_name + ":" + std::to_string(row.line);
            const std::string& date = row.fields[c_date];
            if (date.empty()) throw DataError(where + ": empty date");
            const double t = detail::parse_time(row.fields[c_time], where);
            const double price = parse_double(row.fields[c_price], where);
            if (!(price > 0.0) || !std::isfinite(price)) throw DataError(where + ": price must be positive");
            days[date].push_back({t, std::log(price), row.line});
        }
    }
    for (auto it = days.begin(); it != days.end();) {
        if (it->second.size() < opts.min_ticks) {
            diag.high_freq.rows_dropped += it->second.size();
            ++diag.days_below_min_ticks;
            diag.messages.push_back("day " + it->first + " dropped: " + std::to_string(it->second.size()) +
                                    " ticks < " + std::to_string(opts.min_ticks));
            it = days.erase(it);
        } else {
            std::stable_sort(it->second.begin(), it->second.end(),
                             [](const detail::Tick& a, const detail::Tick& b) { return a.time < b.time; });
            ++it;
        }
    }
    if (days.empty()) throw DataError(hf_name + ": no trading day has enough intraday prices");

    // Daily closes.
    std::map<std::string, double> closes;
    std::map<std::string, std::size_t> close_line;
    {
        const std::size_t c_date = daily.column("date"), c_close = daily.column("close");
        diag.daily.rows_in = daily.rows.size();
        for (const auto& row : daily.rows) {
            const std::string where = daily_name + ":" + std::to_string(row.line);
            const double close = parse_double(row.fields[c_close], where);
            if (!(close > 0.0) || !std::isfinite(close)) throw DataError(where + ": close must be positive");
            if (!closes.emplace(row.fields[c_date], std::log(close)).second) {
                throw DataError(where + ": duplicate date " + row.fields[c_date]);
            }
            close_line[row.fields[c_date]] = row.line;
        }
    }
    for (const auto& [date, ticks] : days) {
        if (!closes.count(date)) throw DataError(daily_name + ": no close for trading day " + date);
    }

    // Anchor close.
    std::string anchor_date;
    const std::string first_day = days.begin()->first;
    auto before = closes.lower_bound(first_day);
    if (before != closes.begin()) {
        anchor_date = std::prev(before)->first;
    } else {
        anchor_date = first_day;
        diag.high_freq.rows_dropped += days.begin()->second.size();
        diag.messages.push_back("day " + first_day + " used only as the return anchor");
        days.erase(days.begin());
        if (days.empty()) throw DataError("ingest: need at least two trading days without an earlier close");
    }

    // Implied values by date.
    std::map<std::string, double> implied_by_date;
    if (implied) {
        const std::size_t c_date = implied->column("date"), c_value = implied->column("value");
        diag.implied.rows_in = implied->rows.size();
        for (const auto& row : implied->rows) {
            const std::string where = implied_name + ":" + std::to_string(row.line);
            const double v = convert_implied(parse_double(row.fields[c_value], where), opts.implied);
            if (!std::isfinite(v)) throw DataError(where + ": implied value is not finite");
            if (!implied_by_date.emplace(row.fields[c_date], v).second) {
                throw DataError(where + ": duplicate date " + row.fields[c_date]);
            }
        }
        if (implied_by_date.empty()) throw DataError(implied_name + ": no implied observations");
    }

    DailyPanel& panel = res.panel;
    double prev_close = closes.at(anchor_date);
    std::size_t k = 0;
    std::optional<double> last_implied;
    if (implied && implied_by_date.count(anchor_date)) last_implied = implied_by_date.at(anchor_date);
    const std::optional<double> anchor_implied = last_implied;
    for (const auto& [date, ticks] : days) {
        ++k;
        IntradayPath path;
        path.day_index = k;
        const std::size_t m = ticks.size() - 1;
        for (std::size_t j = 0; j < ticks.size(); ++j) {
            path.grid.push_back(static_cast<double>(k - 1) + static_cast<double>(j) / static_cast<double>(m));
            path.true_log_price.push_back(ticks[j].log_price);
        }
        path.observed_log_price = path.true_log_price;
        diag.high_freq.rows_used += ticks.size();
        const double close = closes.at(date);
        panel.Z.push_back(close - prev_close);
        prev_close = close;
        try {
            panel.RV.push_back(realized_variance(path, opts.rv));
        } catch (const InputError& e) {
            throw DataError("day " + date + ": " + e.what());
        }
        res.dates.push_back(date);
        if (implied) {
            auto it = implied_by_date.find(date);
            if (it != implied_by_date.end()) {
                last_implied = it->second;
            } else if (opts.forward_fill && last_implied) {
                ++diag.implied_forward_filled;
            } else {
                throw DataError(implied_name + ": no implied value for trading day " + date);
            }
            panel.implied.push_back(*last_implied);
        }
    }
    diag.daily.rows_used = panel.n() + 1;
    diag.daily.rows_dropped = diag.daily.rows_in - diag.daily.rows_used;
    if (diag.daily.rows_dropped > 0) {
        diag.messages.push_back(std::to_string(diag.daily.rows_dropped) + " daily rows without intraday data dropped");
    }
    if (implied) {
        panel.implied0 = anchor_implied ? *anchor_implied : panel.implied.front();
        std::size_t used = anchor_implied ? 1 : 0;
        for (const auto& d : res.dates) used += implied_by_date.count(d);
        diag.implied.rows_used = used;
        diag.implied.rows_dropped = diag.implied.rows_in - used;
        std::vector<double> all = panel.implied_with_initial();
        diag.implied_clamped = sanitize_implied(all);
        panel.implied0 = all.front();
        panel.implied.assign(all.begin() + 1, all.end());
    }
    panel.sigma0_sq = std::max(panel.Z.front() * panel.Z.front(), kVarianceFloor);
    panel.check();
    return res;
}

/// File-based front end to ingest_tables. An empty implied path means no implied series.
inline IngestResult ingest(const std::filesystem::path& high_freq_csv, const std::filesystem::path& daily_csv,
                           const std::filesystem::path& implied_csv, const IngestOptions& opts = {}) {
    const CsvTable hf = read_csv(high_freq_csv);
    const CsvTable daily = read_csv(daily_csv);
    std::optional<CsvTable> implied;
    if (!implied_csv.empty()) implied = read_csv(implied_csv);
    return ingest_tables(hf, daily, implied, opts, high_freq_csv.string(), daily_csv.string(),
                         implied_csv.string());
}

}  // namespace gito
