#pragma once

#include "gito/core.hpp"
#include "gito/harness.hpp"
#include "gito/metrics.hpp"
#include "gito/simulate.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gito {

/// Malformed or inconsistent input data.
class DataError : public InputError {
public:
    using InputError::InputError;
};

/// File system failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline double parse_double(std::string_view s, const std::string& where) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError(where + ": cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const {
        for (std::size_t k = 0; k < header.size(); ++k) {
            if (header[k] == name) return k;
        }
        throw DataError("missing CSV column '" + std::string(name) + "'");
    }
};

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Comma-separated text with a header line. Blank lines are skipped; rows with
/// the wrong field count are errors carrying the line number.
inline CsvTable parse_csv(std::istream& in, const std::string& name) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = s.find(',', start);
            out.push_back(trim(std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        CsvRow row{lineno, split(line)};
        if (row.fields.size() != t.header.size()) {
            throw DataError(name + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields, got " +
                            std::to_string(row.fields.size()));
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw DataError(name + ": empty file (no header)");
    return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_csv(in, path.string());
}

/// Write `content` to `path`, creating parent directories.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

/// day,j,t,true_log_price,observed_log_price
inline std::string paths_csv(const std::vector<IntradayPath>& paths) {
    std::ostringstream os;
    os << "day,j,t,true_log_price,observed_log_price\n";
    for (const auto& p : paths) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            os << p.day_index << ',' << j << ',' << format_double(p.grid[j]) << ','
               << format_double(p.true_log_price[j]) << ',' << format_double(p.observed_log_price[j]) << '\n';
        }
    }
    return os.str();
}

/// day,implied_variance for days 0..n.
inline std::string implied_csv(const std::vector<double>& implied) {
    std::ostringstream os;
    os << "day,implied_variance\n";
    for (std::size_t k = 0; k < implied.size(); ++k) os << k << ',' << format_double(implied[k]) << '\n';
    return os.str();
}

/// day,return,rv,implied,integrated_variance. Day 0 carries only the initial
/// implied value; empty fields mean "not available".
inline std::string panel_csv(const DailyPanel& panel) {
    std::ostringstream os;
    os << "day,return,rv,implied,integrated_variance\n";
    os << "0,,," << (panel.has_implied() ? format_double(panel.implied0) : "") << ",\n";
    for (std::size_t k = 0; k < panel.n(); ++k) {
        os << k + 1 << ',' << format_double(panel.Z[k]) << ',' << format_double(panel.RV[k]) << ',';
        if (panel.has_implied()) os << format_double(panel.implied[k]);
        os << ',';
        if (!panel.integrated_variance.empty()) os << format_double(panel.integrated_variance[k]);
        os << '\n';
    }
    return os.str();
}

inline DailyPanel parse_panel_csv(const CsvTable& t, const std::string& name) {
    const std::size_t c_day = t.column("day"), c_ret = t.column("return"), c_rv = t.column("rv"),
                      c_imp = t.column("implied");
    std::size_t c_iv = t.header.size();
    for (std::size_t k = 0; k < t.header.size(); ++k) {
        if (t.header[k] == "integrated_variance") c_iv = k;
    }
    DailyPanel panel;
    bool have_day0 = false;
    bool any_implied = false;
    std::size_t expected = 1;
    for (const auto& row : t.rows) {
        const std::string where = name + ":" + std::to_string(row.line);
        const double day = parse_double(row.fields[c_day], where);
        if (day == 0.0) {
            if (have_day0 || !panel.Z.empty()) throw DataError(where + ": day 0 must come first and once");
            have_day0 = true;
            if (!row.fields[c_imp].empty()) {
                panel.implied0 = parse_double(row.fields[c_imp], where);
                any_implied = true;
            }
            continue;
        }
        if (day != static_cast<double>(expected)) throw DataError(where + ": days must be consecutive from 1");
        ++expected;
        panel.Z.push_back(parse_double(row.fields[c_ret], where));
        panel.RV.push_back(parse_double(row.fields[c_rv], where));
        if (!row.fields[c_imp].empty()) {
            panel.implied.push_back(parse_double(row.fields[c_imp], where));
            any_implied = true;
        }
        if (c_iv < t.header.size() && !row.fields[c_iv].empty()) {
            panel.integrated_variance.push_back(parse_double(row.fields[c_iv], where));
        }
    }
    if (panel.Z.empty()) throw DataError(name + ": panel has no days");
    if (any_implied && panel.implied.size() != panel.Z.size()) {
        throw DataError(name + ": implied column must be filled for every day or none");
    }
    if (any_implied && !have_day0) panel.implied0 = panel.implied.front();
    if (!panel.integrated_variance.empty() && panel.integrated_variance.size() != panel.Z.size()) {
        panel.integrated_variance.clear();
    }
    panel.sigma0_sq = std::max(panel.Z.front() * panel.Z.front(), kVarianceFloor);
    try {
        panel.check();
    } catch (const InputError& e) {
        throw DataError(name + ": " + e.what());
    }
    return panel;
}

inline std::string loss_header() { return "model,mae,mse,hmae,hmse,amape,ll,n,n_excluded\n"; }

inline std::string loss_row(const std::string& label, const LossReport& r, std::size_t n_excluded) {
    std::ostringstream os;
    os << label << ',' << format_double(r.mae) << ',' << format_double(r.mse) << ','
       << format_double(r.hmae) << ',' << format_double(r.hmse) << ',' << format_double(r.amape) << ','
       << format_double(r.ll) << ',' << r.n_forecasts << ',' << n_excluded << '\n';
    return os.str();
}

inline std::string mc_table_csv(const McTable& table) {
    std::string s = loss_header();
    for (const auto& row : table.rows) s += loss_row(row.tag, row.losses, row.n_excluded);
    return s;
}

inline std::string consistency_csv(const std::vector<ConsistencyRow>& rows) {
    std::ostringstream os;
    os << "n,median_error,failures,reps\n";
    for (const auto& r : rows) {
        os << r.n << ',' << format_double(r.median_error) << ',' << r.failures << ',' << r.errors.size() << '\n';
    }
    return os.str();
}

inline std::string low_frequency_csv(const std::vector<LowFrequencyRow>& rows) {
    std::ostringstream os;
    os << "sampling,factor,mae,mse,hmae,hmse,amape,ll,n,failed_reps,fits,failed_fits\n";
    for (const auto& r : rows) {
        const std::string label = r.factor == 4 ? "1day" : r.factor == 2 ? "1/2day" : r.factor == 1 ? "1/4day"
                                                                                                     : std::to_string(r.factor);
        os << label << ',' << r.factor << ',' << format_double(r.losses.mae) << ','
           << format_double(r.losses.mse) << ',' << format_double(r.losses.hmae) << ','
           << format_double(r.losses.hmse) << ',' << format_double(r.losses.amape) << ','
           << format_double(r.losses.ll) << ',' << r.losses.n_forecasts << ',' << r.failed_reps << ','
           << r.fits << ',' << r.failed_fits << '\n';
    }
    return os.str();
}

/// day,forecast,realized
inline std::string forecasts_csv(const RollingResult& r, std::size_t first_day) {
    std::ostringstream os;
    os << "day,forecast,realized\n";
    for (std::size_t i = 0; i < r.forecasts.size(); ++i) {
        os << first_day + i << ',' << format_double(r.forecasts[i]) << ',' << format_double(r.realized[i]) << '\n';
    }
    return os.str();
}

/// Flat key/value record: model, loglik, converged, iterations, one key per
/// parameter and a diagnostics string.
inline nlohmann::ordered_json fit_record(const FittedModel& m) {
    nlohmann::ordered_json j;
    j["model"] = m.tag;
    j["loglik"] = std::isfinite(m.loglik) ? nlohmann::ordered_json(m.loglik) : nlohmann::ordered_json(nullptr);
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    for (const auto& [k, v] : m.params) j[k] = v;
    std::string diag;
    for (const auto& d : m.diagnostics) diag += (diag.empty() ? "" : "; ") + d;
    j["diagnostics"] = diag;
    return j;
}

/// Horizontal bar chart of one metric per model, as a standalone SVG document.
inline std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars,
                                 const std::string& title) {
    const int row_h = 24, left = 140, width = 360, top = 40;
    const int height = top + row_h * static_cast<int>(bars.size()) + 20;
    double vmax = 0.0;
    for (const auto& b : bars) {
        if (std::isfinite(b.second)) vmax = std::max(vmax, b.second);
    }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 120 << "\" height=\""
       << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<text x=\"10\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const int y = top + row_h * static_cast<int>(i);
        const double v = bars[i].second;
        const double w = vmax > 0.0 && std::isfinite(v) ? width * v / vmax : 0.0;
        os << "<text x=\"10\" y=\"" << y + 15 << "\">" << bars[i].first << "</text>\n";
        os << "<rect x=\"" << left << "\" y=\"" << y + 3 << "\" width=\"" << format_double(w)
           << "\" height=\"" << row_h - 6 << "\" fill=\"#4477aa\"/>\n";
        os << "<text x=\"" << left + static_cast<int>(w) + 6 << "\" y=\"" << y + 15 << "\">"
           << format_double(v) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace gito
