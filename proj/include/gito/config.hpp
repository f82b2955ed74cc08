#pragma once

#include "gito/core.hpp"
#include "gito/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gito {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> c{"simulate", "fit", "forecast", "evaluate", "mc-study", "consistency"};
    return c;
}

/// Keys accepted by each subcommand.
inline const std::set<std::string>& allowed_keys(const std::string& command) {
    static const std::vector<std::string> common{"output_dir", "seed", "threads", "plot", "starts", "max_iter", "tol"};
    static const std::vector<std::string> data{"panel",       "hf_csv",     "daily_csv", "implied_csv",
                                               "implied_convention", "forward_fill", "rv", "tsrv_k",
                                               "min_ticks"};
    static const std::map<std::string, std::set<std::string>> table = [&] {
        std::map<std::string, std::vector<std::string>> extra{
            {"simulate",
             {"dgp", "n_days", "steps_per_day", "interval", "noise_var", "x0", "sigma0_sq", "implied0", "omega",
              "beta", "gamma", "alpha", "rho", "a", "b", "sigma_u2", "implied_mean", "implied_variance", "rv",
              "tsrv_k", "heston_r", "heston_a", "heston_b", "heston_gamma", "heston_rho", "heston_lambda",
              "heston_sigma_j", "day_length"}},
            {"fit", {"model"}},
            {"forecast", {"model", "split", "refit_every"}},
            {"evaluate", {"forecast_csv", "realized_csv", "forecast_column", "realized_column", "label"}},
            {"mc-study",
             {"design", "dgp", "interval", "reps", "models", "in_sample", "model", "periods", "steps_per_period",
              "oos_days", "refit_every"}},
            {"consistency", {"model", "n_grid", "m", "reps", "truth_start"}},
        };
        std::map<std::string, std::set<std::string>> out;
        for (auto& [cmd, keys] : extra) {
            std::set<std::string> s(common.begin(), common.end());
            s.insert(keys.begin(), keys.end());
            if (cmd == "fit" || cmd == "forecast") s.insert(data.begin(), data.end());
            out[cmd] = std::move(s);
        }
        return out;
    }();
    auto it = table.find(command);
    if (it == table.end()) throw ConfigError("unknown subcommand: " + command);
    return it->second;
}

/// Validated key/value settings for one subcommand.
class RunConfig {
public:
    RunConfig() = default;
    explicit RunConfig(std::string command) : command_(std::move(command)) { allowed_keys(command_); }

    [[nodiscard]] const std::string& command() const noexcept { return command_; }
    [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

    void set(const std::string& key, const std::string& value) {
        if (!allowed_keys(command_).count(key)) {
            throw ConfigError("unknown key '" + key + "' for subcommand " + command_);
        }
        values_[key] = value;
    }

    /// Parse "key=value" (whitespace around either side is ignored).
    void set_assignment(const std::string& text, const std::string& where) {
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        set(key, value);
    }

    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }

    [[nodiscard]] std::string str(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    [[nodiscard]] std::string require(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end() || it->second.empty()) throw ConfigError("missing required key '" + key + "'");
        return it->second;
    }

    [[nodiscard]] double num(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        try {
            return parse_double(values_.at(key), key);
        } catch (const DataError&) {
            throw ConfigError("key '" + key + "' is not a number: " + values_.at(key));
        }
    }

    [[nodiscard]] std::uint64_t uint(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string& s = values_.at(key);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
            throw ConfigError("key '" + key + "' is not a non-negative integer: " + s);
        }
        return v;
    }

    [[nodiscard]] bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& s = values_.at(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ConfigError("key '" + key + "' is not a boolean: " + s);
    }

    [[nodiscard]] std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(str(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    [[nodiscard]] std::vector<std::size_t> size_list(const std::string& key) const {
        std::vector<std::size_t> out;
        for (const auto& s : list(key)) {
            std::size_t v = 0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size()) {
                throw ConfigError("key '" + key + "' must be a comma list of integers");
            }
            out.push_back(v);
        }
        return out;
    }

private:
    std::string command_;
    std::map<std::string, std::string> values_;
};

/// Read a key = value file: '#' starts a comment, blank lines are ignored.
inline void read_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        cfg.set_assignment(line, path.string() + ":" + std::to_string(lineno));
    }
}

}  // namespace gito
