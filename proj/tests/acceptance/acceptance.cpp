#include "gito/app.hpp"
#include "gito/benchmarks.hpp"
#include "gito/harness.hpp"
#include "gito/ingest.hpp"
#include "gito/metrics.hpp"
#include "gito/models.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace gito;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<double> random_positive(std::size_t n, std::mt19937_64& rng) {
    std::lognormal_distribution<double> d(-2.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

Outcome metric_identities() {
    std::mt19937_64 rng(1);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto rv = random_positive(50, rng);
        const LossReport z = evaluate_losses(rv, rv);
        for (double v : {z.mae, z.mse, z.hmae, z.hmse, z.amape, z.ll}) ok = ok && v == 0.0;
        std::vector<double> f(rv);
        for (double& x : f) x *= 2.0;
        const LossReport d = evaluate_losses(f, rv);
        const double ln2sq = std::log(2.0) * std::log(2.0);
        for (double e : {d.hmae - 1.0, d.hmse - 1.0, d.amape - 1.0 / 3.0, d.ll - ln2sq}) {
            worst = std::max(worst, std::abs(e));
        }
    }
    ok = ok && worst <= 1e-12;
    return {ok, "1000 vectors; F=RV all zero: " + std::string(ok ? "yes" : "no") +
                    "; max |error| at F=2RV " + fmt(worst) + " (tol 1e-12)"};
}

Outcome transform_correctness() {
    using mp = boost::multiprecision::cpp_dec_float_50;
    const mp w("0.2"), b("0.3"), g("0.4"), a("0.1");
    const mp e = boost::multiprecision::exp(b);
    const mp p1 = (e - 1) / b;
    const mp p2 = (e - 1 - b) / (b * b);
    const GCoeffs c = coeff_transform({0.2, 0.3, 0.4, 0.1});
    const double err = std::max({std::abs(c.omega_g - static_cast<double>(p1 * w)),
                                 std::abs(c.beta_g - static_cast<double>((g - 1) * b * p2 + e - 1)),
                                 std::abs(c.eta_g - static_cast<double>(p2 * a)),
                                 std::abs(c.xi_g - static_cast<double>((p1 - p2) * a))});
    const GCoeffs s = coeff_transform({0.2, 1e-6, 0.4, 0.1});
    const double rel = std::max({std::abs(s.omega_g / 0.2 - 1.0), std::abs(s.eta_g / 0.05 - 1.0),
                                 std::abs(s.xi_g / 0.05 - 1.0)});
    const bool ok = err <= 1e-10 && rel <= 1e-5 && std::abs(s.beta_g) <= 1e-5;
    return {ok, "oracle max error " + fmt(err) + " (tol 1e-10); beta->0 relative error " + fmt(rel) +
                    ", |beta_g| " + fmt(s.beta_g) + " (tol 1e-5)"};
}

template <std::size_t N, class F>
std::array<double, N> central_diff(std::array<double, N> x, F&& f) {
    std::array<double, N> g{};
    for (std::size_t i = 0; i < N; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        auto up = x, dn = x;
        up[i] += h;
        dn[i] -= h;
        g[i] = (f(up) - f(dn)) / (2 * h);
    }
    return g;
}

template <std::size_t N>
double gradient_error(const std::array<double, N>& g, const std::array<double, N>& fd) {
    double e = 0.0;
    for (std::size_t i = 0; i < N; ++i) e = std::max(e, std::abs(g[i] - fd[i]) / std::max(1.0, std::abs(fd[i])));
    return e;
}

Outcome gradient_checks() {
    std::mt19937_64 rng(3);
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    double worst_oi = 0.0, worst_iv = 0.0;
    int points = 0;
    for (std::uint64_t seed = 0; points < 20; ++seed) {
        const ThetaOI t{u(0.05, 0.5), u(0.05, 1.0), u(0.05, 0.8), u(0.0, 0.3)};
        const PhiIV p{u(0.05, 0.5), u(0.05, 1.0), u(0.05, 0.8), u(-0.5, 0.5), u(0.05, 1.0), u(0.0, 0.05),
                      u(0.01, 0.2)};
        if (!validate_theta(t) || !validate_phi(p)) continue;
        ++points;
        const DailyPanel oi = simulate_design(Dgp::garch_ito_oi, 50, 78, 100 + seed);
        const DailyPanel iv = simulate_design(Dgp::garch_ito_iv, 50, 78, 200 + seed);
        const auto fd_oi = central_diff<4>(t.to_array(), [&](const std::array<double, 4>& x) {
            return qlik_oi({x[0], x[1], x[2], x[3]}, oi);
        });
        const auto fd_iv = central_diff<7>(p.to_array(), [&](const std::array<double, 7>& x) {
            return qlik_iv({x[0], x[1], x[2], x[3], x[4], x[5], x[6]}, iv);
        });
        worst_oi = std::max(worst_oi, gradient_error(qlik_oi_gradient(t, oi), fd_oi));
        worst_iv = std::max(worst_iv, gradient_error(qlik_iv_gradient(p, iv), fd_iv));
    }
    const bool ok = worst_oi <= 1e-5 && worst_iv <= 1e-5;
    return {ok, "20 points; max relative error qlik_oi " + fmt(worst_oi) + ", qlik_iv " + fmt(worst_iv) +
                    " (tol 1e-5)"};
}

Outcome reduction_equalities() {
    std::mt19937_64 rng(4);
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    int garch_equal = 0, har_equal = 0, rgarch_equal = 0, garch_oi_equal = 0;
    for (std::uint64_t k = 0; k < 10; ++k) {
        const DailyPanel p = simulate_design(Dgp::garch_ito_oi, 100, 78, 300 + k);
        DailyPanel bare = p;
        bare.implied.clear();
        const GarchItoParams g{u(0.05, 0.5), u(0.05, 1.0), u(0.05, 0.6)};
        if (qlik_garch_ito(g, p) == qlik_oi({g.omega, g.beta, g.gamma, 0.0}, p)) ++garch_equal;

        const HarRvFit a = fit_har_rv(p, false), b = fit_har_rv(bare, false);
        if (a.c == b.c && a.beta_d == b.beta_d && a.beta_w == b.beta_w && a.beta_m == b.beta_m &&
            forecast_har_rv(a, p) == forecast_har_rv(b, bare)) {
            ++har_equal;
        }

        RealizedGarchParams r;
        r.omega = u(0.01, 0.1);
        r.gamma = u(0.2, 0.6);
        r.eta = u(0.1, 0.3);
        r.a = u(0.5, 1.0);
        r.sigma_u2 = u(0.01, 0.1);
        RealizedGarchParams ro = r;
        ro.with_oi = true;
        ro.eta_oi = 0.0;
        if (realized_garch_loglik(r, p) == realized_garch_loglik(ro, p)) ++rgarch_equal;

        const GarchOiParams q{u(0.01, 0.1), u(0.3, 0.6), u(0.1, 0.3), 0.0};
        if (garch_oi_loglik(q, p) == garch_oi_loglik(q, bare)) ++garch_oi_equal;
    }
    const bool ok = garch_equal == 10 && har_equal == 10 && rgarch_equal == 10 && garch_oi_equal == 10;
    return {ok, "bitwise equal on 10 panels: garch_ito " + std::to_string(garch_equal) + "/10, har_rv " +
                    std::to_string(har_equal) + "/10, rgarch " + std::to_string(rgarch_equal) +
                    "/10, garch_oi " + std::to_string(garch_oi_equal) + "/10"};
}

Outcome parameter_recovery() {
    bool ok = true;
    std::string detail;
    for (ConsistencyModel m : {ConsistencyModel::oi, ConsistencyModel::iv}) {
        ConsistencyConfig cc;
        cc.model = m;
        cc.n_grid = {125, 2000};
        cc.m = 390;
        cc.reps = 50;
        cc.seed = 5;
        cc.threads = workers();
        const auto rows = consistency_check(cc);
        const double small = rows[0].median_error, large = rows[1].median_error;
        const bool pass = large < small && large < 0.15;
        ok = ok && pass;
        detail += std::string(detail.empty() ? "" : "; ") + (m == ConsistencyModel::oi ? "OI" : "IV") +
                  " median max-error n=125 " + fmt(small) + ", n=2000 " + fmt(large) + " (need < n=125 and < 0.15)" +
                  ", failures " + std::to_string(rows[0].failures + rows[1].failures);
    }
    return {ok, detail};
}

double row_mae(const McTable& t, const std::string& tag) {
    for (const auto& r : t.rows) {
        if (r.tag == tag) return r.losses.mae;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::string argmin_mae(const McTable& t) {
    std::string best;
    double v = std::numeric_limits<double>::infinity();
    for (const auto& r : t.rows) {
        if (r.losses.mae < v) {
            v = r.losses.mae;
            best = r.tag;
        }
    }
    return best;
}

McTable run_mc(Dgp dgp, Sampling s, std::uint64_t seed) {
    McConfig mc;
    mc.dgp = dgp;
    mc.sampling = s;
    mc.reps = 100;
    mc.seed = seed;
    mc.threads = workers();
    return mc_study(mc);
}

const std::vector<std::uint64_t> kMasterSeeds{1, 2, 3};

Outcome heston_ordering() {
    int oi_wins = 0, har_wins = 0;
    std::string detail;
    for (std::uint64_t seed : kMasterSeeds) {
        const McTable t5 = run_mc(Dgp::heston, Sampling::min5, seed);
        const double oi = row_mae(t5, "garch_ito_oi"), base = row_mae(t5, "garch_ito");
        if (oi <= base) ++oi_wins;
        const McTable t10 = run_mc(Dgp::heston, Sampling::sec10, seed);
        const std::string best = argmin_mae(t10);
        if (best == "har_rv") ++har_wins;
        detail += "seed " + std::to_string(seed) + ": 5min oi " + fmt(oi) + " vs garch_ito " + fmt(base) +
                  ", 10sec best " + best + " (" + fmt(row_mae(t10, best)) + ", har_rv " +
                  fmt(row_mae(t10, "har_rv")) + "); ";
    }
    detail += "5min ordering " + std::to_string(oi_wins) + "/3, 10sec ordering " + std::to_string(har_wins) +
              "/3 (need >= 2 each)";
    return {oi_wins >= 2 && har_wins >= 2, detail};
}

Outcome oi_design_ordering() {
    bool ok = true;
    std::string detail;
    for (Sampling s : {Sampling::min5, Sampling::min1, Sampling::sec10}) {
        int wins = 0;
        std::string winners;
        for (std::uint64_t seed : kMasterSeeds) {
            const McTable t = run_mc(Dgp::garch_ito_oi, s, seed);
            const std::string best = argmin_mae(t);
            if (best == "garch_ito_oi" || best == "garch_ito_iv") ++wins;
            winners += (winners.empty() ? "" : ",") + best;
        }
        ok = ok && wins >= 2;
        detail += to_string(s) + " " + std::to_string(wins) + "/3 [" + winners + "]; ";
    }
    detail += "need >= 2 of 3 per interval";
    return {ok, detail};
}

Outcome low_frequency_pattern() {
    LowFrequencyConfig lf;
    lf.reps = 50;
    lf.seed = 8;
    lf.factors = {1, 4};
    lf.threads = workers();
    const auto rows = low_frequency_study(lf);
    const double quarter = rows[0].losses.mae, day = rows[1].losses.mae;
    return {quarter < day, "mean MAE 1/4 day " + fmt(quarter) + " vs 1 day " + fmt(day) + "; failed fits " +
                               std::to_string(rows[0].failed_fits + rows[1].failed_fits) + " of " +
                               std::to_string(rows[0].fits + rows[1].fits)};
}

Outcome ingestion_roundtrip() {
    const fs::path dir = GITO_FIXTURE_DIR;
    IngestOptions o;
    o.implied = ImpliedConvention::index_points;
    const IngestResult r = ingest(dir / "hf.csv", dir / "daily.csv", dir / "implied.csv", o);
    auto sq = [](double x) { return x * x; };
    const double rv1 = sq(std::log(101.0) - std::log(100.0)) + sq(std::log(100.5) - std::log(101.0));
    const double rv2 = sq(std::log(99.0) - std::log(100.5)) + sq(std::log(102.0) - std::log(99.0));
    const bool rv_ok = r.panel.n() == 2 && r.panel.RV[0] == rv1 && r.panel.RV[1] == rv2;
    const bool vix_ok = std::abs(r.panel.implied[0] - 0.04) <= 1e-15;
    return {rv_ok && vix_ok, std::string("6-row fixture RV exact: ") + (rv_ok ? "yes" : "no") +
                                 "; 20.0 index points -> " + format_double(r.panel.implied[0])};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "gito_acceptance_determinism";
    fs::remove_all(root);
    const fs::path panel_dir = root / "panel";
    std::ostringstream sink;
    auto cfg = [](const std::string& cmd, std::vector<std::pair<std::string, std::string>> kv) {
        RunConfig c(cmd);
        for (const auto& [k, v] : kv) c.set(k, v);
        return c;
    };
    {
        RunConfig c = cfg("simulate", {{"dgp", "garch_ito_oi"}, {"n_days", "120"}, {"steps_per_day", "78"},
                                       {"seed", "11"}, {"output_dir", panel_dir.string()}});
        if (run(c, sink, sink) != exit_ok) return {false, "could not simulate the input panel"};
    }
    const std::string panel = (panel_dir / "panel.csv").string();
    std::ofstream(root / "fr.csv") << "forecast,realized\n0.3,0.2\n0.1,0.4\n0.25,0.25\n";
    const std::vector<RunConfig> runs{
        cfg("simulate", {{"dgp", "garch_ito_iv"}, {"n_days", "50"}, {"steps_per_day", "78"}, {"seed", "7"}}),
        cfg("fit", {{"model", "garch_ito_oi"}, {"panel", panel}, {"seed", "7"}}),
        cfg("forecast", {{"model", "garch_ito_iv"}, {"panel", panel}, {"split", "110"}, {"seed", "7"}}),
        cfg("evaluate", {{"forecast_csv", (root / "fr.csv").string()}, {"plot", "true"}}),
        cfg("mc-study", {{"dgp", "heston"}, {"interval", "5min"}, {"reps", "10"}, {"seed", "7"}, {"plot", "true"}}),
        cfg("consistency", {{"n_grid", "50,100"}, {"m", "78"}, {"reps", "3"}, {"seed", "7"}}),
    };
    std::size_t files = 0;
    std::string bad;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::vector<fs::path> dirs;
        for (int pass = 0; pass < 2; ++pass) {
            RunConfig c = runs[i];
            const fs::path d = root / (c.command() + "_" + std::to_string(pass));
            c.set("output_dir", d.string());
            if (run(c, sink, sink) != exit_ok) bad += c.command() + " failed; ";
            dirs.push_back(d);
        }
        if (!fs::exists(dirs[0])) continue;
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            ++files;
            const fs::path other = dirs[1] / entry.path().filename();
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
                bad += runs[i].command() + "/" + entry.path().filename().string() + " differs; ";
            }
        }
    }
    fs::remove_all(root);
    return {bad.empty() && files > 0,
            "6 subcommands, " + std::to_string(files) + " output files compared" + (bad.empty() ? "" : ": " + bad)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"metric identities", metric_identities},
        {"transform correctness", transform_correctness},
        {"gradient checks", gradient_checks},
        {"reduction equalities", reduction_equalities},
        {"parameter recovery", parameter_recovery},
        {"Heston ordering", heston_ordering},
        {"GARCH-Ito-OI design ordering", oi_design_ordering},
        {"low-frequency pattern", low_frequency_pattern},
        {"ingestion round-trip", ingestion_roundtrip},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << k + 1 << "] " << criteria[k].first << ": " << o.detail
                  << " (" << fmt(secs) << " s)" << std::endl;
    }
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
