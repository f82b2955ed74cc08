#include "gito/benchmarks.hpp"
#include "gito/panel.hpp"
#include "gito/simulate.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace gito;

namespace {

DailyPanel flat_panel(std::size_t n, double c) {
    DailyPanel p;
    p.Z.assign(n, std::sqrt(c));
    p.RV.assign(n, c);
    p.implied.assign(n, 0.0);
    p.sigma0_sq = c;
    return p;
}

DailyPanel oi_panel(std::size_t n, std::uint64_t seed) {
    SimConfig c;
    c.n_days = n;
    c.steps_per_day = 78;
    c.seed = seed;
    c.sigma0_sq = 0.2;
    return make_panel(simulate_garch_ito_oi(ThetaOI{0.2, 0.3, 0.4, 0.1}, NormalImplied{0.0, 0.5}, c));
}

/// Realized GARCH with x_j = a h_{j+1} + b + u_j feeding h_{j+1}; x is stored in RV.
DailyPanel simulate_rgarch(const RealizedGarchParams& p, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double k = 1.0 - p.a * p.eta;
    double h = (p.omega + p.eta * p.b) / (k - p.gamma);
    DailyPanel panel;
    for (std::size_t i = 0; i < n; ++i) {
        panel.Z.push_back(std::sqrt(h) * nd(rng));
        const double u = std::sqrt(p.sigma_u2) * nd(rng);
        const double x = (p.a * (p.omega + p.gamma * h) + p.b + u) / k;
        panel.RV.push_back(x);
        h = p.omega + p.gamma * h + p.eta * x;
    }
    panel.sigma0_sq = panel.Z.front() * panel.Z.front();
    return panel;
}

DailyPanel simulate_garch_oi(const GarchOiParams& p, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> uo(0.0, 2.0);
    DailyPanel panel;
    double h = (p.omega + p.eta) / (1.0 - p.gamma - p.beta);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = std::sqrt(h) * nd(rng);
        const double o = uo(rng);
        panel.Z.push_back(z);
        panel.RV.push_back(z * z);
        panel.implied.push_back(o);
        h = p.omega + p.gamma * h + p.beta * z * z + p.eta * o;
    }
    panel.sigma0_sq = 1.0;
    return panel;
}

}  // namespace

TEST(Ols, ExactFitAndStandardErrors) {
    Eigen::MatrixXd X(5, 2);
    X << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4;
    Eigen::VectorXd y(5);
    y << 1, 3, 5, 7, 9;
    const std::array<std::string_view, 2> names{"c", "x"};
    const OlsResult r = ols(X, y, names, RankPolicy::strict);
    EXPECT_NEAR(r.coef(0), 1.0, 1e-12);
    EXPECT_NEAR(r.coef(1), 2.0, 1e-12);
    EXPECT_EQ(r.rank, 2);
    EXPECT_NEAR(r.residual_var, 0.0, 1e-24);
}

TEST(Ols, StrictPolicyNamesCollinearColumns) {
    Eigen::MatrixXd X(4, 3);
    X << 1, 2, 4, 1, 3, 6, 1, 5, 10, 1, 7, 14;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    const std::array<std::string_view, 3> names{"c", "x", "twice_x"};
    try {
        ols(X, y, names, RankPolicy::strict);
        FAIL() << "expected SingularDesignError";
    } catch (const SingularDesignError& e) {
        ASSERT_EQ(e.columns().size(), 1u);
        EXPECT_TRUE(e.columns()[0] == "x" || e.columns()[0] == "twice_x");
    }
    const OlsResult r = ols(X, y, names, RankPolicy::pseudo_inverse);
    EXPECT_EQ(r.rank, 2);
    EXPECT_TRUE(r.std_errors.size() == 0);
    const std::array<std::string_view, 2> reduced_names{"c", "x"};
    const OlsResult reduced = ols(X.leftCols(2), y, reduced_names, RankPolicy::strict);
    EXPECT_LT((X * r.coef - X.leftCols(2) * reduced.coef).norm(), 1e-10);
}

TEST(HarRv, FlatDataGivesConstantForecastAndZeroResiduals) {
    const DailyPanel p = flat_panel(60, 0.25);
    const HarRvFit fit = fit_har_rv(p, false);
    EXPECT_NEAR(forecast_har_rv(fit, p), 0.25, 1e-12);
    EXPECT_NEAR(fit.residual_var, 0.0, 1e-20);
    EXPECT_FALSE(fit.collinear.empty());
    EXPECT_THROW(fit_har_rv(p, false, RankPolicy::strict), SingularDesignError);
}

TEST(HarRv, RecoversDailyCoefficientWithinThreeSe) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1e-4);
    DailyPanel p;
    double rv = 0.2;
    for (int i = 0; i < 2000; ++i) {
        p.RV.push_back(rv);
        p.Z.push_back(0.0);
        rv = 0.1 + 0.5 * rv + nd(rng);
    }
    p.sigma0_sq = 0.2;
    const HarRvFit fit = fit_har_rv(p, false, RankPolicy::strict);
    ASSERT_EQ(fit.std_errors.size(), 4u);
    EXPECT_NEAR(fit.c, 0.1, 3 * fit.std_errors[0]);
    EXPECT_NEAR(fit.beta_d, 0.5, 3 * fit.std_errors[1]);
    EXPECT_NEAR(fit.beta_w, 0.0, 3 * fit.std_errors[2]);
    EXPECT_NEAR(fit.beta_m, 0.0, 3 * fit.std_errors[3]);
    EXPECT_EQ(fit.n_obs, 2000u - 22u);
}

TEST(HarRv, PureNoiseImpliedHasZeroCoefficient) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd(0.0, 0.01);
    std::uniform_real_distribution<double> uo(0.0, 1.0);
    DailyPanel p;
    double rv = 0.2;
    for (int i = 0; i < 1500; ++i) {
        p.RV.push_back(rv);
        p.Z.push_back(0.0);
        p.implied.push_back(uo(rng));
        rv = std::abs(0.1 + 0.5 * rv + nd(rng));
    }
    p.sigma0_sq = 0.2;
    const HarRvFit fit = fit_har_rv(p, true, RankPolicy::strict);
    ASSERT_TRUE(fit.beta_oi.has_value());
    EXPECT_NEAR(*fit.beta_oi, 0.0, 3 * fit.std_errors[4]);
}

TEST(HarRv, WithoutImpliedEqualsBase) {
    DailyPanel p = oi_panel(120, 5);
    const HarRvFit a = fit_har_rv(p, false);
    DailyPanel q = p;
    q.implied.clear();
    const HarRvFit b = fit_har_rv(q, false);
    EXPECT_EQ(a.c, b.c);
    EXPECT_EQ(a.beta_d, b.beta_d);
    EXPECT_EQ(forecast_har_rv(a, p), forecast_har_rv(b, q));
    EXPECT_FALSE(a.beta_oi.has_value());
}

TEST(HarRv, RequiresEnoughDays) {
    EXPECT_THROW(fit_har_rv(flat_panel(22, 0.1), false), InputError);
    DailyPanel p = flat_panel(40, 0.1);
    p.implied.clear();
    EXPECT_THROW(fit_har_rv(p, true), InputError);
}

TEST(GarchIto, EqualsOiObjectiveAtAlphaZeroBitwise) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DailyPanel p = oi_panel(80, 10 + seed);
        const GarchItoParams g{0.15, 0.6, 0.3};
        EXPECT_EQ(qlik_garch_ito(g, p), qlik_oi(ThetaOI{0.15, 0.6, 0.3, 0.0}, p));
        EXPECT_EQ(garch_ito_series(g, p), cond_var_series_oi(ThetaOI{0.15, 0.6, 0.3, 0.0}, p));
    }
}

TEST(GarchIto, FitAgreesWithOiFitUnderZeroAlphaBound) {
    const DailyPanel p = oi_panel(300, 15);
    FitOptions o;
    o.optimizer.starts = 3;
    const auto fit = fit_garch_ito(p, {}, o);
    EXPECT_TRUE(fit.converged);
    EXPECT_EQ(forecast_garch_ito(fit, p), garch_ito_series(fit.params, p).back());
}

TEST(RealizedGarch, SeriesReachesStationaryLevelWithoutMeasure) {
    DailyPanel p = flat_panel(200, 0.3);
    RealizedGarchParams q;
    q.omega = 0.05;
    q.gamma = 0.5;
    q.eta = 0.0;
    const auto h = realized_garch_series(q, p);
    EXPECT_NEAR(h.back(), 0.05 / 0.5, 1e-12);
    EXPECT_NEAR(h.front(), 0.3, 1e-13);
}

TEST(RealizedGarch, ForecastWithZeroGammaIsOneStep) {
    DailyPanel p = oi_panel(60, 20);
    FitResult<RealizedGarchParams> fit;
    fit.params.omega = 0.02;
    fit.params.gamma = 0.0;
    fit.params.eta = 0.7;
    const double f1 = forecast_realized_garch(fit, p);
    EXPECT_EQ(f1, 0.02 + 0.7 * p.RV.back());
    p.RV.back() *= 2;
    EXPECT_GT(forecast_realized_garch(fit, p), f1);
}

TEST(RealizedGarch, ImpliedTermOffEqualsBase) {
    const DailyPanel p = oi_panel(80, 21);
    RealizedGarchParams a;
    a.omega = 0.05;
    a.gamma = 0.5;
    a.eta = 0.3;
    a.a = 1.0;
    a.sigma_u2 = 0.01;
    RealizedGarchParams b = a;
    b.with_oi = true;
    b.eta_oi = 0.0;
    EXPECT_EQ(realized_garch_loglik(a, p), realized_garch_loglik(b, p));
}

TEST(RealizedGarch, RecoversIdentifiedQuantities) {
    RealizedGarchParams truth;
    truth.omega = 0.05;
    truth.gamma = 0.5;
    truth.eta = 0.3;
    truth.a = 1.0;
    truth.b = 0.0;
    truth.sigma_u2 = 1e-4;
    // Persistence of the measure and the stationary level of h.
    auto persistence = [](const RealizedGarchParams& p) { return p.gamma / (1.0 - p.a * p.eta); };
    auto level = [](const RealizedGarchParams& p) {
        return (p.omega + p.eta * p.b) / (1.0 - p.a * p.eta - p.gamma);
    };
    std::vector<double> pers_err, level_err, s2_err;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DailyPanel p = simulate_rgarch(truth, 2000, 100 + seed);
        FitOptions o;
        o.optimizer.starts = 3;
        o.optimizer.seed = seed;
        const auto fit = fit_realized_garch(p, Measure::rv, false, {}, o);
        EXPECT_GE(fit.loglik, realized_garch_loglik(truth, p));
        pers_err.push_back(std::abs(persistence(fit.params) - persistence(truth)));
        level_err.push_back(std::abs(level(fit.params) / level(truth) - 1.0));
        s2_err.push_back(std::abs(fit.params.sigma_u2 / truth.sigma_u2 - 1.0));
    }
    for (auto* v : {&pers_err, &level_err, &s2_err}) std::nth_element(v->begin(), v->begin() + 5, v->end());
    EXPECT_LT(pers_err[5], 0.1);
    EXPECT_LT(level_err[5], 0.1);
    EXPECT_LT(s2_err[5], 0.2);
}

TEST(RealizedGarch, ExactMeasurementDrivesSigmaToFloor) {
    RealizedGarchParams truth;
    truth.omega = 0.05;
    truth.gamma = 0.5;
    truth.eta = 0.3;
    truth.a = 1.0;
    truth.sigma_u2 = 0.0;
    const DailyPanel p = simulate_rgarch(truth, 400, 7);
    const auto fit = fit_realized_garch(p, Measure::rv, false);
    const RealizedGarchBounds bounds;
    EXPECT_GT(fit.params.sigma_u2, bounds.sigma_u2.lo);
    EXPECT_LT(fit.params.sigma_u2, 1e-8);
}

TEST(RealizedGarch, ImpliedMeasureNeedsImpliedSeries) {
    DailyPanel p = flat_panel(40, 0.1);
    p.implied.clear();
    EXPECT_THROW(fit_realized_garch(p, Measure::iv, false), InputError);
    EXPECT_THROW(fit_realized_garch(p, Measure::rv, true), InputError);
}

TEST(GarchPlusOi, ZeroEtaIsPlainGarch) {
    const DailyPanel p = oi_panel(100, 30);
    const GarchOiParams q{0.05, 0.6, 0.2, 0.0};
    DailyPanel bare = p;
    bare.implied.clear();
    EXPECT_EQ(garch_oi_loglik(q, p), garch_oi_loglik(q, bare));
    double h = 0.0;
    for (double z : p.Z) h += z * z;
    h /= p.n();
    double s = 0.0;
    for (double z : p.Z) {
        s += std::log(h) + z * z / h;
        h = 0.05 + 0.6 * h + 0.2 * z * z;
    }
    EXPECT_NEAR(garch_oi_loglik(q, p), -s / (2.0 * p.n()), 1e-13);
}

TEST(GarchPlusOi, ForecastIsOneRecursionStep) {
    const DailyPanel p = oi_panel(50, 31);
    FitResult<GarchOiParams> fit;
    fit.params = {0.05, 0.6, 0.2, 0.1};
    const auto h = garch_oi_series(fit.params, p);
    const double z = p.Z.back();
    EXPECT_EQ(forecast_garch_plus_oi(fit, p),
              0.05 + 0.6 * h[p.n() - 1] + 0.2 * z * z + 0.1 * p.implied.back());
}

TEST(GarchPlusOi, RecoversParameters) {
    const GarchOiParams truth{0.05, 0.5, 0.2, 0.1};
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DailyPanel p = simulate_garch_oi(truth, 2000, 200 + seed);
        FitOptions o;
        o.optimizer.starts = 3;
        o.optimizer.seed = seed;
        const auto fit = fit_garch_plus_oi(p, {}, o);
        const auto e = fit.params.to_array(), t = truth.to_array();
        double m = 0.0;
        for (std::size_t i = 0; i < 4; ++i) m = std::max(m, std::abs(e[i] - t[i]));
        errors.push_back(m);
    }
    std::nth_element(errors.begin(), errors.begin() + 5, errors.end());
    EXPECT_LT(errors[5], 0.1);
}

TEST(GarchPlusOi, ZeroImpliedIsFlaggedUnidentified) {
    DailyPanel p = oi_panel(200, 32);
    std::fill(p.implied.begin(), p.implied.end(), 0.0);
    const GarchOiBounds bounds;
    const auto fit = fit_garch_plus_oi(p, bounds);
    EXPECT_TRUE(fit.converged);
    EXPECT_EQ(fit.params.eta, bounds.eta.lo);
    ASSERT_FALSE(fit.diagnostics.empty());
    EXPECT_NE(fit.diagnostics[0].find("unidentified regressor"), std::string::npos);
}

TEST(IvRegression, ExactLinearData) {
    DailyPanel p;
    std::mt19937_64 rng(40);
    std::uniform_real_distribution<double> u(0.1, 0.5);
    p.implied0 = u(rng);
    double prev = p.implied0;
    for (int i = 0; i < 50; ++i) {
        p.Z.push_back(0.0);
        p.RV.push_back(0.3 * prev);
        prev = u(rng);
        p.implied.push_back(prev);
    }
    p.sigma0_sq = 0.1;
    const IvRegressionFit fit = fit_iv_regression(p);
    EXPECT_NEAR(fit.omega, 0.0, 1e-13);
    EXPECT_NEAR(fit.beta1, 0.3, 1e-13);
    EXPECT_NEAR(fit.beta2, 0.0, 1e-13);
    EXPECT_EQ(forecast_iv_regression(fit, p), fit.omega + fit.beta1 * p.implied.back() + fit.beta2 * p.implied[48]);
}

TEST(IvRegression, NoisyDataWithinThreeSe) {
    DailyPanel p;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.1, 0.5);
    std::normal_distribution<double> nd(0.0, 1e-4);
    p.implied0 = u(rng);
    std::vector<double> iv{p.implied0};
    for (int i = 0; i < 500; ++i) {
        iv.push_back(u(rng));
        p.implied.push_back(iv.back());
    }
    for (int n = 1; n <= 500; ++n) {
        p.Z.push_back(0.0);
        const double lag2 = n >= 2 ? iv[n - 2] : 0.0;
        p.RV.push_back(std::max(0.0, 0.01 + 0.3 * iv[n - 1] + 0.1 * lag2 + nd(rng)));
    }
    p.sigma0_sq = 0.1;
    const IvRegressionFit fit = fit_iv_regression(p);
    ASSERT_EQ(fit.std_errors.size(), 3u);
    EXPECT_NEAR(fit.omega, 0.01, 3 * fit.std_errors[0]);
    EXPECT_NEAR(fit.beta1, 0.3, 3 * fit.std_errors[1]);
    EXPECT_NEAR(fit.beta2, 0.1, 3 * fit.std_errors[2]);
}

TEST(IvRegression, ConstantImpliedIsSingular) {
    DailyPanel p = flat_panel(30, 0.2);
    std::fill(p.implied.begin(), p.implied.end(), 0.3);
    p.implied0 = 0.3;
    EXPECT_THROW(fit_iv_regression(p), SingularDesignError);
}
