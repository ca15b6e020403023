#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "localvar/errors.hpp"
#include "localvar/scenarios.hpp"
#include "localvar/var.hpp"

using namespace localvar;
using test_helpers::panel_from;
using test_helpers::table4_post;
using test_helpers::table4_pre;
using test_helpers::white_noise;

namespace {

Interval full_interval(const TimeSeriesPanel& panel, int p) {
    return Interval{panel.rows() - 1, panel.rows() - p};
}

}  // namespace

TEST_CASE("fit recovers generating lag matrices on long samples") {
    for (const VarParams& truth :
         {table4_pre(), table4_post(), scenarios::params_4d_pre(),
          scenarios::params_4d_post()}) {
        const TimeSeriesPanel panel = simulate_var(truth, 10000, 100, 42);
        const VarFit fit = fit_var(panel, full_interval(panel, 1), 1);
        const Eigen::MatrixXd diff =
            (fit.params.lag_coeffs[0] - truth.lag_coeffs[0]).cwiseAbs();
        CHECK(diff.maxCoeff() < 0.05);
    }
}

TEST_CASE("white-noise fit has near-zero lag coefficients") {
    const TimeSeriesPanel panel = simulate_var(white_noise(2), 10000, 100, 7);
    const VarFit fit = fit_var(panel, full_interval(panel, 1), 1);
    CHECK(fit.params.lag_coeffs[0].cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("constant panel produces a degenerate covariance error") {
    Eigen::MatrixXd values(30, 2);
    values.col(0).setConstant(3.0);
    values.col(1).setConstant(-1.0);
    const TimeSeriesPanel panel = panel_from(values);
    CHECK_THROWS_AS(fit_var(panel, Interval{29, 20}, 1), DegenerateCovariance);
}

TEST_CASE("interval shorter than the identifiable minimum is rejected") {
    const TimeSeriesPanel panel = simulate_var(table4_pre(), 50, 100, 3);
    CHECK_THROWS_AS(fit_var(panel, Interval{49, 5}, 1), IntervalTooShort);
}

TEST_CASE("zero residuals with unit covariance hit the Gaussian constant") {
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(20, 2);
    const TimeSeriesPanel panel = panel_from(values);
    const VarParams params = white_noise(2);
    const double ll = log_likelihood(panel, Interval{19, 12}, params);
    CHECK(ll == doctest::Approx(-12.0 * std::log(2.0 * M_PI)).epsilon(1e-12));
    CHECK(ll == doctest::Approx(-22.0531).epsilon(1e-4));
}

TEST_CASE("fit loglik equals log_likelihood and residuals reproduce sigma") {
    const TimeSeriesPanel panel = simulate_var(table4_pre(), 200, 100, 11);
    const Interval interval{199, 60};
    const VarFit fit = fit_var(panel, interval, 1);
    CHECK(fit.loglik == log_likelihood(panel, interval, fit.params));
    const Eigen::MatrixXd cov =
        fit.residuals.transpose() * fit.residuals / fit.residuals.rows();
    CHECK((cov - fit.params.noise_cov).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::VectorXd means =
        fit.residuals.colwise().mean().transpose().cwiseAbs();
    CHECK(means.maxCoeff() < 1e-8 * panel.values.cwiseAbs().maxCoeff());
}

TEST_CASE("the fitted parameters maximize the local likelihood") {
    const TimeSeriesPanel panel = simulate_var(table4_pre(), 120, 100, 5);
    const Interval interval{119, 46};
    const VarFit fit = fit_var(panel, interval, 1);
    std::mt19937_64 rng(99);
    std::normal_distribution<double> jitter(0.0, 0.02);
    for (int trial = 0; trial < 100; ++trial) {
        VarParams perturbed = fit.params;
        for (Eigen::Index i = 0; i < 2; ++i) {
            perturbed.intercept(i) += jitter(rng);
            for (Eigen::Index j = 0; j < 2; ++j) {
                perturbed.lag_coeffs[0](i, j) += jitter(rng);
            }
        }
        CHECK(log_likelihood(panel, interval, perturbed) <= fit.loglik + 1e-9);
    }
}

TEST_CASE("scalar AR(1) likelihood matches a standalone formula") {
    VarParams truth;
    truth.intercept = Eigen::VectorXd::Constant(1, 0.3);
    truth.lag_coeffs = {Eigen::MatrixXd::Constant(1, 1, 0.6)};
    truth.noise_cov = Eigen::MatrixXd::Constant(1, 1, 2.0);
    const TimeSeriesPanel panel = simulate_var(truth, 80, 100, 13);
    const Interval interval{79, 40};

    VarParams eval;
    eval.intercept = Eigen::VectorXd::Constant(1, 0.25);
    eval.lag_coeffs = {Eigen::MatrixXd::Constant(1, 1, 0.55)};
    eval.noise_cov = Eigen::MatrixXd::Constant(1, 1, 1.7);

    double oracle = 0.0;
    const double s2 = 1.7;
    for (Eigen::Index t = interval.first(); t <= interval.end; ++t) {
        const double e =
            panel.values(t, 0) - 0.25 - 0.55 * panel.values(t - 1, 0);
        oracle += -0.5 * std::log(2.0 * M_PI) - 0.5 * std::log(s2) -
                  0.5 * e * e / s2;
    }
    CHECK(log_likelihood(panel, interval, eval) ==
          doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("LR statistic basics") {
    const TimeSeriesPanel panel = simulate_var(table4_pre(), 120, 100, 21);
    const Interval interval{119, 29};
    const VarFit fit = fit_var(panel, interval, 1);

    SUBCASE("identical parameter sets give zero") {
        CHECK(lr_statistic(panel, interval, fit.params, fit.params, 0.5) ==
              0.0);
    }
    SUBCASE("power identity between r = 1 and r = 0.5") {
        const VarParams ref = table4_pre();
        const double v1 = lr_statistic(panel, interval, fit.params, ref, 1.0);
        const double v05 = lr_statistic(panel, interval, fit.params, ref, 0.5);
        CHECK(v1 == doctest::Approx(v05 * v05).epsilon(1e-12));
    }
    SUBCASE("MLE likelihood dominates any reference") {
        for (std::uint64_t s : {1u, 2u, 3u, 4u, 5u}) {
            const VarParams ref = test_helpers::random_stable_var2(s);
            const double diff = log_likelihood(panel, interval, fit.params) -
                                log_likelihood(panel, interval, ref);
            CHECK(diff >= -1e-9);
        }
    }
}

TEST_CASE("relabeling the series permutes the fit and keeps the likelihood") {
    const TimeSeriesPanel panel = simulate_var(table4_pre(), 150, 100, 31);
    TimeSeriesPanel swapped = panel;
    swapped.values.col(0).swap(swapped.values.col(1));
    std::swap(swapped.names[0], swapped.names[1]);

    const Interval interval{149, 46};
    const VarFit a = fit_var(panel, interval, 1);
    const VarFit b = fit_var(swapped, interval, 1);

    CHECK(a.loglik == doctest::Approx(b.loglik).epsilon(1e-10));
    CHECK(a.params.intercept(0) == doctest::Approx(b.params.intercept(1)));
    CHECK(a.params.lag_coeffs[0](0, 0) ==
          doctest::Approx(b.params.lag_coeffs[0](1, 1)));
    CHECK(a.params.lag_coeffs[0](0, 1) ==
          doctest::Approx(b.params.lag_coeffs[0](1, 0)));
    CHECK(a.params.noise_cov(0, 0) ==
          doctest::Approx(b.params.noise_cov(1, 1)));
}

TEST_CASE("simulation moments and determinism") {
    SUBCASE("iid standard normal covariance") {
        const TimeSeriesPanel panel =
            simulate_var(white_noise(2), 100000, 10, 17);
        const Eigen::MatrixXd centered =
            panel.values.rowwise() - panel.values.colwise().mean();
        const Eigen::MatrixXd cov =
            centered.transpose() * centered / panel.rows();
        CHECK((cov - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <
              0.02);
    }
    SUBCASE("sample mean near the closed-form unconditional mean") {
        const VarParams truth = table4_pre();
        const TimeSeriesPanel panel = simulate_var(truth, 100000, 100, 19);
        const Eigen::VectorXd mean = panel.values.colwise().mean().transpose();
        const Eigen::VectorXd target = unconditional_mean(truth);
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(std::abs(mean(i) - target(i)) < 0.01 * std::abs(target(i)));
        }
        const Eigen::Vector2d oracle =
            (Eigen::Matrix2d::Identity() - truth.lag_coeffs[0])
                .inverse() *
            truth.intercept;
        CHECK((target - oracle).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("identical seeds give identical panels") {
        const TimeSeriesPanel a = simulate_var(table4_pre(), 500, 100, 23);
        const TimeSeriesPanel b = simulate_var(table4_pre(), 500, 100, 23);
        CHECK(a.values == b.values);
        const TimeSeriesPanel c = simulate_var(table4_pre(), 500, 100, 24);
        CHECK(a.values != c.values);
    }
}

TEST_CASE("stability checks") {
    VarParams p = white_noise(2);
    p.lag_coeffs[0] = 0.5 * Eigen::Matrix2d::Identity();
    CHECK(is_stable(p));
    p.lag_coeffs[0] = Eigen::Matrix2d::Identity();
    CHECK_FALSE(is_stable(p));

    const VarParams t1 = table4_pre();
    CHECK(is_stable(t1));
    const Eigen::VectorXcd eig = t1.lag_coeffs[0].eigenvalues();
    const double max_mod = eig.cwiseAbs().maxCoeff();
    CHECK(max_mod == doctest::Approx(0.726).epsilon(0.01));
    CHECK(max_mod < 1.0);

    CHECK_THROWS_AS(simulate_var(p, 10, 0, 1), UnstableParams);
    CHECK_NOTHROW(simulate_var(p, 10, 0, 1, true));
}
