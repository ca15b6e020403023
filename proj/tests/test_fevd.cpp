#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "localvar/errors.hpp"
#include "localvar/fevd.hpp"
#include "localvar/var.hpp"

using namespace localvar;
using test_helpers::table4_pre;
using test_helpers::white_noise;
using test_helpers::mc_gfevd_normalized;



TEST_CASE("VMA of white noise is the identity followed by zeros") {
    const VmaCoefficients vma = var_to_vma(white_noise(2), 6);
    CHECK(vma.matrices[0] == Eigen::Matrix2d::Identity());
    for (int u = 1; u < 6; ++u) {
        CHECK(vma.matrices[u].cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("VAR(1) VMA equals matrix powers") {
    const VarParams params = table4_pre();
    const VmaCoefficients vma = var_to_vma(params, 11);
    Eigen::MatrixXd power = Eigen::Matrix2d::Identity();
    for (int u = 0; u <= 10; ++u) {
        CHECK((vma.matrices[u] - power).cwiseAbs().maxCoeff() < 1e-12);
        power = params.lag_coeffs[0] * power;
    }
}

TEST_CASE("VMA columns match the deterministic impulse response") {
    const VarParams params = table4_pre();
    const int horizon = 12;
    const VmaCoefficients vma = var_to_vma(params, horizon);
    for (Eigen::Index j = 0; j < 2; ++j) {
        // unit shock in series j at time 0, no noise afterwards
        Eigen::VectorXd x = Eigen::Vector2d::Unit(j);
        for (int u = 0; u < horizon; ++u) {
            CHECK((vma.matrices[u].col(j) - x).cwiseAbs().maxCoeff() < 1e-12);
            x = params.lag_coeffs[0] * x;
        }
    }
}

TEST_CASE("unstable parameters have no VMA representation") {
    VarParams p = white_noise(2);
    p.lag_coeffs[0] = Eigen::Matrix2d::Identity();
    CHECK_THROWS_AS(var_to_vma(p, 5), UnstableParams);
    CHECK_THROWS_AS(gfevd(p, 5), UnstableParams);
}

TEST_CASE("diagonal dynamics and errors give zero spillover") {
    VarParams p = white_noise(2);
    p.lag_coeffs[0] << 0.5, 0.0, 0.0, -0.3;
    p.noise_cov << 2.0, 0.0, 0.0, 0.7;
    const SpilloverTable table = gfevd(p, 12);
    CHECK((table.normalized - Eigen::Matrix2d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(table.total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("normalized rows are stochastic and the total is bounded") {
    for (std::uint64_t s = 1; s <= 8; ++s) {
        const VarParams p = test_helpers::random_stable_var2(s);
        const SpilloverTable table = gfevd(p, 12);
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(table.normalized.row(i).sum() ==
                  doctest::Approx(1.0).epsilon(1e-12));
            for (Eigen::Index j = 0; j < 2; ++j) {
                CHECK(table.normalized(i, j) >= 0.0);
                CHECK(table.normalized(i, j) <= 1.0);
            }
        }
        CHECK(table.total >= 0.0);
        CHECK(table.total <= 100.0);
    }
}

TEST_CASE("rescaling one series leaves the normalized table invariant") {
    const TimeSeriesPanel panel = simulate_var(table4_pre(), 5000, 100, 77);
    const Interval interval{panel.rows() - 1, panel.rows() - 1};
    const VarFit base = fit_var(panel, interval, 1);

    TimeSeriesPanel scaled = panel;
    scaled.values.col(0) *= 10.0;
    const VarFit refit = fit_var(scaled, interval, 1);

    const SpilloverTable a = gfevd(base.params, 12);
    const SpilloverTable b = gfevd(refit.params, 12);
    CHECK((a.normalized - b.normalized).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(a.total == doctest::Approx(b.total).epsilon(1e-8));
}

TEST_CASE("analytic GFEVD matches the Monte-Carlo oracle") {
    std::vector<VarParams> cases;
    cases.push_back(table4_pre());
    for (std::uint64_t s = 11; s <= 13; ++s) {
        cases.push_back(test_helpers::random_stable_var2(s));
    }
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const SpilloverTable analytic = gfevd(cases[c], 12);
        const Eigen::MatrixXd mc =
            mc_gfevd_normalized(cases[c], 12, 100000, 1000 + c);
        CHECK((analytic.normalized - mc).cwiseAbs().maxCoeff() < 0.02);
    }
}

TEST_CASE("sigma-as-sd audit switch changes the raw normalizer") {
    VarParams p = table4_pre();
    const SpilloverTable var_norm = gfevd(p, 12, false);
    const SpilloverTable sd_norm = gfevd(p, 12, true);
    CHECK(var_norm.raw(0, 1) != sd_norm.raw(0, 1));
    // sigma_jj > 1 here, so the sd reading inflates the raw entries
    CHECK(sd_norm.raw(0, 1) > var_norm.raw(0, 1));
}

TEST_CASE("pairwise spillover with a constant window is a rolling window") {
    const TimeSeriesPanel panel = simulate_var(table4_pre(), 120, 100, 91);
    std::vector<Eigen::Index> taus;
    for (Eigen::Index tau = 40; tau < 120; ++tau) taus.push_back(tau);
    const std::vector<Eigen::Index> windows(taus.size(), 37);

    const PairwiseSpillover sp = pairwise_spillover(panel, taus, windows, 12, 1);
    REQUIRE(sp.pairs.size() == 1);
    for (std::size_t t = 0; t < taus.size(); ++t) {
        const VarFit fit = fit_var(panel, Interval{taus[t], 37}, 1);
        const SpilloverTable table = gfevd(fit.params, 12);
        REQUIRE(sp.cells[t][0].ok);
        CHECK(sp.cells[t][0].total == doctest::Approx(table.total));
        // one pair: the average equals the single series
        CHECK(sp.average[t] == doctest::Approx(sp.cells[t][0].total));
    }
}

TEST_CASE("failed cells are flagged and excluded from the average") {
    VarParams unstable = white_noise(2);
    unstable.lag_coeffs[0] = 1.05 * Eigen::Matrix2d::Identity();
    const TimeSeriesPanel panel = simulate_var(unstable, 80, 0, 5, true);

    std::vector<Eigen::Index> taus = {60, 79};
    std::vector<Eigen::Index> windows = {40, 40};
    const PairwiseSpillover sp = pairwise_spillover(panel, taus, windows, 12, 1);
    for (std::size_t t = 0; t < taus.size(); ++t) {
        CHECK_FALSE(sp.cells[t][0].ok);
        CHECK_FALSE(sp.cells[t][0].note.empty());
        CHECK(sp.valid_count[t] == 0);
        CHECK(std::isnan(sp.average[t]));
    }
}
