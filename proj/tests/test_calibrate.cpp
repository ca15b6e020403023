#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "helpers.hpp"
#include "localvar/adaptive.hpp"
#include "localvar/calibrate.hpp"
#include "localvar/errors.hpp"

using namespace localvar;
using test_helpers::table4_pre;

namespace {

CalibrationConfig base_config(int n_samples = 2000, std::uint64_t seed = 1,
                              double rho = 0.5) {
    CalibrationConfig cc;
    cc.theta_star = table4_pre();
    cc.grid = IntervalGrid::default_grid();
    cc.r = 0.5;
    cc.rho = rho;
    cc.n_samples = n_samples;
    cc.seed = seed;
    return cc;
}

}  // namespace

TEST_CASE("configuration floor on the sample count") {
    CalibrationConfig cc = base_config();
    cc.n_samples = 99;
    CHECK_THROWS_AS(cc.validate(), ConfigError);
    cc.n_samples = 100;
    CHECK_NOTHROW(cc.validate());
    cc.rho = 0.0;
    CHECK_THROWS_AS(cc.validate(), ConfigError);
}

TEST_CASE("risk bounds stabilize across disjoint seeds at N = 10^4") {
    CalibrationConfig a = base_config(10000, 101);
    CalibrationConfig b = base_config(10000, 202);
    const auto rb_a = estimate_risk_bounds(a);
    const auto rb_b = estimate_risk_bounds(b);
    REQUIRE(rb_a.size() == 6);  // steps 2..7
    for (const auto& [k, v] : rb_a) {
        CHECK(v > 0.0);
        CHECK(std::abs(v - rb_b.at(k)) / v < 0.05);
    }
}

TEST_CASE("powered risk bounds respect Jensen's inequality") {
    CalibrationConfig half = base_config(2000, 7);
    CalibrationConfig one = base_config(2000, 7);
    one.r = 1.0;
    const auto rb_half = estimate_risk_bounds(half);
    const auto rb_one = estimate_risk_bounds(one);
    for (const auto& [k, v] : rb_half) {
        CHECK(v <= std::sqrt(rb_one.at(k)) + 1e-12);
    }
}

TEST_CASE("intercept shifts leave the risk bounds unchanged") {
    CalibrationConfig a = base_config(2000, 5);
    CalibrationConfig b = a;
    b.theta_star.intercept.array() += 40.0;
    const auto rb_a = estimate_risk_bounds(a);
    const auto rb_b = estimate_risk_bounds(b);
    for (const auto& [k, v] : rb_a) {
        CHECK(v == doctest::Approx(rb_b.at(k)).epsilon(1e-9));
    }
}

TEST_CASE("calibrated thresholds are finite, nonnegative and complete") {
    const CriticalValues cv = calibrate_critical_values(base_config());
    const IntervalGrid grid = IntervalGrid::default_grid();
    for (int k = 2; k <= grid.max_tested(); ++k) {
        CHECK(std::isfinite(cv.at(k)));
        CHECK(cv.at(k) >= 0.0);
    }
    CHECK_THROWS_AS(cv.at(1), ConfigError);
    CHECK_THROWS_AS(cv.at(8), ConfigError);
    CHECK_FALSE(cv.fingerprint.empty());
}

TEST_CASE("doubling rho weakly lowers every threshold") {
    for (const auto [lo, hi] : {std::pair{0.1, 0.2}, {0.25, 0.5}, {0.5, 1.0}}) {
        const CriticalValues a =
            calibrate_critical_values(base_config(2000, 3, lo));
        const CriticalValues b =
            calibrate_critical_values(base_config(2000, 3, hi));
        for (const auto& [k, z] : a.zeta) {
            // slack covers the 1e-3 bisection tolerance on both runs
            CHECK(z >= b.zeta.at(k) - 2e-3);
        }
    }
}

TEST_CASE("results are bitwise identical for any worker count") {
    CalibrationConfig serial = base_config(1500, 9);
    serial.workers = 1;
    CalibrationConfig threaded = serial;
    threaded.workers = 4;
    const CriticalValues a = calibrate_critical_values(serial);
    const CriticalValues b = calibrate_critical_values(threaded);
    CHECK(a.zeta == b.zeta);
    CHECK(a.risk_bounds == b.risk_bounds);
    CHECK(a.fingerprint == b.fingerprint);
}

TEST_CASE("JSON round trip and disk cache") {
    const CriticalValues cv = calibrate_critical_values(base_config(500, 17));
    const CriticalValues back = critical_values_from_json(
        critical_values_to_json(cv));
    CHECK(back.zeta == cv.zeta);
    CHECK(back.risk_bounds == cv.risk_bounds);
    CHECK(back.fingerprint == cv.fingerprint);
    CHECK(back.grid == cv.grid);
    CHECK(back.n_samples == cv.n_samples);

    namespace fs = std::filesystem;
    const fs::path dir = "/tmp/localvar_test_cache";
    fs::remove_all(dir);
    const CriticalValues first =
        calibrate_cached(base_config(500, 17), dir.string());
    CHECK(first.zeta == cv.zeta);
    REQUIRE_FALSE(fs::is_empty(dir));
    // second call must hit the cache and reproduce the same values
    const CriticalValues second =
        calibrate_cached(base_config(500, 17), dir.string());
    CHECK(second.zeta == cv.zeta);
    fs::remove_all(dir);
}

TEST_CASE("fingerprints separate distinct configurations") {
    const CalibrationConfig a = base_config(500, 1);
    CalibrationConfig b = a;
    b.seed = 2;
    CalibrationConfig c = a;
    c.rho = 0.25;
    CHECK(a.fingerprint() != b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
    CHECK(a.fingerprint() == base_config(500, 1).fingerprint());
}

TEST_CASE("lower rho raises the full-acceptance rate on fresh samples") {
    const IntervalGrid grid = IntervalGrid::default_grid();
    const VarParams truth = table4_pre();
    const auto acceptance_rate = [&](double rho) {
        const CriticalValues cv =
            calibrate_critical_values(base_config(2000, 21, rho));
        int full = 0;
        const int n = 150;
        for (int i = 0; i < n; ++i) {
            const TimeSeriesPanel panel =
                simulate_var(truth, grid.longest() + 1, 100, 9000 + i);
            const AdaptiveResult res = adaptive_search(
                panel, panel.rows() - 1, grid, cv, 0.5, 1);
            full += res.k_hat == grid.max_selectable() ? 1 : 0;
        }
        return static_cast<double>(full) / n;
    };
    const double low = acceptance_rate(0.088);
    const double high = acceptance_rate(0.9);
    CHECK(low >= high);
    CHECK(low > 0.8);
}
