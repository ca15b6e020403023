#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "localvar/grid.hpp"
#include "localvar/var.hpp"

namespace localvar {

/// Inputs of a Monte-Carlo critical-value calibration. The fingerprint of
/// this struct keys the on-disk cache.
struct CalibrationConfig {
    VarParams theta_star;   // hypothetical homogeneous truth
    IntervalGrid grid;
    double r = 0.5;
    double rho = 0.5;
    int n_samples = 10000;
    std::uint64_t seed = 0;
    Eigen::Index burn_in = 100;
    int workers = 1;

    void validate() const;

    /// Stable hash over all inputs that define the result.
    std::string fingerprint() const;
};

/// Calibrated thresholds zeta_k^r for steps k = 2..K_test, with the
/// matching Monte-Carlo risk bounds and the config fingerprint.
struct CriticalValues {
    std::map<int, double> zeta;
    std::map<int, double> risk_bounds;
    std::string fingerprint;
    IntervalGrid grid;
    double r = 0.5;
    double rho = 0.5;
    int n_samples = 0;
    std::uint64_t seed = 0;

    double at(int k) const {
        auto it = zeta.find(k);
        if (it == zeta.end()) {
            throw ConfigError("no critical value for step " + std::to_string(k));
        }
        return it->second;
    }

    /// Critical values all +infinity, for `no test can reject` runs.
    static CriticalValues unbounded(const IntervalGrid& grid, double r);
};

/// Mean powered likelihood-ratio deviation of the interval MLE from the
/// generating parameters, per tested step, over n_samples homogeneous
/// paths. Deterministic given the seed, independent of worker count.
std::map<int, double> estimate_risk_bounds(const CalibrationConfig& config);

/// Sequential threshold calibration: for k = 2..K_test, bisect the zeta
/// matching the empirical loss of the adaptive estimator (earlier steps
/// frozen) to rho * (k / K_test) * RB_k.
CriticalValues calibrate_critical_values(const CalibrationConfig& config);

/// JSON persistence of calibrated values.
std::string critical_values_to_json(const CriticalValues& cv);
CriticalValues critical_values_from_json(const std::string& text);

/// Disk cache keyed by config fingerprint; calibrates on miss.
CriticalValues calibrate_cached(const CalibrationConfig& config,
                                const std::string& cache_dir);

}  // namespace localvar
