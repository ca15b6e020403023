#pragma once

#include <functional>
#include <map>
#include <vector>

#include "localvar/calibrate.hpp"
#include "localvar/grid.hpp"
#include "localvar/var.hpp"

namespace localvar {

/// Outcome of the sequential search at one time point. The trace holds the
/// powered LR statistic for every performed step k = 2..stopping step;
/// entries past the stopping step stay NaN.
struct AdaptiveResult {
    Eigen::Index tau = 0;
    int k_hat = 1;            // selected grid index, 1..max_selectable
    Eigen::Index m_hat = 0;   // grid length at k_hat
    VarParams theta_hat;      // MLE on the selected interval
    std::vector<double> lr_trace;  // lr_trace[k-2] = statistic at step k
    int stop_k = 0;           // first violating step, 0 if none
    bool fit_failed = false;  // a fit error terminated the extension early
    bool restricted = false;  // k_hat replaced by the jump restriction
};

/// Sequential backward extension at tau: the shortest interval is always
/// accepted, each extension k is tested against the current adaptive
/// estimator, the first violation stops acceptance.
AdaptiveResult adaptive_search(const TimeSeriesPanel& panel, Eigen::Index tau,
                               const IntervalGrid& grid,
                               const CriticalValues& critvals, double r, int p);

/// Smoothing pass over consecutive taus: whenever the selected length
/// changes against the previous tau's search outcome, the selection is
/// replaced by the interval preceding the trace-maximal step (ties:
/// smallest). The first tau is never modified.
std::vector<AdaptiveResult> apply_jump_restriction(
    const TimeSeriesPanel& panel, const IntervalGrid& grid, int p,
    std::vector<AdaptiveResult> results);

/// First admissible tau (0-based): the longest window plus p pre-sample
/// lags must fit.
inline Eigen::Index first_admissible_tau(const IntervalGrid& grid, int p) {
    return grid.longest() + p - 1;
}

/// Run the search over every admissible tau, optionally restricted.
std::vector<AdaptiveResult> adaptive_series(const TimeSeriesPanel& panel,
                                            const IntervalGrid& grid,
                                            const CriticalValues& critvals,
                                            double r, int p,
                                            bool restrict_jumps = true);

struct RhoSelection {
    double rho = 0.0;
    struct Row {
        double rho;
        std::map<int, double> zeta;
        double mape;
        int skipped;  // zero observations excluded from the MAPE
    };
    std::vector<Row> table;
};

/// Calibration engine used by select_rho: maps rho to critical values.
using CalibrationEngine = std::function<CriticalValues(double rho)>;

/// One-step-ahead MAPE over the admissible range for each candidate rho;
/// smallest MAPE wins, ties resolved toward the smaller rho.
RhoSelection select_rho(const TimeSeriesPanel& panel, const IntervalGrid& grid,
                        const std::vector<double>& rho_grid, double r, int p,
                        const CalibrationEngine& calib,
                        bool restrict_jumps = true);

/// The default candidate grid {0.01, 0.02, ..., 1.00}.
std::vector<double> default_rho_grid();

}  // namespace localvar
