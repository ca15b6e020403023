#include "localvar/adaptive.hpp"

#include <cmath>
#include <limits>

namespace localvar {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

AdaptiveResult adaptive_search(const TimeSeriesPanel& panel, Eigen::Index tau,
                               const IntervalGrid& grid,
                               const CriticalValues& critvals, double r, int p) {
    if (tau < first_admissible_tau(grid, p) || tau >= panel.rows()) {
        throw InsufficientHistory(
            "tau " + std::to_string(tau) + " has no room for the longest window");
    }
    if (critvals.grid.size() > 0 && !(critvals.grid == grid)) {
        throw ConfigError("critical values were calibrated for a different grid");
    }

    AdaptiveResult res;
    res.tau = tau;
    res.lr_trace.assign(grid.max_tested() - 1, kNan);

    VarFit accepted = fit_var(panel, Interval{tau, grid.length(1)}, p);
    int last_accepted = 1;
    VarFit accepted_kept = accepted;  // selected fit (capped at max_selectable)

    for (int k = 2; k <= grid.max_tested(); ++k) {
        VarFit candidate;
        try {
            candidate = fit_var(panel, Interval{tau, grid.length(k)}, p);
        } catch (const Error&) {
            res.fit_failed = true;
            break;
        }
        const Interval window{tau, grid.length(k)};
        const double ref_ll = log_likelihood(panel, window, accepted.params);
        const double stat = std::pow(std::abs(candidate.loglik - ref_ll), r);
        res.lr_trace[k - 2] = stat;

        if (stat <= critvals.at(k)) {
            accepted = candidate;
            last_accepted = k;
            if (k <= grid.max_selectable()) {
                accepted_kept = candidate;
            }
        } else {
            res.stop_k = k;
            break;  // trace ends at the violating step
        }
    }

    res.k_hat = std::min(last_accepted, grid.max_selectable());
    res.m_hat = grid.length(res.k_hat);
    res.theta_hat = accepted_kept.params;
    return res;
}

std::vector<AdaptiveResult> apply_jump_restriction(
    const TimeSeriesPanel& panel, const IntervalGrid& grid, int p,
    std::vector<AdaptiveResult> results) {
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (results[i].tau != results[i - 1].tau + 1) {
            throw ConfigError("results must cover consecutive taus");
        }
    }

    // Jumps are judged against the unrestricted neighbour: a one-off spike
    // differs from both neighbours and gets smoothed, while a persistent
    // regime change differs only at its onset.
    std::vector<Eigen::Index> search_m;
    search_m.reserve(results.size());
    for (const auto& res : results) search_m.push_back(res.m_hat);

    for (std::size_t i = 1; i < results.size(); ++i) {
        if (search_m[i] == search_m[i - 1]) continue;
        AdaptiveResult& res = results[i];
        if (res.lr_trace.empty()) {
            throw MissingTrace("no LR trace stored at tau " +
                               std::to_string(res.tau));
        }
        // The statistic of step k compares the candidate on interval k with
        // the estimator carried from interval k-1, so its evidence points at
        // k-1 as the last trustworthy interval: a huge violation keeps the
        // short window, while the largest statistic among accepted steps
        // marks how far the extension was genuinely supported.
        int k_max = 1;
        double best = 0.0;  // interval 1 carries a zero statistic by definition
        for (int k = 2; k <= grid.max_tested(); ++k) {
            const double v = res.lr_trace[k - 2];
            const int interval = std::min(k - 1, grid.max_selectable());
            if (std::isfinite(v) && v > best) {
                best = v;
                k_max = interval;
            }
        }
        if (k_max != res.k_hat) {
            res.k_hat = k_max;
            res.m_hat = grid.length(k_max);
            res.theta_hat =
                fit_var(panel, Interval{res.tau, res.m_hat}, p).params;
            res.restricted = true;
        }
    }
    return results;
}

std::vector<AdaptiveResult> adaptive_series(const TimeSeriesPanel& panel,
                                            const IntervalGrid& grid,
                                            const CriticalValues& critvals,
                                            double r, int p,
                                            bool restrict_jumps) {
    std::vector<AdaptiveResult> results;
    for (Eigen::Index tau = first_admissible_tau(grid, p); tau < panel.rows();
         ++tau) {
        results.push_back(adaptive_search(panel, tau, grid, critvals, r, p));
    }
    if (restrict_jumps) {
        results = apply_jump_restriction(panel, grid, p, std::move(results));
    }
    return results;
}

RhoSelection select_rho(const TimeSeriesPanel& panel, const IntervalGrid& grid,
                        const std::vector<double>& rho_grid, double r, int p,
                        const CalibrationEngine& calib, bool restrict_jumps) {
    if (rho_grid.empty()) {
        throw ConfigError("rho grid is empty");
    }
    for (double rho : rho_grid) {
        if (!(rho > 0.0 && rho <= 1.0)) {
            throw ConfigError("rho must lie in (0, 1]");
        }
    }

    RhoSelection sel;
    for (double rho : rho_grid) {
        const CriticalValues cv = calib(rho);
        const std::vector<AdaptiveResult> results =
            adaptive_series(panel, grid, cv, r, p, restrict_jumps);

        double ape_sum = 0.0;
        long ape_count = 0;
        int skipped = 0;
        for (std::size_t i = 0; i + 1 < results.size(); ++i) {
            const AdaptiveResult& res = results[i];
            const Eigen::Index t = res.tau + 1;
            Eigen::VectorXd forecast = res.theta_hat.intercept;
            for (int s = 1; s <= p; ++s) {
                forecast.noalias() += res.theta_hat.lag_coeffs[s - 1] *
                                      panel.values.row(t - s).transpose();
            }
            for (Eigen::Index c = 0; c < panel.dim(); ++c) {
                const double y = panel.values(t, c);
                if (y == 0.0) {
                    ++skipped;
                    continue;
                }
                ape_sum += std::abs((y - forecast(c)) / y);
                ++ape_count;
            }
        }
        if (ape_count == 0) {
            throw ZeroObservation("no usable observations for the MAPE");
        }
        sel.table.push_back({rho, cv.zeta, ape_sum / ape_count, skipped});
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < sel.table.size(); ++i) {
        const bool better = sel.table[i].mape < sel.table[best].mape ||
                            (sel.table[i].mape == sel.table[best].mape &&
                             sel.table[i].rho < sel.table[best].rho);
        if (better) best = i;
    }
    sel.rho = sel.table[best].rho;
    return sel;
}

std::vector<double> default_rho_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) {
        grid.push_back(i / 100.0);
    }
    return grid;
}

}  // namespace localvar
