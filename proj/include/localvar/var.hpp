#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "localvar/panel.hpp"

namespace localvar {

/// Full parameter set of a Gaussian VAR(p): intercept, lag matrices and
/// innovation covariance.
struct VarParams {
    Eigen::VectorXd intercept;              // d
    std::vector<Eigen::MatrixXd> lag_coeffs;  // p matrices, d x d
    Eigen::MatrixXd noise_cov;              // d x d, symmetric positive definite

    Eigen::Index dim() const { return intercept.size(); }
    int order() const { return static_cast<int>(lag_coeffs.size()); }

    /// Checks dimensions, symmetry of noise_cov (1e-10) and positive
    /// definiteness. Throws BadDimension / NonPositiveDefiniteSigma.
    void validate() const;
};

/// Backward-looking estimation window: the m fitted observations are the
/// rows [end - length + 1, end]. The p lags before the window start must
/// exist in the panel but are not themselves fitted.
struct Interval {
    Eigen::Index end;     // index of the last fitted observation (0-based)
    Eigen::Index length;  // number of fitted observations m

    Eigen::Index first() const { return end - length + 1; }
};

struct VarFit {
    VarParams params;
    Eigen::MatrixXd residuals;  // m x d
    double loglik = 0.0;
    Interval interval{0, 0};
};

/// Smallest window for which the regression and the covariance MLE are
/// identifiable with margin.
inline Eigen::Index min_interval_length(Eigen::Index d, int p) {
    return d * p + d + p + 2;
}

/// Gaussian ML fit of a VAR(p) on a sub-interval: equation-wise least
/// squares for the coefficients, MLE covariance (denominator m).
VarFit fit_var(const TimeSeriesPanel& panel, const Interval& interval, int p);

/// Local Gaussian log-likelihood with the full multivariate constant
/// -(m*d/2) log 2*pi; residuals are recomputed from params.
double log_likelihood(const TimeSeriesPanel& panel, const Interval& interval,
                      const VarParams& params);

/// |l(I, theta_local) - l(I, theta_ref)|^r.
double lr_statistic(const TimeSeriesPanel& panel, const Interval& interval,
                    const VarParams& theta_local, const VarParams& theta_ref,
                    double r);

/// Companion form of the lag polynomial, (d*p) x (d*p).
Eigen::MatrixXd companion_matrix(const VarParams& params);

/// True iff every companion eigenvalue has modulus < 1 - 1e-10.
bool is_stable(const VarParams& params);

/// Unconditional mean of a stable VAR.
Eigen::VectorXd unconditional_mean(const VarParams& params);

/// Simulate a VAR path of length n after discarding burn_in observations.
/// Starts from the unconditional mean, innovations via the lower Cholesky
/// factor of noise_cov. Identical seed => identical output.
TimeSeriesPanel simulate_var(const VarParams& params, Eigen::Index n,
                             Eigen::Index burn_in, std::uint64_t seed,
                             bool allow_unstable = false);

/// Simulation variant that concatenates piecewise-constant regimes while
/// keeping the lagged state continuous across regime changes. Each entry of
/// `regimes` is (params, segment length); burn_in observations from the
/// first regime are discarded.
TimeSeriesPanel simulate_var_path(
    const std::vector<std::pair<VarParams, Eigen::Index>>& regimes,
    Eigen::Index burn_in, std::uint64_t seed, bool allow_unstable = false);

}  // namespace localvar
