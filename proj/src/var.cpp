#include "localvar/var.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "localvar/rng.hpp"

namespace localvar {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_interval(const TimeSeriesPanel& panel, const Interval& interval,
                    int p) {
    const Eigen::Index d = panel.dim();
    if (p < 1) {
        throw BadDimension("lag order must be >= 1");
    }
    if (interval.length < min_interval_length(d, p)) {
        throw IntervalTooShort(
            "interval length " + std::to_string(interval.length) +
            " below identifiable minimum " +
            std::to_string(min_interval_length(d, p)) + " for d=" +
            std::to_string(d) + ", p=" + std::to_string(p));
    }
    if (interval.end >= panel.rows()) {
        throw IntervalTooShort("interval end beyond panel");
    }
    if (interval.first() - p < 0) {
        throw IntervalTooShort(
            "interval requires " + std::to_string(p) +
            " pre-sample observations before row " +
            std::to_string(interval.first()));
    }
}

// Residuals of the VAR(p) on the interval under the given parameters.
Eigen::MatrixXd residual_matrix(const TimeSeriesPanel& panel,
                                const Interval& interval,
                                const VarParams& params) {
    const Eigen::Index d = panel.dim();
    const int p = params.order();
    Eigen::MatrixXd eps(interval.length, d);
    for (Eigen::Index i = 0; i < interval.length; ++i) {
        const Eigen::Index v = interval.first() + i;
        Eigen::VectorXd e = panel.values.row(v).transpose() - params.intercept;
        for (int s = 1; s <= p; ++s) {
            e.noalias() -=
                params.lag_coeffs[s - 1] * panel.values.row(v - s).transpose();
        }
        eps.row(i) = e.transpose();
    }
    return eps;
}

}  // namespace

void VarParams::validate() const {
    const Eigen::Index d = dim();
    if (d < 1) {
        throw BadDimension("empty parameter set");
    }
    if (lag_coeffs.empty()) {
        throw BadDimension("lag order must be >= 1");
    }
    for (const auto& phi : lag_coeffs) {
        if (phi.rows() != d || phi.cols() != d) {
            throw BadDimension("lag coefficient dimension mismatch");
        }
    }
    if (noise_cov.rows() != d || noise_cov.cols() != d) {
        throw BadDimension("noise covariance dimension mismatch");
    }
    if ((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw NonPositiveDefiniteSigma("noise covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(noise_cov);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw NonPositiveDefiniteSigma(
            "noise covariance not positive definite");
    }
}

VarFit fit_var(const TimeSeriesPanel& panel, const Interval& interval, int p) {
    check_interval(panel, interval, p);
    const Eigen::Index d = panel.dim();
    const Eigen::Index m = interval.length;
    const Eigen::Index q = 1 + d * p;

    Eigen::MatrixXd X(m, q);
    Eigen::MatrixXd Y(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index v = interval.first() + i;
        X(i, 0) = 1.0;
        for (int s = 1; s <= p; ++s) {
            X.block(i, 1 + (s - 1) * d, 1, d) = panel.values.row(v - s);
        }
        Y.row(i) = panel.values.row(v);
    }

    for (Eigen::Index c = 0; c < d; ++c) {
        const double spread =
            Y.col(c).maxCoeff() - Y.col(c).minCoeff();
        if (spread == 0.0) {
            throw DegenerateCovariance("series " + std::to_string(c) +
                                       " is constant on the interval");
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < q) {
        throw SingularDesign("regressor cross-product not invertible (rank " +
                             std::to_string(qr.rank()) + " of " +
                             std::to_string(q) + ")");
    }
    Eigen::MatrixXd B = qr.solve(Y);  // q x d

    VarFit fit;
    fit.interval = interval;
    fit.params.intercept = B.row(0).transpose();
    fit.params.lag_coeffs.reserve(p);
    for (int s = 1; s <= p; ++s) {
        fit.params.lag_coeffs.push_back(
            B.block(1 + (s - 1) * d, 0, d, d).transpose());
    }
    fit.residuals = Y - X * B;
    fit.params.noise_cov =
        (fit.residuals.transpose() * fit.residuals) / static_cast<double>(m);

    Eigen::LLT<Eigen::MatrixXd> llt(fit.params.noise_cov);
    if (llt.info() != Eigen::Success) {
        throw DegenerateCovariance(
            "residual covariance not positive definite");
    }
    fit.loglik = log_likelihood(panel, interval, fit.params);
    return fit;
}

double log_likelihood(const TimeSeriesPanel& panel, const Interval& interval,
                      const VarParams& params) {
    check_interval(panel, interval, params.order());
    const Eigen::Index d = panel.dim();
    if (params.dim() != d) {
        throw BadDimension("parameter dimension does not match panel");
    }
    const double m = static_cast<double>(interval.length);

    Eigen::LLT<Eigen::MatrixXd> llt(params.noise_cov);
    if (llt.info() != Eigen::Success) {
        throw NonPositiveDefiniteSigma("sigma not positive definite");
    }
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
    }

    const Eigen::MatrixXd eps = residual_matrix(panel, interval, params);
    // quadratic form sum_v eps_v' Sigma^{-1} eps_v via the Cholesky solve
    const Eigen::MatrixXd w = llt.matrixL().solve(eps.transpose());
    const double quad = w.squaredNorm();

    return -0.5 * m * static_cast<double>(d) * std::log(2.0 * kPi) -
           0.5 * m * log_det - 0.5 * quad;
}

double lr_statistic(const TimeSeriesPanel& panel, const Interval& interval,
                    const VarParams& theta_local, const VarParams& theta_ref,
                    double r) {
    if (r <= 0.0) {
        throw ConfigError("power r must be > 0");
    }
    const double diff = log_likelihood(panel, interval, theta_local) -
                        log_likelihood(panel, interval, theta_ref);
    return std::pow(std::abs(diff), r);
}

Eigen::MatrixXd companion_matrix(const VarParams& params) {
    const Eigen::Index d = params.dim();
    const int p = params.order();
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d * p, d * p);
    for (int s = 0; s < p; ++s) {
        comp.block(0, s * d, d, d) = params.lag_coeffs[s];
    }
    if (p > 1) {
        comp.block(d, 0, d * (p - 1), d * (p - 1)) =
            Eigen::MatrixXd::Identity(d * (p - 1), d * (p - 1));
    }
    return comp;
}

bool is_stable(const VarParams& params) {
    params.validate();
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion_matrix(params), false);
    return es.eigenvalues().cwiseAbs().maxCoeff() < 1.0 - 1e-10;
}

Eigen::VectorXd unconditional_mean(const VarParams& params) {
    const Eigen::Index d = params.dim();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d);
    for (const auto& phi : params.lag_coeffs) {
        a -= phi;
    }
    return a.fullPivLu().solve(params.intercept);
}

TimeSeriesPanel simulate_var(const VarParams& params, Eigen::Index n,
                             Eigen::Index burn_in, std::uint64_t seed,
                             bool allow_unstable) {
    return simulate_var_path({{params, n}}, burn_in, seed, allow_unstable);
}

TimeSeriesPanel simulate_var_path(
    const std::vector<std::pair<VarParams, Eigen::Index>>& regimes,
    Eigen::Index burn_in, std::uint64_t seed, bool allow_unstable) {
    if (regimes.empty()) {
        throw ConfigError("no regimes to simulate");
    }
    const VarParams& first = regimes.front().first;
    first.validate();
    const Eigen::Index d = first.dim();
    const int p = first.order();
    Eigen::Index total = 0;
    for (const auto& [params, len] : regimes) {
        params.validate();
        if (params.dim() != d || params.order() != p) {
            throw BadDimension("regimes must share dimension and lag order");
        }
        if (len < 1) {
            throw BadDimension("regime length must be >= 1");
        }
        if (!allow_unstable && !is_stable(params)) {
            throw UnstableParams("refusing to simulate an unstable VAR");
        }
        total += len;
    }

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // lagged state, most recent last; initialized at the unconditional mean
    Eigen::VectorXd init = allow_unstable && !is_stable(first)
                               ? Eigen::VectorXd::Zero(d).eval()
                               : unconditional_mean(first);
    std::vector<Eigen::VectorXd> state(p, init);

    TimeSeriesPanel panel;
    panel.axis = TimeAxis::index(0);
    panel.values.resize(total, d);
    panel.names.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        panel.names[j] = "y" + std::to_string(j + 1);
    }

    Eigen::Index row = 0;
    bool burning = burn_in > 0;
    Eigen::Index burned = 0;
    for (std::size_t g = 0; g < regimes.size(); ++g) {
        const VarParams& params = regimes[g].first;
        Eigen::LLT<Eigen::MatrixXd> llt(params.noise_cov);
        if (llt.info() != Eigen::Success) {
            throw NonPositiveDefiniteSigma("sigma not positive definite");
        }
        const Eigen::MatrixXd chol = llt.matrixL();
        Eigen::Index remaining = regimes[g].second;
        // burn-in runs under the first regime only
        Eigen::Index steps = remaining + (g == 0 ? burn_in : 0);
        for (Eigen::Index t = 0; t < steps; ++t) {
            Eigen::VectorXd z(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                z(j) = gauss(rng);
            }
            Eigen::VectorXd x = params.intercept + chol * z;
            for (int s = 1; s <= p; ++s) {
                x.noalias() +=
                    params.lag_coeffs[s - 1] * state[state.size() - s];
            }
            state.erase(state.begin());
            state.push_back(x);
            if (burning && burned < burn_in) {
                ++burned;
                if (burned == burn_in) burning = false;
                continue;
            }
            panel.values.row(row++) = x.transpose();
        }
    }
    return panel;
}

}  // namespace localvar
