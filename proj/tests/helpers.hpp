#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "localvar/panel.hpp"
#include "localvar/var.hpp"

namespace test_helpers {

inline localvar::TimeSeriesPanel panel_from(const Eigen::MatrixXd& values) {
    localvar::TimeSeriesPanel panel;
    panel.axis = localvar::TimeAxis::index();
    panel.values = values;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        panel.names.push_back("y" + std::to_string(c + 1));
    }
    return panel;
}

inline localvar::VarParams table4_pre() {
    localvar::VarParams p;
    p.intercept = Eigen::Vector2d(29.0, 132.0);
    Eigen::Matrix2d phi;
    phi << 0.71, 0.08, 0.13, 0.08;
    p.lag_coeffs = {phi};
    Eigen::Matrix2d sigma;
    sigma << 25.0, 7.5, 7.5, 16.0;
    p.noise_cov = sigma;
    return p;
}

inline localvar::VarParams table4_post() {
    localvar::VarParams p;
    p.intercept = Eigen::Vector2d(31.0, 130.0);
    Eigen::Matrix2d phi;
    phi << 0.63, 0.0, 0.12, 0.23;
    p.lag_coeffs = {phi};
    Eigen::Matrix2d sigma;
    sigma << 25.0, 7.5, 7.5, 16.0;
    p.noise_cov = sigma;
    return p;
}

inline localvar::VarParams white_noise(Eigen::Index d) {
    localvar::VarParams p;
    p.intercept = Eigen::VectorXd::Zero(d);
    p.lag_coeffs = {Eigen::MatrixXd::Zero(d, d)};
    p.noise_cov = Eigen::MatrixXd::Identity(d, d);
    return p;
}

/// Random stable bivariate VAR(1) with a random SPD covariance.
inline localvar::VarParams random_stable_var2(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-0.45, 0.45);
    std::uniform_real_distribution<double> unit(0.2, 1.5);
    localvar::VarParams p;
    for (;;) {
        p.intercept = Eigen::Vector2d(coef(rng), coef(rng));
        Eigen::Matrix2d phi;
        phi << coef(rng), coef(rng), coef(rng), coef(rng);
        p.lag_coeffs = {phi};
        Eigen::Matrix2d a;
        a << unit(rng), coef(rng), coef(rng), unit(rng);
        p.noise_cov = a * a.transpose() +
                      0.05 * Eigen::Matrix2d::Identity();
        if (localvar::is_stable(p)) return p;
    }
}

/// Monte-Carlo generalized FEVD built from the VAR recursion only: the
/// H-step forecast error is simulated directly and its covariances with the
/// individual shocks estimate the decomposition numerators.
inline Eigen::MatrixXd mc_gfevd_normalized(const localvar::VarParams& params,
                                           int horizon, int n_paths,
                                           std::uint64_t seed) {
    const Eigen::Index d = params.dim();
    const Eigen::LLT<Eigen::MatrixXd> llt(params.noise_cov);
    const Eigen::MatrixXd chol = llt.matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // shocks[s] holds the shock at forecast step s for every path
    std::vector<Eigen::MatrixXd> shocks(
        horizon, Eigen::MatrixXd::Zero(n_paths, d));
    Eigen::MatrixXd errors = Eigen::MatrixXd::Zero(n_paths, d);

    const int p = params.order();
    Eigen::VectorXd z(d);
    for (int path = 0; path < n_paths; ++path) {
        // state holds deviations from the shock-free forecast path; the
        // common conditional mean cancels in the forecast error
        std::vector<Eigen::VectorXd> state(p, Eigen::VectorXd::Zero(d));
        Eigen::VectorXd x(d);
        for (int s = 0; s < horizon; ++s) {
            for (Eigen::Index i = 0; i < d; ++i) z(i) = gauss(rng);
            const Eigen::VectorXd eps = chol * z;
            shocks[s].row(path) = eps.transpose();
            x = eps;
            for (int lag = 1; lag <= p && lag <= s; ++lag) {
                x.noalias() += params.lag_coeffs[lag - 1] * state[lag - 1];
            }
            for (int lag = p - 1; lag > 0; --lag) state[lag] = state[lag - 1];
            state[0] = x;
        }
        errors.row(path) = x.transpose();
    }

    const Eigen::RowVectorXd err_mean = errors.colwise().mean();
    Eigen::MatrixXd centered_err = errors.rowwise() - err_mean;

    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd denom(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        denom(i) = centered_err.col(i).squaredNorm() / n_paths;
    }
    for (int s = 0; s < horizon; ++s) {
        const Eigen::RowVectorXd shock_mean = shocks[s].colwise().mean();
        const Eigen::MatrixXd centered_shock =
            shocks[s].rowwise() - shock_mean;
        // cov(i, j) estimates the covariance of forecast error i with the
        // step-s shock in series j
        const Eigen::MatrixXd cov =
            centered_err.transpose() * centered_shock / n_paths;
        raw.array() += cov.array().square();
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            raw(i, j) /= params.noise_cov(j, j) * denom(i);
        }
    }
    Eigen::MatrixXd normalized(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        normalized.row(i) = raw.row(i) / raw.row(i).sum();
    }
    return normalized;
}

}  // namespace test_helpers
