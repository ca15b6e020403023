#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "localvar/var.hpp"

namespace localvar {

/// Moving-average representation A_0..A_{H-1} of a stable VAR.
struct VmaCoefficients {
    std::vector<Eigen::MatrixXd> matrices;
    int horizon = 0;
};

/// H-step generalized variance-decomposition table. `normalized` is
/// row-stochastic; `total` is the off-diagonal share in percent.
struct SpilloverTable {
    Eigen::MatrixXd raw;
    Eigen::MatrixXd normalized;
    double total = 0.0;
    int horizon = 0;
    std::vector<std::string> names;
};

/// A_u = phi_1 A_{u-1} + ... + phi_p A_{u-p}, A_0 = I, A_u = 0 for u < 0.
VmaCoefficients var_to_vma(const VarParams& params, int horizon);

/// Generalized FEVD after Pesaran-Shin with row normalization. When
/// sigma_as_sd is set the normalizer sigma_jj is read as a standard
/// deviation instead of the variance (audit switch).
SpilloverTable gfevd(const VarParams& params, int horizon,
                     bool sigma_as_sd = false);

/// One (tau, pair) cell of a pairwise spillover run. Failed fits are
/// flagged, never interpolated.
struct SpilloverCell {
    double total = 0.0;
    bool ok = false;
    std::string note;
};

struct PairwiseSpillover {
    std::vector<Eigen::Index> taus;
    std::vector<std::pair<int, int>> pairs;  // column indices, i < j
    // cells[t][q]: tau index t, pair index q
    std::vector<std::vector<SpilloverCell>> cells;
    std::vector<double> average;  // cross-pair mean over valid cells, NaN if none
    std::vector<int> valid_count;
};

/// Bivariate spillover for every column pair, each tau fitted on the
/// backward window [tau - m_tau + 1, tau]. `window_lengths` is aligned
/// with `taus`.
PairwiseSpillover pairwise_spillover(const TimeSeriesPanel& panel,
                                     const std::vector<Eigen::Index>& taus,
                                     const std::vector<Eigen::Index>& window_lengths,
                                     int horizon, int p);

}  // namespace localvar
