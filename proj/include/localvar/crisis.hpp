#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

#include "localvar/errors.hpp"

namespace localvar {

/// Affine rescaling of a selected interval index to [0, 1]: 1 at the
/// shortest interval, 0 at the longest selectable one.
double crisis_indicator(int k_hat, int k_max);

enum class CrisisAggregation { Mean, Median };

struct CrisisSeries {
    // per_pair[(i, j)][t], aligned across pairs; NaN marks a missing cell
    std::map<std::pair<int, int>, std::vector<double>> per_pair;
    std::vector<double> global_mean;
    std::vector<double> global_median;
    std::vector<double> coverage;  // fraction of pairs present per tau
    int k_max = 0;
};

/// Per-tau aggregate of pairwise crisis indicators. Missing pairs (NaN
/// cells) are excluded and reported through the coverage fraction.
std::vector<double> global_crisis(
    const std::map<std::pair<int, int>, std::vector<double>>& per_pair,
    CrisisAggregation method);

/// Builds the full series from per-pair selected indices (0 marks a
/// missing cell).
CrisisSeries crisis_series(
    const std::map<std::pair<int, int>, std::vector<int>>& k_hats, int k_max);

}  // namespace localvar
