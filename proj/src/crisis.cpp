#include "localvar/crisis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace localvar {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

double crisis_indicator(int k_hat, int k_max) {
    if (k_max < 2) {
        throw IndexOutOfRange("k_max must be >= 2");
    }
    if (k_hat < 1 || k_hat > k_max) {
        throw IndexOutOfRange("k_hat " + std::to_string(k_hat) +
                              " outside [1, " + std::to_string(k_max) + "]");
    }
    return 1.0 - static_cast<double>(k_hat - 1) / (k_max - 1);
}

std::vector<double> global_crisis(
    const std::map<std::pair<int, int>, std::vector<double>>& per_pair,
    CrisisAggregation method) {
    if (per_pair.empty()) {
        throw EmptyPairSet("no pairs to aggregate");
    }
    const std::size_t len = per_pair.begin()->second.size();
    for (const auto& [pair, series] : per_pair) {
        if (series.size() != len) {
            throw ConfigError("pair series lengths differ");
        }
    }

    std::vector<double> out(len, kNan);
    std::vector<double> cell;
    for (std::size_t t = 0; t < len; ++t) {
        cell.clear();
        for (const auto& [pair, series] : per_pair) {
            if (std::isfinite(series[t])) cell.push_back(series[t]);
        }
        if (cell.empty()) continue;
        if (method == CrisisAggregation::Mean) {
            double sum = 0.0;
            for (double v : cell) sum += v;
            out[t] = sum / cell.size();
        } else {
            std::sort(cell.begin(), cell.end());
            const std::size_t mid = cell.size() / 2;
            out[t] = cell.size() % 2 == 1
                         ? cell[mid]
                         : 0.5 * (cell[mid - 1] + cell[mid]);
        }
    }
    return out;
}

CrisisSeries crisis_series(
    const std::map<std::pair<int, int>, std::vector<int>>& k_hats, int k_max) {
    if (k_hats.empty()) {
        throw EmptyPairSet("no pairs given");
    }
    CrisisSeries series;
    series.k_max = k_max;
    for (const auto& [pair, ks] : k_hats) {
        std::vector<double> ci(ks.size(), kNan);
        for (std::size_t t = 0; t < ks.size(); ++t) {
            if (ks[t] >= 1) {
                ci[t] = crisis_indicator(ks[t], k_max);
            }
        }
        series.per_pair[pair] = std::move(ci);
    }
    series.global_mean = global_crisis(series.per_pair, CrisisAggregation::Mean);
    series.global_median =
        global_crisis(series.per_pair, CrisisAggregation::Median);

    const std::size_t len = series.global_mean.size();
    series.coverage.assign(len, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
        int present = 0;
        for (const auto& [pair, ci] : series.per_pair) {
            if (std::isfinite(ci[t])) ++present;
        }
        series.coverage[t] =
            static_cast<double>(present) / series.per_pair.size();
    }
    return series;
}

}  // namespace localvar
