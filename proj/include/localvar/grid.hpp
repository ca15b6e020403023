#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "localvar/errors.hpp"

namespace localvar {

/// Ordered candidate window lengths m_1 < ... < m_{K+1}. The shortest
/// interval is always accepted; extensions to steps 2..size() are tested.
/// Only indices 1..size()-1 are selectable: the last length serves as the
/// final test window and can never be selected itself.
class IntervalGrid {
public:
    IntervalGrid() = default;

    explicit IntervalGrid(std::vector<Eigen::Index> lengths)
        : lengths_(std::move(lengths)) {
        check();
    }

    /// Geometric grid m_k = round(m0 * a^k), k = 0..count-1. Rounding to
    /// the nearest integer reproduces the canonical {12,...,46} grid.
    static IntervalGrid geometric(Eigen::Index m0, double a, int count) {
        std::vector<Eigen::Index> lengths;
        lengths.reserve(count);
        for (int k = 0; k < count; ++k) {
            lengths.push_back(static_cast<Eigen::Index>(
                std::lround(static_cast<double>(m0) * std::pow(a, k))));
        }
        return IntervalGrid(std::move(lengths));
    }

    /// The default grid {12, 15, 19, 23, 29, 37, 46}.
    static IntervalGrid default_grid() { return geometric(12, 1.25, 7); }

    /// The literature comparison grid {18, 23, 29, 36, 45, 57, 72}.
    static IntervalGrid literature_grid() { return geometric(18, 1.26, 7); }

    /// Number of grid entries (K+1 candidate lengths).
    int size() const { return static_cast<int>(lengths_.size()); }

    /// Largest selectable step index (size() - 1).
    int max_selectable() const { return size() - 1; }

    /// Largest tested step index (== size(); the test at this step uses the
    /// final, non-selectable window).
    int max_tested() const { return size(); }

    /// Length at 1-based step index k.
    Eigen::Index length(int k) const { return lengths_.at(k - 1); }

    Eigen::Index shortest() const { return lengths_.front(); }
    Eigen::Index longest() const { return lengths_.back(); }

    const std::vector<Eigen::Index>& lengths() const { return lengths_; }

    bool operator==(const IntervalGrid& other) const {
        return lengths_ == other.lengths_;
    }

private:
    void check() const {
        if (lengths_.size() < 2) {
            throw ConfigError("interval grid needs at least two lengths");
        }
        for (std::size_t i = 0; i < lengths_.size(); ++i) {
            if (lengths_[i] < 1 ||
                (i > 0 && lengths_[i] <= lengths_[i - 1])) {
                throw ConfigError(
                    "interval grid must be strictly increasing and positive");
            }
        }
    }

    std::vector<Eigen::Index> lengths_;
};

}  // namespace localvar
