#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "localvar/errors.hpp"

namespace localvar {

/// Equally spaced time axis: either a run of calendar months or a plain
/// integer index. Only the origin is stored; labels are generated on demand.
struct TimeAxis {
    enum class Kind { Monthly, Index };

    Kind kind = Kind::Index;
    int start_year = 0;
    int start_month = 1;   // 1..12, Monthly only
    long start_index = 0;  // Index only

    static TimeAxis monthly(int year, int month) {
        TimeAxis ax;
        ax.kind = Kind::Monthly;
        ax.start_year = year;
        ax.start_month = month;
        return ax;
    }

    static TimeAxis index(long start = 0) {
        TimeAxis ax;
        ax.kind = Kind::Index;
        ax.start_index = start;
        return ax;
    }

    /// Label of the i-th observation ("YYYY-MM" or the integer index).
    std::string label(Eigen::Index i) const;
};

/// Dated d-dimensional observation matrix with column labels.
/// Rows are time points (strictly increasing, no gaps), columns are series.
struct TimeSeriesPanel {
    TimeAxis axis;
    Eigen::MatrixXd values;          // T x d
    std::vector<std::string> names;  // d labels

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }

    /// Throws if names/values are inconsistent or values contain NaN/Inf.
    void validate() const;

    /// Panel restricted to the named columns, in the requested order.
    TimeSeriesPanel select(const std::vector<std::string>& columns) const;
};

}  // namespace localvar
