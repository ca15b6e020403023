#include "localvar/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace localvar {

std::string TimeAxis::label(Eigen::Index i) const {
    if (kind == Kind::Index) {
        return std::to_string(start_index + static_cast<long>(i));
    }
    long months = (start_year * 12L + (start_month - 1)) + static_cast<long>(i);
    long year = months / 12;
    long month = months % 12 + 1;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04ld-%02ld", year, month);
    return buf;
}

void TimeSeriesPanel::validate() const {
    if (values.cols() < 1) {
        throw BadDimension("panel must have at least one column");
    }
    if (static_cast<Eigen::Index>(names.size()) != values.cols()) {
        throw BadDimension("panel has " + std::to_string(names.size()) +
                           " names for " + std::to_string(values.cols()) +
                           " columns");
    }
    if (!values.allFinite()) {
        throw NonNumeric("panel contains non-finite values");
    }
}

TimeSeriesPanel TimeSeriesPanel::select(
    const std::vector<std::string>& columns) const {
    TimeSeriesPanel out;
    out.axis = axis;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(columns.size()));
    out.names = columns;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        auto it = std::find(names.begin(), names.end(), columns[j]);
        if (it == names.end()) {
            throw ParseError("unknown column '" + columns[j] + "'");
        }
        out.values.col(static_cast<Eigen::Index>(j)) =
            values.col(it - names.begin());
    }
    return out;
}

}  // namespace localvar
