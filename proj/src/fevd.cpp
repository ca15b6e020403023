#include "localvar/fevd.hpp"

#include <cmath>
#include <limits>

namespace localvar {

VmaCoefficients var_to_vma(const VarParams& params, int horizon) {
    if (horizon < 1) {
        throw ConfigError("horizon must be >= 1");
    }
    if (!is_stable(params)) {
        throw UnstableParams("VAR not stable, no VMA representation");
    }
    const Eigen::Index d = params.dim();
    const int p = params.order();
    VmaCoefficients vma;
    vma.horizon = horizon;
    vma.matrices.reserve(horizon);
    vma.matrices.push_back(Eigen::MatrixXd::Identity(d, d));
    for (int u = 1; u < horizon; ++u) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
        for (int s = 1; s <= p && s <= u; ++s) {
            a.noalias() += params.lag_coeffs[s - 1] * vma.matrices[u - s];
        }
        vma.matrices.push_back(std::move(a));
    }
    return vma;
}

SpilloverTable gfevd(const VarParams& params, int horizon, bool sigma_as_sd) {
    const VmaCoefficients vma = var_to_vma(params, horizon);
    const Eigen::Index d = params.dim();
    const Eigen::MatrixXd& sigma = params.noise_cov;

    Eigen::MatrixXd num = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd den = Eigen::VectorXd::Zero(d);
    for (const auto& a : vma.matrices) {
        const Eigen::MatrixXd as = a * sigma;
        num.array() += as.array().square();                 // (e_i' A_h S e_j)^2
        den += (as * a.transpose()).diagonal();             // e_i' A_h S A_h' e_i
    }

    SpilloverTable table;
    table.horizon = horizon;
    for (Eigen::Index i = 0; i < d; ++i) {
        table.names.push_back("y" + std::to_string(i + 1));
    }
    table.raw.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double norm = sigma_as_sd ? std::sqrt(sigma(j, j)) : sigma(j, j);
            table.raw(i, j) = num(i, j) / (norm * den(i));
        }
    }

    table.normalized.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double row_sum = table.raw.row(i).sum();
        if (row_sum <= 0.0 || !std::isfinite(row_sum)) {
            throw ZeroVarianceRow("row " + std::to_string(i) +
                                  " of the raw table sums to zero");
        }
        table.normalized.row(i) = table.raw.row(i) / row_sum;
    }

    double off_diag = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i != j) off_diag += table.normalized(i, j);
        }
    }
    table.total = 100.0 * off_diag / static_cast<double>(d);
    return table;
}

PairwiseSpillover pairwise_spillover(const TimeSeriesPanel& panel,
                                     const std::vector<Eigen::Index>& taus,
                                     const std::vector<Eigen::Index>& window_lengths,
                                     int horizon, int p) {
    panel.validate();
    if (panel.dim() < 2) {
        throw BadDimension("pairwise spillover needs at least two series");
    }
    if (taus.size() != window_lengths.size()) {
        throw ConfigError("taus and window lengths must be aligned");
    }

    PairwiseSpillover out;
    out.taus = taus;
    for (int i = 0; i < panel.dim(); ++i) {
        for (int j = i + 1; j < panel.dim(); ++j) {
            out.pairs.emplace_back(i, j);
        }
    }

    // pair panels are materialized once, windows vary per tau
    std::vector<TimeSeriesPanel> pair_panels;
    pair_panels.reserve(out.pairs.size());
    for (const auto& [i, j] : out.pairs) {
        pair_panels.push_back(panel.select({panel.names[i], panel.names[j]}));
    }

    out.cells.resize(taus.size());
    out.average.resize(taus.size());
    out.valid_count.resize(taus.size());
    for (std::size_t t = 0; t < taus.size(); ++t) {
        out.cells[t].resize(out.pairs.size());
        double sum = 0.0;
        int valid = 0;
        for (std::size_t q = 0; q < out.pairs.size(); ++q) {
            SpilloverCell& cell = out.cells[t][q];
            try {
                const VarFit fit = fit_var(pair_panels[q],
                                           Interval{taus[t], window_lengths[t]}, p);
                const SpilloverTable table = gfevd(fit.params, horizon);
                cell.total = table.total;
                cell.ok = true;
                sum += cell.total;
                ++valid;
            } catch (const Error& e) {
                cell.ok = false;
                cell.note = e.what();
            }
        }
        out.valid_count[t] = valid;
        out.average[t] = valid > 0 ? sum / valid
                                   : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace localvar
