#include "localvar/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "localvar/parallel.hpp"
#include "localvar/rng.hpp"

namespace localvar {
namespace scenarios {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return kNan;
    const double pos = q * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - lo;
    return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

// Statistic at the step after the accepted interval: the violating step if
// the search stopped, otherwise the final tested step.
double next_step_stat(const AdaptiveResult& res, const IntervalGrid& grid) {
    const int step = res.stop_k != 0 ? res.stop_k : grid.max_tested();
    const double v = res.lr_trace[step - 2];
    return v;
}

}  // namespace

VarParams params_2d_pre() {
    VarParams params;
    params.intercept = Eigen::Vector2d(29.0, 132.0);
    params.lag_coeffs = {mat2(0.71, 0.08, 0.13, 0.08)};
    params.noise_cov = mat2(25.0, 7.5, 7.5, 16.0);
    return params;
}

VarParams params_2d_post() {
    VarParams params;
    params.intercept = Eigen::Vector2d(31.0, 130.0);
    params.lag_coeffs = {mat2(0.63, 0.00, 0.12, 0.23)};
    params.noise_cov = mat2(25.0, 7.5, 7.5, 16.0);
    return params;
}

namespace {

VarParams embed_4d(const VarParams& block) {
    VarParams params;
    params.intercept.resize(4);
    params.intercept << block.intercept, block.intercept;
    Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(4, 4, 0.05);
    phi.topLeftCorner(2, 2) = block.lag_coeffs[0];
    phi.bottomRightCorner(2, 2) = block.lag_coeffs[0];
    params.lag_coeffs = {phi};
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(4, 4);
    sigma.topLeftCorner(2, 2) = block.noise_cov;
    sigma.bottomRightCorner(2, 2) = block.noise_cov;
    params.noise_cov = sigma;
    return params;
}

}  // namespace

VarParams params_4d_pre() { return embed_4d(params_2d_pre()); }
VarParams params_4d_post() { return embed_4d(params_2d_post()); }

ScenarioSpec ScenarioSpec::make(ScenarioKind kind, VarParams theta_a,
                                VarParams theta_b, std::uint64_t seed,
                                int n_replications) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.theta_a = std::move(theta_a);
    spec.theta_b = std::move(theta_b);
    spec.seed = seed;
    spec.n_replications = n_replications;
    switch (kind) {
        case ScenarioKind::SingleBreak:
            spec.segments = {84, 62};
            break;
        case ScenarioKind::DoubleBreak:
            spec.segments = {84, 15, 47};
            break;
        case ScenarioKind::SmoothBreak:
            spec.segments = {96, 88};
            spec.mix_steps = 16;
            break;
    }
    spec.validate();
    return spec;
}

Eigen::Index ScenarioSpec::total_length() const {
    Eigen::Index total = mix_steps;
    for (auto s : segments) total += s;
    return total;
}

std::vector<Eigen::Index> ScenarioSpec::break_points() const {
    switch (kind) {
        case ScenarioKind::SingleBreak:
            return {segments[0]};
        case ScenarioKind::DoubleBreak:
            return {segments[0], segments[0] + segments[1]};
        case ScenarioKind::SmoothBreak:
            return {segments[0], segments[0] + mix_steps};
    }
    return {};
}

void ScenarioSpec::validate() const {
    theta_a.validate();
    theta_b.validate();
    if (theta_a.dim() != theta_b.dim() || theta_a.order() != theta_b.order()) {
        throw BadDimension("scenario parameter sets must match in shape");
    }
    const std::size_t expected =
        kind == ScenarioKind::DoubleBreak ? 3 : 2;
    if (segments.size() != expected) {
        throw ConfigError("segment template does not match scenario kind");
    }
    for (auto s : segments) {
        if (s < 1) throw ConfigError("segment lengths must be positive");
    }
    if ((kind == ScenarioKind::SmoothBreak) != (mix_steps > 0)) {
        throw ConfigError("mix_steps only valid for the smooth-break kind");
    }
    if (n_replications < 1) {
        throw ConfigError("need at least one replication");
    }
}

VarParams interpolate_params(const VarParams& a, const VarParams& b,
                             double w) {
    VarParams out;
    out.intercept = (1.0 - w) * a.intercept + w * b.intercept;
    for (int s = 0; s < a.order(); ++s) {
        out.lag_coeffs.push_back((1.0 - w) * a.lag_coeffs[s] +
                                 w * b.lag_coeffs[s]);
    }
    out.noise_cov = (1.0 - w) * a.noise_cov + w * b.noise_cov;
    return out;
}

TimeSeriesPanel generate_scenario(const ScenarioSpec& spec, int replication) {
    spec.validate();
    std::vector<std::pair<VarParams, Eigen::Index>> regimes;
    switch (spec.kind) {
        case ScenarioKind::SingleBreak:
            regimes = {{spec.theta_a, spec.segments[0]},
                       {spec.theta_b, spec.segments[1]}};
            break;
        case ScenarioKind::DoubleBreak:
            regimes = {{spec.theta_a, spec.segments[0]},
                       {spec.theta_b, spec.segments[1]},
                       {spec.theta_a, spec.segments[2]}};
            break;
        case ScenarioKind::SmoothBreak: {
            regimes.emplace_back(spec.theta_a, spec.segments[0]);
            for (int i = 1; i <= spec.mix_steps; ++i) {
                const double w =
                    static_cast<double>(i) / spec.mix_steps;
                VarParams mix =
                    interpolate_params(spec.theta_a, spec.theta_b, w);
                if (!is_stable(mix)) {
                    throw UnstableParams(
                        "interpolated parameters unstable at step " +
                        std::to_string(i));
                }
                regimes.emplace_back(std::move(mix), 1);
            }
            regimes.emplace_back(spec.theta_b, spec.segments[1]);
            break;
        }
    }
    return simulate_var_path(regimes, spec.burn_in,
                             derive_seed(spec.seed, replication));
}

std::vector<StudyVariant> default_variants() {
    return {
        {"optimal", true, 0.0, true},
        {"rho_0.088", false, 0.088, true},
        {"rho_0.5", false, 0.5, true},
        {"optimal_unrestricted", true, 0.0, false},
    };
}

std::array<double, 5> StepDistribution::quantiles() const {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    return {quantile_sorted(sorted, 0.05), quantile_sorted(sorted, 0.25),
            quantile_sorted(sorted, 0.50), quantile_sorted(sorted, 0.75),
            quantile_sorted(sorted, 0.95)};
}

namespace {

std::pair<std::pair<int, int>, std::pair<int, int>> split_ranges(
    ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::SingleBreak:
            return {{1, 38}, {39, 84}};
        case ScenarioKind::DoubleBreak:
            return {{1, 38}, {39, 100}};
        case ScenarioKind::SmoothBreak:
            return {{1, 70}, {71, 100}};
    }
    return {{1, 0}, {1, 0}};
}

}  // namespace

ReplicationSummary run_study(const ScenarioSpec& spec,
                             const std::vector<StudyVariant>& variants,
                             const StudyConfig& config) {
    spec.validate();
    const IntervalGrid& grid = config.grid;
    const int p = config.p;
    const Eigen::Index first_tau = first_admissible_tau(grid, p);
    const Eigen::Index total = spec.total_length();
    if (first_tau >= total) {
        throw InsufficientHistory("scenario shorter than the longest window");
    }
    const std::size_t n_tau = static_cast<std::size_t>(total - first_tau);

    // critical values are shared across replications; calibrate per rho
    std::map<double, CriticalValues> cv_by_rho;
    std::mutex cv_mutex;
    const auto calibrated = [&](double rho) -> const CriticalValues& {
        std::lock_guard<std::mutex> lock(cv_mutex);
        auto it = cv_by_rho.find(rho);
        if (it == cv_by_rho.end()) {
            CalibrationConfig cc;
            cc.theta_star = spec.theta_a;
            cc.grid = grid;
            cc.r = config.r;
            cc.rho = rho;
            cc.n_samples = config.calibration_samples;
            cc.seed = config.calibration_seed;
            cc.workers = 1;  // already inside the replication loop
            it = cv_by_rho.emplace(rho, calibrate_critical_values(cc)).first;
        }
        return it->second;
    };

    std::vector<double> rho_grid = config.rho_grid;
    if (rho_grid.empty()) rho_grid = {0.088, 0.25, 0.5, 0.75, 1.0};
    // pre-calibrate sequentially so worker threads only read the map
    for (double rho : rho_grid) calibrated(rho);
    for (const auto& variant : variants) {
        if (!variant.optimal_rho) calibrated(variant.rho);
    }

    struct RepResult {
        bool ok = false;
        // per variant, per tau
        std::vector<std::vector<int>> k_hat;
        std::vector<std::vector<double>> stat;
        std::vector<std::vector<std::vector<double>>> trace;
        std::vector<double> chosen_rho;
    };
    std::vector<RepResult> reps(spec.n_replications);

    parallel_for(reps.size(), config.workers, [&](std::size_t rep) {
        RepResult& out = reps[rep];
        try {
            const TimeSeriesPanel panel =
                generate_scenario(spec, static_cast<int>(rep));
            out.k_hat.resize(variants.size());
            out.stat.resize(variants.size());
            out.trace.resize(variants.size());
            out.chosen_rho.assign(variants.size(), kNan);
            for (std::size_t v = 0; v < variants.size(); ++v) {
                const StudyVariant& variant = variants[v];
                double rho = variant.rho;
                if (variant.optimal_rho) {
                    const RhoSelection sel = select_rho(
                        panel, grid, rho_grid, config.r, p,
                        [&](double cand) { return calibrated(cand); },
                        variant.restricted);
                    rho = sel.rho;
                    out.chosen_rho[v] = rho;
                }
                const std::vector<AdaptiveResult> results = adaptive_series(
                    panel, grid, calibrated(rho), config.r, p,
                    variant.restricted);
                out.k_hat[v].reserve(n_tau);
                out.stat[v].reserve(n_tau);
                for (const auto& res : results) {
                    out.k_hat[v].push_back(res.k_hat);
                    out.stat[v].push_back(next_step_stat(res, grid));
                    out.trace[v].push_back(res.lr_trace);
                }
            }
            out.ok = true;
        } catch (const Error&) {
            out.ok = false;
        }
    });

    std::size_t failed = 0;
    for (const auto& rep : reps) {
        if (!rep.ok) ++failed;
    }
    if (failed * 50 > reps.size()) {  // > 2%
        throw NonConvergence(std::to_string(failed) +
                             " replications failed, study aborted");
    }

    ReplicationSummary summary;
    for (Eigen::Index tau = first_tau; tau < total; ++tau) {
        summary.taus.push_back(tau);
    }
    std::tie(summary.homogeneous_range, summary.heterogeneous_range) =
        split_ranges(spec.kind);
    // the final-step threshold of the most specific fixed-rho variant; fall
    // back to the first calibrated rho
    const CriticalValues& ref_cv = cv_by_rho.begin()->second;
    summary.final_zeta = ref_cv.at(grid.max_tested());

    for (std::size_t v = 0; v < variants.size(); ++v) {
        VariantSummary vs;
        vs.name = variants[v].name;
        vs.mean_k.assign(n_tau, kNan);
        vs.median_k.assign(n_tau, kNan);
        vs.lr_median.assign(n_tau, kNan);
        vs.lr_q05.assign(n_tau, kNan);
        vs.lr_q95.assign(n_tau, kNan);
        for (std::size_t t = 0; t < n_tau; ++t) {
            std::vector<double> ks, stats;
            for (const auto& rep : reps) {
                if (!rep.ok) continue;
                ks.push_back(rep.k_hat[v][t]);
                stats.push_back(rep.stat[v][t]);
            }
            double sum = 0.0;
            for (double k : ks) sum += k;
            vs.mean_k[t] = sum / ks.size();
            vs.median_k[t] = quantile(ks, 0.5);
            vs.lr_median[t] = quantile(stats, 0.5);
            vs.lr_q05[t] = quantile(stats, 0.05);
            vs.lr_q95[t] = quantile(stats, 0.95);
        }

        const auto in_range = [](std::size_t rel, std::pair<int, int> range) {
            return static_cast<int>(rel) >= range.first &&
                   static_cast<int>(rel) <= range.second;
        };
        // step distributions collect one point per tau: the median of the
        // step statistic over replications (traces truncated at a stop
        // contribute only the steps they performed)
        long homo_n = 0, homo_below = 0;
        for (std::size_t t = 0; t < n_tau; ++t) {
            const std::size_t rel = t + 1;  // 1-based within evaluation
            const bool homo = in_range(rel, summary.homogeneous_range);
            const bool hetero =
                !homo && in_range(rel, summary.heterogeneous_range);
            if (!homo && !hetero) continue;
            auto& dist = homo ? vs.homogeneous : vs.heterogeneous;
            for (int k = 2; k <= grid.max_tested(); ++k) {
                std::vector<double> values;
                for (const auto& rep : reps) {
                    if (!rep.ok) continue;
                    const double value = rep.trace[v][t][k - 2];
                    if (std::isfinite(value)) values.push_back(value);
                }
                if (values.empty()) continue;
                const double med = quantile(values, 0.5);
                dist[k].values.push_back(med);
                if (homo) {
                    ++homo_n;
                    if (med < summary.final_zeta) ++homo_below;
                }
            }
        }
        if (variants[v].optimal_rho) {
            for (const auto& rep : reps) {
                if (rep.ok) vs.chosen_rho.push_back(rep.chosen_rho[v]);
            }
        }
        vs.homogeneous_below_final_zeta =
            homo_n > 0 ? static_cast<double>(homo_below) / homo_n : kNan;
        summary.variants.push_back(std::move(vs));
    }
    return summary;
}

}  // namespace scenarios
}  // namespace localvar
