#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "localvar/adaptive.hpp"
#include "localvar/calibrate.hpp"
#include "localvar/var.hpp"

namespace localvar {
namespace scenarios {

/// Pre-break / post-break parameter pair of the bivariate simulation study.
/// The innovation covariance is not part of the published coefficient set
/// and is a documented project default on an EPU-like scale.
VarParams params_2d_pre();
VarParams params_2d_post();

/// Four-dimensional analogs: two copies of the bivariate blocks coupled by
/// 0.05 cross-block lag coefficients. Project defaults, stability-checked.
VarParams params_4d_pre();
VarParams params_4d_post();

enum class ScenarioKind { SingleBreak, DoubleBreak, SmoothBreak };

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::SingleBreak;
    VarParams theta_a;
    VarParams theta_b;
    std::vector<Eigen::Index> segments;  // per-kind template, see make()
    int mix_steps = 0;                   // smooth-break only
    int n_replications = 250;
    std::uint64_t seed = 0;
    Eigen::Index burn_in = 100;

    /// Canonical spec for a kind: single 84/62, double 84/15/47,
    /// smooth 96/16/88 with 16 interpolation steps.
    static ScenarioSpec make(ScenarioKind kind, VarParams theta_a,
                             VarParams theta_b, std::uint64_t seed = 0,
                             int n_replications = 250);

    Eigen::Index total_length() const;

    /// 0-based panel indices of the first observation of each post-change
    /// segment (break onsets; the smooth scenario reports transition
    /// start and end).
    std::vector<Eigen::Index> break_points() const;

    void validate() const;
};

/// Elementwise linear blend (1 - w) * a + w * b of all parameters.
VarParams interpolate_params(const VarParams& a, const VarParams& b, double w);

/// One replication path; regime changes keep the lagged state continuous.
TimeSeriesPanel generate_scenario(const ScenarioSpec& spec, int replication);

struct StudyVariant {
    std::string name;
    bool optimal_rho = false;  // per-replication MAPE selection
    double rho = 0.5;          // fixed-rho variants
    bool restricted = true;
};

/// The four specifications reported per scenario.
std::vector<StudyVariant> default_variants();

struct StepDistribution {
    std::vector<double> values;  // per-tau medians over replications
    std::array<double, 5> quantiles() const;  // 5/25/50/75/95 percent
};

struct VariantSummary {
    std::string name;
    std::vector<double> mean_k;
    std::vector<double> median_k;
    // statistic at the step after the accepted interval, per tau
    std::vector<double> lr_median, lr_q05, lr_q95;
    // test-statistic distributions per tested step, split by the known
    // homogeneous / non-homogeneous tau ranges; one point per tau, the
    // median over replications
    std::map<int, StepDistribution> homogeneous, heterogeneous;
    // fraction of homogeneous-range per-tau median statistics below the
    // final-step zeta
    double homogeneous_below_final_zeta = 0.0;
    std::vector<double> chosen_rho;  // per replication (optimal variants)
};

struct ReplicationSummary {
    std::vector<Eigen::Index> taus;  // absolute 0-based panel indices
    // 1-based tau ranges, relative to the first evaluated tau
    std::pair<int, int> homogeneous_range;
    std::pair<int, int> heterogeneous_range;
    double final_zeta = 0.0;
    std::vector<VariantSummary> variants;
};

struct StudyConfig {
    IntervalGrid grid = IntervalGrid::default_grid();
    double r = 0.5;
    int p = 1;
    int calibration_samples = 10000;
    std::uint64_t calibration_seed = 7;
    std::vector<double> rho_grid;  // candidates for optimal-rho variants
    int workers = 1;
};

/// Full replication study: calibrates per rho against theta_a as the
/// homogeneous hypothetical, runs every variant on every replication and
/// aggregates per-tau statistics.
ReplicationSummary run_study(const ScenarioSpec& spec,
                             const std::vector<StudyVariant>& variants,
                             const StudyConfig& config);

}  // namespace scenarios
}  // namespace localvar
