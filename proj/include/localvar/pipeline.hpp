#pragma once

#include <optional>
#include <string>
#include <vector>

#include "localvar/adaptive.hpp"
#include "localvar/calibrate.hpp"
#include "localvar/crisis.hpp"
#include "localvar/fevd.hpp"
#include "localvar/grid.hpp"
#include "localvar/panel.hpp"

namespace localvar {

/// Full configuration of an end-to-end run. Every field maps to a CLI flag
/// and to a key in the flat key=value config file.
struct RunConfig {
    std::string input_path;
    std::vector<std::string> columns;  // empty keeps all
    int p = 1;
    IntervalGrid grid = IntervalGrid::default_grid();
    double r = 0.5;
    bool rho_search = false;           // MAPE grid search instead of fixed rho
    double rho = 0.5;
    std::vector<double> rho_grid;      // empty = default 0.01..1.00
    int horizon = 12;
    std::uint64_t seed = 0;
    int calibration_samples = 10000;
    Eigen::Index burn_in = 100;
    std::string out_dir = ".";
    std::string calib_cache;           // empty disables the cache
    std::vector<Eigen::Index> rolling_windows;  // empty = {m_1, m_K}
    bool joint = false;                // one d-dim VAR instead of pairs
    bool restrict_jumps = true;
    int workers = 1;

    void validate() const;

    /// Round-trippable flat key=value form.
    std::string to_key_values() const;
    static RunConfig from_key_values(const std::string& text);
};

/// Exit codes of the CLI contract.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDataError = 3,
    kNumericalFailure = 4,
};

struct PipelineResult {
    std::vector<std::string> written_files;
    int flagged_cells = 0;
    Eigen::Index discarded_burn_in = 0;
    std::string manifest_json;
};

/// calibrate -> adaptive detection (+ restriction) -> crisis indicator ->
/// pairwise LHI spillover + rolling-window baselines; writes
/// intervals.csv, crisis.csv, spillover_lhi.csv, spillover_rw_{w}.csv and
/// run_manifest.json into out_dir.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace localvar
