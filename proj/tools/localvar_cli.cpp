#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "localvar/adaptive.hpp"
#include "localvar/calibrate.hpp"
#include "localvar/crisis.hpp"
#include "localvar/fevd.hpp"
#include "localvar/io.hpp"
#include "localvar/pipeline.hpp"
#include "localvar/scenarios.hpp"

namespace {

using namespace localvar;
using nlohmann::json;

IntervalGrid parse_grid(const std::string& text) {
    if (text.empty() || text == "default") return IntervalGrid::default_grid();
    if (text == "literature") return IntervalGrid::literature_grid();
    std::vector<Eigen::Index> lengths;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            lengths.push_back(std::stol(item));
        } catch (const std::exception&) {
            throw ConfigError("bad grid entry '" + item + "'");
        }
    }
    return IntervalGrid(std::move(lengths));
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad numeric list entry '" + item + "'");
        }
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string cache_dir_from(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    const char* env = std::getenv("LOCALVAR_CALIB_CACHE");
    return env ? env : "";
}

std::string num(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void print_summary(const json& summary) {
    std::cout << summary.dump(2) << std::endl;
}

// Shared model options; every subcommand starts from RunConfig defaults,
// a --config file overrides them, explicit flags override both.
struct CommonOpts {
    RunConfig config;
    std::string config_path;
    std::string grid_text;
    std::string rho_grid_text;
    std::string cache_flag;

    void attach(CLI::App* cmd, bool with_input) {
        cmd->add_option("--config", config_path, "key=value config file");
        if (with_input) {
            cmd->add_option("--input", config.input_path, "input CSV panel");
            cmd->add_option("--columns", config.columns,
                            "columns to keep, in order")
                ->delimiter(',');
        }
        cmd->add_option("-p,--lag-order", config.p, "VAR lag order");
        cmd->add_option("--grid", grid_text,
                        "'default', 'literature' or a comma list");
        cmd->add_option("--r", config.r, "LR power");
        cmd->add_option("--rho", config.rho, "calibration tuning parameter");
        cmd->add_option("--horizon", config.horizon, "FEVD horizon");
        cmd->add_option("--seed", config.seed, "master RNG seed");
        cmd->add_option("-N,--samples", config.calibration_samples,
                        "Monte-Carlo calibration samples");
        cmd->add_option("--burn-in", config.burn_in, "simulation burn-in");
        cmd->add_option("--out", config.out_dir, "output file or directory");
        cmd->add_option("--calib-cache", cache_flag,
                        "critical-value cache directory");
        cmd->add_option("--workers", config.workers, "worker threads");
    }

    /// Resolve the precedence: defaults < config file < explicit flags.
    void finalize(CLI::App* cmd) {
        if (!config_path.empty()) {
            RunConfig from_file = RunConfig::from_key_values(read_file(config_path));
            // keep flag-provided values
            RunConfig flags = config;
            config = from_file;
            const auto keep = [&](const char* name, auto member) {
                if (cmd->count(name)) config.*member = flags.*member;
            };
            keep("--input", &RunConfig::input_path);
            keep("--columns", &RunConfig::columns);
            keep("--lag-order", &RunConfig::p);
            keep("--r", &RunConfig::r);
            keep("--rho", &RunConfig::rho);
            keep("--horizon", &RunConfig::horizon);
            keep("--seed", &RunConfig::seed);
            keep("--samples", &RunConfig::calibration_samples);
            keep("--burn-in", &RunConfig::burn_in);
            keep("--out", &RunConfig::out_dir);
            keep("--workers", &RunConfig::workers);
        }
        if (!grid_text.empty()) config.grid = parse_grid(grid_text);
        if (!rho_grid_text.empty()) config.rho_grid = parse_doubles(rho_grid_text);
        if (!cache_flag.empty() || !cache_dir_from("").empty()) {
            config.calib_cache = cache_dir_from(cache_flag);
        }
    }
};

CriticalValues calibrate_from(const VarParams& theta, const CommonOpts& opts) {
    CalibrationConfig cc;
    cc.theta_star = theta;
    cc.grid = opts.config.grid;
    cc.r = opts.config.r;
    cc.rho = opts.config.rho;
    cc.n_samples = opts.config.calibration_samples;
    cc.seed = opts.config.seed;
    cc.burn_in = opts.config.burn_in;
    cc.workers = opts.config.workers;
    return opts.config.calib_cache.empty()
               ? calibrate_critical_values(cc)
               : calibrate_cached(cc, opts.config.calib_cache);
}

std::string intervals_csv(const TimeSeriesPanel& panel,
                          const std::vector<AdaptiveResult>& results,
                          const IntervalGrid& grid, const std::string& label) {
    std::ostringstream out;
    out << "date,pair,k_hat,m_hat";
    for (int k = 2; k <= grid.max_tested(); ++k) out << ",lr_k" << k;
    out << ",restricted\n";
    for (const auto& res : results) {
        out << panel.axis.label(res.tau) << ',' << label << ',' << res.k_hat
            << ',' << res.m_hat;
        for (double v : res.lr_trace) out << ',' << num(v);
        out << ',' << (res.restricted ? 1 : 0) << '\n';
    }
    return out.str();
}

int cmd_calibrate(const CommonOpts& opts, const std::string& theta_path) {
    if (theta_path.empty()) {
        throw ConfigError("calibrate needs --theta params.json");
    }
    const CriticalValues cv = calibrate_from(load_params(theta_path), opts);
    const std::string text = critical_values_to_json(cv);
    json summary;
    summary["command"] = "calibrate";
    summary["fingerprint"] = cv.fingerprint;
    summary["rho"] = cv.rho;
    for (const auto& [k, z] : cv.zeta) summary["zeta"][std::to_string(k)] = z;
    for (const auto& [k, rb] : cv.risk_bounds) {
        summary["risk_bounds"][std::to_string(k)] = rb;
    }
    if (!opts.config.out_dir.empty() && opts.config.out_dir != ".") {
        write_text_file(opts.config.out_dir, text);
        summary["out"] = opts.config.out_dir;
    } else {
        std::cout << text;
    }
    print_summary(summary);
    return kOk;
}

int cmd_detect(const CommonOpts& opts, const std::string& theta_path,
               const std::string& critvals_path, bool no_restrict) {
    if (opts.config.input_path.empty()) {
        throw ConfigError("detect needs --input");
    }
    const TimeSeriesPanel panel =
        ingest_csv(opts.config.input_path, opts.config.columns);
    CriticalValues cv;
    if (!critvals_path.empty()) {
        cv = critical_values_from_json(read_file(critvals_path));
    } else if (!theta_path.empty()) {
        cv = calibrate_from(load_params(theta_path), opts);
    } else {
        throw ConfigError(
            "no critical values: pass --critvals or --theta, or run "
            "'localvar calibrate' first");
    }
    if (!(cv.grid == opts.config.grid)) {
        throw ConfigError("critical values calibrated for a different grid");
    }
    const auto results = adaptive_series(panel, opts.config.grid, cv,
                                         opts.config.r, opts.config.p,
                                         !no_restrict);
    std::string label;
    for (const auto& name : panel.names) {
        if (!label.empty()) label += '-';
        label += name;
    }
    const std::string csv =
        intervals_csv(panel, results, opts.config.grid, label);
    json summary;
    summary["command"] = "detect";
    summary["n_taus"] = results.size();
    summary["first_tau"] = panel.axis.label(results.front().tau);
    summary["last_tau"] = panel.axis.label(results.back().tau);
    int restricted = 0;
    for (const auto& res : results) restricted += res.restricted ? 1 : 0;
    summary["restricted_taus"] = restricted;
    if (!opts.config.out_dir.empty() && opts.config.out_dir != ".") {
        write_text_file(opts.config.out_dir, csv);
        summary["out"] = opts.config.out_dir;
    } else {
        std::cout << csv;
    }
    print_summary(summary);
    return kOk;
}

int cmd_spillover(const CommonOpts& opts, const std::string& params_path,
                  Eigen::Index window, bool sigma_as_sd) {
    json summary;
    summary["command"] = "spillover";
    if (!params_path.empty()) {
        const SpilloverTable table =
            gfevd(load_params(params_path), opts.config.horizon, sigma_as_sd);
        summary["total"] = table.total;
        summary["horizon"] = table.horizon;
        const std::string csv = spillover_table_csv(table);
        if (!opts.config.out_dir.empty() && opts.config.out_dir != ".") {
            write_text_file(opts.config.out_dir, csv);
            summary["out"] = opts.config.out_dir;
        } else {
            std::cout << csv;
        }
        print_summary(summary);
        return kOk;
    }
    if (opts.config.input_path.empty()) {
        throw ConfigError("spillover needs --params or --input");
    }
    if (window < 2) {
        throw ConfigError("rolling spillover needs --window");
    }
    const TimeSeriesPanel panel =
        ingest_csv(opts.config.input_path, opts.config.columns);
    std::vector<Eigen::Index> taus;
    for (Eigen::Index tau = window + opts.config.p - 1; tau < panel.rows();
         ++tau) {
        taus.push_back(tau);
    }
    if (taus.empty()) {
        throw InsufficientHistory("window longer than the panel");
    }
    const std::vector<Eigen::Index> windows(taus.size(), window);
    const PairwiseSpillover sp = pairwise_spillover(
        panel, taus, windows, opts.config.horizon, opts.config.p);
    std::ostringstream out;
    out << "date";
    for (const auto& [i, j] : sp.pairs) {
        out << ',' << panel.names[i] << '-' << panel.names[j];
    }
    out << ",average\n";
    int flagged = 0;
    for (std::size_t t = 0; t < sp.taus.size(); ++t) {
        out << panel.axis.label(sp.taus[t]);
        for (const auto& cell : sp.cells[t]) {
            out << ',' << (cell.ok ? num(cell.total) : "");
            flagged += cell.ok ? 0 : 1;
        }
        out << ',' << num(sp.average[t]) << '\n';
    }
    summary["window"] = static_cast<long>(window);
    summary["pairs"] = sp.pairs.size();
    summary["flagged_cells"] = flagged;
    if (!opts.config.out_dir.empty() && opts.config.out_dir != ".") {
        write_text_file(opts.config.out_dir, out.str());
        summary["out"] = opts.config.out_dir;
    } else {
        std::cout << out.str();
    }
    print_summary(summary);
    return kOk;
}

int cmd_crisis(const CommonOpts& opts, const std::string& intervals_path,
               int k_max) {
    if (intervals_path.empty()) {
        throw ConfigError("crisis needs --intervals (output of detect/run)");
    }
    std::istringstream in(read_file(intervals_path));
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty intervals file");
    }
    // columns: date,pair,k_hat,...
    std::vector<std::string> dates;
    std::map<std::string, std::size_t> date_index;
    std::map<std::string, std::vector<int>> by_pair;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string date, pair, k_text;
        if (!std::getline(ss, date, ',') || !std::getline(ss, pair, ',') ||
            !std::getline(ss, k_text, ',')) {
            throw ParseError("intervals line " + std::to_string(line_no) +
                             " is too short");
        }
        int k = 0;
        try {
            k = std::stoi(k_text);
        } catch (const std::exception&) {
            throw NonNumeric("bad k_hat on line " + std::to_string(line_no));
        }
        if (!date_index.count(date)) {
            date_index[date] = dates.size();
            dates.push_back(date);
        }
        auto& series = by_pair[pair];
        series.resize(dates.size(), 0);
        if (series.size() < dates.size()) series.resize(dates.size(), 0);
        series[date_index[date]] = k;
    }
    std::map<std::pair<int, int>, std::vector<int>> k_hats;
    std::vector<std::string> pair_names;
    int id = 0;
    for (auto& [pair, series] : by_pair) {
        series.resize(dates.size(), 0);
        k_hats[{id, id}] = series;
        pair_names.push_back(pair);
        ++id;
    }
    const CrisisSeries crisis = crisis_series(k_hats, k_max);
    std::ostringstream out;
    out << "date";
    for (const auto& name : pair_names) out << ",CI_" << name;
    out << ",global_mean,global_median,coverage\n";
    for (std::size_t t = 0; t < dates.size(); ++t) {
        out << dates[t];
        for (const auto& [pair, series] : crisis.per_pair) {
            out << ',' << num(series[t]);
        }
        out << ',' << num(crisis.global_mean[t]) << ','
            << num(crisis.global_median[t]) << ',' << num(crisis.coverage[t])
            << '\n';
    }
    json summary;
    summary["command"] = "crisis";
    summary["pairs"] = pair_names.size();
    summary["k_max"] = k_max;
    summary["n_taus"] = dates.size();
    if (!opts.config.out_dir.empty() && opts.config.out_dir != ".") {
        write_text_file(opts.config.out_dir, out.str());
        summary["out"] = opts.config.out_dir;
    } else {
        std::cout << out.str();
    }
    print_summary(summary);
    return kOk;
}

int cmd_simulate(const CommonOpts& opts, int scenario, int reps,
                 int replication) {
    namespace sc = localvar::scenarios;
    if (scenario < 1 || scenario > 3) {
        throw ConfigError("--scenario must be 1, 2 or 3");
    }
    const auto kind = scenario == 1   ? sc::ScenarioKind::SingleBreak
                      : scenario == 2 ? sc::ScenarioKind::DoubleBreak
                                      : sc::ScenarioKind::SmoothBreak;
    sc::ScenarioSpec spec =
        sc::ScenarioSpec::make(kind, sc::params_2d_pre(), sc::params_2d_post(),
                               opts.config.seed, reps > 0 ? reps : 1);
    spec.burn_in = opts.config.burn_in;

    json summary;
    summary["command"] = "simulate";
    summary["scenario"] = scenario;

    if (reps <= 0) {
        const TimeSeriesPanel path = sc::generate_scenario(spec, replication);
        std::ostringstream out;
        out << "t";
        for (const auto& name : path.names) out << ',' << name;
        out << '\n';
        for (Eigen::Index t = 0; t < path.rows(); ++t) {
            out << path.axis.label(t);
            for (Eigen::Index c = 0; c < path.dim(); ++c) {
                out << ',' << num(path.values(t, c));
            }
            out << '\n';
        }
        summary["replication"] = replication;
        summary["length"] = static_cast<long>(path.rows());
        if (!opts.config.out_dir.empty() && opts.config.out_dir != ".") {
            write_text_file(opts.config.out_dir, out.str());
            summary["out"] = opts.config.out_dir;
        } else {
            std::cout << out.str();
        }
        print_summary(summary);
        return kOk;
    }

    sc::StudyConfig study;
    study.grid = opts.config.grid;
    study.r = opts.config.r;
    study.p = opts.config.p;
    study.calibration_samples = opts.config.calibration_samples;
    study.rho_grid = opts.config.rho_grid;
    study.workers = opts.config.workers;
    const sc::ReplicationSummary result =
        sc::run_study(spec, sc::default_variants(), study);

    namespace fs = std::filesystem;
    const fs::path out_dir =
        opts.config.out_dir.empty() ? "." : opts.config.out_dir;
    fs::create_directories(out_dir);
    std::vector<std::string> files;
    for (const auto& variant : result.variants) {
        std::ostringstream out;
        out << "tau,mean_k,median_k,lr_median,lr_q05,lr_q95\n";
        for (std::size_t t = 0; t < result.taus.size(); ++t) {
            out << static_cast<long>(result.taus[t]) << ','
                << num(variant.mean_k[t]) << ',' << num(variant.median_k[t])
                << ',' << num(variant.lr_median[t]) << ','
                << num(variant.lr_q05[t]) << ',' << num(variant.lr_q95[t])
                << '\n';
        }
        const std::string file = "study_" + variant.name + ".csv";
        write_text_file((out_dir / file).string(), out.str());
        files.push_back(file);
        summary["below_final_zeta"][variant.name] =
            variant.homogeneous_below_final_zeta;
    }
    {
        std::ostringstream out;
        out << "variant,step,range,q05,q25,q50,q75,q95\n";
        for (const auto& variant : result.variants) {
            const auto dump = [&](const char* range,
                                  const std::map<int, sc::StepDistribution>& by_step) {
                for (const auto& [k, dist] : by_step) {
                    const auto q = dist.quantiles();
                    out << variant.name << ',' << k << ',' << range;
                    for (double v : q) out << ',' << num(v);
                    out << '\n';
                }
            };
            dump("homogeneous", variant.homogeneous);
            dump("heterogeneous", variant.heterogeneous);
        }
        write_text_file((out_dir / "study_steps.csv").string(), out.str());
        files.push_back("study_steps.csv");
    }
    summary["replications"] = reps;
    summary["final_zeta"] = result.final_zeta;
    summary["files"] = files;
    summary["out"] = out_dir.string();
    print_summary(summary);
    return kOk;
}

int cmd_rho_select(const CommonOpts& opts, bool no_restrict) {
    if (opts.config.input_path.empty()) {
        throw ConfigError("rho-select needs --input");
    }
    const TimeSeriesPanel panel =
        ingest_csv(opts.config.input_path, opts.config.columns);
    const VarFit full = fit_var(
        panel, Interval{panel.rows() - 1, panel.rows() - opts.config.p},
        opts.config.p);
    const auto engine = [&](double rho) {
        CommonOpts local = opts;
        local.config.rho = rho;
        return calibrate_from(full.params, local);
    };
    const std::vector<double> rho_grid =
        opts.config.rho_grid.empty() ? default_rho_grid() : opts.config.rho_grid;
    const RhoSelection sel =
        select_rho(panel, opts.config.grid, rho_grid, opts.config.r,
                   opts.config.p, engine, !no_restrict);
    std::ostringstream out;
    out << "rho,mape,skipped";
    for (int k = 2; k <= opts.config.grid.max_tested(); ++k) {
        out << ",zeta_k" << k;
    }
    out << '\n';
    for (const auto& row : sel.table) {
        out << num(row.rho) << ',' << num(row.mape) << ',' << row.skipped;
        for (const auto& [k, z] : row.zeta) out << ',' << num(z);
        out << '\n';
    }
    json summary;
    summary["command"] = "rho-select";
    summary["rho"] = sel.rho;
    summary["candidates"] = rho_grid.size();
    if (!opts.config.out_dir.empty() && opts.config.out_dir != ".") {
        write_text_file(opts.config.out_dir, out.str());
        summary["out"] = opts.config.out_dir;
    } else {
        std::cout << out.str();
    }
    print_summary(summary);
    return kOk;
}

int cmd_run(const CommonOpts& opts) {
    const PipelineResult result = run_pipeline(opts.config);
    json summary = json::parse(result.manifest_json);
    summary["command"] = "run";
    print_summary(summary);
    return kOk;
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
    if (dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const GapError*>(&e) ||
        dynamic_cast<const NonNumeric*>(&e) ||
        dynamic_cast<const BadDimension*>(&e)) {
        return kDataError;
    }
    return kNumericalFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive local VAR toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string theta_path, critvals_path, intervals_path, params_path;
    bool no_restrict = false, sigma_as_sd = false, rho_search = false;
    bool joint = false;
    Eigen::Index window = 0;
    int scenario = 0, reps = 0, replication = 0;
    int k_max = IntervalGrid::default_grid().max_selectable();
    std::string rolling_text;

    auto* c_cal = app.add_subcommand("calibrate", "Monte-Carlo critical values");
    c_cal->add_option("--theta", theta_path, "VarParams JSON (homogeneous truth)");

    auto* c_det = app.add_subcommand("detect", "adaptive interval detection");
    c_det->add_option("--theta", theta_path, "VarParams JSON to calibrate from");
    c_det->add_option("--critvals", critvals_path, "CriticalValues JSON");
    c_det->add_flag("--no-restrict", no_restrict, "skip the jump restriction");

    auto* c_sp = app.add_subcommand("spillover", "generalized-FEVD spillover");
    c_sp->add_option("--params", params_path, "VarParams JSON (single table)");
    c_sp->add_option("--window", window, "rolling window length (input mode)");
    c_sp->add_flag("--sigma-as-sd", sigma_as_sd,
                   "normalize by sigma_jj as a standard deviation");

    auto* c_cr = app.add_subcommand("crisis", "crisis indicator from intervals");
    c_cr->add_option("--intervals", intervals_path, "intervals.csv from detect");
    c_cr->add_option("--k-max", k_max, "largest selectable step");

    auto* c_sim = app.add_subcommand("simulate", "simulation scenarios");
    c_sim->add_option("--scenario", scenario, "1 single, 2 double, 3 smooth")
        ->required();
    c_sim->add_option("--reps", reps, "replication study size (0: one path)");
    c_sim->add_option("--rep", replication, "replication index (path mode)");

    auto* c_rho = app.add_subcommand("rho-select", "MAPE-based rho search");
    c_rho->add_flag("--no-restrict", no_restrict, "skip the jump restriction");

    auto* c_run = app.add_subcommand("run", "full pipeline");
    c_run->add_flag("--rho-search", rho_search, "per-pair MAPE rho selection");
    c_run->add_flag("--joint", joint, "one joint VAR instead of pairs");
    c_run->add_flag("--no-restrict", no_restrict, "skip the jump restriction");
    c_run->add_option("--rolling-windows", rolling_text,
                      "comma list of baseline window lengths");

    for (CLI::App* cmd : {c_cal, c_det, c_sp, c_cr, c_sim, c_rho, c_run}) {
        opts.attach(cmd, cmd != c_cal && cmd != c_sim);
        cmd->add_option("--rho-grid", opts.rho_grid_text,
                        "comma list of rho candidates");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : localvar::kConfigError;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        opts.finalize(cmd);
        if (cmd == c_cal) return cmd_calibrate(opts, theta_path);
        if (cmd == c_det) {
            return cmd_detect(opts, theta_path, critvals_path, no_restrict);
        }
        if (cmd == c_sp) return cmd_spillover(opts, params_path, window, sigma_as_sd);
        if (cmd == c_cr) return cmd_crisis(opts, intervals_path, k_max);
        if (cmd == c_sim) return cmd_simulate(opts, scenario, reps, replication);
        if (cmd == c_rho) return cmd_rho_select(opts, no_restrict);
        opts.config.rho_search = rho_search;
        opts.config.joint = joint;
        opts.config.restrict_jumps = !no_restrict;
        if (!rolling_text.empty()) {
            opts.config.rolling_windows.clear();
            for (double v : parse_doubles(rolling_text)) {
                opts.config.rolling_windows.push_back(
                    static_cast<Eigen::Index>(v));
            }
        }
        return cmd_run(opts);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return localvar::kNumericalFailure;
    }
}
