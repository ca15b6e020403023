#include "localvar/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "localvar/io.hpp"
#include "localvar/parallel.hpp"

namespace localvar {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string join_csv(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

std::string num(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    if (p < 1) throw ConfigError("lag order must be >= 1");
    if (r <= 0.0) throw ConfigError("power r must be > 0");
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (calibration_samples < 100) {
        throw ConfigError("calibration sample count below 100");
    }
    for (auto w : rolling_windows) {
        if (w < 2) throw ConfigError("rolling window too short");
    }
}

std::string RunConfig::to_key_values() const {
    std::ostringstream out;
    out << "input=" << input_path << "\n";
    if (!columns.empty()) out << "columns=" << join_csv(columns) << "\n";
    out << "p=" << p << "\n";
    out << "grid=";
    for (std::size_t i = 0; i < grid.lengths().size(); ++i) {
        if (i) out << ',';
        out << grid.lengths()[i];
    }
    out << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "r=%.17g\nrho=%.17g\n", r, rho);
    out << buf;
    out << "rho_search=" << (rho_search ? 1 : 0) << "\n";
    out << "horizon=" << horizon << "\n";
    out << "seed=" << seed << "\n";
    out << "calibration_samples=" << calibration_samples << "\n";
    out << "burn_in=" << burn_in << "\n";
    out << "out_dir=" << out_dir << "\n";
    if (!calib_cache.empty()) out << "calib_cache=" << calib_cache << "\n";
    if (!rolling_windows.empty()) {
        out << "rolling_windows=";
        for (std::size_t i = 0; i < rolling_windows.size(); ++i) {
            if (i) out << ',';
            out << rolling_windows[i];
        }
        out << "\n";
    }
    out << "joint=" << (joint ? 1 : 0) << "\n";
    out << "restrict=" << (restrict_jumps ? 1 : 0) << "\n";
    out << "workers=" << workers << "\n";
    return out.str();
}

RunConfig RunConfig::from_key_values(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not key=value");
        }
        const auto trim = [](std::string s) {
            const auto is_space = [](unsigned char c) {
                return std::isspace(c);
            };
            s.erase(s.begin(),
                    std::find_if_not(s.begin(), s.end(), is_space));
            s.erase(std::find_if_not(s.rbegin(), s.rend(), is_space).base(),
                    s.end());
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "input") {
                config.input_path = value;
            } else if (key == "columns") {
                config.columns.clear();
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ',')) config.columns.push_back(item);
            } else if (key == "p") {
                config.p = std::stoi(value);
            } else if (key == "grid") {
                std::vector<Eigen::Index> lengths;
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    lengths.push_back(std::stol(item));
                }
                config.grid = IntervalGrid(lengths);
            } else if (key == "r") {
                config.r = std::stod(value);
            } else if (key == "rho") {
                config.rho = std::stod(value);
            } else if (key == "rho_search") {
                config.rho_search = value == "1" || value == "true";
            } else if (key == "horizon") {
                config.horizon = std::stoi(value);
            } else if (key == "seed") {
                config.seed = std::stoull(value);
            } else if (key == "calibration_samples") {
                config.calibration_samples = std::stoi(value);
            } else if (key == "burn_in") {
                config.burn_in = std::stol(value);
            } else if (key == "out_dir") {
                config.out_dir = value;
            } else if (key == "calib_cache") {
                config.calib_cache = value;
            } else if (key == "rolling_windows") {
                config.rolling_windows.clear();
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    config.rolling_windows.push_back(std::stol(item));
                }
            } else if (key == "joint") {
                config.joint = value == "1" || value == "true";
            } else if (key == "restrict") {
                config.restrict_jumps = value == "1" || value == "true";
            } else if (key == "workers") {
                config.workers = std::stoi(value);
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError("bad value for '" + key + "'");
        }
    }
    return config;
}

PipelineResult run_pipeline(const RunConfig& config) {
    config.validate();
    namespace fs = std::filesystem;

    TimeSeriesPanel panel = ingest_csv(config.input_path, config.columns);
    const int d = static_cast<int>(panel.dim());
    if (d < 2) {
        throw BadDimension("the pipeline needs at least two series");
    }

    const IntervalGrid& grid = config.grid;
    const int p = config.p;
    const Eigen::Index first_tau = first_admissible_tau(grid, p);
    if (first_tau >= panel.rows()) {
        throw InsufficientHistory("input shorter than the longest window");
    }
    std::vector<Eigen::Index> taus;
    for (Eigen::Index tau = first_tau; tau < panel.rows(); ++tau) {
        taus.push_back(tau);
    }

    // unit groups: every pair, or the joint panel behind --joint
    std::vector<std::vector<std::string>> groups;
    std::vector<std::string> group_names;
    if (config.joint) {
        groups.push_back(panel.names);
        group_names.push_back("joint");
    } else {
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                groups.push_back({panel.names[i], panel.names[j]});
                group_names.push_back(panel.names[i] + "-" + panel.names[j]);
            }
        }
    }

    struct GroupRun {
        std::vector<AdaptiveResult> results;
        double rho = 0.0;
        bool ok = false;
        std::string note;
    };
    std::vector<GroupRun> runs(groups.size());

    parallel_for(groups.size(), config.workers, [&](std::size_t g) {
        GroupRun& run = runs[g];
        try {
            const TimeSeriesPanel sub = panel.select(groups[g]);
            // hypothetical homogeneous truth: the full-sample fit
            const VarFit full =
                fit_var(sub, Interval{sub.rows() - 1, sub.rows() - p}, p);
            if (!is_stable(full.params)) {
                throw UnstableParams("full-sample fit unstable for group " +
                                     group_names[g]);
            }
            const auto engine = [&](double rho) {
                CalibrationConfig cc;
                cc.theta_star = full.params;
                cc.grid = grid;
                cc.r = config.r;
                cc.rho = rho;
                cc.n_samples = config.calibration_samples;
                cc.seed = config.seed;
                cc.burn_in = config.burn_in;
                return config.calib_cache.empty()
                           ? calibrate_critical_values(cc)
                           : calibrate_cached(cc, config.calib_cache);
            };
            double rho = config.rho;
            if (config.rho_search) {
                const std::vector<double> rho_grid = config.rho_grid.empty()
                                                         ? default_rho_grid()
                                                         : config.rho_grid;
                rho = select_rho(sub, grid, rho_grid, config.r, p, engine,
                                 config.restrict_jumps)
                          .rho;
            }
            run.rho = rho;
            run.results = adaptive_series(sub, grid, engine(rho), config.r, p,
                                          config.restrict_jumps);
            run.ok = true;
        } catch (const Error& e) {
            run.ok = false;
            run.note = e.what();
        }
    });

    for (const auto& run : runs) {
        if (!run.ok) {
            throw NonConvergence("group failed: " + run.note);
        }
    }

    PipelineResult result;
    result.discarded_burn_in = first_tau;
    int flagged = 0;

    fs::create_directories(config.out_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(config.out_dir) / name).string();
    };

    // ---- intervals.csv
    {
        std::ostringstream out;
        out << "date,pair,k_hat,m_hat";
        for (int k = 2; k <= grid.max_tested(); ++k) out << ",lr_k" << k;
        out << ",restricted\n";
        for (std::size_t t = 0; t < taus.size(); ++t) {
            for (std::size_t g = 0; g < groups.size(); ++g) {
                const AdaptiveResult& res = runs[g].results[t];
                out << panel.axis.label(taus[t]) << ',' << group_names[g] << ','
                    << res.k_hat << ',' << res.m_hat;
                for (double v : res.lr_trace) out << ',' << num(v);
                out << ',' << (res.restricted ? 1 : 0) << '\n';
            }
        }
        write_text_file(out_path("intervals.csv"), out.str());
        result.written_files.push_back("intervals.csv");
    }

    // ---- crisis.csv
    {
        std::map<std::pair<int, int>, std::vector<int>> k_hats;
        if (config.joint) {
            std::vector<int> ks;
            for (const auto& res : runs[0].results) ks.push_back(res.k_hat);
            k_hats[{0, 0}] = std::move(ks);
        } else {
            std::size_t g = 0;
            for (int i = 0; i < d; ++i) {
                for (int j = i + 1; j < d; ++j, ++g) {
                    std::vector<int> ks;
                    for (const auto& res : runs[g].results) {
                        ks.push_back(res.k_hat);
                    }
                    k_hats[{i, j}] = std::move(ks);
                }
            }
        }
        const CrisisSeries crisis =
            crisis_series(k_hats, grid.max_selectable());
        std::ostringstream out;
        out << "date";
        for (const auto& name : group_names) out << ",CI_" << name;
        out << ",global_mean,global_median,coverage\n";
        for (std::size_t t = 0; t < taus.size(); ++t) {
            out << panel.axis.label(taus[t]);
            for (const auto& [pair, series] : crisis.per_pair) {
                out << ',' << num(series[t]);
            }
            out << ',' << num(crisis.global_mean[t]) << ','
                << num(crisis.global_median[t]) << ','
                << num(crisis.coverage[t]) << '\n';
        }
        write_text_file(out_path("crisis.csv"), out.str());
        result.written_files.push_back("crisis.csv");
    }

    // ---- spillover: LHI windows and rolling baselines
    std::vector<Eigen::Index> windows = config.rolling_windows;
    if (windows.empty()) {
        windows = {grid.shortest(),
                   grid.length(grid.max_selectable())};
    }

    const auto spillover_series =
        [&](const std::vector<std::vector<Eigen::Index>>& per_group_windows,
            const std::string& file) {
            std::ostringstream out;
            out << "date";
            for (const auto& name : group_names) out << ',' << name;
            out << ",average\n";
            for (std::size_t t = 0; t < taus.size(); ++t) {
                out << panel.axis.label(taus[t]);
                double sum = 0.0;
                int valid = 0;
                std::string row;
                for (std::size_t g = 0; g < groups.size(); ++g) {
                    double total = kNan;
                    try {
                        const TimeSeriesPanel sub = panel.select(groups[g]);
                        const VarFit fit = fit_var(
                            sub, Interval{taus[t], per_group_windows[g][t]}, p);
                        total = gfevd(fit.params, config.horizon).total;
                        sum += total;
                        ++valid;
                    } catch (const Error&) {
                        ++flagged;
                    }
                    row += ',' + num(total);
                }
                out << row << ','
                    << num(valid > 0 ? sum / valid : kNan) << '\n';
            }
            write_text_file(out_path(file), out.str());
            result.written_files.push_back(file);
        };

    {
        std::vector<std::vector<Eigen::Index>> lhi(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (const auto& res : runs[g].results) {
                lhi[g].push_back(res.m_hat);
            }
        }
        spillover_series(lhi, "spillover_lhi.csv");
        for (Eigen::Index w : windows) {
            std::vector<std::vector<Eigen::Index>> fixed(
                groups.size(), std::vector<Eigen::Index>(taus.size(), w));
            spillover_series(fixed, "spillover_rw_" + std::to_string(w) + ".csv");
        }
    }

    // ---- manifest
    {
        nlohmann::json manifest;
        manifest["config"] = config.to_key_values();
        manifest["files"] = result.written_files;
        manifest["first_tau"] = panel.axis.label(first_tau);
        manifest["last_tau"] = panel.axis.label(panel.rows() - 1);
        manifest["discarded_burn_in"] = static_cast<long>(first_tau);
        manifest["flagged_cells"] = flagged;
        nlohmann::json rho_by_group;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            rho_by_group[group_names[g]] = runs[g].rho;
        }
        manifest["rho"] = std::move(rho_by_group);
        result.manifest_json = manifest.dump(2) + "\n";
        write_text_file(out_path("run_manifest.json"), result.manifest_json);
        result.written_files.push_back("run_manifest.json");
    }

    result.flagged_cells = flagged;
    return result;
}

}  // namespace localvar
