#include "localvar/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "localvar/parallel.hpp"
#include "localvar/rng.hpp"

namespace localvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void append_matrix(std::ostringstream& out, const Eigen::MatrixXd& m) {
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,", m(i, j));
            out << buf;
        }
    }
}

// Per-sample statistics that the sequential zeta search consumes. All
// likelihoods are evaluated on the anchored intervals I_k of one simulated
// homogeneous path.
struct SampleStats {
    bool ok = false;
    // fit_ll[k-1]: l(I_k, mle_k)
    std::vector<double> fit_ll;
    // cross_ll[k-1][j-1]: l(I_k, mle_j) for j < k
    std::vector<std::vector<double>> cross_ll;
    // star_ll[k-1]: l(I_k, theta_star)
    std::vector<double> star_ll;
};

std::vector<SampleStats> prepare_samples(const CalibrationConfig& config) {
    const IntervalGrid& grid = config.grid;
    const int p = config.theta_star.order();
    const Eigen::Index n = grid.longest() + p;
    const Eigen::Index tau = n - 1;
    const int kt = grid.max_tested();

    std::vector<SampleStats> samples(config.n_samples);
    parallel_for(samples.size(), config.workers, [&](std::size_t i) {
        SampleStats& s = samples[i];
        const TimeSeriesPanel panel =
            simulate_var(config.theta_star, n, config.burn_in,
                         derive_seed(config.seed, i));
        try {
            std::vector<VarParams> fits;
            s.fit_ll.resize(kt);
            s.star_ll.resize(kt);
            s.cross_ll.resize(kt);
            for (int k = 1; k <= kt; ++k) {
                const Interval window{tau, grid.length(k)};
                VarFit fit = fit_var(panel, window, p);
                s.fit_ll[k - 1] = fit.loglik;
                s.star_ll[k - 1] =
                    log_likelihood(panel, window, config.theta_star);
                s.cross_ll[k - 1].resize(k - 1);
                for (int j = 1; j < k; ++j) {
                    s.cross_ll[k - 1][j - 1] =
                        log_likelihood(panel, window, fits[j - 1]);
                }
                fits.push_back(std::move(fit.params));
            }
            s.ok = true;
        } catch (const Error&) {
            s.ok = false;  // rare degenerate draw, excluded with a cap below
        }
    });

    std::size_t failed = 0;
    for (const auto& s : samples) {
        if (!s.ok) ++failed;
    }
    if (failed * 100 >= samples.size()) {
        throw NonConvergence(std::to_string(failed) + " of " +
                             std::to_string(samples.size()) +
                             " calibration samples failed to fit");
    }
    return samples;
}

std::map<int, double> risk_bounds_from_samples(
    const std::vector<SampleStats>& samples, const IntervalGrid& grid,
    double r) {
    std::map<int, double> rb;
    for (int k = 2; k <= grid.max_tested(); ++k) {
        double sum = 0.0;
        long count = 0;
        for (const auto& s : samples) {
            if (!s.ok) continue;
            sum += std::pow(std::abs(s.fit_ll[k - 1] - s.star_ll[k - 1]), r);
            ++count;
        }
        rb[k] = sum / count;
    }
    return rb;
}

}  // namespace

void CalibrationConfig::validate() const {
    theta_star.validate();
    if (!is_stable(theta_star)) {
        throw UnstableParams("calibration truth must be stable");
    }
    if (n_samples < 100) {
        throw ConfigError("n_samples below the statistical floor of 100");
    }
    if (r <= 0.0) {
        throw ConfigError("power r must be > 0");
    }
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw ConfigError("rho must lie in (0, 1]");
    }
}

std::string CalibrationConfig::fingerprint() const {
    std::ostringstream out;
    out << "d=" << theta_star.dim() << ";p=" << theta_star.order() << ";";
    Eigen::MatrixXd ic = theta_star.intercept;
    append_matrix(out, ic);
    for (const auto& phi : theta_star.lag_coeffs) append_matrix(out, phi);
    append_matrix(out, theta_star.noise_cov);
    out << ";grid=";
    for (auto m : grid.lengths()) out << m << ",";
    char buf[64];
    std::snprintf(buf, sizeof(buf), ";r=%.17g;rho=%.17g", r, rho);
    out << buf << ";n=" << n_samples << ";seed=" << seed
        << ";burn=" << burn_in;
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(out.str())));
    return buf;
}

CriticalValues CriticalValues::unbounded(const IntervalGrid& grid, double r) {
    CriticalValues cv;
    cv.grid = grid;
    cv.r = r;
    for (int k = 2; k <= grid.max_tested(); ++k) {
        cv.zeta[k] = kInf;
    }
    cv.fingerprint = "unbounded";
    return cv;
}

std::map<int, double> estimate_risk_bounds(const CalibrationConfig& config) {
    config.validate();
    return risk_bounds_from_samples(prepare_samples(config), config.grid,
                                    config.r);
}

CriticalValues calibrate_critical_values(const CalibrationConfig& config) {
    config.validate();
    const IntervalGrid& grid = config.grid;
    const int kt = grid.max_tested();

    const std::vector<SampleStats> samples = prepare_samples(config);
    const std::map<int, double> rb =
        risk_bounds_from_samples(samples, grid, config.r);

    long n_eff = 0;
    for (const auto& s : samples) {
        if (s.ok) ++n_eff;
    }

    // stop_step[i] = first violating step under the already-fixed zetas,
    // 0 while the sample is still extending.
    std::vector<int> stop_step(samples.size(), 0);

    CriticalValues cv;
    cv.grid = grid;
    cv.r = config.r;
    cv.rho = config.rho;
    cv.n_samples = config.n_samples;
    cv.seed = config.seed;
    cv.fingerprint = config.fingerprint();
    cv.risk_bounds = rb;

    for (int k = 2; k <= kt; ++k) {
        // The loss at step k is carried by samples stopping exactly here:
        // a live sample whose statistic exceeds zeta keeps the step-(k-1)
        // estimator and contributes that statistic. Samples stopped at
        // earlier steps already consumed their share of the budget and
        // leave the pool, which keeps zeta monotone in rho.
        std::vector<double> active_lr;  // step-k statistic of live samples
        active_lr.reserve(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const SampleStats& s = samples[i];
            if (!s.ok || stop_step[i] != 0) continue;
            active_lr.push_back(std::pow(
                std::abs(s.fit_ll[k - 1] - s.cross_ll[k - 1][k - 2]),
                config.r));
        }

        const double target =
            config.rho * (static_cast<double>(k) / kt) * rb.at(k);
        const auto loss = [&](double zeta) {
            double sum = 0.0;
            for (double v : active_lr) {
                if (v > zeta) sum += v;
            }
            return sum / static_cast<double>(n_eff);
        };

        double zeta_hi = 0.0;
        for (double v : active_lr) zeta_hi = std::max(zeta_hi, v);

        double zeta;
        if (loss(0.0) <= target) {
            // even rejecting every live sample stays below the budget; the
            // loss at zeta = 0 is the closest attainable value
            zeta = 0.0;
        } else {
            double lo = 0.0, hi = zeta_hi;
            int it = 0;
            while (hi - lo > 1e-3) {
                if (++it > 100) {
                    throw NonConvergence("zeta bisection exceeded 100 iterations");
                }
                const double mid = 0.5 * (lo + hi);
                if (loss(mid) > target) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeta = 0.5 * (lo + hi);
        }
        cv.zeta[k] = zeta;

        // freeze this step: live samples whose statistic exceeds zeta stop
        std::size_t live_idx = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!samples[i].ok || stop_step[i] != 0) continue;
            if (active_lr[live_idx] > zeta) {
                stop_step[i] = k;
            }
            ++live_idx;
        }
    }
    return cv;
}

std::string critical_values_to_json(const CriticalValues& cv) {
    nlohmann::json j;
    j["fingerprint"] = cv.fingerprint;
    j["grid"] = cv.grid.lengths();
    j["r"] = cv.r;
    j["rho"] = cv.rho;
    j["n_samples"] = cv.n_samples;
    j["seed"] = cv.seed;
    nlohmann::json zeta, rb;
    for (const auto& [k, v] : cv.zeta) zeta[std::to_string(k)] = v;
    for (const auto& [k, v] : cv.risk_bounds) rb[std::to_string(k)] = v;
    j["zeta"] = std::move(zeta);
    j["risk_bounds"] = std::move(rb);
    return j.dump(2) + "\n";
}

CriticalValues critical_values_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    CriticalValues cv;
    cv.fingerprint = j.at("fingerprint").get<std::string>();
    cv.grid = IntervalGrid(j.at("grid").get<std::vector<Eigen::Index>>());
    cv.r = j.at("r").get<double>();
    cv.rho = j.at("rho").get<double>();
    cv.n_samples = j.at("n_samples").get<int>();
    cv.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [key, value] : j.at("zeta").items()) {
        cv.zeta[std::stoi(key)] = value.get<double>();
    }
    for (const auto& [key, value] : j.at("risk_bounds").items()) {
        cv.risk_bounds[std::stoi(key)] = value.get<double>();
    }
    return cv;
}

CriticalValues calibrate_cached(const CalibrationConfig& config,
                                const std::string& cache_dir) {
    namespace fs = std::filesystem;
    const fs::path path =
        fs::path(cache_dir) / ("critvals_" + config.fingerprint() + ".json");
    if (fs::exists(path)) {
        std::ifstream in(path);
        std::stringstream buf;
        buf << in.rdbuf();
        return critical_values_from_json(buf.str());
    }
    const CriticalValues cv = calibrate_critical_values(config);
    fs::create_directories(cache_dir);
    std::ofstream out(path);
    out << critical_values_to_json(cv);
    return cv;
}

}  // namespace localvar
