#include "aggecon/sweep.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "aggecon/config.hpp"

namespace aggecon {

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep: values must be non-empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (axis == Axis::sigma_d && v < 0.0)
            throw std::invalid_argument("sweep: sigma_d values must be >= 0");
        if (axis == Axis::p_in && !(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("sweep: p_in values must be in [0, 1]");
        if (i > 0 && !(v > values[i - 1]))
            throw std::invalid_argument("sweep: values must be strictly ascending");
    }
    if (replicates < 1) throw std::invalid_argument("sweep: replicates must be >= 1");
    base_config.validate();
}

SweepSpec parse_sweep_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("sweep: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("sweep: expected an object");

    static const std::set<std::string> known{"axis", "values", "replicates", "base_config"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw std::invalid_argument("sweep." + key + ": unknown key");

    SweepSpec spec;
    if (!j.contains("axis") || !j["axis"].is_string())
        throw std::invalid_argument("sweep.axis: expected \"sigma_d\" or \"p_in\"");
    const std::string axis = j["axis"].get<std::string>();
    if (axis == "sigma_d")
        spec.axis = SweepSpec::Axis::sigma_d;
    else if (axis == "p_in")
        spec.axis = SweepSpec::Axis::p_in;
    else
        throw std::invalid_argument("sweep.axis: expected \"sigma_d\" or \"p_in\"");

    if (!j.contains("values") || !j["values"].is_array())
        throw std::invalid_argument("sweep.values: expected an array of numbers");
    for (const auto& v : j["values"]) {
        if (!v.is_number()) throw std::invalid_argument("sweep.values: expected numbers");
        spec.values.push_back(v.get<double>());
    }
    if (!j.contains("replicates") || !j["replicates"].is_number_integer())
        throw std::invalid_argument("sweep.replicates: expected an integer");
    spec.replicates = j["replicates"].get<std::int64_t>();
    if (!j.contains("base_config"))
        throw std::invalid_argument("sweep.base_config: missing required key");
    spec.base_config = parse_run_config(j["base_config"].dump());

    spec.validate();
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open sweep spec " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sweep_spec(buf.str());
}

RunConfig apply_axis_value(const SweepSpec& spec, double value, std::uint64_t seed) {
    RunConfig cfg = spec.base_config;
    cfg.seed = seed;
    if (spec.axis == SweepSpec::Axis::sigma_d) {
        cfg.size_spec.kind = SizeInitSpec::Kind::normal;
        cfg.size_spec.sigma_d = value;
    } else {
        cfg.money_kernel.p_in = value;
    }
    return cfg;
}

SweepResult run_sweep(const SweepSpec& spec, int workers) {
    spec.validate();
    const auto n_values = static_cast<std::int64_t>(spec.values.size());
    const std::int64_t n_jobs = n_values * spec.replicates;

    SweepResult result;
    result.runs.resize(static_cast<std::size_t>(n_jobs));

    std::atomic<std::int64_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::int64_t job = next.fetch_add(1);
            if (job >= n_jobs) return;
            const std::int64_t vi = job / spec.replicates;
            const std::int64_t rep = job % spec.replicates;

            SweepRunResult& out = result.runs[static_cast<std::size_t>(job)];
            out.axis_value = spec.values[static_cast<std::size_t>(vi)];
            out.value_index = vi;
            out.replicate = rep;
            out.seed = spec.base_config.seed + static_cast<std::uint64_t>(job);
            try {
                const RunConfig cfg = apply_axis_value(spec, out.axis_value, out.seed);
                RunResult run_result = run(cfg);
                out.series = std::move(run_result.series);
                std::vector<double> t(out.series.times.begin(), out.series.times.end());
                const auto& values = spec.axis == SweepSpec::Axis::sigma_d
                                         ? out.series.entropy_size
                                         : out.series.entropy_money;
                out.fit = stats::fit_stretched_exponential(t, values);
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };

    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(n_jobs)));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (std::int64_t vi = 0; vi < n_values; ++vi) {
        SweepValueSummary s;
        s.axis_value = spec.values[static_cast<std::size_t>(vi)];
        double tau_sum = 0.0, tau_sq = 0.0;
        for (std::int64_t rep = 0; rep < spec.replicates; ++rep) {
            const auto& r = result.runs[static_cast<std::size_t>(vi * spec.replicates + rep)];
            if (!r.error.empty()) {
                result.all_ok = false;
                continue;
            }
            ++s.n;
            tau_sum += r.fit.tau;
            tau_sq += r.fit.tau * r.fit.tau;
            s.xi_mean += r.fit.xi;
            s.a_mean += r.fit.a;
            s.rss_mean += r.fit.rss;
        }
        if (s.n > 0) {
            const double n = static_cast<double>(s.n);
            s.tau_mean = tau_sum / n;
            s.xi_mean /= n;
            s.a_mean /= n;
            s.rss_mean /= n;
            if (s.n > 1) {
                const double var = (tau_sq - n * s.tau_mean * s.tau_mean) / (n - 1.0);
                s.tau_stderr = std::sqrt(std::max(0.0, var) / n);
            }
        }
        result.summaries.push_back(s);
    }
    return result;
}

}  // namespace aggecon
