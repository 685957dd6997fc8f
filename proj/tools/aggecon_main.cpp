// Command-line front end: run, sweep, theory, validate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aggecon/config.hpp"
#include "aggecon/engine.hpp"
#include "aggecon/io.hpp"
#include "aggecon/stats.hpp"
#include "aggecon/sweep.hpp"
#include "aggecon/theory.hpp"
#include "aggecon/validate.hpp"
#include "aggecon/version.hpp"

namespace fs = std::filesystem;
using namespace aggecon;

namespace {

void write_provenance(io::CsvWriter& csv, const RunConfig& cfg) {
    csv.comment(std::string("aggecon ") + kVersion + " seed=" + std::to_string(cfg.seed) +
                " config=" + config_hash(cfg));
}

void write_series_csv(const std::string& path, const RunConfig& cfg,
                      const ObservableSeries& series) {
    io::CsvWriter csv(path);
    write_provenance(csv, cfg);
    csv.row("step", "S_m", "S_d", "n_active_aggregates");
    for (std::size_t i = 0; i < series.times.size(); ++i)
        csv.row(series.times[i], series.entropy_money[i], series.entropy_size[i],
                series.active_aggregates[i]);
}

void write_pooled_csv(const std::string& path, const RunConfig& cfg,
                      const PooledAggregateSamples& pooled) {
    io::CsvWriter csv(path);
    write_provenance(csv, cfg);
    csv.row("step", "aggregate_id", "size", "wealth");
    std::int64_t agg = 0;
    std::int64_t prev_step = -1;
    for (std::size_t i = 0; i < pooled.step.size(); ++i) {
        if (pooled.step[i] != prev_step) {
            agg = 0;
            prev_step = pooled.step[i];
        }
        csv.row(pooled.step[i], agg++, pooled.size[i], io::full(pooled.wealth[i]));
    }
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::int64_t> seed_override, bool print_config,
            std::int64_t pool_from, std::int64_t pool_every, bool no_pool, bool log_records) {
    RunConfig cfg = load_run_config(config_path);
    if (seed_override) cfg.seed = static_cast<std::uint64_t>(*seed_override);

    if (print_config) {
        std::cout << run_config_to_json(cfg);
        return 0;
    }

    fs::create_directories(out_dir);
    RunOptions opt;
    if (!no_pool) {
        opt.pool_from = pool_from >= 0 ? pool_from : cfg.steps / 2;
        opt.pool_every = pool_every;
    }
    std::ofstream record_log;
    if (log_records) {
        record_log.open(out_dir + "/records.csv", std::ios::binary);
        record_log << "step,kind,id_a,id_b,amount\n";
        opt.record_sink = [&record_log](std::int64_t step, const char* kind, std::int64_t a,
                                        std::int64_t b, double amount) {
            record_log << step << ',' << kind << ',' << a << ',' << b << ','
                       << io::num(amount) << '\n';
        };
    }

    const RunResult result = run(cfg, opt);

    write_series_csv(out_dir + "/series.csv", cfg, result.series);
    write_snapshot_csv(result.state, out_dir + "/snapshot.csv");
    write_snapshot_meta(result.state, cfg.invariants, cfg.seed, out_dir + "/snapshot_meta.json");
    if (!no_pool) write_pooled_csv(out_dir + "/agg_samples.csv", cfg, result.pooled);

    const auto report = validate_invariants(result.state, cfg.invariants);
    nlohmann::json summary;
    summary["version"] = kVersion;
    summary["seed"] = cfg.seed;
    summary["config_hash"] = config_hash(cfg);
    summary["final_S_m"] = result.series.entropy_money.back();
    summary["final_S_d"] = result.series.entropy_size.back();
    summary["n_active_aggregates"] = result.series.active_aggregates.back();
    summary["conservation"] = {{"money_conserved", report.money_conserved},
                               {"agents_conserved", report.agents_conserved},
                               {"membership_consistent", report.membership_consistent},
                               {"wealth_non_negative", report.wealth_non_negative},
                               {"money_rel_error", report.money_rel_error}};
    std::ofstream(out_dir + "/summary.json", std::ios::binary) << summary.dump(2) << "\n";

    std::cout << "run complete: steps=" << cfg.steps
              << " S_m=" << io::num(result.series.entropy_money.back())
              << " S_d=" << io::num(result.series.entropy_size.back())
              << " conservation=" << (report.all_ok() ? "ok" : "VIOLATED") << "\n";
    return report.all_ok() ? 0 : 1;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir, int workers) {
    const SweepSpec spec = load_sweep_spec(spec_path);
    fs::create_directories(out_dir);

    const SweepResult result = run_sweep(spec, workers);

    {
        io::CsvWriter csv(out_dir + "/sweep_fits.csv");
        csv.comment(std::string("aggecon ") + kVersion + " axis=" +
                    (spec.axis == SweepSpec::Axis::sigma_d ? "sigma_d" : "p_in"));
        csv.row("axis_value", "replicate", "seed", "tau", "xi", "a", "rss", "converged", "error");
        for (const auto& r : result.runs) {
            if (r.error.empty())
                csv.row(r.axis_value, r.replicate, static_cast<std::int64_t>(r.seed), r.fit.tau,
                        r.fit.xi, r.fit.a, r.fit.rss, r.fit.converged ? 1 : 0, "");
            else
                csv.row(r.axis_value, r.replicate, static_cast<std::int64_t>(r.seed), "", "", "",
                        "", "", r.error);
        }
    }
    {
        io::CsvWriter csv(out_dir + "/sweep_tau.csv");
        csv.row("axis_value", "n", "tau_mean", "tau_stderr", "xi_mean", "a_mean", "rss_mean");
        for (const auto& s : result.summaries)
            csv.row(s.axis_value, s.n, s.tau_mean, s.tau_stderr, s.xi_mean, s.a_mean, s.rss_mean);
    }
    for (const auto& r : result.runs) {
        if (!r.error.empty()) continue;
        char name[96];
        std::snprintf(name, sizeof name, "/series_v%lld_r%lld.csv",
                      static_cast<long long>(r.value_index), static_cast<long long>(r.replicate));
        const RunConfig cfg = apply_axis_value(spec, r.axis_value, r.seed);
        write_series_csv(out_dir + name, cfg, r.series);
    }

    for (const auto& s : result.summaries)
        std::cout << "axis=" << io::num(s.axis_value) << " tau=" << io::num(s.tau_mean)
                  << " +- " << io::num(s.tau_stderr) << " (n=" << s.n << ")\n";
    if (!result.all_ok) std::cerr << "sweep finished with failed runs\n";
    return result.all_ok ? 0 : 1;
}

int cmd_theory(std::int64_t na, std::int64_t agents, double money, const std::string& out_dir,
               std::int64_t d_max, std::int64_t m_max, int m_points, bool oracle,
               bool uncorrected_variant, bool finite_only) {
    MacroInvariants inv{na, agents, money};
    inv.validate();
    fs::create_directories(out_dir);

    const bool large_na_ok = agents > na;
    if (!large_na_ok && !finite_only)
        throw std::domain_error(
            "the large-Na laws need n_agents > n_aggregates; pass --finite-only to skip them");
    if (large_na_ok && !finite_only) {
        const auto k = theory::equilibrium_constants(inv);
        const double mean_d = static_cast<double>(agents) / static_cast<double>(na);
        const double mean_m = money / static_cast<double>(na);
        const std::int64_t dmax = d_max > 0 ? d_max : static_cast<std::int64_t>(20.0 * mean_d);
        const std::int64_t mmax =
            m_max > 0 ? m_max : static_cast<std::int64_t>(20.0 * mean_m);
        {
            io::CsvWriter csv(out_dir + "/theory_size_large_na.csv");
            csv.comment("p(d) = C e^alpha e^{-alpha d} / (1-e^{-beta})^d");
            csv.row("d", "p");
            for (std::int64_t d = 1; d <= dmax; ++d)
                csv.row(d, io::full(theory::size_marginal_large_na(d, k)));
        }
        {
            io::CsvWriter csv(out_dir + "/theory_wealth_large_na.csv");
            csv.comment("p(m) = C e^beta e^{-beta(m+1)} / (1-e^{-alpha})^{m+1}");
            csv.row("m", "p");
            const std::int64_t stride = std::max<std::int64_t>(1, mmax / 4000);
            for (std::int64_t m = 0; m <= mmax; m += stride)
                csv.row(m, io::full(theory::wealth_marginal_large_na(m, k)));
        }
        std::cout << "constants: C=" << io::full(k.c) << " alpha=" << io::full(k.alpha)
                  << " beta=" << io::full(k.beta) << "\n";
    }

    if (na >= 2) {
        const std::int64_t dmax =
            d_max > 0 ? std::min(d_max, agents)
                      : std::min(agents, static_cast<std::int64_t>(
                                             20.0 * static_cast<double>(agents) /
                                             static_cast<double>(na)));
        io::CsvWriter csv(out_dir + "/theory_size_finite.csv");
        if (uncorrected_variant) {
            double sum = 0.0;
            for (std::int64_t d = 0; d <= agents; ++d)
                sum += theory::size_pmf_finite(d, na, agents, theory::SizePmfVariant::uncorrected);
            csv.comment("uncorrected_variant_sum " + io::num(sum) + " (does not normalize)");
        }
        if (uncorrected_variant)
            csv.row("d", "p_corrected", "p_uncorrected");
        else
            csv.row("d", "p_corrected");
        for (std::int64_t d = 0; d <= dmax; ++d) {
            const double pc =
                theory::size_pmf_finite(d, na, agents, theory::SizePmfVariant::corrected);
            if (uncorrected_variant)
                csv.row(d, io::full(pc),
                        io::full(theory::size_pmf_finite(d, na, agents,
                                                         theory::SizePmfVariant::uncorrected)));
            else
                csv.row(d, io::full(pc));
        }
    }

    {
        const double mean_d = static_cast<double>(agents) / static_cast<double>(na);
        const std::int64_t d_list[3] = {
            std::max<std::int64_t>(1, static_cast<std::int64_t>(mean_d / 2.0)),
            std::max<std::int64_t>(1, static_cast<std::int64_t>(mean_d)),
            std::min(agents - 1, static_cast<std::int64_t>(2.0 * mean_d))};
        io::CsvWriter csv(out_dir + "/theory_wealth_conditional.csv");
        csv.comment("Beta(d, D-d) density of aggregate wealth given size d");
        csv.row("d", "m", "density");
        for (const auto d : d_list) {
            if (d < 1 || d > agents - 1) continue;
            for (int i = 0; i <= m_points; ++i) {
                const double m = money * static_cast<double>(i) / static_cast<double>(m_points);
                csv.row(d, io::num(m),
                        io::full(theory::wealth_density_given_size(m, d, agents, money)));
            }
        }
    }

    if (oracle) {
        const auto table = theory::enumerate_compositions_oracle(na, agents);
        io::CsvWriter csv(out_dir + "/oracle_size.csv");
        csv.comment("exact enumeration over " + std::to_string(table.total) + " compositions");
        csv.row("d", "count", "p", "p_corrected");
        for (std::int64_t d = 0; d <= agents; ++d)
            csv.row(d, static_cast<std::int64_t>(table.counts[static_cast<std::size_t>(d)]),
                    io::full(table.prob(d)),
                    io::full(theory::size_pmf_finite(d, na, agents,
                                                     theory::SizePmfVariant::corrected)));
    }
    return 0;
}

int cmd_validate(const std::string& samples_path, const std::string& meta_path,
                 const std::string& snapshot_path, const std::string& out_dir, double tv_size,
                 double ks_wealth) {
    const SnapshotMeta meta = read_snapshot_meta(meta_path);

    if (meta.invariants.n_aggregates == 1) {
        // single-aggregate system: the aggregate laws degenerate, so check the
        // agent wealths against the exponential limit instead
        if (snapshot_path.empty()) {
            std::cerr << "single-aggregate validation needs --snapshot\n";
            return 2;
        }
        const auto wealths = read_snapshot_wealths_csv(snapshot_path);
        const double ks = single_aggregate_exponential_ks(wealths, meta.invariants);
        const bool ok = ks <= ks_wealth;
        std::cout << (ok ? "[PASS]" : "[FAIL]")
                  << " single-aggregate agent wealth: KS(exponential, mean M/D)=" << io::num(ks)
                  << " (threshold " << io::num(ks_wealth) << ", n=" << wealths.size() << ")\n";
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            nlohmann::json j;
            j["version"] = kVersion;
            j["ks_agent_wealth_exponential"] = ks;
            j["threshold"] = ks_wealth;
            j["passed"] = ok;
            std::ofstream(out_dir + "/gof_report.json", std::ios::binary) << j.dump(2) << "\n";
        }
        return ok ? 0 : 1;
    }

    std::vector<std::int64_t> sizes;
    std::vector<double> wealths;
    read_aggregate_samples_csv(samples_path, sizes, wealths);

    ValidationThresholds thresholds;
    thresholds.tv_size = tv_size;
    thresholds.ks_wealth = ks_wealth;
    const ValidationReport rep = validate_distributions(sizes, wealths, meta.invariants,
                                                        thresholds);

    std::cout << (rep.size_ok ? "[PASS]" : "[FAIL]") << " size: TV(finite pmf)="
              << io::num(rep.tv_size_finite) << " (threshold " << io::num(tv_size)
              << "), TV(large-Na geometric, d>=1)=" << io::num(rep.tv_size_large_na) << "\n";
    std::cout << (rep.wealth_ok ? "[PASS]" : "[FAIL]")
              << " wealth: KS(mixture)=" << io::num(rep.ks_wealth_mixture) << " (threshold "
              << io::num(ks_wealth) << ")\n";
    for (const auto& bin : rep.conditional)
        std::cout << "       wealth | d in [" << bin.d_lo << "," << bin.d_hi
                  << "]: KS=" << io::num(bin.ks) << " (n=" << bin.n << ")\n";

    if (!snapshot_path.empty()) {
        std::ifstream snap(snapshot_path);
        if (!snap) {
            std::cerr << "snapshot not readable: " << snapshot_path << "\n";
            return 2;
        }
        double sum = 0.0;
        std::string line;
        std::getline(snap, line);  // header
        while (std::getline(snap, line)) {
            const auto pos = line.rfind(',');
            if (pos != std::string::npos) sum += std::stod(line.substr(pos + 1));
        }
        const double rel = std::abs(sum - meta.invariants.total_money) /
                           meta.invariants.total_money;
        std::cout << (rel <= 1e-6 ? "[PASS]" : "[FAIL]")
                  << " snapshot money conservation: rel_error=" << io::num(rel) << "\n";
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        nlohmann::json j;
        j["version"] = kVersion;
        j["n_size_samples"] = rep.n_size_samples;
        j["n_wealth_samples"] = rep.n_wealth_samples;
        j["tv_size_finite"] = rep.tv_size_finite;
        j["tv_size_large_na"] = rep.tv_size_large_na;
        j["ks_wealth_mixture"] = rep.ks_wealth_mixture;
        j["thresholds"] = {{"tv_size", tv_size}, {"ks_wealth", ks_wealth}};
        j["size_ok"] = rep.size_ok;
        j["wealth_ok"] = rep.wealth_ok;
        auto& bins = j["conditional"] = nlohmann::json::array();
        for (const auto& bin : rep.conditional)
            bins.push_back({{"d_lo", bin.d_lo},
                            {"d_hi", bin.d_hi},
                            {"n", bin.n},
                            {"ks", bin.ks}});
        std::ofstream(out_dir + "/gof_report.json", std::ios::binary) << j.dump(2) << "\n";
    }
    return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed multi-aggregate monetary economy: simulator, theory and validation"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "execute one simulation run");
    std::string run_config, run_out = "out";
    std::optional<std::int64_t> run_seed;
    bool print_config = false, no_pool = false, log_records = false;
    std::int64_t pool_from = -1, pool_every = 0;
    run_cmd->add_option("--config", run_config, "run config (JSON)")->required();
    run_cmd->add_option("--out", run_out, "output directory");
    run_cmd->add_option("--seed", run_seed, "override the config seed");
    run_cmd->add_flag("--print-config", print_config,
                      "print the effective config and exit");
    run_cmd->add_option("--pool-from", pool_from,
                        "first step of the equilibrium sample pool (default steps/2)");
    run_cmd->add_option("--pool-every", pool_every,
                        "pooling cadence in steps (default sample_every)");
    run_cmd->add_flag("--no-pool", no_pool, "skip the pooled aggregate sample file");
    run_cmd->add_flag("--log-records", log_records,
                      "stream per-transaction/migration records to records.csv");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "replicated parameter sweep");
    std::string sweep_spec, sweep_out = "out";
    int workers = 0;
    sweep_cmd->add_option("--spec", sweep_spec, "sweep spec (JSON)")->required();
    sweep_cmd->add_option("--out", sweep_out, "output directory");
    sweep_cmd->add_option("--workers", workers, "worker threads (default: hardware)");

    // theory
    auto* theory_cmd = app.add_subcommand("theory", "emit analytic equilibrium curves");
    std::int64_t t_na = 0, t_agents = 0, t_dmax = 0, t_mmax = 0;
    double t_money = 0.0;
    int m_points = 200;
    bool oracle = false, uncorrected_variant = false, finite_only = false;
    std::string theory_out = "out";
    theory_cmd->add_option("--na", t_na, "number of aggregates")->required();
    theory_cmd->add_option("--agents", t_agents, "number of agents")->required();
    theory_cmd->add_option("--money", t_money, "total money")->required();
    theory_cmd->add_option("--out", theory_out, "output directory");
    theory_cmd->add_option("--d-max", t_dmax, "largest tabulated size");
    theory_cmd->add_option("--m-max", t_mmax, "largest tabulated wealth (large-Na law)");
    theory_cmd->add_option("--m-points", m_points, "wealth grid points per conditional");
    theory_cmd->add_flag("--oracle", oracle, "emit the exact enumeration table (small systems)");
    theory_cmd->add_flag("--uncorrected-variant", uncorrected_variant,
                         "also emit the uncorrected (non-normalizing) size pmf");
    theory_cmd->add_flag("--finite-only", finite_only,
                         "skip the large-Na laws (required when n_agents <= n_aggregates)");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "compare run artifacts to the theory");
    std::string val_samples, val_meta, val_snapshot, val_out;
    double tv_size = 0.02, ks_wealth = 0.03;
    val_cmd->add_option("--samples", val_samples, "pooled aggregate samples CSV")->required();
    val_cmd->add_option("--meta", val_meta, "snapshot metadata JSON")->required();
    val_cmd->add_option("--snapshot", val_snapshot, "final snapshot CSV (conservation check)");
    val_cmd->add_option("--out", val_out, "directory for gof_report.json");
    val_cmd->add_option("--tv-size", tv_size, "size TV threshold");
    val_cmd->add_option("--ks-wealth", ks_wealth, "wealth KS threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(run_config, run_out, run_seed, print_config, pool_from, pool_every,
                           no_pool, log_records);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_spec, sweep_out, workers);
        if (theory_cmd->parsed())
            return cmd_theory(t_na, t_agents, t_money, theory_out, t_dmax, t_mmax, m_points,
                              oracle, uncorrected_variant, finite_only);
        if (val_cmd->parsed())
            return cmd_validate(val_samples, val_meta, val_snapshot, val_out, tv_size, ks_wealth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
