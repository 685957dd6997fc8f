// End-to-end checks of the command-line surface. The binary path arrives in
// the AGGECON_CLI environment variable (set by the test harness).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "aggecon/config.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* path = std::getenv("AGGECON_CLI");
    REQUIRE_MESSAGE(path != nullptr, "AGGECON_CLI not set");
    return path;
}

struct CommandResult {
    int status = -1;
    std::string output;
};

CommandResult run_command(const std::string& args) {
    const fs::path out_file = fs::temp_directory_path() / "aggecon_cli_test_stdout.txt";
    const std::string cmd = cli() + " " + args + " > " + out_file.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    CommandResult result;
    result.status = WEXITSTATUS(raw);
    std::ifstream in(out_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    result.output = buf.str();
    return result;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    fs::create_directories(dir);
    const fs::path p = dir / "config.json";
    std::ofstream(p) << body;
    return p;
}

const char* kSmallConfig = R"({
  "invariants": {"n_aggregates": 10, "n_agents": 400, "total_money": 40000.0},
  "size_spec": {"kind": "fixed", "mean": 40.0},
  "money_kernel": {"p_in": 0.1},
  "migration_kernel": {"mechanism": "split"},
  "wealth_per_agent": 100.0,
  "steps": 2000,
  "transactions_per_step": 2,
  "migrations_per_step": 1,
  "sample_every": 10,
  "seed": 7
})";

}  // namespace

TEST_CASE("cli run: artifacts land in the output directory and validate passes them on") {
    const fs::path tmp = fs::temp_directory_path() / "aggecon_cli_run";
    fs::remove_all(tmp);
    const auto cfg = write_config(tmp, kSmallConfig);

    const auto run = run_command("run --config " + cfg.string() + " --out " + (tmp / "out").string() +
                                 " --pool-from 500 --pool-every 5");
    CHECK(run.status == 0);
    CHECK(run.output.find("conservation=ok") != std::string::npos);
    for (const auto* name :
         {"series.csv", "snapshot.csv", "snapshot_meta.json", "agg_samples.csv", "summary.json"})
        CHECK_MESSAGE(fs::exists(tmp / "out" / name), name);

    // the validate subcommand consumes exactly these artifacts; thresholds are
    // left loose here because the run is tiny
    const auto val = run_command("validate --samples " + (tmp / "out" / "agg_samples.csv").string() +
                                 " --meta " + (tmp / "out" / "snapshot_meta.json").string() +
                                 " --snapshot " + (tmp / "out" / "snapshot.csv").string() +
                                 " --out " + (tmp / "val").string() +
                                 " --tv-size 0.2 --ks-wealth 0.2");
    CHECK(val.status == 0);
    CHECK(val.output.find("[PASS] size") != std::string::npos);
    CHECK(val.output.find("[PASS] wealth") != std::string::npos);
    CHECK(val.output.find("snapshot money conservation") != std::string::npos);
    CHECK(fs::exists(tmp / "val" / "gof_report.json"));
    fs::remove_all(tmp);
}

TEST_CASE("cli run --print-config round-trips to the identical effective config") {
    const fs::path tmp = fs::temp_directory_path() / "aggecon_cli_print";
    fs::remove_all(tmp);
    const auto cfg = write_config(tmp, kSmallConfig);

    const auto printed = run_command("run --config " + cfg.string() + " --print-config");
    CHECK(printed.status == 0);
    const auto parsed = aggecon::parse_run_config(printed.output);
    CHECK(aggecon::run_config_to_json(parsed) == printed.output);
    fs::remove_all(tmp);
}

TEST_CASE("cli run: schema violations name the field and exit non-zero") {
    const fs::path tmp = fs::temp_directory_path() / "aggecon_cli_bad";
    fs::remove_all(tmp);
    const auto cfg = write_config(tmp, R"({
      "invariants": {"n_aggregates": 10, "n_agents": 400, "total_money": 40000.0},
      "size_spec": {"kind": "fixed", "mean": 40.0},
      "money_kernel": {"p_in": 1.2},
      "migration_kernel": {"mechanism": "split"},
      "wealth_per_agent": 100.0,
      "steps": 2000,
      "seed": 7
    })");
    const auto bad = run_command("run --config " + cfg.string() + " --out " + (tmp / "o").string());
    CHECK(bad.status == 2);
    CHECK(bad.output.find("p_in") != std::string::npos);
    fs::remove_all(tmp);
}

TEST_CASE("cli theory: curves, oracle table, and the large-Na domain error") {
    const fs::path tmp = fs::temp_directory_path() / "aggecon_cli_theory";
    fs::remove_all(tmp);

    const auto ok = run_command("theory --na 100 --agents 10000 --money 1e6 --out " +
                                (tmp / "t1").string() + " --uncorrected-variant");
    CHECK(ok.status == 0);
    CHECK(ok.output.find("constants:") != std::string::npos);
    for (const auto* name : {"theory_size_large_na.csv", "theory_wealth_large_na.csv",
                             "theory_size_finite.csv", "theory_wealth_conditional.csv"})
        CHECK_MESSAGE(fs::exists(tmp / "t1" / name), name);
    {
        std::ifstream finite(tmp / "t1" / "theory_size_finite.csv");
        std::string line;
        std::getline(finite, line);
        CHECK(line.find("does not normalize") != std::string::npos);
    }

    const auto tiny = run_command("theory --na 3 --agents 4 --money 10 --out " +
                                  (tmp / "t2").string() + " --oracle --finite-only");
    CHECK(tiny.status == 0);
    CHECK(fs::exists(tmp / "t2" / "oracle_size.csv"));

    const auto bad = run_command("theory --na 10 --agents 10 --money 10 --out " +
                                 (tmp / "t3").string());
    CHECK(bad.status == 2);
    CHECK(bad.output.find("n_agents > n_aggregates") != std::string::npos);
    fs::remove_all(tmp);
}

TEST_CASE("cli validate: single-aggregate systems get the exponential check") {
    const fs::path tmp = fs::temp_directory_path() / "aggecon_cli_single";
    fs::remove_all(tmp);
    const auto cfg = write_config(tmp, R"({
      "invariants": {"n_aggregates": 1, "n_agents": 2000, "total_money": 200000.0},
      "size_spec": {"kind": "fixed", "mean": 2000.0},
      "money_kernel": {"p_in": 0.0},
      "migration_kernel": {"mechanism": "split"},
      "wealth_per_agent": 100.0,
      "steps": 100000,
      "transactions_per_step": 2,
      "migrations_per_step": 0,
      "sample_every": 10000,
      "seed": 12
    })");
    const auto run = run_command("run --config " + cfg.string() + " --out " +
                                 (tmp / "out").string() + " --no-pool");
    REQUIRE(run.status == 0);
    const auto val = run_command("validate --samples unused.csv --meta " +
                                 (tmp / "out" / "snapshot_meta.json").string() + " --snapshot " +
                                 (tmp / "out" / "snapshot.csv").string() + " --ks-wealth 0.04");
    CHECK(val.status == 0);
    CHECK(val.output.find("single-aggregate agent wealth") != std::string::npos);
    fs::remove_all(tmp);
}

TEST_CASE("cli sweep: table artifacts exist and report every replicate") {
    const fs::path tmp = fs::temp_directory_path() / "aggecon_cli_sweep";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    std::ofstream(tmp / "spec.json") << R"({
      "axis": "p_in",
      "values": [0.0, 0.5],
      "replicates": 2,
      "base_config": )" << kSmallConfig << "\n}";

    const auto sweep = run_command("sweep --spec " + (tmp / "spec.json").string() + " --out " +
                                   (tmp / "out").string() + " --workers 2");
    CHECK(sweep.status == 0);
    CHECK(fs::exists(tmp / "out" / "sweep_fits.csv"));
    CHECK(fs::exists(tmp / "out" / "sweep_tau.csv"));
    int series_files = 0;
    for (const auto& entry : fs::directory_iterator(tmp / "out"))
        if (entry.path().filename().string().rfind("series_", 0) == 0) ++series_files;
    CHECK(series_files == 4);
    fs::remove_all(tmp);
}
