#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "aggecon/kernels.hpp"
#include "aggecon/model.hpp"

namespace aggecon {

// Complete description of one simulation run.
//
// One step applies transactions_per_step money exchanges followed by
// migrations_per_step aggregate exchanges. Observables are recorded at step 0
// and after every sample_every-th step.
//
// Randomness contract: a single stream seeded with `seed` drives everything,
// consumed in a fixed order per operation - initial size draws first, then per
// transaction (payer, partner category, partner, amount) and per migration
// (source, destination, migrant count, migrant indices).
struct RunConfig {
    MacroInvariants invariants;
    SizeInitSpec size_spec;
    double wealth_per_agent = 0.0;
    MoneyKernelSpec money_kernel;
    MigrationKernelSpec migration_kernel;
    std::int64_t steps = 0;
    std::int64_t transactions_per_step = 1;
    std::int64_t migrations_per_step = 1;
    std::int64_t sample_every = 10;
    double entropy_bin_width = 0.0;
    bool remove_empty = false;
    std::uint64_t seed = 0;

    void validate() const;
};

// Sampled time series of the two entropies and the active-aggregate count.
// All arrays share one length. Histogram snapshots of aggregate wealth and
// size are captured only on request (RunOptions::capture_histograms).
struct ObservableSeries {
    std::vector<std::int64_t> times;
    std::vector<double> entropy_money;
    std::vector<double> entropy_size;
    std::vector<std::int64_t> active_aggregates;
    struct SnapshotHist {
        std::int64_t step = 0;
        std::vector<double> wealth_edges;
        std::vector<std::int64_t> wealth_counts;
        std::vector<std::int64_t> size_values;
        std::vector<std::int64_t> size_counts;
    };
    std::vector<SnapshotHist> snapshots;
};

// Per-aggregate (size, wealth) rows pooled over the post-equilibration window;
// the raw material for distribution validation.
struct PooledAggregateSamples {
    std::vector<std::int64_t> step;
    std::vector<std::int64_t> size;
    std::vector<double> wealth;
};

struct RunOptions {
    // Pool per-aggregate samples every pool_every steps from pool_from on.
    std::optional<std::int64_t> pool_from;
    std::int64_t pool_every = 0;  // 0: use sample_every
    bool capture_histograms = false;
    // Optional sink for kernel records: (step, kind, id_a, id_b, amount),
    // kind is "tx" or "mig". Off by default.
    std::function<void(std::int64_t, const char*, std::int64_t, std::int64_t, double)> record_sink;
};

struct RunResult {
    SystemState state;
    ObservableSeries series;
    PooledAggregateSamples pooled;
};

RunResult run(const RunConfig& config, const RunOptions& options = {});

// Per-aggregate sizes and exact roster wealth sums.
std::pair<std::vector<std::int64_t>, std::vector<double>> equilibrium_snapshot(
    const SystemState& state);

}  // namespace aggecon
