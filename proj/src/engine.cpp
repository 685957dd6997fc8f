#include "aggecon/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "aggecon/stats.hpp"

namespace aggecon {

void RunConfig::validate() const {
    invariants.validate();
    size_spec.validate();
    money_kernel.validate();
    migration_kernel.validate();
    if (!(wealth_per_agent > 0.0)) throw std::invalid_argument("wealth_per_agent must be > 0");
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (transactions_per_step < 1)
        throw std::invalid_argument("transactions_per_step must be >= 1");
    if (migrations_per_step < 0) throw std::invalid_argument("migrations_per_step must be >= 0");
    if (sample_every < 1 || sample_every > steps)
        throw std::invalid_argument("sample_every must be in [1, steps]");
    if (!(entropy_bin_width > 0.0)) throw std::invalid_argument("entropy_bin_width must be > 0");
}

namespace {

std::vector<std::int64_t> roster_sizes(const SystemState& state) {
    std::vector<std::int64_t> sizes;
    sizes.reserve(state.rosters.size());
    for (const auto& roster : state.rosters)
        sizes.push_back(static_cast<std::int64_t>(roster.size()));
    return sizes;
}

void record_sample(const RunConfig& cfg, const RunOptions& opt, const SystemState& state,
                   std::int64_t t, ObservableSeries& series) {
    // money conservation is re-checked at every sample point
    double money = 0.0;
    for (double w : state.aggregate_wealth) money += w;
    if (std::abs(money - cfg.invariants.total_money) > 1e-6 * cfg.invariants.total_money)
        throw std::runtime_error("money conservation violated at step " + std::to_string(t));

    const auto sizes = roster_sizes(state);
    series.times.push_back(t);
    series.entropy_money.push_back(stats::entropy_money(state.aggregate_wealth,
                                                        cfg.entropy_bin_width));
    series.entropy_size.push_back(stats::entropy_size(sizes));
    series.active_aggregates.push_back(state.n_active_aggregates());

    if (opt.capture_histograms) {
        ObservableSeries::SnapshotHist snap;
        snap.step = t;
        const auto hist = stats::fixed_width_histogram(state.aggregate_wealth,
                                                       cfg.entropy_bin_width);
        snap.wealth_edges = hist.edges;
        snap.wealth_counts = hist.counts;
        auto sorted = sizes;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            snap.size_values.push_back(sorted[i]);
            snap.size_counts.push_back(static_cast<std::int64_t>(j - i));
            i = j;
        }
        series.snapshots.push_back(std::move(snap));
    }
}

void record_pool(const SystemState& state, std::int64_t t, PooledAggregateSamples& pooled) {
    for (std::size_t g = 0; g < state.rosters.size(); ++g) {
        pooled.step.push_back(t);
        pooled.size.push_back(static_cast<std::int64_t>(state.rosters[g].size()));
        pooled.wealth.push_back(state.aggregate_wealth[g]);
    }
}

}  // namespace

RunResult run(const RunConfig& config, const RunOptions& options) {
    config.validate();

    RunResult result;
    Rng rng(config.seed);
    result.state = init_state(config.invariants, config.size_spec, config.wealth_per_agent, rng);
    SystemState& state = result.state;

    const std::int64_t pool_every =
        options.pool_every > 0 ? options.pool_every : config.sample_every;
    const std::int64_t pool_from = options.pool_from.value_or(-1);

    record_sample(config, options, state, 0, result.series);
    if (pool_from == 0) record_pool(state, 0, result.pooled);

    for (std::int64_t t = 1; t <= config.steps; ++t) {
        for (std::int64_t k = 0; k < config.transactions_per_step; ++k) {
            const auto rec = monetary_exchange(state, config.money_kernel, rng);
            if (options.record_sink)
                options.record_sink(t, "tx", rec.payer, rec.partner, rec.delta_m);
        }
        for (std::int64_t k = 0; k < config.migrations_per_step; ++k) {
            const auto rec = aggregate_exchange(state, config.migration_kernel, rng,
                                                config.remove_empty);
            if (options.record_sink && !rec.skipped)
                options.record_sink(t, "mig", rec.source, rec.destination,
                                    static_cast<double>(rec.delta_n));
        }
        state.step_count = static_cast<std::uint64_t>(t);

        if (t % config.sample_every == 0) record_sample(config, options, state, t, result.series);
        if (pool_from >= 0 && t >= pool_from && t % pool_every == 0)
            record_pool(state, t, result.pooled);
    }
    return result;
}

std::pair<std::vector<std::int64_t>, std::vector<double>> equilibrium_snapshot(
    const SystemState& state) {
    std::vector<std::int64_t> sizes;
    std::vector<double> wealths;
    sizes.reserve(state.rosters.size());
    wealths.reserve(state.rosters.size());
    for (const auto& roster : state.rosters) {
        sizes.push_back(static_cast<std::int64_t>(roster.size()));
        double w = 0.0;
        for (auto a : roster) w += state.agent_wealth[static_cast<std::size_t>(a)];
        wealths.push_back(w);
    }
    return {std::move(sizes), std::move(wealths)};
}

}  // namespace aggecon
