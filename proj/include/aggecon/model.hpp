#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aggecon/rng.hpp"

namespace aggecon {

// Conserved macroscopic quantities of the closed economy: number of
// aggregates, number of agents, and total money.
struct MacroInvariants {
    std::int64_t n_aggregates = 0;
    std::int64_t n_agents = 0;
    double total_money = 0.0;

    void validate() const;  // throws std::invalid_argument on violation
};

// How the initial aggregate sizes are drawn.
struct SizeInitSpec {
    enum class Kind { fixed, normal };
    Kind kind = Kind::fixed;
    double mean = 0.0;
    double sigma_d = 0.0;  // normal kind only

    void validate() const;
};

// Full mutable state of one economy. Membership is stored both ways:
// agent_aggregate[a] names the aggregate of agent a, and rosters[g] lists the
// agents of aggregate g. agent_slot[a] is a's index inside its roster so a
// single removal is O(1). aggregate_wealth[g] is maintained incrementally by
// the kernels; it tracks the exact roster sum up to float accumulation.
struct SystemState {
    std::vector<double> agent_wealth;
    std::vector<std::int32_t> agent_aggregate;
    std::vector<std::vector<std::int32_t>> rosters;
    std::vector<std::int32_t> agent_slot;
    std::vector<double> aggregate_wealth;
    std::uint64_t step_count = 0;

    std::int64_t n_agents() const { return static_cast<std::int64_t>(agent_wealth.size()); }
    std::int64_t n_aggregates() const { return static_cast<std::int64_t>(rosters.size()); }
    std::int64_t n_active_aggregates() const;
};

// Pass/fail per conservation law; diagnostic only, never mutates.
struct InvariantReport {
    bool money_conserved = false;      // |sum(m) - M| / M <= 1e-6
    bool agents_conserved = false;     // roster sizes sum to D exactly
    bool membership_consistent = false;
    bool wealth_non_negative = false;
    double money_rel_error = 0.0;

    bool all_ok() const {
        return money_conserved && agents_conserved && membership_consistent && wealth_non_negative;
    }
};

// Builds the initial state: every agent holds exactly wealth_per_agent, sizes
// come from size_spec. Normal sizes are rounded, clamped to >= 1, then the
// residual is distributed +-1 round-robin until the totals match n_agents
// exactly. Throws std::invalid_argument when the spec cannot be reconciled
// with the invariants.
SystemState init_state(const MacroInvariants& inv, const SizeInitSpec& size_spec,
                       double wealth_per_agent, Rng& rng);
SystemState init_state(const MacroInvariants& inv, const SizeInitSpec& size_spec,
                       double wealth_per_agent, std::uint64_t seed);

InvariantReport validate_invariants(const SystemState& state, const MacroInvariants& inv);

// Removes aggregate g (must have an empty roster) by swap-removal, fixing up
// the membership of the roster that takes its index.
void remove_aggregate(SystemState& state, std::int32_t g);

// Snapshot export: CSV with columns (agent_id, aggregate_id, wealth) plus a
// JSON sidecar carrying (seed, step_count, n_aggregates, n_agents, total_money).
void write_snapshot_csv(const SystemState& state, const std::string& path);
void write_snapshot_meta(const SystemState& state, const MacroInvariants& inv,
                         std::uint64_t seed, const std::string& path);

}  // namespace aggecon
