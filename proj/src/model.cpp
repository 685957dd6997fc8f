#include "aggecon/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aggecon/io.hpp"

namespace aggecon {

void MacroInvariants::validate() const {
    if (n_aggregates < 1) throw std::invalid_argument("invariants.n_aggregates must be >= 1");
    if (n_agents < n_aggregates)
        throw std::invalid_argument("invariants.n_agents must be >= n_aggregates");
    if (!(total_money > 0.0)) throw std::invalid_argument("invariants.total_money must be > 0");
}

void SizeInitSpec::validate() const {
    if (!(mean > 0.0)) throw std::invalid_argument("size_spec.mean must be > 0");
    if (kind == Kind::normal && sigma_d < 0.0)
        throw std::invalid_argument("size_spec.sigma_d must be >= 0");
}

std::int64_t SystemState::n_active_aggregates() const {
    std::int64_t n = 0;
    for (const auto& roster : rosters)
        if (!roster.empty()) ++n;
    return n;
}

namespace {

std::vector<std::int64_t> draw_initial_sizes(const MacroInvariants& inv,
                                             const SizeInitSpec& spec, Rng& rng) {
    const std::int64_t na = inv.n_aggregates;
    const std::int64_t big_d = inv.n_agents;
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(na));

    if (spec.kind == SizeInitSpec::Kind::fixed) {
        if (big_d % na != 0)
            throw std::invalid_argument("fixed size init requires n_agents divisible by n_aggregates");
        const std::int64_t per = big_d / na;
        if (std::llround(spec.mean) != per)
            throw std::invalid_argument("size_spec.mean * n_aggregates does not match n_agents");
        std::fill(sizes.begin(), sizes.end(), per);
        return sizes;
    }

    if (std::abs(spec.mean * static_cast<double>(na) - static_cast<double>(big_d)) >
        0.5 * static_cast<double>(na))
        throw std::invalid_argument("size_spec.mean * n_aggregates does not match n_agents");

    std::int64_t total = 0;
    for (auto& s : sizes) {
        s = std::max<std::int64_t>(1, std::llround(rng.normal(spec.mean, spec.sigma_d)));
        total += s;
    }
    // Distribute the rounding residual one agent at a time, round-robin, never
    // letting a size drop below 1.
    std::size_t g = 0;
    while (total != big_d) {
        if (total < big_d) {
            ++sizes[g];
            ++total;
        } else if (sizes[g] > 1) {
            --sizes[g];
            --total;
        }
        g = (g + 1) % sizes.size();
    }
    return sizes;
}

}  // namespace

SystemState init_state(const MacroInvariants& inv, const SizeInitSpec& size_spec,
                       double wealth_per_agent, Rng& rng) {
    inv.validate();
    size_spec.validate();
    if (!(wealth_per_agent > 0.0)) throw std::invalid_argument("wealth_per_agent must be > 0");
    const double implied = wealth_per_agent * static_cast<double>(inv.n_agents);
    if (std::abs(implied - inv.total_money) > 1e-6 * inv.total_money)
        throw std::invalid_argument("wealth_per_agent * n_agents does not match total_money");

    const auto sizes = draw_initial_sizes(inv, size_spec, rng);

    SystemState state;
    state.agent_wealth.assign(static_cast<std::size_t>(inv.n_agents), wealth_per_agent);
    state.agent_aggregate.resize(static_cast<std::size_t>(inv.n_agents));
    state.agent_slot.resize(static_cast<std::size_t>(inv.n_agents));
    state.rosters.resize(static_cast<std::size_t>(inv.n_aggregates));
    state.aggregate_wealth.resize(static_cast<std::size_t>(inv.n_aggregates));

    std::int32_t agent = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        auto& roster = state.rosters[g];
        roster.reserve(static_cast<std::size_t>(sizes[g]));
        for (std::int64_t k = 0; k < sizes[g]; ++k) {
            state.agent_aggregate[static_cast<std::size_t>(agent)] = static_cast<std::int32_t>(g);
            state.agent_slot[static_cast<std::size_t>(agent)] =
                static_cast<std::int32_t>(roster.size());
            roster.push_back(agent);
            ++agent;
        }
        state.aggregate_wealth[g] = wealth_per_agent * static_cast<double>(sizes[g]);
    }
    return state;
}

SystemState init_state(const MacroInvariants& inv, const SizeInitSpec& size_spec,
                       double wealth_per_agent, std::uint64_t seed) {
    Rng rng(seed);
    return init_state(inv, size_spec, wealth_per_agent, rng);
}

InvariantReport validate_invariants(const SystemState& state, const MacroInvariants& inv) {
    InvariantReport rep;

    double sum = 0.0;
    bool non_negative = true;
    for (double w : state.agent_wealth) {
        sum += w;
        if (w < 0.0) non_negative = false;
    }
    rep.money_rel_error = std::abs(sum - inv.total_money) / inv.total_money;
    rep.money_conserved = rep.money_rel_error <= 1e-6;
    rep.wealth_non_negative = non_negative;

    std::int64_t agents = 0;
    for (const auto& roster : state.rosters) agents += static_cast<std::int64_t>(roster.size());
    rep.agents_conserved =
        agents == inv.n_agents && state.n_agents() == inv.n_agents;

    bool consistent = state.agent_aggregate.size() == state.agent_wealth.size() &&
                      state.agent_slot.size() == state.agent_wealth.size();
    if (consistent) {
        std::vector<std::int8_t> seen(state.agent_wealth.size(), 0);
        for (std::size_t g = 0; g < state.rosters.size() && consistent; ++g) {
            const auto& roster = state.rosters[g];
            for (std::size_t pos = 0; pos < roster.size(); ++pos) {
                const auto a = static_cast<std::size_t>(roster[pos]);
                if (a >= seen.size() || seen[a] ||
                    state.agent_aggregate[a] != static_cast<std::int32_t>(g) ||
                    state.agent_slot[a] != static_cast<std::int32_t>(pos)) {
                    consistent = false;
                    break;
                }
                seen[a] = 1;
            }
        }
        if (consistent)
            for (auto s : seen) consistent = consistent && s;
    }
    rep.membership_consistent = consistent;
    return rep;
}

void remove_aggregate(SystemState& state, std::int32_t g) {
    const auto idx = static_cast<std::size_t>(g);
    if (idx >= state.rosters.size() || !state.rosters[idx].empty())
        throw std::logic_error("remove_aggregate: roster not empty");
    const std::size_t last = state.rosters.size() - 1;
    if (idx != last) {
        state.rosters[idx] = std::move(state.rosters[last]);
        state.aggregate_wealth[idx] = state.aggregate_wealth[last];
        for (auto a : state.rosters[idx]) state.agent_aggregate[static_cast<std::size_t>(a)] = g;
    }
    state.rosters.pop_back();
    state.aggregate_wealth.pop_back();
}

void write_snapshot_csv(const SystemState& state, const std::string& path) {
    io::CsvWriter csv(path);
    csv.row("agent_id", "aggregate_id", "wealth");
    for (std::size_t a = 0; a < state.agent_wealth.size(); ++a)
        csv.row(static_cast<std::int64_t>(a), static_cast<std::int64_t>(state.agent_aggregate[a]),
                io::full(state.agent_wealth[a]));
}

void write_snapshot_meta(const SystemState& state, const MacroInvariants& inv,
                         std::uint64_t seed, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\n"
                  "  \"n_agents\": %lld,\n"
                  "  \"n_aggregates\": %lld,\n"
                  "  \"seed\": %llu,\n"
                  "  \"step_count\": %llu,\n"
                  "  \"total_money\": %.17g\n"
                  "}\n",
                  static_cast<long long>(inv.n_agents), static_cast<long long>(inv.n_aggregates),
                  static_cast<unsigned long long>(seed),
                  static_cast<unsigned long long>(state.step_count), inv.total_money);
    out << buf;
}

}  // namespace aggecon
