#include "aggecon/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aggecon {

void MoneyKernelSpec::validate() const {
    if (!(p_in >= 0.0 && p_in <= 1.0))
        throw std::invalid_argument("money_kernel.p_in must be in [0, 1]");
}

void MigrationKernelSpec::validate() const {
    switch (mechanism) {
        case Mechanism::split:
        case Mechanism::linear:
            break;
        case Mechanism::base:
            if (n_hat0 < 1)
                throw std::invalid_argument("migration_kernel.n_hat0 must be >= 1 for base");
            break;
        case Mechanism::sublinear:
            if (!(gamma > 0.0 && gamma <= 1.0))
                throw std::invalid_argument("migration_kernel.gamma must be in (0, 1] for sublinear");
            break;
    }
}

namespace {

// Uniform member of roster g excluding `exclude`; roster size must be >= 2.
std::int32_t draw_intra_partner(const SystemState& state, std::int32_t g, std::int32_t exclude,
                                Rng& rng) {
    const auto& roster = state.rosters[static_cast<std::size_t>(g)];
    const auto n = static_cast<std::int64_t>(roster.size());
    auto idx = rng.uniform_int(0, n - 2);
    if (idx >= state.agent_slot[static_cast<std::size_t>(exclude)]) ++idx;
    return roster[static_cast<std::size_t>(idx)];
}

// Uniform agent outside aggregate g. Rejection sampling while the outside
// population is the majority; otherwise an exact walk over the rosters.
std::int32_t draw_extra_partner(const SystemState& state, std::int32_t g, Rng& rng) {
    const std::int64_t total = state.n_agents();
    const auto inside = static_cast<std::int64_t>(state.rosters[static_cast<std::size_t>(g)].size());
    const std::int64_t outside = total - inside;
    if (4 * inside <= 3 * total) {
        for (;;) {
            const auto a = static_cast<std::int32_t>(rng.uniform_int(0, total - 1));
            if (state.agent_aggregate[static_cast<std::size_t>(a)] != g) return a;
        }
    }
    auto k = rng.uniform_int(0, outside - 1);
    for (std::size_t h = 0; h < state.rosters.size(); ++h) {
        if (static_cast<std::int32_t>(h) == g) continue;
        const auto sz = static_cast<std::int64_t>(state.rosters[h].size());
        if (k < sz) return state.rosters[h][static_cast<std::size_t>(k)];
        k -= sz;
    }
    throw std::logic_error("draw_extra_partner: walk exhausted");
}

void move_agent(SystemState& state, std::int32_t agent, std::int32_t from, std::int32_t to) {
    auto& src = state.rosters[static_cast<std::size_t>(from)];
    auto& dst = state.rosters[static_cast<std::size_t>(to)];
    const auto slot = static_cast<std::size_t>(state.agent_slot[static_cast<std::size_t>(agent)]);
    const auto moved_in = src.back();
    src[slot] = moved_in;
    state.agent_slot[static_cast<std::size_t>(moved_in)] = static_cast<std::int32_t>(slot);
    src.pop_back();
    state.agent_slot[static_cast<std::size_t>(agent)] = static_cast<std::int32_t>(dst.size());
    state.agent_aggregate[static_cast<std::size_t>(agent)] = to;
    dst.push_back(agent);
    const double w = state.agent_wealth[static_cast<std::size_t>(agent)];
    double& from_w = state.aggregate_wealth[static_cast<std::size_t>(from)];
    // an emptied roster holds exactly nothing; also guard against cancellation
    from_w = src.empty() ? 0.0 : std::max(0.0, from_w - w);
    state.aggregate_wealth[static_cast<std::size_t>(to)] += w;
}

}  // namespace

TransactionRecord monetary_exchange(SystemState& state, const MoneyKernelSpec& spec, Rng& rng) {
    const std::int64_t total = state.n_agents();
    if (total < 2) throw std::invalid_argument("monetary_exchange needs at least 2 agents");

    TransactionRecord rec;
    rec.payer = static_cast<std::int32_t>(rng.uniform_int(0, total - 1));
    const std::int32_t g = state.agent_aggregate[static_cast<std::size_t>(rec.payer)];
    const auto inside = static_cast<std::int64_t>(state.rosters[static_cast<std::size_t>(g)].size());

    bool intra = rng.u01() < spec.p_in;
    if (intra && inside < 2) {
        intra = false;
        rec.fallback = true;
    } else if (!intra && inside == total) {
        intra = true;
        rec.fallback = true;
    }
    rec.intra = intra;
    rec.partner = intra ? draw_intra_partner(state, g, rec.payer, rng)
                        : draw_extra_partner(state, g, rng);

    double& mi = state.agent_wealth[static_cast<std::size_t>(rec.payer)];
    double& mj = state.agent_wealth[static_cast<std::size_t>(rec.partner)];
    const double u = rng.u01();
    double delta;
    if (spec.rule == MoneyKernelSpec::Rule::split) {
        const double pool = mi + mj;
        const double mi_new = u * pool;
        delta = mi - mi_new;
        mi = mi_new;
        mj = pool - mi_new;  // pair sum exactly conserved
    } else {
        delta = u * mi;
        mi -= delta;
        mj += delta;
    }
    rec.delta_m = delta;

    const std::int32_t h = state.agent_aggregate[static_cast<std::size_t>(rec.partner)];
    if (h != g) {
        double& gw = state.aggregate_wealth[static_cast<std::size_t>(g)];
        double& hw = state.aggregate_wealth[static_cast<std::size_t>(h)];
        gw = std::max(0.0, gw - delta);
        hw = std::max(0.0, hw + delta);  // delta is signed under the split rule
    }
    return rec;
}

std::int64_t draw_delta_n(const MigrationKernelSpec& spec, std::int64_t n_source, Rng& rng) {
    switch (spec.mechanism) {
        case MigrationKernelSpec::Mechanism::base: {
            const std::int64_t dn = rng.uniform_int(0, spec.n_hat0);
            return std::min(dn, n_source);
        }
        case MigrationKernelSpec::Mechanism::linear:
            return rng.uniform_int(0, n_source);
        case MigrationKernelSpec::Mechanism::sublinear: {
            const std::int64_t hi =
                n_source > 0 ? std::llround(std::pow(static_cast<double>(n_source), spec.gamma)) : 0;
            const std::int64_t dn = rng.uniform_int(0, hi);
            return std::min(dn, n_source);
        }
        case MigrationKernelSpec::Mechanism::split:
            throw std::logic_error("draw_delta_n is not defined for the split mechanism");
    }
    throw std::logic_error("unreachable");
}

MigrationRecord aggregate_exchange(SystemState& state, const MigrationKernelSpec& spec, Rng& rng,
                                   bool remove_empty) {
    MigrationRecord rec;
    const std::int64_t n_agg = state.n_aggregates();
    if (n_agg < 2) {
        rec.skipped = true;
        return rec;
    }

    rec.source = static_cast<std::int32_t>(rng.uniform_int(0, n_agg - 1));
    auto dest = static_cast<std::int32_t>(rng.uniform_int(0, n_agg - 2));
    if (dest >= rec.source) ++dest;
    rec.destination = dest;

    std::int32_t from = rec.source;
    std::int32_t to = rec.destination;
    const auto n_src = static_cast<std::int64_t>(state.rosters[static_cast<std::size_t>(from)].size());
    std::int64_t moved;
    if (spec.mechanism == MigrationKernelSpec::Mechanism::split) {
        const auto n_dst = static_cast<std::int64_t>(state.rosters[static_cast<std::size_t>(to)].size());
        const std::int64_t pooled = n_src + n_dst;
        const std::int64_t src_new = rng.uniform_int(0, pooled);
        moved = n_src - src_new;
        if (moved < 0) {  // the re-split grew the source; agents flow the other way
            std::swap(from, to);
            moved = -moved;
            rec.source = from;
            rec.destination = to;
        }
    } else {
        moved = draw_delta_n(spec, n_src, rng);
    }
    rec.delta_n = moved;

    for (std::int64_t k = 0; k < moved; ++k) {
        auto& roster = state.rosters[static_cast<std::size_t>(from)];
        const auto pos = rng.uniform_int(0, static_cast<std::int64_t>(roster.size()) - 1);
        move_agent(state, roster[static_cast<std::size_t>(pos)], from, to);
    }

    if (remove_empty && moved > 0 && state.rosters[static_cast<std::size_t>(from)].empty())
        remove_aggregate(state, from);
    return rec;
}

}  // namespace aggecon
