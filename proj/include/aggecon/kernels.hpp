#pragma once

#include <cstdint>

#include "aggecon/model.hpp"
#include "aggecon/rng.hpp"

namespace aggecon {

// Money exchange between two agents.
//
// Partner selection is two-staged: with probability p_in the partner is drawn
// from the payer's own aggregate, otherwise uniformly from all agents outside
// it. A singleton aggregate falls back to the outside branch and a
// single-aggregate system falls back to the inside branch, so every selected
// agent transacts.
//
// Two transfer rules are available:
//   split       - the pair's pooled money is re-divided uniformly at random;
//                 equivalently the transfer is uniform over the whole feasible
//                 range [-m_j, m_i]. This is a Gibbs move for the uniform
//                 (Dirichlet) wealth measure on the simplex and yields the
//                 exponential single-aggregate equilibrium.
//   payer_share - the first-drawn agent pays a uniform fraction of its own
//                 wealth, i.e. delta_m ~ U[0, m_i]. Kept as an explicit
//                 variant; its equilibrium is visibly non-exponential.
struct MoneyKernelSpec {
    enum class Rule { split, payer_share };
    double p_in = 0.0;
    Rule rule = Rule::split;

    void validate() const;
};

// Agent migration between two aggregates. The number of migrants is drawn per
// mechanism (see draw_delta_n); "split" re-divides the pooled pair uniformly,
// which is a Gibbs move for the equiprobable-composition size measure.
struct MigrationKernelSpec {
    enum class Mechanism { split, base, linear, sublinear };
    Mechanism mechanism = Mechanism::base;
    double gamma = 0.0;         // sublinear only; in (0, 1]
    std::int64_t n_hat0 = 0;    // base only; >= 1

    void validate() const;
};

struct TransactionRecord {
    std::int32_t payer = -1;
    std::int32_t partner = -1;
    double delta_m = 0.0;   // positive: payer -> partner
    bool intra = false;     // partner drawn from payer's aggregate
    bool fallback = false;  // branch switched because the drawn one was empty
};

struct MigrationRecord {
    std::int32_t source = -1;
    std::int32_t destination = -1;
    std::int64_t delta_n = 0;  // agents moved source -> destination (>= 0)
    bool skipped = false;      // fewer than two aggregates existed
};

// Applies one money exchange. Requires at least 2 agents. Total money is
// conserved; under the split rule the pair sum is conserved exactly in
// floating point.
TransactionRecord monetary_exchange(SystemState& state, const MoneyKernelSpec& spec, Rng& rng);

// Applies one migration. Migrants are chosen uniformly without replacement
// from the source roster and carry their wealth. A single-aggregate system
// yields a skipped no-op record. When remove_empty is set, an aggregate whose
// roster empties is dropped (otherwise it stays as a size-0 entity).
MigrationRecord aggregate_exchange(SystemState& state, const MigrationKernelSpec& spec, Rng& rng,
                                   bool remove_empty = false);

// Draws the migrant count for the three one-directional mechanisms:
//   base      - U{0..n_hat0}, clamped to n_source
//   linear    - U{0..n_source}
//   sublinear - U{0..round(n_source^gamma)}, clamped to n_source
// The split mechanism does not use this path (it re-draws the source size
// uniformly over the pooled pair inside aggregate_exchange).
std::int64_t draw_delta_n(const MigrationKernelSpec& spec, std::int64_t n_source, Rng& rng);

}  // namespace aggecon
