#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "aggecon/model.hpp"

namespace aggecon::theory {

// Constants of the large-aggregate-count equilibrium law
//   p(m, d) = C * binom(m+d-1, d-1) * exp(-beta m) * exp(-alpha (d-1)),
// fixed by the macroscopic invariants:
//   C = Na/(D+M),  alpha = -ln((D-Na)/(D+M)),  beta = -ln(M/(D+M)).
// They satisfy exp(-alpha) + exp(-beta) = 1 - C < 1, the series convergence
// condition.
struct EquilibriumConstants {
    double c = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

// Throws std::domain_error unless D > Na and M > 0.
EquilibriumConstants equilibrium_constants(const MacroInvariants& inv);

// Joint pmf over integer wealth m >= 0 and size d >= 1 (discrete-coin
// convention). Binomials are evaluated through log-gamma.
double joint_pmf_large_na(std::int64_t m, std::int64_t d, const EquilibriumConstants& k);

// Size marginal: geometric-type law
//   p(d) = C e^alpha e^{-alpha d} / (1 - e^{-beta})^d,  d >= 1,
// which simplifies to (Na/(D-Na)) ((D-Na)/D)^d. Mean D/Na.
double size_marginal_large_na(std::int64_t d, const EquilibriumConstants& k);

// Wealth marginal: p(m) = C e^beta e^{-beta(m+1)} / (1 - e^{-alpha})^{m+1},
// m >= 0. Mean M/Na.
double wealth_marginal_large_na(std::int64_t m, const EquilibriumConstants& k);

// Finite-count size pmf over d in [0, D], derived from equiprobable weak
// compositions of D agents into Na labeled aggregates.
//
// The `uncorrected` variant evaluates binom(D-d+Na-1, Na-1)/binom(D+Na-1, Na-1),
// which over-counts and does not normalize (its sum is 2 at Na=2, D=2); it is
// kept behind a flag for comparison. The `corrected` variant,
// binom(D-d+Na-2, Na-2)/binom(D+Na-1, Na-1), counts compositions of the
// remaining D-d agents into the remaining Na-1 aggregates and matches the
// enumeration oracle exactly.
enum class SizePmfVariant { corrected, uncorrected };
double size_pmf_finite(std::int64_t d, std::int64_t na, std::int64_t big_d,
                       SizePmfVariant variant = SizePmfVariant::corrected);

// Conditional density of aggregate wealth m in [0, M] given size d:
// Beta(d, D-d) in m/M, scaled by 1/M. Requires 1 <= d <= D-1.
double wealth_density_given_size(double m, std::int64_t d, std::int64_t big_d, double big_m);

// Joint density p(d) * p(m | d) with the corrected size pmf.
double joint_finite(double m, std::int64_t d, std::int64_t na, std::int64_t big_d, double big_m,
                    SizePmfVariant variant = SizePmfVariant::corrected);

// Exact size distribution of the first part over all weak compositions of
// big_d into na labeled parts, by explicit enumeration. Refuses instances
// with more than max_compositions compositions.
struct CompositionTable {
    std::vector<std::uint64_t> counts;  // counts[d], d in [0, big_d]
    std::uint64_t total = 0;            // number of compositions enumerated
    double prob(std::int64_t d) const {
        return static_cast<double>(counts[static_cast<std::size_t>(d)]) / static_cast<double>(total);
    }
};
CompositionTable enumerate_compositions_oracle(std::int64_t na, std::int64_t big_d,
                                               std::uint64_t max_compositions = 20000);

// One cell of an occupation table: count aggregates with wealth m and size d.
struct OccupationCell {
    std::int64_t m = 0;
    std::int64_t d = 0;
    std::int64_t count = 0;
};

// Exact ln W(n) of an occupation table with sum(count) == na:
//   ln Na! - sum ln n_{m,d}! + sum n_{m,d} ln binom(m+d-1, d-1).
double log_multiplicity(const std::vector<OccupationCell>& occupation, std::int64_t na);

// ln binom(n, k) via log-gamma; -inf when k is outside [0, n].
double lchoose(std::int64_t n, std::int64_t k);

}  // namespace aggecon::theory
