#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aggecon/model.hpp"

namespace aggecon {

// Distribution validation of pooled equilibrium aggregate samples against the
// closed-form laws fixed by (Na, D, M).
struct ValidationThresholds {
    double tv_size = 0.02;    // empirical sizes vs finite composition pmf
    double ks_wealth = 0.03;  // pooled wealths vs the size-mixture of Beta laws
};

struct ConditionalBinResult {
    std::int64_t d_lo = 0;
    std::int64_t d_hi = 0;
    std::int64_t n = 0;
    double ks = 0.0;
};

struct ValidationReport {
    std::int64_t n_size_samples = 0;
    std::int64_t n_wealth_samples = 0;
    double tv_size_finite = 0.0;
    // Same comparison against the geometric large-Na law, conditioned on d >= 1
    // (that law has no mass at zero). Only meaningful when D >> Na.
    double tv_size_large_na = 0.0;
    // KS of the wealths of non-empty aggregates against the d >= 1 mixture;
    // the zero-wealth atom is identical to the size-0 atom and is covered by
    // the size total-variation check.
    double ks_wealth_mixture = 0.0;
    std::vector<ConditionalBinResult> conditional;  // wealth | size-bin checks
    bool size_ok = false;
    bool wealth_ok = false;
    bool passed() const { return size_ok && wealth_ok; }
};

// CDF of the equilibrium wealth mixture sum_d p(d) Beta(d, D-d) (with the
// size-0 atom at zero), evaluated through the binomial-tail identity
// I_x(d, D-d) = P(Bin(D-1, x) >= d). Exact up to a < 1e-12 truncation.
class WealthMixtureCdf {
public:
    WealthMixtureCdf(std::int64_t na, std::int64_t big_d, double big_m);
    // Restrict the size mixture to d in [d_lo, d_hi] (renormalized).
    WealthMixtureCdf(std::int64_t na, std::int64_t big_d, double big_m, std::int64_t d_lo,
                     std::int64_t d_hi);
    double operator()(double wealth) const;

private:
    std::int64_t big_d_;
    double big_m_;
    std::vector<double> size_cdf_;  // cumulative clamped size pmf over [0, D]
};

ValidationReport validate_distributions(const std::vector<std::int64_t>& sizes,
                                        const std::vector<double>& wealths,
                                        const MacroInvariants& inv,
                                        const ValidationThresholds& thresholds = {});

// Single-aggregate cross-check: agent wealths of a snapshot against the
// exponential law with mean M/D. Returns the KS distance.
double single_aggregate_exponential_ks(const std::vector<double>& agent_wealths, const MacroInvariants& inv);

// Reads pooled per-aggregate samples written by the run command
// (columns step, aggregate_id, size, wealth).
void read_aggregate_samples_csv(const std::string& path, std::vector<std::int64_t>& sizes,
                                std::vector<double>& wealths);

// Reads the wealth column of a snapshot CSV (agent_id, aggregate_id, wealth).
std::vector<double> read_snapshot_wealths_csv(const std::string& path);

// Reads the snapshot metadata sidecar.
struct SnapshotMeta {
    MacroInvariants invariants;
    std::uint64_t seed = 0;
    std::uint64_t step_count = 0;
};
SnapshotMeta read_snapshot_meta(const std::string& path);

}  // namespace aggecon
