#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aggecon/engine.hpp"
#include "aggecon/stats.hpp"

namespace aggecon {

// One-axis parameter sweep: replicated runs along sigma_d (size heterogeneity)
// or p_in (intra-aggregate interaction probability). Each run's entropy series
// - S_d for the sigma_d axis, S_m for the p_in axis - is fitted with the
// stretched-exponential saturation curve and the characteristic time tau is
// aggregated across replicates.
struct SweepSpec {
    enum class Axis { sigma_d, p_in };
    Axis axis = Axis::sigma_d;
    std::vector<double> values;  // ascending, within the axis domain
    RunConfig base_config;
    std::int64_t replicates = 1;

    void validate() const;
};

SweepSpec parse_sweep_spec(const std::string& json_text);
SweepSpec load_sweep_spec(const std::string& path);

struct SweepRunResult {
    double axis_value = 0.0;
    std::int64_t value_index = 0;
    std::int64_t replicate = 0;
    std::uint64_t seed = 0;
    stats::StretchedExpFit fit;
    ObservableSeries series;
    std::string error;  // non-empty when the run failed; sweep continues
};

struct SweepValueSummary {
    double axis_value = 0.0;
    std::int64_t n = 0;  // successful replicates
    double tau_mean = 0.0;
    double tau_stderr = 0.0;
    double xi_mean = 0.0;
    double a_mean = 0.0;
    double rss_mean = 0.0;
};

struct SweepResult {
    std::vector<SweepRunResult> runs;          // ordered by (value_index, replicate)
    std::vector<SweepValueSummary> summaries;  // ordered by value_index
    bool all_ok = true;
};

// Seed of run (value_index, replicate) is base seed + value_index*replicates +
// replicate, so results are reproducible and independent of scheduling.
// workers <= 0 picks the hardware concurrency.
SweepResult run_sweep(const SweepSpec& spec, int workers = 0);

// Applies one axis value to a copy of the base config.
RunConfig apply_axis_value(const SweepSpec& spec, double value, std::uint64_t seed);

}  // namespace aggecon
