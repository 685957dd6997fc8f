#pragma once

#include <string>

#include "aggecon/engine.hpp"

namespace aggecon {

// Strict JSON config for a run. Keys mirror the RunConfig field names; unknown
// keys are errors (reported with their full path), not warnings. Optional keys
// and their defaults:
//   transactions_per_step  1
//   migrations_per_step    1
//   sample_every           10
//   entropy_bin_width      total_money / (20 * n_aggregates)
//   remove_empty           false
//   money_kernel.rule      "split"
//   size_spec.sigma_d      0 (fixed kind)
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Canonical serialization (keys sorted, defaults made explicit). Parsing the
// output reproduces the identical effective configuration.
std::string run_config_to_json(const RunConfig& config);

// FNV-1a of the canonical serialization; stamped into output headers.
std::string config_hash(const RunConfig& config);

}  // namespace aggecon
