#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cts/learning.hpp"

namespace cts {

// Parses, validates, and runs one experiment described by a JSON config,
// writing result.json plus any kind-specific CSVs into out_dir (created if
// absent). Returns the result document. Supported kinds: clear, nash,
// nash-utc, nash-conjectured, learn, calibrate, spread-stats, verify.
// Throws ConfigError for invalid configs, Error for failed computations.
nlohmann::json run_experiment(const nlohmann::json& config, const std::string& out_dir);

// Applies one "dot.path=value" assignment onto the config; the value parses
// as JSON when possible, otherwise as a string. Missing intermediate objects
// are created.
void apply_override(nlohmann::json& config, const std::string& assignment);

// One learning run tagged for the multi-run trajectory series.
struct LabeledRun {
    std::string run_id;
    const std::vector<RoundRecord>* records = nullptr;
    double q_to = 0.0;
};

// Plot-ready series writers. Columns:
//   selection:  round, agent_id, cumulative_nash_pct   (from window_begin on)
//   trajectory: run_id, round, q_ratio, spread
//   correction: round, q_cts, q_to, q_star
void write_nash_selection_series(std::ostream& out, const std::vector<RoundRecord>& records,
                                 std::size_t window_begin);
void write_trajectory_series(std::ostream& out, const std::vector<LabeledRun>& runs);
void write_correction_series(std::ostream& out, const std::vector<RoundRecord>& records,
                             double q_to, double q_star);

// Full per-round log: round, q_cts, spread, then arm/theta/reward/nash per
// agent.
void write_rounds_csv(std::ostream& out, const std::vector<RoundRecord>& records,
                      const std::vector<Bidder>& bidders);

}  // namespace cts
