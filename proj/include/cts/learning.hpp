#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cts/clearing.hpp"
#include "cts/spread.hpp"
#include "cts/tolerances.hpp"

namespace cts {

// Finite action set of one agent: theta values in $/h, strictly increasing.
struct ActionGrid {
    std::vector<double> actions;
};

// Uniform grid of m points on [lo, hi]. When snap is given it is clamped to
// [lo, hi] and the nearest grid point is replaced by it, so the grid contains
// that action exactly.
ActionGrid make_uniform_grid(double lo, double hi, int m, std::optional<double> snap = {});

// Index of the grid point closest to theta; lowest index wins ties.
std::size_t nearest_action(const ActionGrid& grid, double theta);

struct AgentState {
    ActionGrid grid;
    std::vector<double> avg_reward_r;       // running mean reward per arm, $/h
    std::vector<std::int64_t> pull_count_t; // pulls per arm
    double rho = 2.0;                       // exploration weight, >= 0
};

AgentState make_agent(ActionGrid grid, double rho = 2.0);

// Increment T^k, then fold the reward into the running mean:
// R^k += (r - R^k) / T^k.
void ucb_update(AgentState& state, std::size_t arm, double reward);

// argmax over j of R^j + rho * sqrt(ln(sum T) / T^j), lowest index on ties.
// Every arm must have been pulled at least once.
std::size_t ucb_select(const AgentState& state);

struct RoundRecord {
    std::int64_t round = 0;
    std::vector<std::size_t> chosen_arm;
    std::vector<double> chosen_theta;   // $/h per agent
    double q_cts = 0.0;                 // MW cleared this round
    double spread = 0.0;                // realized settlement spread at q_cts, $/MWh
    std::vector<double> reward;         // $/h per agent
    std::vector<bool> nash_flag;        // chosen action equals the agent's Nash action
};

// How agents cover their arms before UCB takes over.
//
// StaggeredEntry (default): agents enter one at a time in a seeded order.
// Each plays its arms once, in a seeded order, during its own block of
// rounds, and records rewards from its block onward; agents that have not
// entered yet bid their lowest arm without recording. Initialization spans
// sum_i M_i rounds. Rationale: with simultaneous entry the opening rounds
// price every arm against a transient all-low field, which freezes cheap
// arms at stale averages that hundreds of corrective pulls cannot repair.
//
// SynchronizedIndexOrder: every agent plays arm t in round t and records;
// initialization spans max_i M_i rounds. Kept as an option for comparison.
enum class InitScheme { StaggeredEntry, SynchronizedIndexOrder };

struct RepeatedGameConfig {
    double rho = 2.0;
    std::int64_t rounds = 3000;
    std::uint64_t seed = 0;
    InitScheme init = InitScheme::StaggeredEntry;
    // Additive zero-mean noise on the settlement spread, $/MWh. One draw per
    // round when positive; zero keeps the run fully deterministic apart from
    // the seeded entry and arm orders.
    double settlement_noise_std = 0.0;
    // Reference Nash actions, one per agent, mapped onto each grid by nearest
    // point for the nash_flag column. Empty leaves every flag false.
    std::vector<double> nash_thetas;
};

// Rounds consumed by the initialization phase under the given scheme.
std::int64_t init_rounds(const std::vector<ActionGrid>& grids, InitScheme scheme);

// Repeated play of the clearing game. Every round each agent picks a theta
// from its grid, the profile clears against so_model (schedule and
// allocations), and rewards settle at the settlement model's spread at the
// cleared flow: reward_i = settlement_spread(q_cts) * x_i - c_i * x_i. When
// settlement and so_model coincide this is exactly the one-shot payoff.
// Identical seed and config give a bitwise-identical record series.
std::vector<RoundRecord> run_repeated_game(const SpreadModel& settlement,
                                           const SpreadModel& so_model,
                                           const std::vector<Bidder>& bidders,
                                           const std::vector<ActionGrid>& grids,
                                           const RepeatedGameConfig& config,
                                           const Tolerances& tol = {});

struct TrajectoryStats {
    double mean_q_ratio = 0.0;  // q_cts / q_to over the window
    double median_q_ratio = 0.0;
    double mean_spread = 0.0;   // $/MWh
    double median_spread = 0.0;
    // Per agent: cumulative Nash-selection percentage after each window round.
    std::vector<std::vector<double>> cumulative_nash_pct;
    // Last entry of each series above.
    std::vector<double> final_nash_pct;
};

// Summary over records[window_begin, window_end); window_end == 0 means "to
// the end". Callers usually pass init_rounds() as window_begin so statistics
// describe converged play.
TrajectoryStats trajectory_stats(const std::vector<RoundRecord>& records, double q_to,
                                 std::size_t window_begin = 0, std::size_t window_end = 0);

}  // namespace cts
