#include "cts/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cts/errors.hpp"
#include "cts/rng.hpp"

namespace cts {

namespace {

void validate_grid(const ActionGrid& grid) {
    if (grid.actions.empty()) {
        throw ConfigError("grid_empty", "action grid has no actions");
    }
    for (std::size_t k = 1; k < grid.actions.size(); ++k) {
        if (!(grid.actions[k] > grid.actions[k - 1])) {
            throw ConfigError("grid_not_increasing", "action grid must be strictly increasing");
        }
    }
}

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    auto mid = values.begin() + n / 2;
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace

ActionGrid make_uniform_grid(double lo, double hi, int m, std::optional<double> snap) {
    if (m < 2) {
        throw ConfigError("grid_too_small", "uniform grid needs at least two points");
    }
    if (!(lo < hi)) {
        throw ConfigError("grid_bounds_invalid", "uniform grid needs lo < hi");
    }
    ActionGrid grid;
    grid.actions.resize(m);
    for (int k = 0; k < m; ++k) {
        grid.actions[k] = lo + (hi - lo) * k / (m - 1);
    }
    if (snap.has_value()) {
        const double target = std::clamp(*snap, lo, hi);
        grid.actions[nearest_action(grid, target)] = target;
    }
    validate_grid(grid);
    return grid;
}

std::size_t nearest_action(const ActionGrid& grid, double theta) {
    if (grid.actions.empty()) {
        throw ConfigError("grid_empty", "action grid has no actions");
    }
    std::size_t best = 0;
    double best_dist = std::abs(grid.actions[0] - theta);
    for (std::size_t k = 1; k < grid.actions.size(); ++k) {
        const double dist = std::abs(grid.actions[k] - theta);
        if (dist < best_dist) {
            best = k;
            best_dist = dist;
        }
    }
    return best;
}

AgentState make_agent(ActionGrid grid, double rho) {
    validate_grid(grid);
    if (rho < 0.0) {
        throw ConfigError("rho_negative", "exploration weight must be nonnegative");
    }
    AgentState state;
    state.avg_reward_r.assign(grid.actions.size(), 0.0);
    state.pull_count_t.assign(grid.actions.size(), 0);
    state.grid = std::move(grid);
    state.rho = rho;
    return state;
}

void ucb_update(AgentState& state, std::size_t arm, double reward) {
    if (arm >= state.avg_reward_r.size()) {
        throw ConfigError("arm_out_of_range", "arm " + std::to_string(arm) + " out of range");
    }
    std::int64_t& t = state.pull_count_t[arm];
    t += 1;
    state.avg_reward_r[arm] += (reward - state.avg_reward_r[arm]) / static_cast<double>(t);
}

std::size_t ucb_select(const AgentState& state) {
    double sum_t = 0.0;
    for (std::int64_t t : state.pull_count_t) {
        if (t < 1) {
            throw Error("select_before_init",
                        "every arm must be pulled once before UCB selection");
        }
        sum_t += static_cast<double>(t);
    }
    const double log_total = std::log(sum_t);
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < state.avg_reward_r.size(); ++k) {
        const double value =
            state.avg_reward_r[k] +
            state.rho * std::sqrt(log_total / static_cast<double>(state.pull_count_t[k]));
        if (value > best_value) {
            best_value = value;
            best = k;
        }
    }
    return best;
}

std::int64_t init_rounds(const std::vector<ActionGrid>& grids, InitScheme scheme) {
    std::int64_t total = 0;
    std::int64_t longest = 0;
    for (const ActionGrid& g : grids) {
        const auto m = static_cast<std::int64_t>(g.actions.size());
        total += m;
        longest = std::max(longest, m);
    }
    return scheme == InitScheme::StaggeredEntry ? total : longest;
}

std::vector<RoundRecord> run_repeated_game(const SpreadModel& settlement,
                                           const SpreadModel& so_model,
                                           const std::vector<Bidder>& bidders,
                                           const std::vector<ActionGrid>& grids,
                                           const RepeatedGameConfig& config,
                                           const Tolerances& tol) {
    validate_roster(bidders);
    const std::size_t n = bidders.size();
    if (grids.size() != n) {
        throw ConfigError("grid_misaligned", "one action grid per bidder required");
    }
    for (std::size_t i = 0; i < n; ++i) {
        validate_grid(grids[i]);
        const double floor = bidders[i].cost_c * bidders[i].liquidity_b;
        if (grids[i].actions.front() < floor - 1e-9) {
            throw ConfigError("grid_below_cost_floor",
                              "bidder " + bidders[i].id + ": grid starts below c*B = " +
                                  std::to_string(floor));
        }
    }
    if (!config.nash_thetas.empty() && config.nash_thetas.size() != n) {
        throw ConfigError("nash_reference_misaligned",
                          "nash_thetas must be empty or one per bidder");
    }
    if (config.settlement_noise_std < 0.0) {
        throw ConfigError("noise_negative", "settlement noise std must be nonnegative");
    }
    const std::int64_t init_len = init_rounds(grids, config.init);
    if (config.rounds < init_len) {
        throw ConfigError("rounds_too_few",
                          "need at least " + std::to_string(init_len) +
                              " rounds to initialize every arm");
    }

    Rng rng(config.seed);

    // Entry schedule. Draw order is fixed (entry permutation, then one arm
    // permutation per agent in index order) so a seed pins the whole phase.
    std::vector<std::int64_t> start(n, 0);
    std::vector<std::int64_t> finish(n);
    std::vector<std::vector<std::size_t>> arm_order(n);
    if (config.init == InitScheme::StaggeredEntry) {
        const std::vector<std::size_t> entry = rng.permutation(n);
        std::int64_t cursor = 0;
        for (std::size_t pos = 0; pos < n; ++pos) {
            const std::size_t agent = entry[pos];
            start[agent] = cursor;
            cursor += static_cast<std::int64_t>(grids[agent].actions.size());
            finish[agent] = cursor;
        }
        for (std::size_t i = 0; i < n; ++i) {
            arm_order[i] = rng.permutation(grids[i].actions.size());
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            finish[i] = static_cast<std::int64_t>(grids[i].actions.size());
        }
    }

    std::vector<AgentState> agents;
    agents.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        agents.push_back(make_agent(grids[i], config.rho));
    }

    constexpr std::size_t kNoArm = static_cast<std::size_t>(-1);
    std::vector<std::size_t> nash_arm(n, kNoArm);
    if (!config.nash_thetas.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            nash_arm[i] = nearest_action(grids[i], config.nash_thetas[i]);
        }
    }

    std::vector<RoundRecord> records;
    records.reserve(config.rounds);
    BidProfile profile;
    profile.thetas.assign(n, 0.0);
    std::vector<std::size_t> arms(n, 0);
    std::vector<bool> recording(n, false);

    for (std::int64_t t = 0; t < config.rounds; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (config.init == InitScheme::StaggeredEntry) {
                if (t < start[i]) {
                    arms[i] = 0;  // waiting to enter: bid the lowest action
                    recording[i] = false;
                } else if (t < finish[i]) {
                    arms[i] = arm_order[i][static_cast<std::size_t>(t - start[i])];
                    recording[i] = true;
                } else {
                    arms[i] = ucb_select(agents[i]);
                    recording[i] = true;
                }
            } else {
                arms[i] = t < finish[i] ? static_cast<std::size_t>(t) : ucb_select(agents[i]);
                recording[i] = true;
            }
            profile.thetas[i] = grids[i].actions[arms[i]];
        }

        const ClearingResult res = clear(so_model, bidders, profile, tol);
        double spread = settlement.evaluate(res.q_cts);
        if (config.settlement_noise_std > 0.0) {
            spread += config.settlement_noise_std * rng.normal();
        }

        RoundRecord record;
        record.round = t;
        record.chosen_arm = arms;
        record.chosen_theta = profile.thetas;
        record.q_cts = res.q_cts;
        record.spread = spread;
        record.reward.resize(n);
        record.nash_flag.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double reward =
                (spread - bidders[i].cost_c) * res.allocations_x[i];
            record.reward[i] = reward;
            record.nash_flag[i] = nash_arm[i] != kNoArm && arms[i] == nash_arm[i];
            if (recording[i]) {
                ucb_update(agents[i], arms[i], reward);
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

TrajectoryStats trajectory_stats(const std::vector<RoundRecord>& records, double q_to,
                                 std::size_t window_begin, std::size_t window_end) {
    if (window_end == 0) window_end = records.size();
    if (records.empty() || window_begin >= window_end || window_end > records.size()) {
        throw ConfigError("empty_window", "trajectory window selects no rounds");
    }
    if (!(q_to > 0.0)) {
        throw ConfigError("q_to_invalid", "q_to must be positive");
    }
    const std::size_t n = records.front().chosen_arm.size();
    const std::size_t len = window_end - window_begin;

    TrajectoryStats stats;
    std::vector<double> ratios;
    std::vector<double> spreads;
    ratios.reserve(len);
    spreads.reserve(len);
    stats.cumulative_nash_pct.assign(n, std::vector<double>());
    for (auto& series : stats.cumulative_nash_pct) series.reserve(len);
    std::vector<std::int64_t> hits(n, 0);

    double sum_ratio = 0.0;
    double sum_spread = 0.0;
    for (std::size_t t = window_begin; t < window_end; ++t) {
        const RoundRecord& rec = records[t];
        const double ratio = rec.q_cts / q_to;
        ratios.push_back(ratio);
        spreads.push_back(rec.spread);
        sum_ratio += ratio;
        sum_spread += rec.spread;
        const auto played = static_cast<double>(t - window_begin + 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (rec.nash_flag[i]) ++hits[i];
            stats.cumulative_nash_pct[i].push_back(100.0 * static_cast<double>(hits[i]) / played);
        }
    }
    stats.mean_q_ratio = sum_ratio / static_cast<double>(len);
    stats.mean_spread = sum_spread / static_cast<double>(len);
    stats.median_q_ratio = median_of(std::move(ratios));
    stats.median_spread = median_of(std::move(spreads));
    stats.final_nash_pct.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        stats.final_nash_pct[i] = stats.cumulative_nash_pct[i].back();
    }
    return stats;
}

}  // namespace cts
