#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cts/clearing.hpp"
#include "cts/spread.hpp"
#include "cts/tolerances.hpp"

namespace cts {

// Liquidity regime relative to the zero-spread schedule q_to:
//   High:         sum B - B_m >= q_to  (rivals alone cover demand)
//   Low:          sum B + B_m <= q_to  (even everyone together falls short)
//   Intermediate: otherwise             (the largest bidder is pivotal)
enum class Regime { High, Intermediate, Low };

std::string to_string(Regime regime);

struct EfficiencyReport {
    double eta = 0.0;          // welfare at the schedule / welfare at q_to
    Regime regime = Regime::High;
    std::optional<double> z;   // beta * sum B / alpha; Low regime only
    double lower_bound = 0.0;  // 1 (High), 0.75 (Intermediate), 2z - z^2 (Low)
};

struct EquilibriumProfile {
    std::vector<double> thetas_ne;               // $/h
    std::optional<std::size_t> marginal_player;  // pivot; set in the Intermediate regime
    Regime regime = Regime::High;
    ClearingResult clearing;
    EfficiencyReport efficiency;
};

// Symmetric game where every bidder holds the same liquidity and believes in
// an affine spread (bidder_alpha, bidder_beta) while the operators clear
// against (so_alpha, so_beta). The optional star parameters describe the
// realized ex-post spread when it is known.
struct ConjecturedGameSpec {
    int n_players = 0;
    double liquidity_b = 0.0;  // MW, common to all players
    double cost_c = 0.0;       // $/MWh
    double bidder_alpha = 0.0;
    double bidder_beta = 0.0;
    double so_alpha = 0.0;
    double so_beta = 0.0;
    std::optional<double> star_alpha;
    std::optional<double> star_beta;
    // |N B - bidder_alpha/bidder_beta| must stay within consistency_budget / N.
    // Defaults to bidder_alpha/bidder_beta, a loose O(1/N) check.
    std::optional<double> consistency_budget;
};

// Payoff of player i at the cleared profile: p * B_i - theta_i - c * x_i.
double payoff(const SpreadModel& model, const std::vector<Bidder>& bidders,
              const BidProfile& profile, std::size_t i, const Tolerances& tol = {});

// payoff() plus the bidder's up-to-congestion legs evaluated at the cleared
// flow: sum_k (alpha_in^k - beta_in^k * Q - da_spread^k) * f^k.
double payoff_utc(const SpreadModel& model, const std::vector<Bidder>& bidders,
                  const BidProfile& profile, std::size_t i, const Tolerances& tol = {});

// Payoff in the conjectured-spread game, using the truncated price
// p = sqrt(beta * sum theta): pi = p B - theta_i - c (B - theta_i / p).
// exact_price swaps in the full quadratic-root clearing price of the
// conjectured model for sensitivity experiments. All-zero profiles return the
// limiting value -c B.
double payoff_conjectured(const ConjecturedGameSpec& spec, const std::vector<double>& thetas,
                          std::size_t i, bool exact_price = false);

// Equilibrium existence check: P''(Q)(sum B - Q) >= 2 P'(Q) at every grid
// point. Always true for affine models. Grid points must lie in [0, sum_b].
bool check_existence_condition(const SpreadModel& model, double sum_b,
                               const std::vector<double>& q_grid);

// Unique equilibrium of the zero-cost game on an affine spread. Exactly one
// player may bid a positive theta (the pivot, Intermediate regime only); with
// tied maximal liquidities the pivot is ambiguous and the call errors unless
// require_unique_max is cleared.
EquilibriumProfile nash_baseline(double alpha, double beta,
                                 const std::vector<double>& liquidities,
                                 bool require_unique_max = true,
                                 const Tolerances& tol = {});

// Equilibrium when bidders hold up-to-congestion portfolios: the case split
// runs on effective liquidities B_i + sum_k (beta_in^k / beta) f^k, so UTC
// exposure can move the pivot and shifts the schedule downward.
EquilibriumProfile nash_utc(double alpha, double beta, const std::vector<Bidder>& bidders,
                            bool require_unique_max = true, const Tolerances& tol = {});

// Symmetric equilibrium of the conjectured-spread game:
// theta = gamma^2 / (4 N beta) with gamma = c (2 - 1/N) + beta B, cleared
// against the operators' model. Always interior (every bid positive), so the
// profile reports the Intermediate regime with no marginal player.
EquilibriumProfile nash_conjectured(const ConjecturedGameSpec& spec, const Tolerances& tol = {});

struct CorrectionCheck {
    bool holds = false;    // lhs <= rhs on the configured parameters
    double lhs = 0.0;      // gamma^2 / (bidder_beta * so_beta)
    double rhs = 0.0;      // 8 (q_to - q_star)(q_to - 2 q_star + N B)
    double q_cts = 0.0;
    double q_to = 0.0;
    double q_star = 0.0;
    double dist_cts = 0.0;       // |q_cts - q_star|
    double dist_to = 0.0;        // |q_to - q_star|
    bool closer_direct = false;  // dist_cts < dist_to, computed independently
};

// Whether the conjectured-game schedule lands closer to the realized optimum
// q_star than the operators' q_to does. Returns both the closed-form
// inequality and the direct distance comparison so callers can cross-check.
CorrectionCheck correction_condition(const ConjecturedGameSpec& spec, const Tolerances& tol = {});

enum class PayoffKind { Baseline, Utc };

struct VerifyOptions {
    int grid_size = 2001;
    // Scan radius around each candidate theta. Empty means beta * B_i^2 per
    // player, which covers the whole rational action range (affine models
    // only; general models must supply a radius).
    std::optional<double> radius;
    PayoffKind kind = PayoffKind::Baseline;
};

struct Deviation {
    std::size_t player = 0;
    double better_theta = 0.0;
    double gain = 0.0;  // $/h improvement over the candidate payoff
};

struct VerifyVerdict {
    std::optional<Deviation> violation;  // empty when confirmed
    bool confirmed() const { return !violation.has_value(); }
};

// Brute-force check of the Nash property: scans each player's theta over
// grid_size points on [max(c_i B_i, theta_i - radius), theta_i + radius]
// holding the others fixed. Confirmed iff no deviation gains more than
// tol.deviation_gain_rel * max(1, |payoff at candidate|). Reports the lowest
// violating player; within a player, the best gain (lowest grid index on ties).
VerifyVerdict verify_equilibrium(const SpreadModel& model, const std::vector<Bidder>& bidders,
                                 const BidProfile& candidate, const VerifyOptions& options = {},
                                 const Tolerances& tol = {});

// Same oracle against payoff_conjectured. The scan floor is zero: the
// conjectured game carries no c B floor on actions. Default radius is
// bidder_beta * B^2.
VerifyVerdict verify_conjectured(const ConjecturedGameSpec& spec,
                                 const std::vector<double>& candidate, int grid_size = 2001,
                                 std::optional<double> radius = {}, bool exact_price = false,
                                 const Tolerances& tol = {});

}  // namespace cts
