#pragma once

#include <string>
#include <vector>

#include "cts/spread.hpp"
#include "cts/tolerances.hpp"

namespace cts {

// One up-to-congestion position held by a bidder: exposure of megawatts_f at
// an internal node whose real-time spread against the trading hub moves as
// alpha_in - beta_in * Q with the interface flow; da_spread is the day-ahead
// leg locked in when the position was taken.
struct UtcPosition {
    std::string node_id;
    double megawatts_f = 0.0;  // MW
    double alpha_in = 0.0;     // $/MWh
    double beta_in = 0.0;      // $/MWh per MW, must be >= 0
    double da_spread = 0.0;    // $/MWh
};

struct Bidder {
    std::string id;
    double liquidity_b = 0.0;  // MW, must be > 0
    double cost_c = 0.0;       // $/MWh per-unit transaction charge, must be >= 0
    std::vector<UtcPosition> utc;
};

// Bid parameters aligned index-by-index with a bidder roster. theta is the
// strategic scalar of the transport offer x(p) = B - theta / p.
struct BidProfile {
    std::vector<double> thetas;  // $/h each, >= 0
};

struct ClearingResult {
    double q_cts = 0.0;                 // MW scheduled on the tie line
    double price_p = 0.0;               // $/MWh clearing spread
    std::vector<double> allocations_x;  // MW per bidder; may be negative
    bool degenerate_zero_theta = false; // all-zero bids cleared by the proportional rule
};

// Throws ConfigError on empty roster, nonpositive liquidity, negative cost,
// or negative UTC slope.
void validate_roster(const std::vector<Bidder>& bidders);

// Clears the bid profile against the spread model.
//
// Sum(theta) > 0: q_cts is the unique root of (sum B - Q) * P(Q) = sum theta;
// price is P(q_cts); allocations are x_i = B_i - theta_i / p, returned
// unclamped (negative allocations are meaningful and preserved). Affine
// models use the closed-form root; general models bisect and refuse profiles
// whose bids exceed the spread surplus at zero flow.
//
// Sum(theta) == 0: q_cts = min(sum B, q_to); allocations are full liquidity
// when sum B < q_to, otherwise proportional shares of q_to; the degenerate
// flag is set and the price is still reported as P(q_cts) so downstream
// payoff code sees one consistent price.
ClearingResult clear(const SpreadModel& model, const std::vector<Bidder>& bidders,
                     const BidProfile& profile, const Tolerances& tol = {});

// Welfare collected at the cleared schedule; used by efficiency ratios.
double allocation_welfare(const SpreadModel& model, const ClearingResult& result,
                          const Tolerances& tol = {});

}  // namespace cts
