#include "cts/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cts/errors.hpp"

namespace cts {

void validate_roster(const std::vector<Bidder>& bidders) {
    if (bidders.empty()) {
        throw ConfigError("empty_roster", "bidder roster is empty");
    }
    for (const Bidder& b : bidders) {
        if (!(b.liquidity_b > 0.0) || !std::isfinite(b.liquidity_b)) {
            throw ConfigError("liquidity_nonpositive",
                              "bidder " + b.id + ": liquidity must be positive, got " +
                                  std::to_string(b.liquidity_b));
        }
        if (b.cost_c < 0.0 || !std::isfinite(b.cost_c)) {
            throw ConfigError("cost_negative",
                              "bidder " + b.id + ": transaction cost must be nonnegative");
        }
        for (const UtcPosition& u : b.utc) {
            if (u.beta_in < 0.0) {
                throw ConfigError("utc_beta_negative",
                                  "bidder " + b.id + ", node " + u.node_id +
                                      ": beta_in must be nonnegative");
            }
        }
    }
}

ClearingResult clear(const SpreadModel& model, const std::vector<Bidder>& bidders,
                     const BidProfile& profile, const Tolerances& tol) {
    validate_roster(bidders);
    const std::size_t n = bidders.size();
    if (profile.thetas.size() != n) {
        throw ConfigError("misaligned_profile",
                          "profile carries " + std::to_string(profile.thetas.size()) +
                              " bids for " + std::to_string(n) + " bidders");
    }
    double sum_b = 0.0;
    double sum_theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (profile.thetas[i] < 0.0 || !std::isfinite(profile.thetas[i])) {
            throw ConfigError("negative_theta",
                              "bidder " + bidders[i].id + ": theta must be nonnegative");
        }
        sum_b += bidders[i].liquidity_b;
        sum_theta += profile.thetas[i];
    }

    ClearingResult res;
    res.allocations_x.reserve(n);

    if (sum_theta == 0.0) {
        // All-zero bids: the stack is flat at full liquidity, so the schedule
        // caps at the smaller of total liquidity and the zero-spread flow and
        // allocation is proportional when liquidity exceeds it.
        const Benchmark bench = model.tie_optimization(tol);
        res.degenerate_zero_theta = true;
        res.q_cts = std::min(sum_b, bench.q_to);
        if (sum_b < bench.q_to) {
            for (const Bidder& b : bidders) res.allocations_x.push_back(b.liquidity_b);
        } else {
            for (const Bidder& b : bidders) {
                res.allocations_x.push_back(b.liquidity_b / sum_b * bench.q_to);
            }
        }
        res.price_p = model.evaluate(res.q_cts);
        return res;
    }

    double q;
    if (model.is_affine()) {
        // Root of the downward branch of (sum B - Q)(alpha - beta Q) = sum theta.
        const double a = model.alpha();
        const double b = model.beta();
        const double p_at_sum_b = a - b * sum_b;
        q = (a + b * sum_b) / (2.0 * b) -
            std::sqrt(p_at_sum_b * p_at_sum_b + 4.0 * b * sum_theta) / (2.0 * b);
    } else {
        // g(Q) = (sum B - Q) P(Q) is strictly decreasing on [0, min(sum B, q_to)]
        // and hits zero at the right end, so a sign change is guaranteed once
        // g(0) >= sum theta.
        const Benchmark bench = model.tie_optimization(tol);
        double hi = std::min(sum_b, bench.q_to);
        auto g = [&](double qq) { return (sum_b - qq) * model.evaluate(qq); };
        if (g(0.0) < sum_theta) {
            throw Error("bids_exceed_spread_surplus",
                        "aggregate bids exceed the spread surplus at zero flow; no "
                        "nonnegative schedule clears this profile");
        }
        double lo = 0.0;
        const double width = tol.bisection_rel_width * std::max(1.0, hi);
        while (hi - lo > width) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) > sum_theta ? lo : hi) = mid;
        }
        q = 0.5 * (lo + hi);
    }

    res.q_cts = q;
    res.price_p = model.evaluate(q);
    for (std::size_t i = 0; i < n; ++i) {
        res.allocations_x.push_back(bidders[i].liquidity_b - profile.thetas[i] / res.price_p);
    }
    return res;
}

double allocation_welfare(const SpreadModel& model, const ClearingResult& result,
                          const Tolerances& tol) {
    return model.welfare(result.q_cts, tol);
}

}  // namespace cts
