// Acceptance gate: every release criterion runs here, one line of output per
// criterion, process exit code equal to the number of failures. Each check
// recomputes its expected values through an independent route (hand bisection,
// analytic derivatives, closed forms) rather than trusting the library's own
// intermediate results.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "cts/calibrate.hpp"
#include "cts/clearing.hpp"
#include "cts/game.hpp"
#include "cts/learning.hpp"
#include "cts/rng.hpp"
#include "cts/spread.hpp"

namespace fs = std::filesystem;
using namespace cts;

namespace {

// Calibrated affine spread: chosen so the five-bidder equilibrium bid comes
// out at exactly 4882 $/h with q_to = 1493 MW.
constexpr double kCalBeta = 19528.0 / 727753.0;
constexpr double kCalAlpha = 1493.0 * kCalBeta;
const std::vector<double> kScarceLiquidity = {298.0, 223.0, 194.0, 149.0, 893.0};
const std::vector<double> kAmpleLiquidity = {596.0, 522.0, 640.0, 373.0, 893.0};

struct Outcome {
    bool pass = true;
    std::string detail;
};

// First failing condition wins; later requirements are still evaluated but do
// not overwrite the message.
struct Gate {
    bool ok = true;
    std::string why;
    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            why = msg;
        }
    }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[192];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

bool close_rel(double got, double want, double rel) {
    return std::abs(got - want) <= rel * std::max(1.0, std::abs(want));
}

std::vector<Bidder> plain_roster(const std::vector<double>& liquidities, double cost = 0.0) {
    std::vector<Bidder> bidders;
    bidders.reserve(liquidities.size());
    for (std::size_t i = 0; i < liquidities.size(); ++i) {
        bidders.push_back(Bidder{std::to_string(i + 1), liquidities[i], cost, {}});
    }
    return bidders;
}

// ---- criterion 1 -----------------------------------------------------------
// Closed-form affine clearing vs a 200-step hand bisection of
// (sum B - Q) P(Q) = sum theta, plus the fixed-point identity and the
// library's general-model bisection path on the same instances.

Outcome clearing_oracle() {
    Rng rng(101);
    Gate gate;
    double worst = 0.0;
    Tolerances tight;
    tight.bisection_rel_width = 1e-12;

    for (int trial = 0; trial < 1000 && gate.ok; ++trial) {
        const std::size_t n = 1 + rng.below(10);
        const double alpha = rng.uniform(1.0, 100.0);
        const double beta = rng.uniform(0.001, 10.0);
        std::vector<double> liquidities(n);
        double sum_b = 0.0;
        for (double& b : liquidities) {
            b = rng.uniform(0.1, 50.0);
            sum_b += b;
        }
        const std::vector<Bidder> bidders = plain_roster(liquidities);

        BidProfile profile;
        profile.thetas.assign(n, 0.0);
        const bool degenerate = trial % 20 == 0;
        if (!degenerate) {
            const double total = rng.uniform(0.01, 0.95) * alpha * sum_b;
            std::vector<double> weights(n);
            double weight_sum = 0.0;
            for (double& w : weights) {
                w = rng.uniform01() + 1e-3;
                weight_sum += w;
            }
            for (std::size_t i = 0; i < n; ++i) {
                profile.thetas[i] = total * weights[i] / weight_sum;
            }
        }
        const double sum_theta =
            std::accumulate(profile.thetas.begin(), profile.thetas.end(), 0.0);

        const SpreadModel model = SpreadModel::affine(alpha, beta);
        const ClearingResult res = clear(model, bidders, profile);

        if (degenerate) {
            gate.require(res.degenerate_zero_theta, "zero-theta profile not flagged degenerate");
            gate.require(res.q_cts == std::min(sum_b, alpha / beta),
                         "degenerate schedule is not min(sum B, q_to)");
            continue;
        }

        // Hand bisection: h is strictly decreasing with a sign change inside.
        auto h = [&](double q) { return (sum_b - q) * (alpha - beta * q) - sum_theta; };
        double lo = 0.0;
        double hi = std::min(sum_b, alpha / beta);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (h(mid) >= 0.0 ? lo : hi) = mid;
        }
        const double q_oracle = 0.5 * (lo + hi);
        worst = std::max(worst, std::abs(res.q_cts - q_oracle) / std::max(1.0, q_oracle));
        gate.require(close_rel(res.q_cts, q_oracle, 1e-8),
                     fmt("closed form %.12g disagrees with bisection %.12g", res.q_cts, q_oracle));

        gate.require(close_rel(res.price_p, alpha - beta * res.q_cts, 1e-8),
                     "cleared price is off the spread curve");
        gate.require(
            std::abs((sum_b - res.q_cts) * res.price_p - sum_theta) <=
                1e-8 * std::max(1.0, sum_theta),
            "fixed-point identity (sum B - Q) P(Q) = sum theta violated");

        double alloc_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double want = liquidities[i] - profile.thetas[i] / res.price_p;
            gate.require(close_rel(res.allocations_x[i], want, 1e-8),
                         "allocation does not match B - theta/p");
            alloc_sum += res.allocations_x[i];
        }
        gate.require(close_rel(alloc_sum, res.q_cts, 1e-8),
                     "allocations do not sum to the schedule");

        // Same instance through the general (callable) model path.
        const SpreadModel general = SpreadModel::general(
            [alpha, beta](double q) { return alpha - beta * q; },
            [beta](double) { return -beta; }, [](double) { return 0.0; },
            std::max(sum_b, alpha / beta));
        const ClearingResult gres = clear(general, bidders, profile, tight);
        gate.require(close_rel(gres.q_cts, res.q_cts, 1e-8),
                     "general-model bisection disagrees with the closed form");
    }
    return {gate.ok,
            gate.ok ? fmt("1000 instances, max rel gap %.2e", worst) : gate.why};
}

// ---- criterion 2 -----------------------------------------------------------
// 200 random games per liquidity regime: the returned profile survives a
// 2001-point deviation scan and the efficiency bound of its regime holds.

Outcome equilibrium_regimes() {
    Rng rng(202);
    Gate gate;
    int counts[3] = {0, 0, 0};  // High, Intermediate, Low

    while (gate.ok && (counts[0] < 200 || counts[1] < 200 || counts[2] < 200)) {
        int want = counts[0] < 200 ? 0 : (counts[1] < 200 ? 1 : 2);
        const std::size_t n = 2 + rng.below(5);
        std::vector<double> liquidities(n);
        double sum_b = 0.0;
        double b_max = 0.0;
        for (double& b : liquidities) {
            b = rng.uniform(1.0, 100.0);
            sum_b += b;
            b_max = std::max(b_max, b);
        }
        const double beta = rng.uniform(0.01, 2.0);
        double q_to;
        if (want == 0) {
            q_to = rng.uniform(0.05, 1.0) * (sum_b - b_max);
        } else if (want == 1) {
            q_to = (sum_b - b_max) + rng.uniform(0.02, 0.98) * 2.0 * b_max;
        } else {
            q_to = (sum_b + b_max) * rng.uniform(1.0, 2.0);
        }
        const double alpha = beta * q_to;

        const EquilibriumProfile eq = nash_baseline(alpha, beta, liquidities);
        const Regime expected =
            want == 0 ? Regime::High : (want == 1 ? Regime::Intermediate : Regime::Low);
        gate.require(eq.regime == expected, "instance landed in the wrong regime");
        if (eq.regime != expected) break;

        BidProfile candidate;
        candidate.thetas = eq.thetas_ne;
        const VerifyVerdict verdict = verify_equilibrium(
            SpreadModel::affine(alpha, beta), plain_roster(liquidities), candidate);
        gate.require(verdict.confirmed(),
                     verdict.confirmed()
                         ? ""
                         : fmt("profitable deviation of %.3g found (regime %d)",
                               verdict.violation->gain, static_cast<double>(want)));

        const double eta = eq.efficiency.eta;
        if (want == 0) {
            gate.require(std::abs(eta - 1.0) <= 1e-9, "High-regime efficiency is not 1");
        } else if (want == 1) {
            gate.require(eta >= 0.75 - 1e-9 && eta <= 1.0 + 1e-9,
                         fmt("Intermediate efficiency %.12g outside [0.75, 1]", eta));
        } else {
            const double z = beta * sum_b / alpha;
            gate.require(std::abs(eta - (2.0 * z - z * z)) <= 1e-9,
                         "Low-regime efficiency does not meet 2z - z^2");
        }
        ++counts[want];
    }
    return {gate.ok, gate.ok ? "600 games confirmed, efficiency bounds hold per regime"
                             : gate.why};
}

// ---- criterion 3 -----------------------------------------------------------
// The calibrated five-bidder market: pivot bid near 4882 $/h (±1%), schedule
// within ±0.5% of the reference 1176 MW.

Outcome calibrated_point() {
    Gate gate;
    const EquilibriumProfile eq = nash_baseline(kCalAlpha, kCalBeta, kScarceLiquidity);
    for (int i = 0; i < 4; ++i) {
        gate.require(eq.thetas_ne[i] == 0.0, "an inframarginal bidder bids nonzero");
    }
    const double pivot = eq.thetas_ne[4];
    gate.require(std::abs(pivot - 4882.0) <= 0.01 * 4882.0,
                 fmt("pivot bid %.6g outside 4882 +- 1%%", pivot));
    gate.require(eq.marginal_player.has_value() && *eq.marginal_player == 4,
                 "wrong marginal player");
    const double q = eq.clearing.q_cts;
    gate.require(std::abs(q - 1176.0) <= 0.005 * 1176.0,
                 fmt("schedule %.6g outside 1176 +- 0.5%%", q));
    return {gate.ok,
            gate.ok ? fmt("theta_5 = %.6g $/h, q_cts = %.6g MW (reference 1176)", pivot, q)
                    : gate.why};
}

// ---- criterion 4 -----------------------------------------------------------
// Conjectured-game equilibrium: the analytic first-order condition of the
// truncated payoff vanishes at the returned bid, the schedule matches the
// price-first closed form, and a fee sweep moves bids up and flow down.

Outcome conjectured_foc() {
    Rng rng(404);
    Gate gate;
    double worst_foc = 0.0;

    for (int trial = 0; trial < 100 && gate.ok; ++trial) {
        ConjecturedGameSpec spec;
        // Rejection sampling keeps the equilibrium inside the operators'
        // spread surplus; beyond it no nonnegative flow clears the bids.
        for (int attempt = 0;; ++attempt) {
            spec.n_players = 2 + static_cast<int>(rng.below(7));
            const double n = spec.n_players;
            spec.liquidity_b = rng.uniform(50.0, 1000.0);
            spec.bidder_beta = rng.uniform(0.005, 0.1);
            spec.bidder_alpha =
                spec.bidder_beta * n * spec.liquidity_b * (1.0 + rng.uniform(-0.5 / n, 0.5 / n));
            spec.cost_c = trial % 4 == 0 ? 0.0 : rng.uniform(0.0, 10.0);
            spec.so_alpha = spec.bidder_alpha * (1.0 + rng.uniform(-0.1, 0.1));
            spec.so_beta = spec.bidder_beta * (1.0 + rng.uniform(-0.1, 0.1));
            const double gamma =
                spec.cost_c * (2.0 - 1.0 / n) + spec.bidder_beta * spec.liquidity_b;
            const double sum_theta = n * gamma * gamma / (4.0 * n * spec.bidder_beta);
            if (sum_theta <= 0.9 * n * spec.liquidity_b * spec.so_alpha) break;
            if (attempt > 1000) return {false, "could not sample a feasible instance"};
        }
        const double n = spec.n_players;

        const EquilibriumProfile eq = nash_conjectured(spec);
        const double theta = eq.thetas_ne[0];
        for (double t : eq.thetas_ne) {
            gate.require(t == theta, "conjectured equilibrium is not symmetric");
        }

        // d/d theta_i of p B - theta - c (B - theta / p) at p = sqrt(beta sum theta).
        const double p = std::sqrt(spec.bidder_beta * n * theta);
        const double foc = spec.liquidity_b * spec.bidder_beta / (2.0 * p) - 1.0 +
                           spec.cost_c / p -
                           spec.cost_c * theta * spec.bidder_beta / (2.0 * p * p * p);
        worst_foc = std::max(worst_foc, std::abs(foc));
        gate.require(std::abs(foc) <= 1e-8, fmt("first-order residual %.3e at theta %.6g",
                                                std::abs(foc), theta));

        // Price-first closed form for the schedule under the operators' model.
        const double p_nb = spec.so_alpha - spec.so_beta * n * spec.liquidity_b;
        const double price =
            0.5 * (p_nb + std::sqrt(p_nb * p_nb + 4.0 * spec.so_beta * n * theta));
        const double q_closed = n * spec.liquidity_b - n * theta / price;
        gate.require(
            std::abs(eq.clearing.q_cts - q_closed) <= 1e-10 * std::max(1.0, std::abs(q_closed)),
            fmt("schedule %.12g vs closed form %.12g", eq.clearing.q_cts, q_closed));
    }

    // Fee sweep on the calibrated symmetric market.
    double prev_theta = -1.0;
    double prev_q = 1e300;
    for (double c : {0.0, 2.0, 4.0, 8.0}) {
        ConjecturedGameSpec spec;
        spec.n_players = 5;
        spec.liquidity_b = 1493.0 / 5.0;
        spec.cost_c = c;
        spec.bidder_alpha = kCalAlpha;
        spec.bidder_beta = kCalBeta;
        spec.so_alpha = kCalAlpha;
        spec.so_beta = kCalBeta;
        const EquilibriumProfile eq = nash_conjectured(spec);
        gate.require(eq.thetas_ne[0] > prev_theta, "bid not strictly increasing in the fee");
        gate.require(eq.clearing.q_cts < prev_q, "schedule not strictly decreasing in the fee");
        prev_theta = eq.thetas_ne[0];
        prev_q = eq.clearing.q_cts;
    }
    return {gate.ok,
            gate.ok ? fmt("100 instances, max |FOC| %.2e; fee sweep monotone", worst_foc)
                    : gate.why};
}

// ---- criterion 5 -----------------------------------------------------------
// Nonnegative UTC portfolios never raise the schedule; the five-bidder
// example shifts the flow down by about 63 MW.

Outcome utc_shift() {
    Rng rng(505);
    Gate gate;

    for (int trial = 0; trial < 100 && gate.ok; ++trial) {
        const std::size_t n = 2 + rng.below(5);
        std::vector<double> liquidities(n);
        double sum_b = 0.0;
        for (double& b : liquidities) {
            b = rng.uniform(5.0, 100.0);
            sum_b += b;
        }
        const double beta = rng.uniform(0.01, 1.0);
        const double alpha = beta * rng.uniform(0.3, 1.5) * sum_b;

        std::vector<Bidder> bidders = plain_roster(liquidities);
        for (Bidder& b : bidders) {
            const std::size_t legs = rng.below(3);
            for (std::size_t k = 0; k < legs; ++k) {
                b.utc.push_back(UtcPosition{"n" + std::to_string(k),
                                            rng.uniform(0.0, b.liquidity_b),
                                            rng.uniform(-10.0, 10.0),
                                            rng.uniform(0.0, 0.1 * beta),
                                            rng.uniform(-5.0, 5.0)});
            }
        }

        const EquilibriumProfile base = nash_baseline(alpha, beta, liquidities);
        const EquilibriumProfile with_utc = nash_utc(alpha, beta, bidders);
        gate.require(with_utc.clearing.q_cts <= base.clearing.q_cts + 1e-9,
                     fmt("UTC raised the schedule: %.9g > %.9g", with_utc.clearing.q_cts,
                         base.clearing.q_cts));
    }

    // Five-bidder example: one 800 MW up-to-congestion leg on the first
    // bidder. Only beta = 1/45 reproduces the reference effective liquidity
    // of 1018 MW, so that slope anchors this check.
    const double beta = 1.0 / 45.0;
    const double alpha = 1493.0 * beta;
    std::vector<Bidder> bidders = plain_roster(kScarceLiquidity);
    bidders[0].utc.push_back(UtcPosition{"in", 800.0, 35.7, 0.02, 0.0});
    const EquilibriumProfile base = nash_baseline(alpha, beta, kScarceLiquidity);
    const EquilibriumProfile with_utc = nash_utc(alpha, beta, bidders);
    const double shift = base.clearing.q_cts - with_utc.clearing.q_cts;
    gate.require(std::abs(shift - 63.0) <= 0.1 * 63.0,
                 fmt("example shift %.4g MW outside 63 +- 10%%", shift));
    gate.require(with_utc.marginal_player.has_value() && *with_utc.marginal_player == 0,
                 "UTC exposure did not move the pivot to bidder 1");

    return {gate.ok, gate.ok ? fmt("100 instances monotone; example shift %.4g MW "
                                   "(schedule %.6g reference 1113)",
                                   shift, with_utc.clearing.q_cts)
                             : gate.why};
}

// ---- criteria 6 and 7 ------------------------------------------------------

struct LearnRun {
    TrajectoryStats stats;
    std::vector<RoundRecord> records;
    double q_to = 0.0;
};

LearnRun run_liquidity_config(const std::vector<double>& liquidities, std::uint64_t seed) {
    const SpreadModel model = SpreadModel::affine(kCalAlpha, kCalBeta);
    const EquilibriumProfile eq = nash_baseline(kCalAlpha, kCalBeta, liquidities);
    std::vector<ActionGrid> grids;
    grids.reserve(liquidities.size());
    for (std::size_t i = 0; i < liquidities.size(); ++i) {
        grids.push_back(make_uniform_grid(0.0, 6000.0, 10, eq.thetas_ne[i]));
    }
    RepeatedGameConfig config;
    config.rho = 2.0;
    config.rounds = 3000;
    config.seed = seed;
    config.nash_thetas = eq.thetas_ne;

    LearnRun run;
    run.q_to = model.tie_optimization().q_to;
    run.records = run_repeated_game(model, model, plain_roster(liquidities), grids, config);
    run.stats = trajectory_stats(
        run.records, run.q_to,
        static_cast<std::size_t>(init_rounds(grids, config.init)));
    return run;
}

// Ten seeded replications per reference configuration; a seed passes when
// every agent's cumulative Nash-selection rate clears the reference
// percentage minus 5 points. At least 8 of 10 seeds must pass.
Outcome learning_reproduction() {
    Gate gate;
    const struct {
        const char* name;
        const std::vector<double>* liquidities;
        std::array<double, 5> target;
    } configs[] = {
        {"intermediate", &kScarceLiquidity, {99.9, 92.1, 99.9, 99.6, 99.2}},
        {"high", &kAmpleLiquidity, {90.1, 99.9, 86.4, 92.4, 88.2}},
    };
    std::string detail;
    for (const auto& cfg : configs) {
        int passes = 0;
        double min_pct = 100.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const LearnRun run = run_liquidity_config(*cfg.liquidities, seed);
            bool ok = true;
            for (std::size_t i = 0; i < 5; ++i) {
                min_pct = std::min(min_pct, run.stats.final_nash_pct[i]);
                if (run.stats.final_nash_pct[i] < cfg.target[i] - 5.0) ok = false;
            }
            if (ok) ++passes;
        }
        gate.require(passes >= 8, fmt("only %.0f of 10 seeds passed", passes));
        if (!detail.empty()) detail += ", ";
        detail += cfg.name + fmt(": %.0f/10 seeds (min agent %.1f%%)",
                                 static_cast<double>(passes), min_pct);
    }
    return {gate.ok, gate.ok ? detail : gate.why};
}

// Reference contrast between the two liquidity configurations: tight spread
// under high liquidity, scarce flow and a wide spread gap under intermediate.
Outcome trajectory_contrast() {
    Gate gate;
    const LearnRun inter = run_liquidity_config(kScarceLiquidity, 1);
    const LearnRun high = run_liquidity_config(kAmpleLiquidity, 1);

    gate.require(high.stats.median_spread < 2.0,
                 fmt("high-liquidity median spread %.3g not under 2 $/MWh",
                     high.stats.median_spread));
    gate.require(inter.stats.median_q_ratio < 0.80,
                 fmt("intermediate q ratio %.4g not under 0.80", inter.stats.median_q_ratio));
    const double gap = inter.stats.median_spread - high.stats.median_spread;
    gate.require(gap > 6.0, fmt("spread gap %.3g not above 6 $/MWh", gap));
    return {gate.ok, gate.ok ? fmt("median spreads %.2f vs %.2f $/MWh, scarce ratio %.3f",
                                   inter.stats.median_spread, high.stats.median_spread,
                                   inter.stats.median_q_ratio)
                             : gate.why};
}

// ---- criterion 8 -----------------------------------------------------------
// Forecast-error correction: when the closed-form condition holds (c = 0,
// operators 10% off), learned schedules land closer to the realized optimum
// than the operators' target in most rounds; an 8 $/MWh fee on a
// condition-violating configuration flips that majority.

Outcome forecast_correction() {
    Gate gate;
    const double b = 1493.0 / 5.0;
    const double q_star = kCalAlpha / kCalBeta;

    struct Leg {
        double cost;
        double so_alpha;
        double so_beta;
        bool expect_holds;
        std::uint64_t seed;
    };
    const Leg legs[] = {
        {0.0, 1.1 * kCalAlpha, 0.9 * kCalBeta, true, 8801},
        {8.0, 1.1 * kCalAlpha, kCalBeta, false, 8802},
    };

    std::string detail;
    for (const Leg& leg : legs) {
        ConjecturedGameSpec spec;
        spec.n_players = 5;
        spec.liquidity_b = b;
        spec.cost_c = leg.cost;
        spec.bidder_alpha = kCalAlpha;
        spec.bidder_beta = kCalBeta;
        spec.so_alpha = leg.so_alpha;
        spec.so_beta = leg.so_beta;
        spec.star_alpha = kCalAlpha;
        spec.star_beta = kCalBeta;

        const CorrectionCheck check = correction_condition(spec);
        // Recompute both sides of the condition from scratch.
        const double gamma = leg.cost * (2.0 - 1.0 / 5.0) + kCalBeta * b;
        const double lhs = gamma * gamma / (kCalBeta * leg.so_beta);
        const double q_to = leg.so_alpha / leg.so_beta;
        const double rhs = 8.0 * (q_to - q_star) * (q_to - 2.0 * q_star + 5.0 * b);
        gate.require(close_rel(check.lhs, lhs, 1e-9), "condition lhs mismatch");
        gate.require(close_rel(check.rhs, rhs, 1e-9), "condition rhs mismatch");
        gate.require(check.holds == (lhs <= rhs), "condition verdict mismatch");
        gate.require(check.holds == leg.expect_holds,
                     fmt("condition verdict unexpected at c = %.0f", leg.cost));
        gate.require(check.closer_direct == check.holds,
                     "direct distance comparison contradicts the closed form");

        // Seeded learning run: operators clear on their conjecture, rewards
        // settle on the realized spread.
        const EquilibriumProfile eq = nash_conjectured(spec);
        const double grid_lo = std::max(0.0, leg.cost * b);
        const double grid_hi = leg.cost > 0.0 ? 6000.0 : 1200.0;
        std::vector<ActionGrid> grids;
        for (int i = 0; i < 5; ++i) {
            grids.push_back(make_uniform_grid(grid_lo, grid_hi, 10, eq.thetas_ne[0]));
        }
        RepeatedGameConfig config;
        config.rounds = 3000;
        config.seed = leg.seed;
        config.nash_thetas = eq.thetas_ne;
        const std::vector<RoundRecord> records = run_repeated_game(
            SpreadModel::affine(kCalAlpha, kCalBeta),
            SpreadModel::affine(leg.so_alpha, leg.so_beta),
            plain_roster(std::vector<double>(5, b), leg.cost), grids, config);

        int closer = 0;
        for (const RoundRecord& rec : records) {
            if (std::abs(rec.q_cts - q_star) < std::abs(q_to - q_star)) ++closer;
        }
        if (leg.expect_holds) {
            gate.require(closer > 1500,
                         fmt("only %.0f of 3000 rounds corrected the forecast",
                             static_cast<double>(closer)));
        } else {
            gate.require(closer < 1500,
                         fmt("%.0f of 3000 rounds still corrected despite the fee",
                             static_cast<double>(closer)));
        }
        if (!detail.empty()) detail += ", ";
        detail += fmt("c=%.0f: %.0f/3000 rounds closer", leg.cost,
                      static_cast<double>(closer));
    }
    return {gate.ok, gate.ok ? detail : gate.why};
}

// ---- criterion 9 -----------------------------------------------------------
// Noiseless synthetic regression must recover the generating coefficients
// exactly; statistics on the full-year interchange datasets run only when the
// files have been fetched.

fs::path dataset_path(const char* env_name, const char* file_name) {
    if (const char* env = std::getenv(env_name)) return fs::path(env);
    return fs::path(CTS_TEST_DATA_DIR) / ".." / ".." / "data" / file_name;
}

Outcome calibration_recovery() {
    Gate gate;
    Rng rng(909);
    const double alpha = 40.0;
    const double beta = 0.027;
    std::vector<MarketSample> samples;
    samples.reserve(500);
    for (int i = 0; i < 500; ++i) {
        MarketSample s;
        s.timestamp = 1527811200 + 3600 * static_cast<std::int64_t>(i);
        s.price_area_a = rng.uniform(20.0, 60.0);
        s.interchange_q = rng.uniform(50.0, 2000.0);
        s.price_area_b = s.price_area_a + alpha - beta * s.interchange_q;
        samples.push_back(s);
    }
    const RegressionFit fit = fit_regression(samples, Dependent::AreaB);
    gate.require(close_rel(fit.w1, 1.0, 1e-8), fmt("w1 = %.12g, expected 1", fit.w1));
    gate.require(close_rel(fit.w2, -beta, 1e-8), fmt("w2 = %.12g, expected -0.027", fit.w2));
    gate.require(close_rel(fit.w3, alpha, 1e-8), fmt("w3 = %.12g, expected 40", fit.w3));
    gate.require(close_rel(fit.adjusted_r2, 1.0, 1e-8),
                 fmt("adjusted R^2 = %.12g, expected 1", fit.adjusted_r2));
    gate.require(close_rel(fit.implied_alpha, alpha, 1e-8), "implied alpha off");
    gate.require(close_rel(fit.implied_beta, beta, 1e-8), "implied beta off");

    std::string detail = "synthetic recovery exact";

    const fs::path isone = dataset_path("CTS_DATA_NYISO_ISONE", "nyiso_isone_2018.csv");
    if (fs::exists(isone)) {
        const LoadReport loaded = load_samples(isone.string(), ColumnMap{});
        const RegressionFit year = fit_regression(loaded.samples, Dependent::AreaB);
        gate.require(year.w1 >= 0.95 && year.w1 <= 1.05,
                     fmt("dataset w1 = %.4g outside [0.95, 1.05]", year.w1));
        gate.require(year.adjusted_r2 >= 0.93 && year.adjusted_r2 <= 0.97,
                     fmt("dataset adjusted R^2 = %.4g outside [0.93, 0.97]", year.adjusted_r2));
        const SpreadStats stats = spread_stats(loaded.samples);
        gate.require(std::abs(stats.mean - 0.44) <= 0.01, "dataset spread mean off 0.44");
        gate.require(std::abs(stats.abs_mean - 5.59) <= 0.01,
                     "dataset absolute spread mean off 5.59");
        gate.require(std::abs(stats.std_dev - 18.14) <= 0.01, "dataset spread std off 18.14");
        detail += "; NYISO-ISONE statistics verified";
    } else {
        detail += "; NYISO-ISONE legs skipped (dataset not fetched)";
    }

    const fs::path pjm = dataset_path("CTS_DATA_NYISO_PJM", "nyiso_pjm_2018.csv");
    if (fs::exists(pjm)) {
        const LoadReport loaded = load_samples(pjm.string(), ColumnMap{});
        const SpreadStats stats = spread_stats(loaded.samples);
        gate.require(std::abs(stats.abs_mean - 8.92) <= 0.01,
                     "dataset absolute spread mean off 8.92");
        gate.require(std::abs(stats.std_dev - 22.11) <= 0.01, "dataset spread std off 22.11");
        detail += "; NYISO-PJM statistics verified";
    } else {
        detail += "; NYISO-PJM legs skipped (dataset not fetched)";
    }
    return {gate.ok, gate.ok ? detail : gate.why};
}

// ---- criterion 10 ----------------------------------------------------------
// Bandit bookkeeping: the incremental mean equals a batch mean over 10^4
// rewards, and every selection of a 10^4-round run matches an argmax
// recomputed from the raw statistics.

Outcome ucb_correctness() {
    Gate gate;
    Rng rng(1010);

    AgentState single = make_agent(ActionGrid{{0.0}});
    long double batch = 0.0L;
    for (int i = 0; i < 10000; ++i) {
        const double reward = rng.uniform(-50.0, 50.0);
        batch += reward;
        ucb_update(single, 0, reward);
    }
    const double batch_mean = static_cast<double>(batch / 10000.0L);
    gate.require(std::abs(single.avg_reward_r[0] - batch_mean) <=
                     1e-10 * std::max(1.0, std::abs(batch_mean)),
                 fmt("incremental mean %.15g vs batch %.15g", single.avg_reward_r[0],
                     batch_mean));

    ActionGrid grid;
    for (int k = 0; k < 10; ++k) grid.actions.push_back(k);
    AgentState agent = make_agent(grid, 2.0);
    for (std::size_t k = 0; k < 10; ++k) {
        ucb_update(agent, k, rng.uniform(0.0, 1.0) + 0.05 * static_cast<double>(k));
    }
    for (int round = 0; round < 10000 && gate.ok; ++round) {
        const std::size_t chosen = ucb_select(agent);
        // Index-order argmax over mean plus exploration bonus, recomputed raw.
        double total = 0.0;
        for (std::int64_t t : agent.pull_count_t) total += static_cast<double>(t);
        std::size_t best = 0;
        double best_value = -1e300;
        for (std::size_t k = 0; k < agent.avg_reward_r.size(); ++k) {
            const double value =
                agent.avg_reward_r[k] +
                2.0 * std::sqrt(std::log(total) / static_cast<double>(agent.pull_count_t[k]));
            if (value > best_value) {
                best_value = value;
                best = k;
            }
        }
        gate.require(chosen == best, fmt("selection diverged at round %.0f",
                                         static_cast<double>(round)));
        ucb_update(agent, chosen,
                   rng.uniform(0.0, 1.0) + 0.05 * static_cast<double>(chosen));
    }
    return {gate.ok, gate.ok ? "10^4-step mean and selection replays agree" : gate.why};
}

}  // namespace

int main() {
    struct Row {
        int id;
        const char* title;
        Outcome (*fn)();
        double budget_s;  // 0 = no stated runtime bound
    };
    const Row rows[] = {
        {1, "clearing closed form vs bisection oracle", &clearing_oracle, 5.0},
        {2, "equilibria survive deviation scans per regime", &equilibrium_regimes, 60.0},
        {3, "calibrated five-bidder equilibrium point", &calibrated_point, 0.0},
        {4, "conjectured equilibrium FOC and closed form", &conjectured_foc, 0.0},
        {5, "up-to-congestion schedules shift down", &utc_shift, 0.0},
        {6, "seeded learning locks onto Nash actions", &learning_reproduction, 120.0},
        {7, "liquidity regimes contrast in spread and flow", &trajectory_contrast, 0.0},
        {8, "forecast correction holds and fees break it", &forecast_correction, 0.0},
        {9, "spread regression recovery and data statistics", &calibration_recovery, 0.0},
        {10, "bandit mean and selection bookkeeping", &ucb_correctness, 0.0},
    };

    int failures = 0;
    for (const Row& row : rows) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = row.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("unhandled error: ") + e.what()};
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (outcome.pass && row.budget_s > 0.0 && elapsed > row.budget_s) {
            outcome.pass = false;
            outcome.detail = fmt("runtime %.1f s exceeds the %.0f s budget", elapsed,
                                 row.budget_s);
        }
        std::printf("[%s] criterion %2d, %s: %s [%.2f s]\n", outcome.pass ? "PASS" : "FAIL",
                    row.id, row.title, outcome.detail.c_str(), elapsed);
        if (!outcome.pass) ++failures;
    }
    std::printf("acceptance: %d of 10 criteria passed\n", 10 - failures);
    return failures;
}
