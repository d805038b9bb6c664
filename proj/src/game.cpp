#include "cts/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cts/errors.hpp"

namespace cts {

namespace {

std::vector<Bidder> roster_from_liquidities(const std::vector<double>& liquidities) {
    std::vector<Bidder> roster;
    roster.reserve(liquidities.size());
    for (std::size_t i = 0; i < liquidities.size(); ++i) {
        roster.push_back(Bidder{std::to_string(i + 1), liquidities[i], 0.0, {}});
    }
    return roster;
}

std::size_t argmax_pivot(const std::vector<double>& values, bool require_unique) {
    std::size_t m = 0;
    bool tied = false;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[m]) {
            m = i;
            tied = false;
        } else if (values[i] == values[m]) {
            tied = true;
        }
    }
    if (tied && require_unique) {
        throw Error("ambiguous_pivot",
                    "maximal liquidity is not unique; the equilibrium pivot is ambiguous");
    }
    return m;
}

EfficiencyReport efficiency_report(const SpreadModel& model, double q_cts, Regime regime,
                                   double sum_b, const Benchmark& bench, const Tolerances& tol) {
    EfficiencyReport report;
    report.regime = regime;
    report.eta = model.welfare(q_cts, tol) / bench.welfare_at_q_to;
    switch (regime) {
        case Regime::High:
            report.lower_bound = 1.0;
            break;
        case Regime::Intermediate:
            report.lower_bound = 0.75;
            break;
        case Regime::Low: {
            const double z = model.beta() * sum_b / model.alpha();
            report.z = z;
            report.lower_bound = 2.0 * z - z * z;
            break;
        }
    }
    return report;
}

void validate_conjecture(const ConjecturedGameSpec& spec) {
    if (spec.n_players < 1) {
        throw ConfigError("n_players_invalid", "conjectured game needs at least one player");
    }
    if (!(spec.liquidity_b > 0.0)) {
        throw ConfigError("liquidity_nonpositive", "conjectured game needs positive liquidity");
    }
    if (spec.cost_c < 0.0) {
        throw ConfigError("cost_negative", "transaction cost must be nonnegative");
    }
    if (!(spec.bidder_alpha > 0.0) || !(spec.bidder_beta > 0.0)) {
        throw ConfigError("conjecture_invalid",
                          "bidder spread parameters must be positive");
    }
    if (!(spec.so_beta > 0.0)) {
        throw ConfigError("so_beta_nonpositive", "operator spread slope must be positive");
    }
    if (!(spec.so_alpha > 0.0)) {
        throw ConfigError("so_alpha_nonpositive", "operator spread intercept must be positive");
    }
    const double q_to_bidder = spec.bidder_alpha / spec.bidder_beta;
    const double budget = spec.consistency_budget.value_or(q_to_bidder);
    const double gap = std::abs(spec.n_players * spec.liquidity_b - q_to_bidder);
    if (gap > budget / spec.n_players) {
        throw ConfigError("liquidity_inconsistent",
                          "N B = " + std::to_string(spec.n_players * spec.liquidity_b) +
                              " strays from alpha/beta = " + std::to_string(q_to_bidder) +
                              " by more than the consistency budget");
    }
}

double conjectured_gamma(const ConjecturedGameSpec& spec) {
    const double n = static_cast<double>(spec.n_players);
    return spec.cost_c * (2.0 - 1.0 / n) + spec.bidder_beta * spec.liquidity_b;
}

}  // namespace

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::High: return "high";
        case Regime::Intermediate: return "intermediate";
        case Regime::Low: return "low";
    }
    return "unknown";
}

double payoff(const SpreadModel& model, const std::vector<Bidder>& bidders,
              const BidProfile& profile, std::size_t i, const Tolerances& tol) {
    if (i >= bidders.size()) {
        throw ConfigError("player_index_out_of_range",
                          "player index " + std::to_string(i) + " with " +
                              std::to_string(bidders.size()) + " bidders");
    }
    const ClearingResult res = clear(model, bidders, profile, tol);
    return res.price_p * bidders[i].liquidity_b - profile.thetas[i] -
           bidders[i].cost_c * res.allocations_x[i];
}

double payoff_utc(const SpreadModel& model, const std::vector<Bidder>& bidders,
                  const BidProfile& profile, std::size_t i, const Tolerances& tol) {
    if (i >= bidders.size()) {
        throw ConfigError("player_index_out_of_range",
                          "player index " + std::to_string(i) + " with " +
                              std::to_string(bidders.size()) + " bidders");
    }
    const ClearingResult res = clear(model, bidders, profile, tol);
    double total = res.price_p * bidders[i].liquidity_b - profile.thetas[i] -
                   bidders[i].cost_c * res.allocations_x[i];
    for (const UtcPosition& u : bidders[i].utc) {
        total += (u.alpha_in - u.beta_in * res.q_cts - u.da_spread) * u.megawatts_f;
    }
    return total;
}

double payoff_conjectured(const ConjecturedGameSpec& spec, const std::vector<double>& thetas,
                          std::size_t i, bool exact_price) {
    validate_conjecture(spec);
    if (thetas.size() != static_cast<std::size_t>(spec.n_players)) {
        throw ConfigError("misaligned_profile", "profile size does not match n_players");
    }
    if (i >= thetas.size()) {
        throw ConfigError("player_index_out_of_range", "player index out of range");
    }
    double sum_theta = 0.0;
    for (double t : thetas) {
        if (t < 0.0 || !std::isfinite(t)) {
            throw ConfigError("negative_theta", "theta must be nonnegative");
        }
        sum_theta += t;
    }
    const double b = spec.liquidity_b;
    const double c = spec.cost_c;
    if (sum_theta == 0.0) return -c * b;
    double p;
    if (exact_price) {
        const double n_b = spec.n_players * b;
        const double p_at_nb = spec.bidder_alpha - spec.bidder_beta * n_b;
        p = 0.5 * (p_at_nb + std::sqrt(p_at_nb * p_at_nb + 4.0 * spec.bidder_beta * sum_theta));
    } else {
        p = std::sqrt(spec.bidder_beta * sum_theta);
    }
    return p * b - thetas[i] - c * (b - thetas[i] / p);
}

bool check_existence_condition(const SpreadModel& model, double sum_b,
                               const std::vector<double>& q_grid) {
    for (double q : q_grid) {
        if (q < 0.0 || q > sum_b) {
            throw ConfigError("existence_grid_out_of_range",
                              "grid point " + std::to_string(q) + " outside [0, sum B]");
        }
        if (model.second_derivative(q) * (sum_b - q) < 2.0 * model.derivative(q)) {
            return false;
        }
    }
    return true;
}

EquilibriumProfile nash_baseline(double alpha, double beta,
                                 const std::vector<double>& liquidities,
                                 bool require_unique_max, const Tolerances& tol) {
    const SpreadModel model = SpreadModel::affine(alpha, beta);
    const std::vector<Bidder> roster = roster_from_liquidities(liquidities);
    validate_roster(roster);
    const double sum_b = std::accumulate(liquidities.begin(), liquidities.end(), 0.0);
    const std::size_t m = argmax_pivot(liquidities, require_unique_max);
    const double b_m = liquidities[m];
    const double q_to = alpha / beta;

    EquilibriumProfile eq;
    eq.thetas_ne.assign(liquidities.size(), 0.0);
    // Case order matters at boundaries: High first, then Low.
    if (sum_b - b_m >= q_to) {
        eq.regime = Regime::High;
    } else if (sum_b + b_m <= q_to) {
        eq.regime = Regime::Low;
    } else {
        eq.regime = Regime::Intermediate;
        eq.marginal_player = m;
        const double p_at_sum_b = alpha - beta * sum_b;
        eq.thetas_ne[m] = (beta * beta * b_m * b_m - p_at_sum_b * p_at_sum_b) / (4.0 * beta);
    }
    eq.clearing = clear(model, roster, BidProfile{eq.thetas_ne}, tol);
    eq.efficiency = efficiency_report(model, eq.clearing.q_cts, eq.regime, sum_b,
                                      model.tie_optimization(tol), tol);
    return eq;
}

EquilibriumProfile nash_utc(double alpha, double beta, const std::vector<Bidder>& bidders,
                            bool require_unique_max, const Tolerances& tol) {
    const SpreadModel model = SpreadModel::affine(alpha, beta);
    validate_roster(bidders);
    std::vector<double> effective;
    effective.reserve(bidders.size());
    double sum_b = 0.0;
    for (const Bidder& b : bidders) {
        double eff = b.liquidity_b;
        for (const UtcPosition& u : b.utc) {
            if (u.megawatts_f < 0.0) {
                throw ConfigError("utc_exposure_negative",
                                  "bidder " + b.id + ": equilibrium analysis needs "
                                  "nonnegative UTC exposure");
            }
            eff += u.beta_in / beta * u.megawatts_f;
        }
        effective.push_back(eff);
        sum_b += b.liquidity_b;
    }
    const std::size_t m = argmax_pivot(effective, require_unique_max);
    const double eff_m = effective[m];
    const double q_to = alpha / beta;

    EquilibriumProfile eq;
    eq.thetas_ne.assign(bidders.size(), 0.0);
    if (sum_b - eff_m >= q_to) {
        eq.regime = Regime::High;
    } else if (sum_b + eff_m <= q_to) {
        eq.regime = Regime::Low;
    } else {
        eq.regime = Regime::Intermediate;
        eq.marginal_player = m;
        // Schedule lands at (q_to + sum B - effective_m) / 2; a large enough
        // UTC book pushes it negative, where the equilibrium derivation no
        // longer applies.
        if (q_to + sum_b - eff_m < 0.0) {
            throw Error("equilibrium_schedule_negative",
                        "UTC exposure pushes the equilibrium schedule below zero");
        }
        const double p_at_sum_b = alpha - beta * sum_b;
        eq.thetas_ne[m] = (beta * beta * eff_m * eff_m - p_at_sum_b * p_at_sum_b) / (4.0 * beta);
    }
    eq.clearing = clear(model, bidders, BidProfile{eq.thetas_ne}, tol);
    eq.efficiency = efficiency_report(model, eq.clearing.q_cts, eq.regime, sum_b,
                                      model.tie_optimization(tol), tol);
    return eq;
}

EquilibriumProfile nash_conjectured(const ConjecturedGameSpec& spec, const Tolerances& tol) {
    validate_conjecture(spec);
    const double gamma = conjectured_gamma(spec);
    const double theta = gamma * gamma / (4.0 * spec.n_players * spec.bidder_beta);

    const SpreadModel so_model = SpreadModel::affine(spec.so_alpha, spec.so_beta);
    std::vector<Bidder> roster;
    roster.reserve(spec.n_players);
    for (int i = 0; i < spec.n_players; ++i) {
        roster.push_back(Bidder{std::to_string(i + 1), spec.liquidity_b, spec.cost_c, {}});
    }

    EquilibriumProfile eq;
    eq.thetas_ne.assign(spec.n_players, theta);
    eq.regime = Regime::Intermediate;  // symmetric interior equilibrium
    eq.clearing = clear(so_model, roster, BidProfile{eq.thetas_ne}, tol);
    eq.efficiency =
        efficiency_report(so_model, eq.clearing.q_cts, Regime::Intermediate,
                          spec.n_players * spec.liquidity_b, so_model.tie_optimization(tol), tol);
    return eq;
}

CorrectionCheck correction_condition(const ConjecturedGameSpec& spec, const Tolerances& tol) {
    if (!spec.star_alpha.has_value() || !spec.star_beta.has_value()) {
        throw ConfigError("star_parameters_missing",
                          "correction check needs the realized spread parameters");
    }
    if (!(*spec.star_beta > 0.0)) {
        throw ConfigError("star_beta_nonpositive", "realized spread slope must be positive");
    }
    const EquilibriumProfile eq = nash_conjectured(spec, tol);
    const double gamma = conjectured_gamma(spec);
    const double n_b = spec.n_players * spec.liquidity_b;

    CorrectionCheck check;
    check.q_to = spec.so_alpha / spec.so_beta;
    check.q_star = *spec.star_alpha / *spec.star_beta;
    check.q_cts = eq.clearing.q_cts;
    check.lhs = gamma * gamma / (spec.bidder_beta * spec.so_beta);
    check.rhs = 8.0 * (check.q_to - check.q_star) * (check.q_to - 2.0 * check.q_star + n_b);
    check.holds = check.lhs <= check.rhs;
    check.dist_cts = std::abs(check.q_cts - check.q_star);
    check.dist_to = std::abs(check.q_to - check.q_star);
    check.closer_direct = check.dist_cts < check.dist_to;
    return check;
}

VerifyVerdict verify_equilibrium(const SpreadModel& model, const std::vector<Bidder>& bidders,
                                 const BidProfile& candidate, const VerifyOptions& options,
                                 const Tolerances& tol) {
    validate_roster(bidders);
    if (candidate.thetas.size() != bidders.size()) {
        throw ConfigError("misaligned_profile", "candidate profile does not match the roster");
    }
    if (options.grid_size < 3) {
        throw ConfigError("grid_too_small", "deviation scan needs at least three grid points");
    }
    if (!options.radius.has_value() && !model.is_affine()) {
        throw ConfigError("radius_required",
                          "the default deviation radius beta*B^2 needs an affine model");
    }
    if (options.radius.has_value() && !(*options.radius > 0.0)) {
        throw ConfigError("radius_invalid", "deviation radius must be positive");
    }

    auto pay = [&](const BidProfile& profile, std::size_t i) {
        return options.kind == PayoffKind::Utc ? payoff_utc(model, bidders, profile, i, tol)
                                               : payoff(model, bidders, profile, i, tol);
    };

    BidProfile scan = candidate;
    for (std::size_t i = 0; i < bidders.size(); ++i) {
        const double base = pay(candidate, i);
        const double threshold = tol.deviation_gain_rel * std::max(1.0, std::abs(base));
        const double radius = options.radius.has_value()
                                  ? *options.radius
                                  : model.beta() * bidders[i].liquidity_b * bidders[i].liquidity_b;
        const double lo = std::max(bidders[i].cost_c * bidders[i].liquidity_b,
                                   candidate.thetas[i] - radius);
        const double hi = candidate.thetas[i] + radius;
        double best_gain = threshold;  // strict > keeps the lowest index on ties
        std::optional<double> best_theta;
        for (int k = 0; k < options.grid_size; ++k) {
            const double theta = lo + (hi - lo) * k / (options.grid_size - 1);
            scan.thetas[i] = theta;
            const double gain = pay(scan, i) - base;
            if (gain > best_gain) {
                best_gain = gain;
                best_theta = theta;
            }
        }
        scan.thetas[i] = candidate.thetas[i];
        if (best_theta.has_value()) {
            return VerifyVerdict{Deviation{i, *best_theta, best_gain}};
        }
    }
    return VerifyVerdict{};
}

VerifyVerdict verify_conjectured(const ConjecturedGameSpec& spec,
                                 const std::vector<double>& candidate, int grid_size,
                                 std::optional<double> radius, bool exact_price,
                                 const Tolerances& tol) {
    validate_conjecture(spec);
    if (candidate.size() != static_cast<std::size_t>(spec.n_players)) {
        throw ConfigError("misaligned_profile", "candidate profile does not match n_players");
    }
    if (grid_size < 3) {
        throw ConfigError("grid_too_small", "deviation scan needs at least three grid points");
    }
    const double r = radius.value_or(spec.bidder_beta * spec.liquidity_b * spec.liquidity_b);
    if (!(r > 0.0)) {
        throw ConfigError("radius_invalid", "deviation radius must be positive");
    }

    std::vector<double> scan = candidate;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        const double base = payoff_conjectured(spec, candidate, i, exact_price);
        const double threshold = tol.deviation_gain_rel * std::max(1.0, std::abs(base));
        const double lo = std::max(0.0, candidate[i] - r);
        const double hi = candidate[i] + r;
        double best_gain = threshold;
        std::optional<double> best_theta;
        for (int k = 0; k < grid_size; ++k) {
            const double theta = lo + (hi - lo) * k / (grid_size - 1);
            scan[i] = theta;
            const double gain = payoff_conjectured(spec, scan, i, exact_price) - base;
            if (gain > best_gain) {
                best_gain = gain;
                best_theta = theta;
            }
        }
        scan[i] = candidate[i];
        if (best_theta.has_value()) {
            return VerifyVerdict{Deviation{i, *best_theta, best_gain}};
        }
    }
    return VerifyVerdict{};
}

}  // namespace cts
