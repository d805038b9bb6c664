#include "cts/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string_view>

#include "cts/calibrate.hpp"
#include "cts/errors.hpp"
#include "cts/game.hpp"

namespace cts {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

bool log_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("CTS_LAB_LOG");
        return v != nullptr && *v != '\0' && std::string_view(v) != "0";
    }();
    return on;
}

void log_line(const std::string& message) {
    if (log_enabled()) std::cerr << "[cts-lab] " << message << "\n";
}

const json& need(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object()) {
        throw ConfigError("config_invalid", ctx + ": expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError("config_missing_field", ctx + ": missing required field '" + key + "'");
    }
    return *it;
}

double need_number(const json& j, const char* key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_number()) {
        throw ConfigError("config_invalid", ctx + ": '" + key + "' must be a number");
    }
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) {
        throw ConfigError("config_invalid", ctx + ": '" + key + "' must be a number");
    }
    return v.get<double>();
}

std::int64_t integer_or(const json& j, const char* key, std::int64_t fallback,
                        const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) {
        throw ConfigError("config_invalid", ctx + ": '" + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

std::string string_or(const json& j, const char* key, const std::string& fallback,
                      const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) {
        throw ConfigError("config_invalid", ctx + ": '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

bool bool_or(const json& j, const char* key, bool fallback, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) {
        throw ConfigError("config_invalid", ctx + ": '" + key + "' must be a boolean");
    }
    return v.get<bool>();
}

SpreadModel parse_model(const json& j, const std::string& ctx) {
    return SpreadModel::affine(need_number(j, "alpha", ctx), need_number(j, "beta", ctx));
}

std::vector<double> parse_number_array(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("config_invalid", ctx + ": expected a nonempty array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const json& v : j) {
        if (!v.is_number()) {
            throw ConfigError("config_invalid", ctx + ": expected numbers only");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<Bidder> parse_bidders(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("config_invalid", ctx + ": expected a nonempty array of bidders");
    }
    std::vector<Bidder> out;
    out.reserve(j.size());
    std::size_t index = 0;
    for (const json& bj : j) {
        ++index;
        const std::string bctx = ctx + "[" + std::to_string(index - 1) + "]";
        Bidder b;
        b.id = string_or(bj, "id", std::to_string(index), bctx);
        b.liquidity_b = need_number(bj, "liquidity_b", bctx);
        b.cost_c = number_or(bj, "cost_c", 0.0, bctx);
        if (bj.is_object() && bj.contains("utc")) {
            const json& uj = bj.at("utc");
            if (!uj.is_array()) {
                throw ConfigError("config_invalid", bctx + ": 'utc' must be an array");
            }
            for (const json& pj : uj) {
                UtcPosition u;
                u.node_id = string_or(pj, "node_id", "", bctx + ".utc");
                u.megawatts_f = need_number(pj, "megawatts_f", bctx + ".utc");
                u.alpha_in = need_number(pj, "alpha_in", bctx + ".utc");
                u.beta_in = need_number(pj, "beta_in", bctx + ".utc");
                u.da_spread = number_or(pj, "da_spread", 0.0, bctx + ".utc");
                b.utc.push_back(u);
            }
        }
        out.push_back(std::move(b));
    }
    return out;
}

ConjecturedGameSpec parse_conjecture(const json& j, const std::string& ctx) {
    ConjecturedGameSpec spec;
    spec.n_players = static_cast<int>(integer_or(j, "n_players", 0, ctx));
    if (spec.n_players == 0) {
        throw ConfigError("config_missing_field", ctx + ": missing required field 'n_players'");
    }
    spec.liquidity_b = need_number(j, "liquidity_b", ctx);
    spec.cost_c = number_or(j, "cost_c", 0.0, ctx);
    spec.bidder_alpha = need_number(j, "bidder_alpha", ctx);
    spec.bidder_beta = need_number(j, "bidder_beta", ctx);
    spec.so_alpha = need_number(j, "so_alpha", ctx);
    spec.so_beta = need_number(j, "so_beta", ctx);
    if (j.contains("star_alpha") || j.contains("star_beta")) {
        spec.star_alpha = need_number(j, "star_alpha", ctx);
        spec.star_beta = need_number(j, "star_beta", ctx);
    }
    if (j.contains("consistency_budget")) {
        spec.consistency_budget = need_number(j, "consistency_budget", ctx);
    }
    return spec;
}

json clearing_to_json(const ClearingResult& r) {
    return json{{"q_cts", r.q_cts},
                {"price_p", r.price_p},
                {"allocations_x", r.allocations_x},
                {"degenerate_zero_theta", r.degenerate_zero_theta}};
}

json equilibrium_to_json(const EquilibriumProfile& eq) {
    json efficiency{{"eta", eq.efficiency.eta},
                    {"regime", to_string(eq.efficiency.regime)},
                    {"lower_bound", eq.efficiency.lower_bound}};
    if (eq.efficiency.z.has_value()) efficiency["z"] = *eq.efficiency.z;
    json out{{"thetas_ne", eq.thetas_ne},
             {"regime", to_string(eq.regime)},
             {"clearing", clearing_to_json(eq.clearing)},
             {"efficiency", efficiency},
             {"q_cts", eq.clearing.q_cts},
             {"price_p", eq.clearing.price_p},
             {"eta", eq.efficiency.eta}};
    if (eq.marginal_player.has_value()) {
        out["marginal_player"] = *eq.marginal_player;  // 0-based roster index
    } else {
        out["marginal_player"] = nullptr;
    }
    return out;
}

json stats_to_json(const TrajectoryStats& stats) {
    return json{{"mean_q_ratio", stats.mean_q_ratio},
                {"median_q_ratio", stats.median_q_ratio},
                {"mean_spread", stats.mean_spread},
                {"median_spread", stats.median_spread},
                {"final_nash_pct", stats.final_nash_pct}};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("output_unwritable", "cannot open " + path.string() + " for writing");
    }
    body(out);
    out.flush();
    if (!out) {
        throw Error("output_unwritable", "write to " + path.string() + " failed");
    }
}

// ---- experiment kinds ----------------------------------------------------

json run_clear(const json& cfg) {
    const SpreadModel model = parse_model(need(cfg, "model", "clear"), "clear.model");
    const std::vector<Bidder> bidders = parse_bidders(need(cfg, "bidders", "clear"), "clear.bidders");
    BidProfile profile;
    profile.thetas = parse_number_array(need(cfg, "thetas", "clear"), "clear.thetas");
    return clearing_to_json(clear(model, bidders, profile));
}

json run_nash(const json& cfg) {
    const json& mj = need(cfg, "model", "nash");
    const double alpha = need_number(mj, "alpha", "nash.model");
    const double beta = need_number(mj, "beta", "nash.model");
    const std::vector<double> liquidities =
        parse_number_array(need(cfg, "liquidities", "nash"), "nash.liquidities");
    const bool unique = bool_or(cfg, "require_unique_pivot", true, "nash");
    return equilibrium_to_json(nash_baseline(alpha, beta, liquidities, unique));
}

json run_nash_utc(const json& cfg) {
    const json& mj = need(cfg, "model", "nash-utc");
    const double alpha = need_number(mj, "alpha", "nash-utc.model");
    const double beta = need_number(mj, "beta", "nash-utc.model");
    const std::vector<Bidder> bidders =
        parse_bidders(need(cfg, "bidders", "nash-utc"), "nash-utc.bidders");
    const bool unique = bool_or(cfg, "require_unique_pivot", true, "nash-utc");
    return equilibrium_to_json(nash_utc(alpha, beta, bidders, unique));
}

json run_nash_conjectured(const json& cfg) {
    const ConjecturedGameSpec spec =
        parse_conjecture(need(cfg, "conjecture", "nash-conjectured"), "nash-conjectured.conjecture");
    json out = equilibrium_to_json(nash_conjectured(spec));
    out["q_to"] = spec.so_alpha / spec.so_beta;
    if (spec.star_alpha.has_value()) {
        const CorrectionCheck check = correction_condition(spec);
        out["correction"] = json{{"holds", check.holds},
                                 {"lhs", check.lhs},
                                 {"rhs", check.rhs},
                                 {"q_cts", check.q_cts},
                                 {"q_to", check.q_to},
                                 {"q_star", check.q_star},
                                 {"closer_direct", check.closer_direct}};
    }
    return out;
}

json run_verify(const json& cfg) {
    const SpreadModel model = parse_model(need(cfg, "model", "verify"), "verify.model");
    const std::vector<Bidder> bidders =
        parse_bidders(need(cfg, "bidders", "verify"), "verify.bidders");
    BidProfile candidate;
    candidate.thetas = parse_number_array(need(cfg, "thetas", "verify"), "verify.thetas");
    VerifyOptions options;
    options.grid_size = static_cast<int>(integer_or(cfg, "grid_size", 2001, "verify"));
    if (cfg.contains("radius")) {
        options.radius = need_number(cfg, "radius", "verify");
    }
    const std::string payoff_kind = string_or(cfg, "payoff", "baseline", "verify");
    if (payoff_kind == "utc") {
        options.kind = PayoffKind::Utc;
    } else if (payoff_kind != "baseline") {
        throw ConfigError("config_invalid", "verify.payoff must be 'baseline' or 'utc'");
    }
    const VerifyVerdict verdict = verify_equilibrium(model, bidders, candidate, options);
    json out{{"confirmed", verdict.confirmed()}};
    if (verdict.violation.has_value()) {
        out["violation"] = json{{"player", verdict.violation->player},
                                {"better_theta", verdict.violation->better_theta},
                                {"gain", verdict.violation->gain}};
    } else {
        out["violation"] = nullptr;
    }
    return out;
}

ColumnMap parse_columns(const json& cfg, const std::string& ctx) {
    ColumnMap columns;
    if (cfg.contains("columns")) {
        const json& cj = cfg.at("columns");
        columns.timestamp = string_or(cj, "timestamp", columns.timestamp, ctx);
        columns.price_a = string_or(cj, "price_a", columns.price_a, ctx);
        columns.price_b = string_or(cj, "price_b", columns.price_b, ctx);
        columns.q = string_or(cj, "q_mw", columns.q, ctx);
    }
    return columns;
}

json run_calibrate(const json& cfg) {
    const std::string path = string_or(cfg, "csv", "", "calibrate");
    if (path.empty()) {
        throw ConfigError("config_missing_field", "calibrate: missing required field 'csv'");
    }
    const LoadReport loaded = load_samples(path, parse_columns(cfg, "calibrate.columns"));
    const std::string dep = string_or(cfg, "dependent", "area_b", "calibrate");
    Dependent dependent;
    if (dep == "area_b") {
        dependent = Dependent::AreaB;
    } else if (dep == "area_a") {
        dependent = Dependent::AreaA;
    } else {
        throw ConfigError("config_invalid", "calibrate.dependent must be 'area_a' or 'area_b'");
    }
    const RegressionFit fit = fit_regression(loaded.samples, dependent);
    const SpreadStats stats = spread_stats(loaded.samples);
    json out{{"w1", fit.w1},
             {"w2", fit.w2},
             {"w3", fit.w3},
             {"adjusted_r2", fit.adjusted_r2},
             {"implied_alpha", fit.implied_alpha},
             {"implied_beta", fit.implied_beta},
             {"n_samples", fit.n_samples},
             {"skipped_rows", loaded.skipped_rows},
             {"spread_stats", json{{"mean", stats.mean},
                                   {"abs_mean", stats.abs_mean},
                                   {"std_dev", stats.std_dev},
                                   {"n_samples", stats.n_samples}}}};
    try {
        const SpreadModel model = to_spread_model(fit);
        out["model"] = json{{"alpha", model.alpha()}, {"beta", model.beta()}};
    } catch (const Error& e) {
        out["model"] = nullptr;
        out["model_error"] = e.code();
    }
    return out;
}

json run_spread_stats(const json& cfg) {
    const std::string path = string_or(cfg, "csv", "", "spread-stats");
    if (path.empty()) {
        throw ConfigError("config_missing_field", "spread-stats: missing required field 'csv'");
    }
    const LoadReport loaded = load_samples(path, parse_columns(cfg, "spread-stats.columns"));
    const SpreadStats stats = spread_stats(loaded.samples);
    return json{{"mean", stats.mean},
                {"abs_mean", stats.abs_mean},
                {"std_dev", stats.std_dev},
                {"n_samples", stats.n_samples},
                {"skipped_rows", loaded.skipped_rows}};
}

struct LearnShared {
    SpreadModel so_model;
    SpreadModel settlement;
    std::optional<SpreadModel> star_model;
    json grid;
    RepeatedGameConfig base;
    std::string nash_reference;
    std::optional<ConjecturedGameSpec> conjecture;
};

struct LearnOutcome {
    std::vector<RoundRecord> records;
    TrajectoryStats stats;
    std::vector<double> nash_thetas;
    std::int64_t init_len = 0;
    double q_to = 0.0;
};

LearnOutcome run_one_learn(const LearnShared& shared, const std::vector<Bidder>& bidders) {
    const std::string ctx = "learn.grid";
    const int m = static_cast<int>(integer_or(shared.grid, "m", 10, ctx));
    const double lo = need_number(shared.grid, "lo", ctx);
    const double hi = need_number(shared.grid, "hi", ctx);

    RepeatedGameConfig cfg = shared.base;
    if (shared.nash_reference == "baseline") {
        std::vector<double> liquidities;
        liquidities.reserve(bidders.size());
        for (const Bidder& b : bidders) liquidities.push_back(b.liquidity_b);
        const EquilibriumProfile eq =
            nash_baseline(shared.so_model.alpha(), shared.so_model.beta(), liquidities);
        cfg.nash_thetas = eq.thetas_ne;
    } else if (shared.nash_reference == "conjectured") {
        if (!shared.conjecture.has_value()) {
            throw ConfigError("config_missing_field",
                              "learn: nash_reference 'conjectured' needs a 'conjecture' block");
        }
        if (shared.conjecture->n_players != static_cast<int>(bidders.size())) {
            throw ConfigError("config_invalid",
                              "learn: conjecture.n_players must match the bidder count");
        }
        const EquilibriumProfile eq = nash_conjectured(*shared.conjecture);
        cfg.nash_thetas = eq.thetas_ne;
    } else {
        cfg.nash_thetas.clear();
    }

    std::vector<ActionGrid> grids;
    grids.reserve(bidders.size());
    for (std::size_t i = 0; i < bidders.size(); ++i) {
        const double floor = bidders[i].cost_c * bidders[i].liquidity_b;
        const double agent_lo = std::max(lo, floor);
        if (!(agent_lo < hi)) {
            throw ConfigError("grid_bounds_invalid",
                              "learn: bidder " + bidders[i].id +
                                  " has an empty action range after the cost floor");
        }
        std::optional<double> snap;
        if (!cfg.nash_thetas.empty()) snap = cfg.nash_thetas[i];
        grids.push_back(make_uniform_grid(agent_lo, hi, m, snap));
    }

    LearnOutcome outcome;
    outcome.q_to = shared.so_model.tie_optimization().q_to;
    outcome.init_len = init_rounds(grids, cfg.init);
    outcome.nash_thetas = cfg.nash_thetas;
    outcome.records = run_repeated_game(shared.settlement, shared.so_model, bidders, grids, cfg);
    outcome.stats = trajectory_stats(outcome.records, outcome.q_to,
                                     static_cast<std::size_t>(outcome.init_len));
    return outcome;
}

json run_learn(const json& cfg, const fs::path& out_dir) {
    if (!cfg.contains("seed")) {
        throw ConfigError("seed_required",
                          "learn: a top-level seed is required; runs are never silently "
                          "nondeterministic");
    }
    LearnShared shared{
        parse_model(need(cfg, "so_model", "learn"), "learn.so_model"),
        cfg.contains("settlement_model")
            ? parse_model(cfg.at("settlement_model"), "learn.settlement_model")
            : parse_model(need(cfg, "so_model", "learn"), "learn.so_model"),
        std::nullopt,
        need(cfg, "grid", "learn"),
        RepeatedGameConfig{},
        string_or(cfg, "nash_reference", "baseline", "learn"),
        std::nullopt};
    if (cfg.contains("star_model")) {
        shared.star_model = parse_model(cfg.at("star_model"), "learn.star_model");
    }
    if (cfg.contains("conjecture")) {
        shared.conjecture = parse_conjecture(cfg.at("conjecture"), "learn.conjecture");
    }
    if (shared.nash_reference != "baseline" && shared.nash_reference != "conjectured" &&
        shared.nash_reference != "none") {
        throw ConfigError("config_invalid",
                          "learn.nash_reference must be 'baseline', 'conjectured', or 'none'");
    }

    shared.base.rho = number_or(cfg, "rho", 2.0, "learn");
    shared.base.rounds = integer_or(cfg, "rounds", 3000, "learn");
    shared.base.seed = static_cast<std::uint64_t>(integer_or(cfg, "seed", 0, "learn"));
    shared.base.settlement_noise_std = number_or(cfg, "noise_std", 0.0, "learn");
    const std::string init = string_or(cfg, "init", "staggered", "learn");
    if (init == "staggered") {
        shared.base.init = InitScheme::StaggeredEntry;
    } else if (init == "synchronized") {
        shared.base.init = InitScheme::SynchronizedIndexOrder;
    } else {
        throw ConfigError("config_invalid", "learn.init must be 'staggered' or 'synchronized'");
    }

    json files = json::object();
    json payload;

    if (cfg.contains("variants")) {
        const json& vj = cfg.at("variants");
        if (!vj.is_array() || vj.empty()) {
            throw ConfigError("config_invalid", "learn.variants must be a nonempty array");
        }
        std::vector<std::string> labels;
        std::vector<LearnOutcome> outcomes;
        for (const json& variant : vj) {
            const std::string label =
                string_or(variant, "run_id", std::to_string(labels.size()), "learn.variants");
            const std::vector<Bidder> bidders =
                parse_bidders(need(variant, "bidders", "learn.variants"), "learn.variants.bidders");
            log_line("learn variant " + label);
            outcomes.push_back(run_one_learn(shared, bidders));
            labels.push_back(label);
            const std::string rounds_name = "rounds_" + label + ".csv";
            write_text_file(out_dir / rounds_name, [&](std::ostream& out) {
                write_rounds_csv(out, outcomes.back().records, bidders);
            });
            files[rounds_name] = rounds_name;
        }
        std::vector<LabeledRun> runs;
        runs.reserve(outcomes.size());
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            runs.push_back(LabeledRun{labels[i], &outcomes[i].records, outcomes[i].q_to});
        }
        write_text_file(out_dir / "series_fig4.csv",
                        [&](std::ostream& out) { write_trajectory_series(out, runs); });
        files["series_fig4.csv"] = "series_fig4.csv";
        json per_run = json::object();
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            per_run[labels[i]] = stats_to_json(outcomes[i].stats);
            per_run[labels[i]]["init_rounds"] = outcomes[i].init_len;
            per_run[labels[i]]["q_to"] = outcomes[i].q_to;
        }
        payload = json{{"runs", per_run}};
    } else {
        const std::vector<Bidder> bidders =
            parse_bidders(need(cfg, "bidders", "learn"), "learn.bidders");
        const LearnOutcome outcome = run_one_learn(shared, bidders);
        write_text_file(out_dir / "rounds.csv", [&](std::ostream& out) {
            write_rounds_csv(out, outcome.records, bidders);
        });
        files["rounds.csv"] = "rounds.csv";
        if (!outcome.nash_thetas.empty()) {
            write_text_file(out_dir / "series_fig3.csv", [&](std::ostream& out) {
                write_nash_selection_series(out, outcome.records,
                                            static_cast<std::size_t>(outcome.init_len));
            });
            files["series_fig3.csv"] = "series_fig3.csv";
        }
        if (shared.star_model.has_value()) {
            const double q_star = shared.star_model->tie_optimization().q_to;
            write_text_file(out_dir / "series_fig5.csv", [&](std::ostream& out) {
                write_correction_series(out, outcome.records, outcome.q_to, q_star);
            });
            files["series_fig5.csv"] = "series_fig5.csv";
        }
        payload = stats_to_json(outcome.stats);
        payload["init_rounds"] = outcome.init_len;
        payload["q_to"] = outcome.q_to;
        payload["nash_thetas"] = outcome.nash_thetas;
        payload["rounds"] = shared.base.rounds;
    }
    payload["files"] = files;
    return payload;
}

}  // namespace

void apply_override(json& config, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override_invalid",
                          "override must look like dot.path=value, got '" + assignment + "'");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json* node = &config;
    std::size_t begin = 0;
    while (true) {
        const std::size_t dot = path.find('.', begin);
        const std::string key = path.substr(begin, dot - begin);
        if (key.empty()) {
            throw ConfigError("override_invalid", "override path has an empty segment");
        }
        if (dot == std::string::npos) {
            json value;
            try {
                value = json::parse(raw);
            } catch (const json::parse_error&) {
                value = raw;  // bare strings are fine
            }
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        begin = dot + 1;
    }
}

void write_rounds_csv(std::ostream& out, const std::vector<RoundRecord>& records,
                      const std::vector<Bidder>& bidders) {
    out << "round,q_cts,spread";
    for (const Bidder& b : bidders) {
        out << ",arm_" << b.id << ",theta_" << b.id << ",reward_" << b.id << ",nash_" << b.id;
    }
    out << "\n";
    for (const RoundRecord& rec : records) {
        out << rec.round << "," << fmt(rec.q_cts) << "," << fmt(rec.spread);
        for (std::size_t i = 0; i < bidders.size(); ++i) {
            out << "," << rec.chosen_arm[i] << "," << fmt(rec.chosen_theta[i]) << ","
                << fmt(rec.reward[i]) << "," << (rec.nash_flag[i] ? 1 : 0);
        }
        out << "\n";
    }
}

void write_nash_selection_series(std::ostream& out, const std::vector<RoundRecord>& records,
                                 std::size_t window_begin) {
    if (records.empty() || window_begin >= records.size()) {
        throw ConfigError("empty_window", "selection series window selects no rounds");
    }
    const std::size_t n = records.front().chosen_arm.size();
    out << "round,agent_id,cumulative_nash_pct\n";
    std::vector<std::int64_t> hits(n, 0);
    for (std::size_t t = window_begin; t < records.size(); ++t) {
        const auto played = static_cast<double>(t - window_begin + 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (records[t].nash_flag[i]) ++hits[i];
            out << records[t].round << "," << i << ","
                << fmt(100.0 * static_cast<double>(hits[i]) / played) << "\n";
        }
    }
}

void write_trajectory_series(std::ostream& out, const std::vector<LabeledRun>& runs) {
    out << "run_id,round,q_ratio,spread\n";
    for (const LabeledRun& run : runs) {
        if (run.records == nullptr || !(run.q_to > 0.0)) {
            throw ConfigError("figure_inputs_missing", "trajectory series needs records and q_to");
        }
        for (const RoundRecord& rec : *run.records) {
            out << run.run_id << "," << rec.round << "," << fmt(rec.q_cts / run.q_to) << ","
                << fmt(rec.spread) << "\n";
        }
    }
}

void write_correction_series(std::ostream& out, const std::vector<RoundRecord>& records,
                             double q_to, double q_star) {
    out << "round,q_cts,q_to,q_star\n";
    for (const RoundRecord& rec : records) {
        out << rec.round << "," << fmt(rec.q_cts) << "," << fmt(q_to) << "," << fmt(q_star)
            << "\n";
    }
}

nlohmann::json run_experiment(const nlohmann::json& config, const std::string& out_dir) {
    const std::string kind = string_or(config, "kind", "", "config");
    if (kind.empty()) {
        throw ConfigError("config_missing_field", "config: missing experiment kind");
    }
    const fs::path out_path(out_dir.empty() ? "." : out_dir);
    std::error_code ec;
    fs::create_directories(out_path, ec);
    if (ec) {
        throw Error("output_unwritable", "cannot create output directory " + out_path.string());
    }
    log_line("running kind=" + kind);

    json payload;
    if (kind == "clear") {
        payload = run_clear(config);
    } else if (kind == "nash") {
        payload = run_nash(config);
    } else if (kind == "nash-utc") {
        payload = run_nash_utc(config);
    } else if (kind == "nash-conjectured") {
        payload = run_nash_conjectured(config);
    } else if (kind == "learn") {
        payload = run_learn(config, out_path);
    } else if (kind == "calibrate") {
        payload = run_calibrate(config);
    } else if (kind == "spread-stats") {
        payload = run_spread_stats(config);
    } else if (kind == "verify") {
        payload = run_verify(config);
    } else {
        throw ConfigError("config_invalid", "unknown experiment kind '" + kind + "'");
    }

    json document{{"schema_version", 1}, {"kind", kind}, {"config", config}, {"result", payload}};
    write_text_file(out_path / "result.json",
                    [&](std::ostream& out) { out << document.dump(2) << "\n"; });
    log_line("wrote " + (out_path / "result.json").string());
    return document;
}

}  // namespace cts
