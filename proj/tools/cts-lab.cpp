// Command line front end. All real work lives in the library so that the
// dispatcher itself stays testable; this file only reads a config, layers
// flag overrides on top, and maps error categories to exit codes.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cts/errors.hpp"
#include "cts/experiment.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw cts::ConfigError("config_unreadable", "cannot open config file " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw cts::ConfigError("config_unparseable", std::string("config is not valid JSON: ") + e.what());
    }
}

void print_error(const std::string& code, const std::string& message) {
    nlohmann::json err{{"error", {{"code", code}, {"message", message}}}};
    std::cerr << err.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cts-lab: tie-line market experiments"};

    std::string kind;
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_given = false;

    app.add_option("kind", kind,
                   "experiment kind: clear | nash | nash-utc | nash-conjectured | learn | "
                   "calibrate | spread-stats | verify")
        ->required();
    app.add_option("--config", config_path, "path to a JSON experiment config")->required();
    app.add_option("--out", out_dir, "output directory (created if absent)");
    app.add_option("--override", overrides,
                   "dot.path=value config override, may be given repeatedly; flags win over "
                   "the file");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed, overrides any seed in the config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // CLI11 prints its own usage text; fold argument errors into the
        // config-error exit code so callers see one convention.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    seed_given = seed_opt->count() > 0;

    try {
        nlohmann::json config = load_config(config_path);
        config["kind"] = kind;
        for (const std::string& assignment : overrides) {
            cts::apply_override(config, assignment);
        }
        if (seed_given) {
            config["seed"] = seed;
        }
        cts::run_experiment(config, out_dir);
        return 0;
    } catch (const cts::ConfigError& e) {
        print_error(e.code(), e.what());
        return 2;
    } catch (const cts::Error& e) {
        print_error(e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal_error", e.what());
        return 1;
    }
}
