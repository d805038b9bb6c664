#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cts/spread.hpp"

namespace cts {

// One historical observation: prices in the two areas and the scheduled
// interchange. Timestamps are UTC epoch seconds; only their ordering matters
// downstream.
struct MarketSample {
    std::int64_t timestamp = 0;
    double price_area_a = 0.0;  // $/MWh
    double price_area_b = 0.0;  // $/MWh
    double interchange_q = 0.0; // MW
};

// Maps the artifact's sample fields onto whatever headers the dataset ships.
struct ColumnMap {
    std::string timestamp = "timestamp";
    std::string price_a = "price_a";
    std::string price_b = "price_b";
    std::string q = "q_mw";
};

struct LoadReport {
    std::vector<MarketSample> samples;  // sorted by timestamp, strictly increasing
    std::size_t skipped_rows = 0;       // malformed, incomplete, or duplicate-timestamp rows
};

// Accepts RFC 3339 ("2018-06-01T14:00:00Z", optional offset/fraction) and
// "YYYY-MM-DD HH:MM[:SS]". Empty result means unparseable.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

// Loads a UTF-8 CSV with a header row. Rows with missing or unparseable
// fields are skipped and counted, never imputed. Errors when the file is
// missing, the header lacks a mapped column, or no row survives.
LoadReport load_samples(const std::string& path, const ColumnMap& columns = {});

enum class Dependent { AreaA, AreaB };

struct RegressionFit {
    double w1 = 0.0;  // coefficient on the other area's price
    double w2 = 0.0;  // coefficient on interchange
    double w3 = 0.0;  // intercept
    double adjusted_r2 = 0.0;
    // Affine spread implied by the fit, from a one-dimensional refit of
    // price_b - price_a = implied_alpha - implied_beta * Q with w1 pinned to 1.
    double implied_alpha = 0.0;
    double implied_beta = 0.0;
    std::size_t n_samples = 0;
};

// OLS of the dependent area's price on [other price, interchange, 1], solved
// by column-pivoted QR. Needs at least four samples and a full-rank design.
RegressionFit fit_regression(const std::vector<MarketSample>& samples, Dependent dependent);

// Converts a fit into an affine SpreadModel. Refuses when the fitted w1 falls
// outside [0.9, 1.1] (the affine-spread reading needs w1 near one) or when
// the implied slope is not positive.
SpreadModel to_spread_model(const RegressionFit& fit);

struct SpreadStats {
    double mean = 0.0;      // $/MWh
    double abs_mean = 0.0;  // $/MWh
    double std_dev = 0.0;   // $/MWh, population
    std::size_t n_samples = 0;
};

// Statistics of the observed spread price_area_b - price_area_a.
SpreadStats spread_stats(const std::vector<MarketSample>& samples);

}  // namespace cts
