#include "cts/calibrate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Dense>

#include "cts/errors.hpp"

namespace cts {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string trimmed(std::string_view text) {
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    return std::string(text.substr(b, e - b));
}

std::string lowered(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(cell);
    return cells;
}

std::optional<double> parse_double(const std::string& raw) {
    const std::string text = trimmed(raw);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    const std::string s = trimmed(text);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    char sep = 0;
    int pos = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &pos) < 6) {
        return std::nullopt;
    }
    if (sep != 'T' && sep != 't' && sep != ' ') return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59) {
        return std::nullopt;
    }
    const char* rest = s.c_str() + pos;
    int sec = 0;
    if (*rest == ':') {
        int adv = 0;
        if (std::sscanf(rest, ":%d%n", &sec, &adv) < 1 || sec < 0 || sec > 60) {
            return std::nullopt;
        }
        rest += adv;
    }
    if (*rest == '.') {  // fractional seconds: parsed past, not kept
        ++rest;
        while (std::isdigit(static_cast<unsigned char>(*rest))) ++rest;
    }
    std::int64_t utc_offset_s = 0;
    if (*rest == 'Z' || *rest == 'z') {
        ++rest;
    } else if (*rest == '+' || *rest == '-') {
        int oh = 0, om = 0;
        int adv = 0;
        if (std::sscanf(rest + 1, "%d:%d%n", &oh, &om, &adv) < 2) return std::nullopt;
        utc_offset_s = static_cast<std::int64_t>(oh) * 3600 + om * 60;
        if (*rest == '-') utc_offset_s = -utc_offset_s;
        rest += 1 + adv;
    }
    if (*rest != '\0') return std::nullopt;
    const std::int64_t civil =
        days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + sec;
    return civil - utc_offset_s;
}

LoadReport load_samples(const std::string& path, const ColumnMap& columns) {
    std::ifstream in(path);
    if (!in) {
        throw Error("csv_missing_file", "cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("csv_header_unparseable", path + ": empty file, no header row");
    }
    if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF') {
        line.erase(0, 3);  // UTF-8 byte-order mark
    }
    const std::vector<std::string> header = split_csv_line(line);
    auto find_column = [&](const std::string& wanted) {
        const std::string key = lowered(trimmed(wanted));
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lowered(trimmed(header[i])) == key) return i;
        }
        throw Error("csv_header_missing_columns", path + ": header lacks column '" + wanted +
                                                      "' (configure a column mapping?)");
    };
    const std::size_t col_ts = find_column(columns.timestamp);
    const std::size_t col_a = find_column(columns.price_a);
    const std::size_t col_b = find_column(columns.price_b);
    const std::size_t col_q = find_column(columns.q);
    const std::size_t needed = std::max({col_ts, col_a, col_b, col_q}) + 1;

    LoadReport report;
    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < needed) {
            ++report.skipped_rows;
            continue;
        }
        const auto ts = parse_timestamp(cells[col_ts]);
        const auto a = parse_double(cells[col_a]);
        const auto b = parse_double(cells[col_b]);
        const auto q = parse_double(cells[col_q]);
        if (!ts || !a || !b || !q) {
            ++report.skipped_rows;
            continue;
        }
        report.samples.push_back(MarketSample{*ts, *a, *b, *q});
    }
    if (report.samples.empty()) {
        throw Error("csv_no_valid_rows", path + ": no parseable data rows");
    }
    std::stable_sort(report.samples.begin(), report.samples.end(),
                     [](const MarketSample& x, const MarketSample& y) {
                         return x.timestamp < y.timestamp;
                     });
    // Keep the first of any duplicate timestamps so the series is strictly
    // increasing; duplicates count as skipped rows.
    std::vector<MarketSample> unique;
    unique.reserve(report.samples.size());
    for (const MarketSample& s : report.samples) {
        if (!unique.empty() && unique.back().timestamp == s.timestamp) {
            ++report.skipped_rows;
            continue;
        }
        unique.push_back(s);
    }
    report.samples = std::move(unique);
    return report;
}

RegressionFit fit_regression(const std::vector<MarketSample>& samples, Dependent dependent) {
    const std::size_t n = samples.size();
    if (n < 4) {
        throw ConfigError("too_few_samples", "regression needs at least 4 samples, got " +
                                                 std::to_string(n));
    }
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dep = dependent == Dependent::AreaB ? samples[i].price_area_b
                                                         : samples[i].price_area_a;
        const double other = dependent == Dependent::AreaB ? samples[i].price_area_a
                                                           : samples[i].price_area_b;
        design(i, 0) = other;
        design(i, 1) = samples[i].interchange_q;
        design(i, 2) = 1.0;
        y(i) = dep;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 3) {
        throw Error("design_rank_deficient",
                    "regressors are collinear; cannot identify three coefficients");
    }
    const Eigen::Vector3d w = qr.solve(y);
    const double ss_res = (y - design * w).squaredNorm();
    const double y_mean = y.mean();
    const double ss_tot = (y.array() - y_mean).square().sum();
    const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    const double n_d = static_cast<double>(n);

    RegressionFit fit;
    fit.w1 = w(0);
    fit.w2 = w(1);
    fit.w3 = w(2);
    fit.adjusted_r2 = 1.0 - (1.0 - r2) * (n_d - 1.0) / (n_d - 3.0);
    fit.n_samples = n;

    // Implied spread: pin w1 := 1 and refit spread = alpha - beta * Q on the
    // observed spread series. The multivariate fit justifies the affine
    // reading; this one-dimensional fit defines the model downstream code uses.
    double mean_s = 0.0;
    double mean_q = 0.0;
    for (const MarketSample& s : samples) {
        mean_s += s.price_area_b - s.price_area_a;
        mean_q += s.interchange_q;
    }
    mean_s /= n_d;
    mean_q /= n_d;
    double cov_sq = 0.0;
    double var_q = 0.0;
    for (const MarketSample& s : samples) {
        const double dq = s.interchange_q - mean_q;
        cov_sq += dq * (s.price_area_b - s.price_area_a - mean_s);
        var_q += dq * dq;
    }
    fit.implied_beta = -cov_sq / var_q;  // var_q > 0, else the QR rank check fired
    fit.implied_alpha = mean_s + fit.implied_beta * mean_q;
    return fit;
}

SpreadModel to_spread_model(const RegressionFit& fit) {
    if (std::abs(fit.w1 - 1.0) > 0.1) {
        throw Error("w1_out_of_band",
                    "fitted w1 = " + std::to_string(fit.w1) +
                        " is outside [0.9, 1.1]; the affine spread reading does not apply");
    }
    if (!(fit.implied_beta > 0.0)) {
        throw Error("implied_beta_nonpositive",
                    "implied spread slope must be positive to form a model");
    }
    return SpreadModel::affine(fit.implied_alpha, fit.implied_beta);
}

SpreadStats spread_stats(const std::vector<MarketSample>& samples) {
    if (samples.empty()) {
        throw ConfigError("empty_samples", "spread statistics need at least one sample");
    }
    SpreadStats stats;
    stats.n_samples = samples.size();
    const double n = static_cast<double>(samples.size());
    for (const MarketSample& s : samples) {
        const double spread = s.price_area_b - s.price_area_a;
        stats.mean += spread;
        stats.abs_mean += std::abs(spread);
    }
    stats.mean /= n;
    stats.abs_mean /= n;
    double ss = 0.0;
    for (const MarketSample& s : samples) {
        const double d = s.price_area_b - s.price_area_a - stats.mean;
        ss += d * d;
    }
    stats.std_dev = std::sqrt(ss / n);
    return stats;
}

}  // namespace cts
