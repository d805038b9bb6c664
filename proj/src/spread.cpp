#include "cts/spread.hpp"

#include <cmath>
#include <string>

#include "cts/errors.hpp"

namespace cts {

namespace {

double finite_or_throw(double v, const char* what, double q) {
    if (!std::isfinite(v)) {
        throw Error("spread_evaluation_failed",
                    std::string(what) + " returned a non-finite value at q = " + std::to_string(q));
    }
    return v;
}

// Adaptive Simpson with the usual one-fifteenth error estimate.
double adaptive_simpson(const SpreadModel::Curve& f, double a, double b,
                        double fa, double fm, double fb, double whole,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = finite_or_throw(f(lm), "spread", lm);
    const double frm = finite_or_throw(f(rm), "spread", rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

SpreadModel SpreadModel::affine(double alpha, double beta) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ConfigError("spread_alpha_invalid",
                          "affine spread needs alpha > 0, got " + std::to_string(alpha));
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ConfigError("spread_beta_invalid",
                          "affine spread needs beta > 0, got " + std::to_string(beta));
    }
    SpreadModel m;
    m.affine_ = AffineParams{alpha, beta};
    return m;
}

SpreadModel SpreadModel::general(Curve spread, Curve d1, Curve d2,
                                 double probe_hi, int probe_points) {
    if (!spread || !d1 || !d2) {
        throw ConfigError("spread_callable_missing",
                          "general spread model needs the spread and both derivative callables");
    }
    if (!(probe_hi > 0.0) || !std::isfinite(probe_hi)) {
        throw ConfigError("spread_probe_invalid", "probe_hi must be positive and finite");
    }
    if (probe_points < 2) {
        throw ConfigError("spread_probe_invalid", "probe grid needs at least two points");
    }
    double prev = finite_or_throw(spread(0.0), "spread", 0.0);
    if (!(prev > 0.0)) {
        throw ConfigError("spread_origin_nonpositive",
                          "spread(0) must be positive, got " + std::to_string(prev));
    }
    // Spot checks only: a black-box callable cannot be verified globally.
    for (int k = 0; k < probe_points; ++k) {
        const double q = probe_hi * static_cast<double>(k) / (probe_points - 1);
        const double value = finite_or_throw(spread(q), "spread", q);
        if (k > 0 && !(value < prev)) {
            throw ConfigError("spread_not_decreasing",
                              "spread is not strictly decreasing near q = " + std::to_string(q));
        }
        if (finite_or_throw(d1(q), "first derivative", q) > 0.0) {
            throw ConfigError("spread_not_decreasing",
                              "first derivative is positive at q = " + std::to_string(q));
        }
        if (finite_or_throw(d2(q), "second derivative", q) > 0.0) {
            throw ConfigError("spread_not_concave",
                              "second derivative is positive at q = " + std::to_string(q));
        }
        prev = value;
    }
    SpreadModel m;
    m.spread_ = std::move(spread);
    m.d1_ = std::move(d1);
    m.d2_ = std::move(d2);
    return m;
}

double SpreadModel::alpha() const {
    if (!affine_) throw Error("spread_not_affine", "alpha is only defined for affine models");
    return affine_->alpha;
}

double SpreadModel::beta() const {
    if (!affine_) throw Error("spread_not_affine", "beta is only defined for affine models");
    return affine_->beta;
}

double SpreadModel::evaluate(double q) const {
    if (affine_) return affine_->alpha - affine_->beta * q;
    return finite_or_throw(spread_(q), "spread", q);
}

double SpreadModel::derivative(double q) const {
    if (affine_) return -affine_->beta;
    return finite_or_throw(d1_(q), "first derivative", q);
}

double SpreadModel::second_derivative(double q) const {
    if (affine_) return 0.0;
    return finite_or_throw(d2_(q), "second derivative", q);
}

double SpreadModel::welfare(double q, const Tolerances& tol) const {
    if (q < 0.0) {
        throw ConfigError("welfare_negative_q",
                          "welfare is defined for q >= 0, got " + std::to_string(q));
    }
    if (affine_) return affine_->alpha * q - 0.5 * affine_->beta * q * q;
    if (q == 0.0) return 0.0;
    const double fa = evaluate(0.0);
    const double fb = evaluate(q);
    const double fm = evaluate(0.5 * q);
    const double whole = q / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(spread_, 0.0, q, fa, fm, fb, whole, tol.quadrature_abs, 48);
}

Benchmark SpreadModel::tie_optimization(const Tolerances& tol) const {
    Benchmark bench;
    if (affine_) {
        bench.q_to = affine_->alpha / affine_->beta;
        bench.welfare_at_q_to = affine_->alpha * affine_->alpha / (2.0 * affine_->beta);
        return bench;
    }
    double hi = 1.0;
    int doublings = 0;
    while (evaluate(hi) > 0.0) {
        if (++doublings > 200) {
            throw Error("unbounded_demand",
                        "spread stayed positive after 200 bracket doublings; no root to find");
        }
        hi *= 2.0;
    }
    double lo = 0.0;
    const double width = tol.bisection_rel_width * std::max(1.0, hi);
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        (evaluate(mid) > 0.0 ? lo : hi) = mid;
    }
    bench.q_to = 0.5 * (lo + hi);
    bench.welfare_at_q_to = welfare(bench.q_to, tol);
    return bench;
}

}  // namespace cts
