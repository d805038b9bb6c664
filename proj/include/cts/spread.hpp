#pragma once

#include <functional>
#include <optional>

#include "cts/tolerances.hpp"

namespace cts {

// Welfare-maximizing schedule: the flow at which the spread vanishes, and the
// welfare collected there.
struct Benchmark {
    double q_to = 0.0;             // MW
    double welfare_at_q_to = 0.0;  // $/h
};

// Inter-area price spread P(Q): importing-area price minus exporting-area
// price as a function of the interface flow Q. Strictly decreasing and
// concave with P(0) > 0.
//
// Affine models carry (alpha, beta) and use closed forms everywhere. General
// models wrap caller-supplied callables for P and its first two derivatives
// and fall back to quadrature and bisection; they are spot-checked for
// decrease and concavity on a probe grid at construction.
class SpreadModel {
public:
    using Curve = std::function<double(double)>;

    // P(q) = alpha - beta * q, alpha > 0, beta > 0.
    static SpreadModel affine(double alpha, double beta);

    // probe_hi bounds the validation grid [0, probe_hi]; pick it to cover the
    // flows the model will actually see (the affine equivalent is 2*alpha/beta).
    static SpreadModel general(Curve spread, Curve d1, Curve d2,
                               double probe_hi, int probe_points = 64);

    bool is_affine() const noexcept { return affine_.has_value(); }
    double alpha() const;  // affine only
    double beta() const;   // affine only

    double evaluate(double q) const;  // P(q); negative q permitted
    double derivative(double q) const;
    double second_derivative(double q) const;

    // W(q) = integral of P from 0 to q; rejects q < 0. General models use
    // adaptive Simpson quadrature at tol.quadrature_abs.
    double welfare(double q, const Tolerances& tol = {}) const;

    // Root of the spread. Affine: alpha/beta with welfare alpha^2/(2 beta)
    // exactly. General: bracket by doubling from 1, then bisect; errors if the
    // spread never crosses zero within 200 doublings.
    Benchmark tie_optimization(const Tolerances& tol = {}) const;

private:
    SpreadModel() = default;

    struct AffineParams {
        double alpha;
        double beta;
    };

    std::optional<AffineParams> affine_;
    Curve spread_;
    Curve d1_;
    Curve d2_;
};

}  // namespace cts
