#pragma once

namespace cts {

// Numeric tolerances shared by the solvers. Kept in one record so tests can
// tighten or loosen them without touching call sites.
struct Tolerances {
    // Root bracket width for bisection, relative to max(1, upper bracket).
    double bisection_rel_width = 1e-10;
    // Fixed-point and consistency identities (clearing price checks etc).
    double identity_rel = 1e-8;
    // Absolute tolerance for welfare quadrature on general spread models, $/h.
    double quadrature_abs = 1e-9;
    // A deviation counts as profitable if it gains more than
    // deviation_gain_rel * max(1, |payoff at candidate|).
    double deviation_gain_rel = 1e-6;
};

}  // namespace cts
