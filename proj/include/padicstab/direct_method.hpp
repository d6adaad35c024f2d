#pragma once

#include "padicstab/control.hpp"
#include "padicstab/equations.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace padicstab {

/// How the approximant iteration runs and when it stops.
struct IterationConfig {
    Direction direction = Direction::Ascending;
    unsigned n_max = 40;                 // maximum number of residual steps
    std::int64_t target_valuation = 30;  // stop once the residual norm is <= p^{-target_valuation}
};

/// The approximant sequence and its consecutive-difference norms.
/// residuals[n] = |c_{n+1} - c_n|, so approximants holds one more entry than
/// residuals and n_used is the index of the last residual computed (the
/// converging one on success).  In an ultrametric space the residuals going
/// to zero is exactly the Cauchy property, so a converged trace pins the
/// limit within the final residual.
struct IterationTrace {
    std::vector<PAdicScalar> approximants;
    std::vector<Magnitude> residuals;
    bool converged = false;
    std::size_t n_used = 0;
};

/// Per-probe outcome of the stability estimate |C(x) - f(x)| <= bound.
struct StabilityReport {
    PAdicScalar x;
    PAdicScalar limit_value;          // C(x)
    Magnitude deviation;              // |C(x) - f(x)|
    Magnitude bound;                  // prefactor * phi_tilde(x)
    std::optional<BigRat> slack;      // bound / deviation; empty when deviation = 0
    bool bound_ok = false;            // deviation <= bound, compared exactly
    bool bound_derived = false;       // descending-direction bound (derived analogue)
    Magnitude defect_of_limit_max;    // max |defect of C| over the probe pairs
};

/// The n-th approximant: ascending f(k^n x) / k^{dn}; descending
/// k^{dn} * f(x / k^n).  n = 0 gives f(x) in either direction.
PAdicScalar approximant(const PolynomialFunction& f, const PAdicScalar& x, unsigned k, unsigned d,
                        unsigned n, Direction direction);

/// Runs the approximant sequence until the consecutive-difference norm
/// reaches p^{-target_valuation} or n_max residual steps are exhausted.
/// Non-convergence is a reported outcome (converged = false), not an error.
std::pair<PAdicScalar, IterationTrace> iterate_to_limit(const PolynomialFunction& f,
                                                        const PAdicScalar& x, unsigned k, unsigned d,
                                                        const IterationConfig& config);

/// Exact limit of the approximant sequence, computed independently of the
/// iteration, for polynomial f and |k| < 1: the monomial a_m x^m survives
/// iff m = d, vanishes iff m > d (ascending) resp. m < d (descending), and
/// otherwise the sequence diverges (returns nullopt).  Raises DomainError
/// when |k| = 1, where no term is damped and the dichotomy fails.
std::optional<PolynomialFunction> closed_form_oracle(const PolynomialFunction& f, unsigned k,
                                                     unsigned d, Direction direction);

/// One sample pair where the defect exceeded the control value.
struct DefectViolation {
    PAdicScalar x;
    PAdicScalar y;
    Magnitude defect_norm;
    Magnitude control_value;
};

/// Outcome of checking |defect(x, y)| <= phi(x, y) over a sample set.
struct DefectBoundReport {
    bool holds = true;
    Magnitude max_defect_norm;
    std::optional<BigRat> worst_ratio;  // max |defect|/phi over samples with phi > 0
    std::vector<DefectViolation> violations;
};

/// Checks the defect bound exactly at every sample pair.  Samples must be
/// nonempty; the quartic family requires f(0) = 0 and rejects other f
/// before sampling (DomainError).
DefectBoundReport verify_defect_bound(const PolynomialFunction& f, const ControlFunction& phi,
                                      const EquationFamily& family,
                                      const std::vector<std::pair<PAdicScalar, PAdicScalar>>& samples);

/// The right-hand side of the stability estimate at x: the direction's
/// prefactor times phi_tilde at depth n_tilde.  Ascending the prefactor is
/// 1/|2 k^d|; descending it is 1/|2| (derived single-step telescope from
/// x/k, see DESIGN notes in the README).
Magnitude stability_bound_value(const ControlFunction& phi, const PAdicScalar& x, unsigned k,
                                unsigned d, unsigned n_tilde, Direction direction);

/// Compares |C(x) - f(x)| against the stability bound at one probe x and
/// sweeps the defect of the limit candidate C over the probe pairs.
StabilityReport verify_stability_bound(const PolynomialFunction& f, const PolynomialFunction& limit,
                                       const ControlFunction& phi, const PAdicScalar& x, unsigned k,
                                       unsigned d, unsigned n_tilde, Direction direction,
                                       const EquationFamily& family,
                                       const std::vector<std::pair<PAdicScalar, PAdicScalar>>& defect_probes);

/// The finite-step estimate behind the limit bound: checks exactly that
/// |c_n(x) - f(x)| <= stability_bound_value(phi, x, k, d, n, direction)
/// for the given n >= 1.  Meaningful when the defect bound holds for f, phi.
bool verify_intermediate_bound(const PolynomialFunction& f, const ControlFunction& phi,
                               const PAdicScalar& x, unsigned k, unsigned d, unsigned n,
                               Direction direction);

/// Distance between two limit candidates after i_max rescaled dilations:
/// max over probe x of |k|^{-d i_max} * |C1(k^{i_max} x) - C2(k^{i_max} x)|.
/// Zero when both candidates are genuinely the same solution; nonzero
/// flags a candidate that fails the equation.  Probes must be nonempty.
Magnitude uniqueness_probe(const PolynomialFunction& c1, const PolynomialFunction& c2, unsigned k,
                           unsigned d, unsigned i_max, const std::vector<PAdicScalar>& probes);

}  // namespace padicstab
