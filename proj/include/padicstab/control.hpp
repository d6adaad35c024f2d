#pragma once

#include "padicstab/padic.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace padicstab {

/// Iteration direction: ascending rescales dilated arguments k^n x downward
/// by k^{dn}; descending rescales contracted arguments x/k^n upward.
enum class Direction { Ascending, Descending };

/// A table-form control was asked for a pair it has no entry for; the test
/// fixture is incomplete.
struct TableLookupError : Error {
    using Error::Error;
};

/// The control function: the prescribed exact upper bound on the defect.
///   power    - phi(x, y) = delta * (|x|^r + |y|^r), r >= 1
///   constant - phi(x, y) = delta
///   table    - finite explicit map (x, y) -> magnitude, for adversarial tests
class ControlFunction {
public:
    enum class Form { Power, Constant, Table };
    using TableEntries = std::map<std::pair<BigRat, BigRat>, Magnitude>;

    static ControlFunction power(BigRat delta, unsigned r, PrimeContext ctx);
    static ControlFunction constant(BigRat delta, PrimeContext ctx);
    static ControlFunction table(TableEntries entries, PrimeContext ctx);

    Form form() const { return form_; }
    /// delta of the power/constant forms (DomainError for tables).
    const BigRat& delta() const;
    /// Growth exponent: r for the power form, 0 for the constant form.
    unsigned exponent() const;
    const TableEntries& entries() const;
    const PrimeContext& context() const { return ctx_; }

private:
    ControlFunction(Form form, BigRat delta, unsigned r, TableEntries entries, PrimeContext ctx);

    Form form_;
    BigRat delta_;
    unsigned r_;
    TableEntries entries_;
    PrimeContext ctx_;
};

/// phi(x, y) as an exact magnitude.  Table misses raise TableLookupError.
Magnitude evaluate_control(const ControlFunction& phi, const PAdicScalar& x, const PAdicScalar& y);

enum class ConditionId { Vanishing, PhiTildeExists, UniquenessTail, CorollaryI, CorollaryII };

/// Where a sampled condition check failed: the sample pair, the offending
/// step (or window) index, and the magnitude observed there.
struct ConditionWitness {
    BigRat x;
    BigRat y;
    std::int64_t index = 0;
    Magnitude value;
};

/// Outcome of one hypothesis check.  A witness is attached exactly when the
/// check failed and was decided by sampling (analytic decisions carry none).
struct HypothesisReport {
    ConditionId condition;
    bool holds = false;
    std::optional<ConditionWitness> witness;
};

/// Decides whether the rescaled control values vanish along the iteration:
/// ascending, phi(k^n x, k^n y) / |k|^{dn} -> 0; descending, the mirrored
/// k^{dn}-scaled terms at (x/k^n, y/k^n).  Power/constant forms are decided
/// analytically (the terms scale by a fixed ratio per step); table forms are
/// checked as a sampled trend over n <= n_max with a witness on failure.
HypothesisReport vanishing_condition(const ControlFunction& phi, unsigned k, unsigned d,
                                     Direction direction,
                                     const std::vector<std::pair<PAdicScalar, PAdicScalar>>& samples,
                                     unsigned n_max);

/// The j-th rescaled tail term at x: ascending phi(k^j x, 0) / |k|^{dj};
/// descending |k|^{dj} * phi(x / k^{j+1}, 0).
Magnitude tail_term(const ControlFunction& phi, const PAdicScalar& x, unsigned k, unsigned d,
                    Direction direction, unsigned j);

/// max of the first n rescaled tail terms at x (j = 0 .. n-1); n >= 1.
/// Monotone nondecreasing in n; for the power form with r > d and |k| < 1 it
/// stabilizes immediately at phi(x, 0).
Magnitude phi_tilde(const ControlFunction& phi, const PAdicScalar& x, unsigned k, unsigned d,
                    unsigned n, Direction direction = Direction::Ascending);

/// Decides whether the running max of tail terms stabilizes (the finite
/// stand-in for "the limit defining the bound exists").  Power/constant
/// forms are decided analytically; table forms must hold their running max
/// unchanged for `stable_window` consecutive terms within n_max.
HypothesisReport phi_tilde_exists(const ControlFunction& phi, unsigned k, unsigned d,
                                  Direction direction,
                                  const std::vector<PAdicScalar>& sample_points, unsigned n_max,
                                  unsigned stable_window = 5);

/// max of the rescaled tail terms over the window i <= j < i + n at x.
Magnitude uniqueness_window_max(const ControlFunction& phi, const PAdicScalar& x, unsigned k,
                                unsigned d, Direction direction, unsigned i, unsigned n);

/// Decides the double-limit condition behind uniqueness: the window max over
/// [i, i+n) must tend to 0 as i grows.  Analytic for power/constant forms;
/// sampled trend over i <= i_max (window length n_max) for tables.
HypothesisReport uniqueness_tail_condition(const ControlFunction& phi, const PAdicScalar& x,
                                           unsigned k, unsigned d, Direction direction,
                                           unsigned i_max, unsigned n_max);

/// The two sufficient conditions for the power-family control alpha(t) = t^r
/// (r = 0 encodes the constant form):
///   (i)  alpha(|k| t) <= alpha(|k|) * alpha(t), checked over a grid of
///        positive magnitudes t (exact equality for this family);
///   (ii) the contraction comparison |k|^r < |k|^d (ascending) resp.
///        |k|^r > |k|^d (descending), decided exactly.
struct CorollaryReport {
    HypothesisReport sub_multiplicative;  // (i)
    HypothesisReport contraction;         // (ii)
};

CorollaryReport corollary_conditions(const BigRat& delta, unsigned r, unsigned k, unsigned d,
                                     Direction direction, PrimeContext ctx);

}  // namespace padicstab
