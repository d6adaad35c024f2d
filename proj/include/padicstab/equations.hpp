#pragma once

#include "padicstab/padic.hpp"

#include <map>
#include <utility>
#include <vector>

namespace padicstab {

/// A finitely supported map degree -> rational coefficient, evaluated exactly
/// in PAdicScalar arithmetic.  Zero coefficients are never stored.
class PolynomialFunction {
public:
    PolynomialFunction(std::map<unsigned, BigRat> coeffs, PrimeContext ctx);

    static PolynomialFunction zero(PrimeContext ctx) { return PolynomialFunction({}, ctx); }
    static PolynomialFunction monomial(BigRat coeff, unsigned degree, PrimeContext ctx);

    const std::map<unsigned, BigRat>& coefficients() const { return coeffs_; }
    /// The coefficient at `degree`, 0 when the term is absent.
    BigRat coefficient(unsigned degree) const;
    const PrimeContext& context() const { return ctx_; }
    bool is_zero() const { return coeffs_.empty(); }

    friend bool operator==(const PolynomialFunction& a, const PolynomialFunction& b);

private:
    std::map<unsigned, BigRat> coeffs_;
    PrimeContext ctx_;
};

PolynomialFunction poly_add(const PolynomialFunction& a, const PolynomialFunction& b);
PolynomialFunction poly_scale(const BigRat& c, const PolynomialFunction& f);

/// Exact sparse Horner evaluation; raises ContextMismatchError on mixed
/// prime contexts.
PAdicScalar evaluate(const PolynomialFunction& f, const PAdicScalar& x);

enum class EquationKind { Cubic, Quartic };

/// The parametrized functional-equation family: the kind fixes the
/// homogeneity degree d (3 for cubic, 4 for quartic) and k >= 1 is the
/// dilation parameter of the equation.
class EquationFamily {
public:
    EquationFamily(EquationKind kind, unsigned k);

    EquationKind kind() const { return kind_; }
    unsigned k() const { return k_; }
    unsigned degree() const { return kind_ == EquationKind::Cubic ? 3u : 4u; }

private:
    EquationKind kind_;
    unsigned k_;
};

/// Defect of f against the parametrized cubic equation:
///   f(kx+y) + f(kx-y) - k*[f(x+y) + f(x-y)] - 2(k^3 - k)*f(x).
/// Zero at every (x, y) exactly when f solves the equation.
PAdicScalar cubic_defect(const PolynomialFunction& f, const PAdicScalar& x, const PAdicScalar& y,
                         unsigned k);

/// Defect of f against the parametrized quartic equation:
///   f(kx+y) + f(kx-y) - k^2*[f(x+y) + f(x-y)] - 2k^2(k^2-1)*f(x) + 2(k^2-1)*f(y).
PAdicScalar quartic_defect(const PolynomialFunction& f, const PAdicScalar& x, const PAdicScalar& y,
                           unsigned k);

/// Defect of the classical fixed-dilation cubic form:
///   f(2x+y) + f(2x-y) - 2f(x+y) - 2f(x-y) - 12f(x).
/// Coincides identically with cubic_defect(f, x, y, 2).
PAdicScalar jun_kim_defect(const PolynomialFunction& f, const PAdicScalar& x, const PAdicScalar& y);

/// Defect of the classical fixed-dilation quartic form:
///   f(x+2y) + f(x-2y) - 4[f(x+y) + f(x-y)] - 24f(y) + 6f(x).
/// For even f this equals quartic_defect(f, y, x, 2) (arguments swapped).
PAdicScalar park_bae_defect(const PolynomialFunction& f, const PAdicScalar& x, const PAdicScalar& y);

/// Defect against the family's equation (dispatch on kind).
PAdicScalar defect(const PolynomialFunction& f, const EquationFamily& family, const PAdicScalar& x,
                   const PAdicScalar& y);

/// True iff the defect vanishes exactly at every sample pair.  Samples must
/// be nonempty (DomainError otherwise).
bool is_exact_solution(const PolynomialFunction& f, const EquationFamily& family,
                       const std::vector<std::pair<PAdicScalar, PAdicScalar>>& samples);

}  // namespace padicstab
