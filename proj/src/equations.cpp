#include "padicstab/equations.hpp"

namespace padicstab {

PolynomialFunction::PolynomialFunction(std::map<unsigned, BigRat> coeffs, PrimeContext ctx)
    : coeffs_(std::move(coeffs)), ctx_(ctx) {
    std::erase_if(coeffs_, [](const auto& entry) { return entry.second == 0; });
}

PolynomialFunction PolynomialFunction::monomial(BigRat coeff, unsigned degree, PrimeContext ctx) {
    std::map<unsigned, BigRat> coeffs;
    coeffs.emplace(degree, std::move(coeff));
    return PolynomialFunction(std::move(coeffs), ctx);
}

BigRat PolynomialFunction::coefficient(unsigned degree) const {
    const auto it = coeffs_.find(degree);
    return it == coeffs_.end() ? BigRat(0) : it->second;
}

bool operator==(const PolynomialFunction& a, const PolynomialFunction& b) {
    if (!(a.ctx_ == b.ctx_)) {
        throw ContextMismatchError("polynomials from different prime contexts");
    }
    return a.coeffs_ == b.coeffs_;
}

PolynomialFunction poly_add(const PolynomialFunction& a, const PolynomialFunction& b) {
    if (!(a.context() == b.context())) {
        throw ContextMismatchError("polynomials from different prime contexts");
    }
    std::map<unsigned, BigRat> coeffs = a.coefficients();
    for (const auto& [degree, coeff] : b.coefficients()) {
        coeffs[degree] += coeff;
    }
    return PolynomialFunction(std::move(coeffs), a.context());
}

PolynomialFunction poly_scale(const BigRat& c, const PolynomialFunction& f) {
    std::map<unsigned, BigRat> coeffs;
    for (const auto& [degree, coeff] : f.coefficients()) {
        coeffs.emplace(degree, c * coeff);
    }
    return PolynomialFunction(std::move(coeffs), f.context());
}

PAdicScalar evaluate(const PolynomialFunction& f, const PAdicScalar& x) {
    if (!(f.context() == x.context())) {
        throw ContextMismatchError("polynomial and argument from different prime contexts");
    }
    // Sparse Horner over the degree gaps, highest degree first.
    BigRat acc(0);
    unsigned last_degree = 0;
    bool first = true;
    const auto& coeffs = f.coefficients();
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        const auto& [degree, coeff] = *it;
        if (first) {
            acc = coeff;
            first = false;
        } else {
            acc = acc * rational_pow(x.value(), last_degree - degree) + coeff;
        }
        last_degree = degree;
    }
    if (!first && last_degree > 0) {
        acc *= rational_pow(x.value(), last_degree);
    }
    return PAdicScalar(std::move(acc), x.context());
}

EquationFamily::EquationFamily(EquationKind kind, unsigned k) : kind_(kind), k_(k) {
    if (k == 0) {
        throw DomainError("equation family needs k >= 1");
    }
}

PAdicScalar cubic_defect(const PolynomialFunction& f, const PAdicScalar& x, const PAdicScalar& y,
                         unsigned k) {
    if (k == 0) {
        throw DomainError("cubic defect needs k >= 1");
    }
    const PrimeContext ctx = x.context();
    const BigInt kk(k);
    const PAdicScalar k_scalar(BigRat(kk), ctx);
    const PAdicScalar kx = mul(k_scalar, x);
    const PAdicScalar dilated = add(evaluate(f, add(kx, y)), evaluate(f, sub(kx, y)));
    const PAdicScalar plain = add(evaluate(f, add(x, y)), evaluate(f, sub(x, y)));
    const PAdicScalar homog = mul(PAdicScalar(BigRat(2 * (kk * kk * kk - kk)), ctx), evaluate(f, x));
    return sub(sub(dilated, mul(k_scalar, plain)), homog);
}

PAdicScalar quartic_defect(const PolynomialFunction& f, const PAdicScalar& x, const PAdicScalar& y,
                           unsigned k) {
    if (k == 0) {
        throw DomainError("quartic defect needs k >= 1");
    }
    const PrimeContext ctx = x.context();
    const BigInt kk(k);
    const BigInt k2 = kk * kk;
    const PAdicScalar kx = mul(PAdicScalar(BigRat(kk), ctx), x);
    const PAdicScalar dilated = add(evaluate(f, add(kx, y)), evaluate(f, sub(kx, y)));
    const PAdicScalar plain = mul(PAdicScalar(BigRat(k2), ctx), add(evaluate(f, add(x, y)), evaluate(f, sub(x, y))));
    const PAdicScalar x_term = mul(PAdicScalar(BigRat(2 * k2 * (k2 - 1)), ctx), evaluate(f, x));
    const PAdicScalar y_term = mul(PAdicScalar(BigRat(2 * (k2 - 1)), ctx), evaluate(f, y));
    return add(sub(sub(dilated, plain), x_term), y_term);
}

PAdicScalar jun_kim_defect(const PolynomialFunction& f, const PAdicScalar& x, const PAdicScalar& y) {
    const PrimeContext ctx = x.context();
    const PAdicScalar two(2, ctx);
    const PAdicScalar two_x = mul(two, x);
    const PAdicScalar dilated = add(evaluate(f, add(two_x, y)), evaluate(f, sub(two_x, y)));
    const PAdicScalar plain = add(evaluate(f, add(x, y)), evaluate(f, sub(x, y)));
    return sub(sub(dilated, mul(two, plain)), mul(PAdicScalar(12, ctx), evaluate(f, x)));
}

PAdicScalar park_bae_defect(const PolynomialFunction& f, const PAdicScalar& x, const PAdicScalar& y) {
    const PrimeContext ctx = x.context();
    const PAdicScalar two_y = mul(PAdicScalar(2, ctx), y);
    const PAdicScalar dilated = add(evaluate(f, add(x, two_y)), evaluate(f, sub(x, two_y)));
    const PAdicScalar plain = mul(PAdicScalar(4, ctx), add(evaluate(f, add(x, y)), evaluate(f, sub(x, y))));
    const PAdicScalar y_term = mul(PAdicScalar(24, ctx), evaluate(f, y));
    const PAdicScalar x_term = mul(PAdicScalar(6, ctx), evaluate(f, x));
    return add(sub(sub(dilated, plain), y_term), x_term);
}

PAdicScalar defect(const PolynomialFunction& f, const EquationFamily& family, const PAdicScalar& x,
                   const PAdicScalar& y) {
    return family.kind() == EquationKind::Cubic ? cubic_defect(f, x, y, family.k())
                                                : quartic_defect(f, x, y, family.k());
}

bool is_exact_solution(const PolynomialFunction& f, const EquationFamily& family,
                       const std::vector<std::pair<PAdicScalar, PAdicScalar>>& samples) {
    if (samples.empty()) {
        throw DomainError("exact-solution check needs at least one sample pair");
    }
    for (const auto& [x, y] : samples) {
        if (!defect(f, family, x, y).is_zero()) {
            return false;
        }
    }
    return true;
}

}  // namespace padicstab
