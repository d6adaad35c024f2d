#include "padicstab/padic.hpp"

#include <utility>

namespace padicstab {

namespace {

constexpr std::int64_t kMaxPrime = 2147483647;  // 2^31 - 1, keeps trial division instant

// Exponent of p in |n| for nonzero integer n.
std::int64_t integer_valuation(BigInt n, const BigInt& p) {
    std::int64_t count = 0;
    BigInt q, r;
    for (;;) {
        boost::multiprecision::divide_qr(n, p, q, r);
        if (r != 0) {
            return count;
        }
        n = q;
        ++count;
    }
}

// Inverse of a modulo m by the extended Euclidean algorithm; a must be a
// unit mod m (guaranteed by the callers, which pass denominators coprime
// to p and m = p^count).
BigInt modular_inverse(BigInt a, const BigInt& m) {
    BigInt r0 = m;
    BigInt r1 = a % m;
    if (r1 < 0) {
        r1 += m;
    }
    BigInt t0 = 0;
    BigInt t1 = 1;
    while (r1 != 0) {
        const BigInt q = r0 / r1;
        r0 -= q * r1;
        std::swap(r0, r1);
        t0 -= q * t1;
        std::swap(t0, t1);
    }
    if (r0 != 1) {
        throw DomainError("modular inverse of a non-unit");
    }
    if (t0 < 0) {
        t0 += m;
    }
    return t0;
}

}  // namespace

BigRat make_rational(BigInt num, BigInt den) {
    if (den == 0) {
        throw DivisionByZeroError("rational with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    return BigRat(std::move(num), std::move(den));
}

BigRat rational_pow(const BigRat& base, std::int64_t exp) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    if (exp == 0) {
        return BigRat(1);
    }
    if (base == 0) {
        if (exp < 0) {
            throw DivisionByZeroError("negative power of zero");
        }
        return BigRat(0);
    }
    const auto e = static_cast<unsigned>(exp < 0 ? -exp : exp);
    BigInt n = boost::multiprecision::pow(numerator(base), e);
    BigInt d = boost::multiprecision::pow(denominator(base), e);
    if (exp < 0) {
        std::swap(n, d);
    }
    return make_rational(std::move(n), std::move(d));
}

PrimeContext::PrimeContext(std::int64_t p) : p_(p) {
    if (p < 2 || p > kMaxPrime) {
        throw DomainError("prime context needs 2 <= p <= 2^31 - 1, got " + std::to_string(p));
    }
    for (std::int64_t d = 2; d * d <= p; ++d) {
        if (p % d == 0) {
            throw DomainError("prime context needs a prime, got " + std::to_string(p));
        }
    }
}

std::int64_t Valuation::finite_value() const {
    if (infinite_) {
        throw DomainError("the infinite valuation has no integer value");
    }
    return value_;
}

bool operator<(const Valuation& a, const Valuation& b) {
    if (a.infinite_) {
        return false;
    }
    if (b.infinite_) {
        return true;
    }
    return a.value_ < b.value_;
}

Magnitude::Magnitude(BigRat value) : value_(std::move(value)) {
    if (value_ < 0) {
        throw DomainError("magnitudes are nonnegative");
    }
}

Magnitude mag_max(const Magnitude& a, const Magnitude& b) {
    return a.value() < b.value() ? b : a;
}

Magnitude mag_add(const Magnitude& a, const Magnitude& b) {
    return Magnitude(a.value() + b.value());
}

Magnitude mag_mul(const Magnitude& a, const Magnitude& b) {
    return Magnitude(a.value() * b.value());
}

Magnitude mag_div(const Magnitude& a, const Magnitude& b) {
    if (b.is_zero()) {
        throw DivisionByZeroError("magnitude division by zero");
    }
    return Magnitude(a.value() / b.value());
}

Magnitude mag_pow(const Magnitude& a, std::uint64_t exp) {
    return Magnitude(rational_pow(a.value(), static_cast<std::int64_t>(exp)));
}

bool mag_le(const Magnitude& a, const Magnitude& b) {
    return a.value() <= b.value();
}

bool mag_lt(const Magnitude& a, const Magnitude& b) {
    return a.value() < b.value();
}

void require_same_context(const PAdicScalar& a, const PAdicScalar& b) {
    if (!(a.context() == b.context())) {
        throw ContextMismatchError("scalars from different prime contexts");
    }
}

bool operator==(const PAdicScalar& a, const PAdicScalar& b) {
    require_same_context(a, b);
    return a.value() == b.value();
}

PAdicScalar add(const PAdicScalar& a, const PAdicScalar& b) {
    require_same_context(a, b);
    return PAdicScalar(a.value() + b.value(), a.context());
}

PAdicScalar sub(const PAdicScalar& a, const PAdicScalar& b) {
    require_same_context(a, b);
    return PAdicScalar(a.value() - b.value(), a.context());
}

PAdicScalar mul(const PAdicScalar& a, const PAdicScalar& b) {
    require_same_context(a, b);
    return PAdicScalar(a.value() * b.value(), a.context());
}

PAdicScalar div(const PAdicScalar& a, const PAdicScalar& b) {
    require_same_context(a, b);
    if (b.is_zero()) {
        throw DivisionByZeroError("p-adic scalar division by zero");
    }
    return PAdicScalar(a.value() / b.value(), a.context());
}

PAdicScalar int_pow(const PAdicScalar& x, std::int64_t exp) {
    return PAdicScalar(rational_pow(x.value(), exp), x.context());
}

PAdicScalar negate(const PAdicScalar& x) {
    return PAdicScalar(-x.value(), x.context());
}

Valuation valuation(const PAdicScalar& x) {
    if (x.is_zero()) {
        return Valuation::infinite();
    }
    const BigInt p(x.context().prime());
    return Valuation::finite(integer_valuation(x.num(), p) - integer_valuation(x.den(), p));
}

Magnitude norm(const PAdicScalar& x) {
    const Valuation v = valuation(x);
    if (v.is_infinite()) {
        return Magnitude::zero();
    }
    return Magnitude(rational_pow(BigRat(x.context().prime()), -v.finite_value()));
}

DigitExpansion digit_expansion(const PAdicScalar& x, std::size_t count) {
    if (count == 0) {
        throw DomainError("digit expansion needs a positive digit count");
    }
    if (x.is_zero()) {
        throw DomainError("zero has no canonical digit expansion start");
    }
    const BigInt p(x.context().prime());
    const std::int64_t start = valuation(x).finite_value();
    // Unit part u = x * p^{-start}: both numerator and denominator are
    // coprime to p, so the denominator is invertible modulo p^count.
    const BigRat unit = x.value() / rational_pow(BigRat(p), start);
    const BigInt modulus = boost::multiprecision::pow(p, static_cast<unsigned>(count));
    BigInt residue = boost::multiprecision::numerator(unit) % modulus;
    if (residue < 0) {
        residue += modulus;
    }
    residue = (residue * modular_inverse(boost::multiprecision::denominator(unit), modulus)) % modulus;
    std::vector<std::int64_t> digits(count);
    for (auto& digit : digits) {
        digit = static_cast<std::int64_t>(residue % p);
        residue /= p;
    }
    return DigitExpansion{Valuation::finite(start), std::move(digits)};
}

}  // namespace padicstab
