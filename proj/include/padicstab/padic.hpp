#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace padicstab {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

/// Base class of every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Division by zero or inversion of zero; signals an invalid experiment input.
struct DivisionByZeroError : Error {
    using Error::Error;
};

/// Values from two different prime contexts were mixed in one operation.
struct ContextMismatchError : Error {
    using Error::Error;
};

/// A value outside an operation's domain (non-prime modulus, zero digit
/// expansion, negative magnitude, and the like).
struct DomainError : Error {
    using Error::Error;
};

/// Build the canonical reduced rational num/den.  The denominator's sign is
/// normalized away; a zero denominator raises DivisionByZeroError.
BigRat make_rational(BigInt num, BigInt den);

/// base^exp with an integer exponent of either sign.  A negative exponent
/// requires base != 0 (DivisionByZeroError otherwise).
BigRat rational_pow(const BigRat& base, std::int64_t exp);

/// The prime p that fixes the valuation.  Primality is enforced at
/// construction by deterministic trial division; p must fit comfortably in
/// a machine word (2 <= p <= 2^31 - 1).
class PrimeContext {
public:
    explicit PrimeContext(std::int64_t p);

    std::int64_t prime() const { return p_; }

    friend bool operator==(const PrimeContext&, const PrimeContext&) = default;

private:
    std::int64_t p_;
};

/// The exponent of p carried by a scalar: an ordinary integer, or the
/// distinguished infinite state reserved for zero.  Infinite compares
/// greater than every finite valuation.
class Valuation {
public:
    static Valuation infinite() { return Valuation(true, 0); }
    static Valuation finite(std::int64_t v) { return Valuation(false, v); }

    bool is_infinite() const { return infinite_; }

    /// The integer exponent; calling this on the infinite valuation is a bug
    /// in the caller and raises DomainError.
    std::int64_t finite_value() const;

    friend bool operator==(const Valuation&, const Valuation&) = default;
    friend bool operator<(const Valuation& a, const Valuation& b);
    friend bool operator<=(const Valuation& a, const Valuation& b) { return a < b || a == b; }

private:
    Valuation(bool infinite, std::int64_t value) : infinite_(infinite), value_(value) {}

    bool infinite_;
    std::int64_t value_;
};

/// An exact nonnegative rational: the value type for norms, control-function
/// values, and every real-valued bound.  Comparisons are exact; nothing in
/// the library rounds.
class Magnitude {
public:
    Magnitude() : value_(0) {}
    explicit Magnitude(BigRat value);

    static Magnitude zero() { return Magnitude(); }
    static Magnitude one() { return Magnitude(BigRat(1)); }

    const BigRat& value() const { return value_; }
    bool is_zero() const { return value_ == 0; }

    friend bool operator==(const Magnitude&, const Magnitude&) = default;

private:
    BigRat value_;
};

Magnitude mag_max(const Magnitude& a, const Magnitude& b);
Magnitude mag_add(const Magnitude& a, const Magnitude& b);
Magnitude mag_mul(const Magnitude& a, const Magnitude& b);
/// a / b; raises DivisionByZeroError when b is zero.
Magnitude mag_div(const Magnitude& a, const Magnitude& b);
Magnitude mag_pow(const Magnitude& a, std::uint64_t exp);
bool mag_le(const Magnitude& a, const Magnitude& b);
bool mag_lt(const Magnitude& a, const Magnitude& b);

/// An exact rational number interpreted inside the p-adic field fixed by its
/// prime context.  The stored value is always in canonical reduced form with
/// a positive denominator; valuation and norm are derived views.
class PAdicScalar {
public:
    PAdicScalar(BigRat value, PrimeContext ctx) : value_(std::move(value)), ctx_(ctx) {}
    PAdicScalar(std::int64_t value, PrimeContext ctx) : value_(value), ctx_(ctx) {}

    static PAdicScalar zero(PrimeContext ctx) { return PAdicScalar(BigRat(0), ctx); }

    const BigRat& value() const { return value_; }
    BigInt num() const { return boost::multiprecision::numerator(value_); }
    BigInt den() const { return boost::multiprecision::denominator(value_); }
    const PrimeContext& context() const { return ctx_; }
    bool is_zero() const { return value_ == 0; }

    /// Equality of values in the same context; mixing contexts is a caller
    /// bug and raises ContextMismatchError.
    friend bool operator==(const PAdicScalar& a, const PAdicScalar& b);

private:
    BigRat value_;
    PrimeContext ctx_;
};

/// Raises ContextMismatchError unless both scalars share one prime context.
void require_same_context(const PAdicScalar& a, const PAdicScalar& b);

PAdicScalar add(const PAdicScalar& a, const PAdicScalar& b);
PAdicScalar sub(const PAdicScalar& a, const PAdicScalar& b);
PAdicScalar mul(const PAdicScalar& a, const PAdicScalar& b);
/// a / b; raises DivisionByZeroError when b is zero.
PAdicScalar div(const PAdicScalar& a, const PAdicScalar& b);
/// x^exp; a negative exponent requires x != 0.
PAdicScalar int_pow(const PAdicScalar& x, std::int64_t exp);
PAdicScalar negate(const PAdicScalar& x);

inline PAdicScalar operator+(const PAdicScalar& a, const PAdicScalar& b) { return add(a, b); }
inline PAdicScalar operator-(const PAdicScalar& a, const PAdicScalar& b) { return sub(a, b); }
inline PAdicScalar operator*(const PAdicScalar& a, const PAdicScalar& b) { return mul(a, b); }
inline PAdicScalar operator-(const PAdicScalar& x) { return negate(x); }

/// The exponent n_x with x = (a/b) * p^{n_x} and a, b coprime to p;
/// infinite exactly for x = 0.
Valuation valuation(const PAdicScalar& x);

/// p^{-valuation(x)} as an exact rational; 0 for x = 0.  Always 0 or an
/// integer power of p.
Magnitude norm(const PAdicScalar& x);

/// The first digits of the base-p series of x, starting at the valuation.
struct DigitExpansion {
    Valuation start;
    std::vector<std::int64_t> digits;  // each in [0, p); the first is nonzero
};

/// The first `count` digits a_j (0 <= a_j < p) of x = sum a_j p^j, j running
/// from the valuation upward.  Denominators are handled by inverting the unit
/// part modulo p^count.  Re-summing the truncated series differs from x by a
/// scalar of valuation >= start + count.  Requires x != 0 and count >= 1.
DigitExpansion digit_expansion(const PAdicScalar& x, std::size_t count);

}  // namespace padicstab
