#include <doctest.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "padicstab/control.hpp"

using namespace padicstab;

namespace {

const PrimeContext kTwo(2);

PAdicScalar at(const BigRat& q) { return PAdicScalar(q, kTwo); }

Magnitude mag(const BigRat& q) { return Magnitude(q); }

std::vector<std::pair<PAdicScalar, PAdicScalar>> one_pair() {
    return {{at(BigRat(1)), at(BigRat(1))}};
}

// Table over the ascending orbit of (1, 1) and (x, 0) tails: entries for
// (2^j, 2^j) and (2^j, 0), with the value at (2^j, *) given by a callback.
ControlFunction::TableEntries orbit_table(const std::vector<BigRat>& diag,
                                          const std::vector<BigRat>& tails) {
    ControlFunction::TableEntries entries;
    BigRat x(1);
    for (std::size_t j = 0; j < diag.size(); ++j) {
        entries[{x, x}] = mag(diag[j]);
        x *= 2;
    }
    x = 1;
    for (std::size_t j = 0; j < tails.size(); ++j) {
        entries[{x, BigRat(0)}] = mag(tails[j]);
        x *= 2;
    }
    return entries;
}

}  // namespace

TEST_CASE("control constructors validate their parameters") {
    CHECK_THROWS_AS(ControlFunction::power(BigRat(-1), 4, kTwo), DomainError);
    CHECK_THROWS_AS(ControlFunction::power(BigRat(1), 0, kTwo), DomainError);
    CHECK_THROWS_AS(ControlFunction::constant(BigRat(-1, 2), kTwo), DomainError);
    const ControlFunction power = ControlFunction::power(BigRat(3, 2), 4, kTwo);
    CHECK(power.form() == ControlFunction::Form::Power);
    CHECK(power.delta() == BigRat(3, 2));
    CHECK(power.exponent() == 4);
    CHECK_THROWS_AS(power.entries(), DomainError);
    const ControlFunction constant = ControlFunction::constant(BigRat(2), kTwo);
    CHECK(constant.exponent() == 0);
    const ControlFunction table = ControlFunction::table({{{BigRat(1), BigRat(1)}, mag(BigRat(1))}}, kTwo);
    CHECK_THROWS_AS(table.delta(), DomainError);
    CHECK_THROWS_AS(table.exponent(), DomainError);
    CHECK(table.entries().size() == 1);
}

TEST_CASE("evaluate_control computes each form exactly") {
    const ControlFunction phi = ControlFunction::power(BigRat(1), 4, kTwo);
    CHECK(evaluate_control(phi, at(BigRat(1)), at(BigRat(1))).value() == 2);
    CHECK(evaluate_control(phi, at(BigRat(2)), at(BigRat(0))).value() == BigRat(1, 16));
    CHECK(evaluate_control(phi, at(BigRat(1, 2)), at(BigRat(1, 2))).value() == 32);
    CHECK(evaluate_control(phi, at(BigRat(0)), at(BigRat(0))).is_zero());
    const ControlFunction scaled = ControlFunction::power(BigRat(3, 2), 2, kTwo);
    CHECK(evaluate_control(scaled, at(BigRat(2)), at(BigRat(4))).value() ==
          BigRat(3, 2) * (BigRat(1, 4) + BigRat(1, 16)));

    const ControlFunction constant = ControlFunction::constant(BigRat(5, 7), kTwo);
    CHECK(evaluate_control(constant, at(BigRat(0)), at(BigRat(0))).value() == BigRat(5, 7));
    CHECK(evaluate_control(constant, at(BigRat(64)), at(BigRat(-3))).value() == BigRat(5, 7));

    const ControlFunction table = ControlFunction::table(
        {{{BigRat(1), BigRat(2)}, mag(BigRat(9, 4))}}, kTwo);
    CHECK(evaluate_control(table, at(BigRat(1)), at(BigRat(2))).value() == BigRat(9, 4));
    CHECK_THROWS_AS(evaluate_control(table, at(BigRat(2)), at(BigRat(1))), TableLookupError);
    CHECK_THROWS_AS(evaluate_control(phi, PAdicScalar(1, PrimeContext(3)),
                                     PAdicScalar(1, PrimeContext(3))),
                    ContextMismatchError);
}

TEST_CASE("vanishing condition is decided analytically for power and constant forms") {
    const auto check = [&](unsigned r, Direction dir, bool expected) {
        const ControlFunction phi = ControlFunction::power(BigRat(1), r, kTwo);
        const HypothesisReport rep = vanishing_condition(phi, 2, 3, dir, one_pair(), 10);
        CHECK(rep.condition == ConditionId::Vanishing);
        CHECK(rep.holds == expected);
        CHECK_FALSE(rep.witness.has_value());  // analytic decisions carry no witness
    };
    check(4, Direction::Ascending, true);    // |2|^{4-3} = 1/2 < 1
    check(3, Direction::Ascending, false);   // ratio exactly 1
    check(2, Direction::Ascending, false);   // ratio 2
    check(2, Direction::Descending, true);   // |2|^{3-2} = 1/2 < 1
    check(3, Direction::Descending, false);
    check(4, Direction::Descending, false);

    // delta = 0 is the trivially vanishing control.
    const ControlFunction zero = ControlFunction::power(BigRat(0), 2, kTwo);
    CHECK(vanishing_condition(zero, 2, 3, Direction::Ascending, one_pair(), 10).holds);

    // A constant control never vanishes ascending but does descending.
    const ControlFunction constant = ControlFunction::constant(BigRat(1), kTwo);
    CHECK_FALSE(vanishing_condition(constant, 2, 3, Direction::Ascending, one_pair(), 10).holds);
    CHECK(vanishing_condition(constant, 2, 3, Direction::Descending, one_pair(), 10).holds);

    // |k| = 1 never contracts: with p = 2, k = 3 the ratio is exactly 1.
    const ControlFunction phi4 = ControlFunction::power(BigRat(1), 4, kTwo);
    CHECK_FALSE(vanishing_condition(phi4, 3, 3, Direction::Ascending, one_pair(), 10).holds);

    CHECK_THROWS_AS(vanishing_condition(phi4, 2, 3, Direction::Ascending, {}, 10), DomainError);
    CHECK_THROWS_AS(vanishing_condition(phi4, 2, 3, Direction::Ascending, one_pair(), 0),
                    DomainError);
}

TEST_CASE("vanishing condition samples table-form controls along the orbit") {
    // Terms at (1,1), k = 2, d = 3, ascending: phi(2^n, 2^n) * 8^n.
    SUBCASE("a decreasing rescaled sequence passes") {
        const ControlFunction phi = ControlFunction::table(
            orbit_table({BigRat(1), BigRat(1, 32), BigRat(1, 1024), BigRat(1, 32768)}, {}), kTwo);
        const HypothesisReport rep =
            vanishing_condition(phi, 2, 3, Direction::Ascending, one_pair(), 3);
        CHECK(rep.holds);
        CHECK_FALSE(rep.witness.has_value());
    }
    SUBCASE("an increase fails with the offending step as witness") {
        const ControlFunction phi = ControlFunction::table(
            orbit_table({BigRat(1), BigRat(1, 32), BigRat(1), BigRat(1, 32768)}, {}), kTwo);
        const HypothesisReport rep =
            vanishing_condition(phi, 2, 3, Direction::Ascending, one_pair(), 3);
        CHECK_FALSE(rep.holds);
        REQUIRE(rep.witness.has_value());
        CHECK(rep.witness->x == 1);
        CHECK(rep.witness->y == 1);
        CHECK(rep.witness->index == 2);
        CHECK(rep.witness->value.value() == 64);  // 1 * 8^2
    }
    SUBCASE("a flat nonzero sequence fails at the horizon") {
        // phi(2^n, 2^n) = 8^{-n} makes every rescaled term exactly 1.
        const ControlFunction phi = ControlFunction::table(
            orbit_table({BigRat(1), BigRat(1, 8), BigRat(1, 64), BigRat(1, 512)}, {}), kTwo);
        const HypothesisReport rep =
            vanishing_condition(phi, 2, 3, Direction::Ascending, one_pair(), 3);
        CHECK_FALSE(rep.holds);
        REQUIRE(rep.witness.has_value());
        CHECK(rep.witness->index == 3);
        CHECK(rep.witness->value.value() == 1);
    }
    SUBCASE("a missing entry is a fixture bug, not a verdict") {
        const ControlFunction phi =
            ControlFunction::table(orbit_table({BigRat(1), BigRat(1, 32)}, {}), kTwo);
        CHECK_THROWS_AS(vanishing_condition(phi, 2, 3, Direction::Ascending, one_pair(), 3),
                        TableLookupError);
    }
}

TEST_CASE("tail terms and their running max have the predicted closed forms") {
    const ControlFunction phi = ControlFunction::power(BigRat(1), 4, kTwo);
    // Ascending at x = 1: phi(2^j, 0) / |2^3|^j = 2^{-4j} * 8^j = 2^{-j}.
    for (unsigned j = 0; j < 6; ++j) {
        CHECK(tail_term(phi, at(BigRat(1)), 2, 3, Direction::Ascending, j).value() ==
              rational_pow(BigRat(2), -static_cast<std::int64_t>(j)));
    }
    // Ascending at x = 2: 2^{-4(j+1)} * 8^j = 2^{-4-j}.
    CHECK(tail_term(phi, at(BigRat(2)), 2, 3, Direction::Ascending, 0).value() == BigRat(1, 16));
    CHECK(tail_term(phi, at(BigRat(2)), 2, 3, Direction::Ascending, 3).value() == BigRat(1, 128));
    // The running max stabilizes immediately at phi(x, 0) when r > d.
    CHECK(phi_tilde(phi, at(BigRat(1)), 2, 3, 1).value() == 1);
    CHECK(phi_tilde(phi, at(BigRat(1)), 2, 3, 10).value() == 1);
    CHECK(phi_tilde(phi, at(BigRat(2)), 2, 3, 7).value() == BigRat(1, 16));
    CHECK_THROWS_AS(phi_tilde(phi, at(BigRat(1)), 2, 3, 0), DomainError);

    // Descending, constant control: |2^3|^j * delta = 2^{-3j}; max is at j = 0.
    const ControlFunction constant = ControlFunction::constant(BigRat(1), kTwo);
    CHECK(tail_term(constant, at(BigRat(1)), 2, 3, Direction::Descending, 0).value() == 1);
    CHECK(tail_term(constant, at(BigRat(1)), 2, 3, Direction::Descending, 2).value() ==
          BigRat(1, 64));
    CHECK(phi_tilde(constant, at(BigRat(1)), 2, 3, 5, Direction::Descending).value() == 1);

    // Descending, power r = 2 < d = 3: phi(x/2^{j+1}, 0) * |2^3|^j = 2^{2-j} at x = 1.
    const ControlFunction phi2 = ControlFunction::power(BigRat(1), 2, kTwo);
    CHECK(tail_term(phi2, at(BigRat(1)), 2, 3, Direction::Descending, 0).value() == 4);
    CHECK(tail_term(phi2, at(BigRat(1)), 2, 3, Direction::Descending, 4).value() == BigRat(1, 4));
    CHECK(phi_tilde(phi2, at(BigRat(1)), 2, 3, 9, Direction::Descending).value() == 4);

    // phi_tilde is monotone nondecreasing in its depth.
    for (unsigned n = 1; n < 8; ++n) {
        CHECK(mag_le(phi_tilde(phi2, at(BigRat(1)), 2, 3, n, Direction::Descending),
                     phi_tilde(phi2, at(BigRat(1)), 2, 3, n + 1, Direction::Descending)));
    }
}

TEST_CASE("phi_tilde existence is analytic for power forms and sampled for tables") {
    const std::vector<PAdicScalar> points = {at(BigRat(1))};
    const auto analytic = [&](unsigned r, Direction dir) {
        const ControlFunction phi = ControlFunction::power(BigRat(1), r, kTwo);
        return phi_tilde_exists(phi, 2, 3, dir, points, 12);
    };
    CHECK(analytic(4, Direction::Ascending).holds);   // ratio 1/2 <= 1
    CHECK(analytic(3, Direction::Ascending).holds);   // ratio exactly 1 still bounded
    CHECK_FALSE(analytic(2, Direction::Ascending).holds);  // ratio 2: unbounded tails
    CHECK(analytic(2, Direction::Descending).holds);
    CHECK_FALSE(analytic(4, Direction::Descending).holds);

    SUBCASE("table whose tail terms decay passes with a long enough window") {
        // phi(2^j, 0) = 2^{-4j}: rescaled tails 2^{-j}, max settles at j = 0.
        const ControlFunction phi = ControlFunction::table(
            orbit_table({}, {BigRat(1), BigRat(1, 16), BigRat(1, 256), BigRat(1, 4096),
                             BigRat(1, 65536), BigRat(1, 1048576), BigRat(1, 16777216),
                             BigRat(1, 268435456)}),
            kTwo);
        CHECK(phi_tilde_exists(phi, 2, 3, Direction::Ascending, points, 8).holds);
        // The same data observed over a window too short to certify
        // stabilization honestly fails.
        const HypothesisReport shy = phi_tilde_exists(phi, 2, 3, Direction::Ascending, points, 4);
        CHECK_FALSE(shy.holds);
        REQUIRE(shy.witness.has_value());
        CHECK(shy.witness->index == 0);
        CHECK(shy.witness->value.value() == 1);
    }
    SUBCASE("table with growing tails fails at the last increase") {
        // phi(2^j, 0) = 2^j: rescaled tails 2^{4j} keep growing.
        const ControlFunction phi = ControlFunction::table(
            orbit_table({}, {BigRat(1), BigRat(2), BigRat(4), BigRat(8), BigRat(16), BigRat(32)}),
            kTwo);
        const HypothesisReport rep = phi_tilde_exists(phi, 2, 3, Direction::Ascending, points, 6);
        CHECK_FALSE(rep.holds);
        REQUIRE(rep.witness.has_value());
        CHECK(rep.witness->index == 5);
    }
    SUBCASE("an identically zero table is bounded regardless of the window") {
        const ControlFunction phi = ControlFunction::table(
            orbit_table({}, {BigRat(0), BigRat(0), BigRat(0), BigRat(0)}), kTwo);
        CHECK(phi_tilde_exists(phi, 2, 3, Direction::Ascending, points, 4).holds);
    }
    CHECK_THROWS_AS(
        phi_tilde_exists(ControlFunction::constant(BigRat(1), kTwo), 2, 3, Direction::Ascending,
                         {}, 10),
        DomainError);
}

TEST_CASE("uniqueness tail condition tracks window maxima") {
    const ControlFunction phi = ControlFunction::power(BigRat(1), 4, kTwo);
    // Window max over [i, i+n) of 2^{-j} is 2^{-i}.
    CHECK(uniqueness_window_max(phi, at(BigRat(1)), 2, 3, Direction::Ascending, 2, 3).value() ==
          BigRat(1, 4));
    CHECK(uniqueness_window_max(phi, at(BigRat(1)), 2, 3, Direction::Ascending, 0, 4).value() == 1);
    CHECK_THROWS_AS(uniqueness_window_max(phi, at(BigRat(1)), 2, 3, Direction::Ascending, 1, 0),
                    DomainError);

    CHECK(uniqueness_tail_condition(phi, at(BigRat(1)), 2, 3, Direction::Ascending, 8, 10).holds);
    const ControlFunction critical = ControlFunction::power(BigRat(1), 3, kTwo);
    CHECK_FALSE(
        uniqueness_tail_condition(critical, at(BigRat(1)), 2, 3, Direction::Ascending, 8, 10)
            .holds);
    const ControlFunction zero = ControlFunction::power(BigRat(0), 3, kTwo);
    CHECK(uniqueness_tail_condition(zero, at(BigRat(1)), 2, 3, Direction::Ascending, 8, 10).holds);

    SUBCASE("table windows that shrink pass; flat nonzero windows fail") {
        const std::vector<BigRat> decaying = {
            BigRat(1),           BigRat(1, 16),       BigRat(1, 256),     BigRat(1, 4096),
            BigRat(1, 65536),    BigRat(1, 1048576),  BigRat(1, 16777216),
            BigRat(1, 268435456), BigRat(1, 4294967296), BigRat(1, 68719476736)};
        const ControlFunction good = ControlFunction::table(orbit_table({}, decaying), kTwo);
        CHECK(uniqueness_tail_condition(good, at(BigRat(1)), 2, 3, Direction::Ascending, 4, 3)
                  .holds);

        // phi(2^j, 0) = 8^{-j} makes every rescaled tail exactly 1: the
        // window max never decreases, so the double limit cannot be 0.
        std::vector<BigRat> flat;
        BigRat v(1);
        for (int j = 0; j < 10; ++j) {
            flat.push_back(v);
            v /= 8;
        }
        const ControlFunction bad = ControlFunction::table(orbit_table({}, flat), kTwo);
        const HypothesisReport rep =
            uniqueness_tail_condition(bad, at(BigRat(1)), 2, 3, Direction::Ascending, 4, 3);
        CHECK_FALSE(rep.holds);
        REQUIRE(rep.witness.has_value());
        CHECK(rep.witness->index == 4);
        CHECK(rep.witness->value.value() == 1);
    }
    CHECK_THROWS_AS(uniqueness_tail_condition(phi, at(BigRat(1)), 2, 3, Direction::Ascending, 0, 5),
                    DomainError);
}

TEST_CASE("corollary conditions: sub-multiplicativity and strict contraction") {
    SUBCASE("canonical ascending power control satisfies both") {
        const CorollaryReport rep =
            corollary_conditions(BigRat(1), 4, 2, 3, Direction::Ascending, kTwo);
        CHECK(rep.sub_multiplicative.condition == ConditionId::CorollaryI);
        CHECK(rep.sub_multiplicative.holds);
        CHECK(rep.contraction.condition == ConditionId::CorollaryII);
        CHECK(rep.contraction.holds);
    }
    SUBCASE("r = d is exactly the critical exponent: (ii) fails, (i) still holds") {
        const CorollaryReport rep =
            corollary_conditions(BigRat(1), 3, 2, 3, Direction::Ascending, kTwo);
        CHECK(rep.sub_multiplicative.holds);
        CHECK_FALSE(rep.contraction.holds);
        CHECK_FALSE(rep.contraction.witness.has_value());
    }
    SUBCASE("descending orientation flips the comparison") {
        CHECK(corollary_conditions(BigRat(1), 2, 2, 3, Direction::Descending, kTwo)
                  .contraction.holds);
        CHECK_FALSE(corollary_conditions(BigRat(1), 4, 2, 3, Direction::Descending, kTwo)
                        .contraction.holds);
        // r = 0 encodes the constant form: contracts descending, not ascending.
        CHECK(corollary_conditions(BigRat(1), 0, 2, 3, Direction::Descending, kTwo)
                  .contraction.holds);
        CHECK_FALSE(corollary_conditions(BigRat(1), 0, 2, 3, Direction::Ascending, kTwo)
                        .contraction.holds);
    }
    SUBCASE("|k| = 1 contracts in neither direction") {
        CHECK_FALSE(
            corollary_conditions(BigRat(1), 4, 3, 3, Direction::Ascending, kTwo).contraction.holds);
        CHECK_FALSE(corollary_conditions(BigRat(1), 4, 3, 3, Direction::Descending, kTwo)
                        .contraction.holds);
    }
    CHECK_THROWS_AS(corollary_conditions(BigRat(-1), 4, 2, 3, Direction::Ascending, kTwo),
                    DomainError);
}
