#include "padicstab/control.hpp"

namespace padicstab {

namespace {

void require_kd(unsigned k, unsigned d) {
    if (k == 0) {
        throw DomainError("hypothesis checks need k >= 1");
    }
    if (d == 0) {
        throw DomainError("hypothesis checks need degree d >= 1");
    }
}

BigRat norm_of_k(unsigned k, PrimeContext ctx) {
    return norm(PAdicScalar(static_cast<std::int64_t>(k), ctx)).value();
}

// How one rescaled control term relates to the next along the iteration for
// the power/constant forms: ascending terms scale by |k|^(r-d) per step,
// descending terms by |k|^(d-r).  The analytic decisions below reduce to
// comparing this ratio with 1.
BigRat per_step_ratio(unsigned r_eff, unsigned k, unsigned d, Direction direction,
                      PrimeContext ctx) {
    const auto r = static_cast<std::int64_t>(r_eff);
    const auto dd = static_cast<std::int64_t>(d);
    const std::int64_t exp = direction == Direction::Ascending ? r - dd : dd - r;
    return rational_pow(norm_of_k(k, ctx), exp);
}

// The n-th term of the vanishing sequence at a sample pair.
Magnitude vanishing_term(const ControlFunction& phi, const PAdicScalar& x, const PAdicScalar& y,
                         unsigned k, unsigned d, Direction direction, unsigned n) {
    const PAdicScalar k_scalar(static_cast<std::int64_t>(k), x.context());
    const PAdicScalar k_n = int_pow(k_scalar, n);
    const auto dn = static_cast<std::int64_t>(d) * n;
    if (direction == Direction::Ascending) {
        const Magnitude value = evaluate_control(phi, mul(k_n, x), mul(k_n, y));
        return Magnitude(value.value() * rational_pow(norm_of_k(k, x.context()), -dn));
    }
    const Magnitude value = evaluate_control(phi, div(x, k_n), div(y, k_n));
    return Magnitude(value.value() * rational_pow(norm_of_k(k, x.context()), dn));
}

}  // namespace

ControlFunction::ControlFunction(Form form, BigRat delta, unsigned r, TableEntries entries,
                                 PrimeContext ctx)
    : form_(form), delta_(std::move(delta)), r_(r), entries_(std::move(entries)), ctx_(ctx) {}

ControlFunction ControlFunction::power(BigRat delta, unsigned r, PrimeContext ctx) {
    if (delta < 0) {
        throw DomainError("control delta must be nonnegative");
    }
    if (r == 0) {
        throw DomainError("power-form control needs exponent r >= 1");
    }
    return ControlFunction(Form::Power, std::move(delta), r, {}, ctx);
}

ControlFunction ControlFunction::constant(BigRat delta, PrimeContext ctx) {
    if (delta < 0) {
        throw DomainError("control delta must be nonnegative");
    }
    return ControlFunction(Form::Constant, std::move(delta), 0, {}, ctx);
}

ControlFunction ControlFunction::table(TableEntries entries, PrimeContext ctx) {
    return ControlFunction(Form::Table, BigRat(0), 0, std::move(entries), ctx);
}

const BigRat& ControlFunction::delta() const {
    if (form_ == Form::Table) {
        throw DomainError("table-form controls have no delta");
    }
    return delta_;
}

unsigned ControlFunction::exponent() const {
    if (form_ == Form::Table) {
        throw DomainError("table-form controls have no exponent");
    }
    return r_;
}

const ControlFunction::TableEntries& ControlFunction::entries() const {
    if (form_ != Form::Table) {
        throw DomainError("only table-form controls have entries");
    }
    return entries_;
}

Magnitude evaluate_control(const ControlFunction& phi, const PAdicScalar& x, const PAdicScalar& y) {
    require_same_context(x, y);
    if (!(x.context() == phi.context())) {
        throw ContextMismatchError("control function and arguments from different prime contexts");
    }
    switch (phi.form()) {
        case ControlFunction::Form::Power:
            return Magnitude(phi.delta() * (mag_pow(norm(x), phi.exponent()).value() +
                                            mag_pow(norm(y), phi.exponent()).value()));
        case ControlFunction::Form::Constant:
            return Magnitude(phi.delta());
        case ControlFunction::Form::Table: {
            const auto it = phi.entries().find({x.value(), y.value()});
            if (it == phi.entries().end()) {
                throw TableLookupError("control table has no entry for the requested pair");
            }
            return it->second;
        }
    }
    throw DomainError("unreachable control form");
}

HypothesisReport vanishing_condition(const ControlFunction& phi, unsigned k, unsigned d,
                                     Direction direction,
                                     const std::vector<std::pair<PAdicScalar, PAdicScalar>>& samples,
                                     unsigned n_max) {
    require_kd(k, d);
    if (samples.empty()) {
        throw DomainError("vanishing condition needs at least one sample pair");
    }
    if (n_max == 0) {
        throw DomainError("vanishing condition needs n_max >= 1");
    }
    HypothesisReport report{ConditionId::Vanishing, false, std::nullopt};
    if (phi.form() != ControlFunction::Form::Table) {
        report.holds = phi.delta() == 0 ||
                       per_step_ratio(phi.exponent(), k, d, direction, phi.context()) < 1;
        return report;
    }
    // Table form: sampled trend.  The sequence must never increase and must
    // make strict progress toward 0 across the observed window.
    for (const auto& [x, y] : samples) {
        std::vector<Magnitude> terms;
        terms.reserve(n_max + 1);
        for (unsigned n = 0; n <= n_max; ++n) {
            terms.push_back(vanishing_term(phi, x, y, k, d, direction, n));
        }
        for (unsigned n = 0; n < n_max; ++n) {
            if (mag_lt(terms[n], terms[n + 1])) {
                report.witness = ConditionWitness{x.value(), y.value(),
                                                  static_cast<std::int64_t>(n) + 1, terms[n + 1]};
                return report;
            }
        }
        if (!terms[n_max].is_zero() && !mag_lt(terms[n_max], terms[0])) {
            report.witness = ConditionWitness{x.value(), y.value(),
                                              static_cast<std::int64_t>(n_max), terms[n_max]};
            return report;
        }
    }
    report.holds = true;
    return report;
}

Magnitude tail_term(const ControlFunction& phi, const PAdicScalar& x, unsigned k, unsigned d,
                    Direction direction, unsigned j) {
    require_kd(k, d);
    const PAdicScalar k_scalar(static_cast<std::int64_t>(k), x.context());
    const auto dj = static_cast<std::int64_t>(d) * j;
    const PAdicScalar zero = PAdicScalar::zero(x.context());
    if (direction == Direction::Ascending) {
        const Magnitude value = evaluate_control(phi, mul(int_pow(k_scalar, j), x), zero);
        return Magnitude(value.value() * rational_pow(norm_of_k(k, x.context()), -dj));
    }
    const Magnitude value = evaluate_control(phi, div(x, int_pow(k_scalar, j + 1)), zero);
    return Magnitude(value.value() * rational_pow(norm_of_k(k, x.context()), dj));
}

Magnitude phi_tilde(const ControlFunction& phi, const PAdicScalar& x, unsigned k, unsigned d,
                    unsigned n, Direction direction) {
    require_kd(k, d);
    if (n == 0) {
        throw DomainError("phi_tilde needs n >= 1");
    }
    Magnitude best = Magnitude::zero();
    for (unsigned j = 0; j < n; ++j) {
        best = mag_max(best, tail_term(phi, x, k, d, direction, j));
    }
    return best;
}

HypothesisReport phi_tilde_exists(const ControlFunction& phi, unsigned k, unsigned d,
                                  Direction direction,
                                  const std::vector<PAdicScalar>& sample_points, unsigned n_max,
                                  unsigned stable_window) {
    require_kd(k, d);
    if (sample_points.empty()) {
        throw DomainError("phi_tilde existence check needs at least one sample point");
    }
    if (n_max == 0 || stable_window == 0) {
        throw DomainError("phi_tilde existence check needs n_max >= 1 and a positive window");
    }
    HypothesisReport report{ConditionId::PhiTildeExists, false, std::nullopt};
    if (phi.form() != ControlFunction::Form::Table) {
        // Terms scale by a fixed ratio per step: the running max stabilizes
        // exactly when the ratio is <= 1 (or the control vanishes entirely).
        report.holds = phi.delta() == 0 ||
                       per_step_ratio(phi.exponent(), k, d, direction, phi.context()) <= 1;
        return report;
    }
    for (const auto& x : sample_points) {
        Magnitude running = Magnitude::zero();
        unsigned last_increase = 0;
        for (unsigned j = 0; j < n_max; ++j) {
            const Magnitude term = tail_term(phi, x, k, d, direction, j);
            if (mag_lt(running, term)) {
                running = term;
                last_increase = j;
            }
        }
        // Declared stabilized only when the final `stable_window` terms
        // brought no increase.
        if (last_increase + stable_window >= n_max && !running.is_zero()) {
            report.witness = ConditionWitness{x.value(), BigRat(0),
                                              static_cast<std::int64_t>(last_increase), running};
            return report;
        }
    }
    report.holds = true;
    return report;
}

Magnitude uniqueness_window_max(const ControlFunction& phi, const PAdicScalar& x, unsigned k,
                                unsigned d, Direction direction, unsigned i, unsigned n) {
    require_kd(k, d);
    if (n == 0) {
        throw DomainError("window max needs n >= 1");
    }
    Magnitude best = Magnitude::zero();
    for (unsigned j = i; j < i + n; ++j) {
        best = mag_max(best, tail_term(phi, x, k, d, direction, j));
    }
    return best;
}

HypothesisReport uniqueness_tail_condition(const ControlFunction& phi, const PAdicScalar& x,
                                           unsigned k, unsigned d, Direction direction,
                                           unsigned i_max, unsigned n_max) {
    require_kd(k, d);
    if (i_max == 0 || n_max == 0) {
        throw DomainError("uniqueness tail condition needs i_max >= 1 and n_max >= 1");
    }
    HypothesisReport report{ConditionId::UniquenessTail, false, std::nullopt};
    if (phi.form() != ControlFunction::Form::Table) {
        // The window max over [i, i+n) is a fixed multiple of ratio^i, so it
        // tends to 0 exactly when the per-step ratio is < 1.
        report.holds = phi.delta() == 0 ||
                       per_step_ratio(phi.exponent(), k, d, direction, phi.context()) < 1;
        return report;
    }
    std::vector<Magnitude> window_maxima;
    window_maxima.reserve(i_max);
    for (unsigned i = 1; i <= i_max; ++i) {
        window_maxima.push_back(uniqueness_window_max(phi, x, k, d, direction, i, n_max));
    }
    for (std::size_t i = 0; i + 1 < window_maxima.size(); ++i) {
        if (mag_lt(window_maxima[i], window_maxima[i + 1])) {
            report.witness = ConditionWitness{x.value(), BigRat(0),
                                              static_cast<std::int64_t>(i) + 2,
                                              window_maxima[i + 1]};
            return report;
        }
    }
    const Magnitude& last = window_maxima.back();
    if (!last.is_zero() && !mag_lt(last, window_maxima.front())) {
        report.witness = ConditionWitness{x.value(), BigRat(0),
                                          static_cast<std::int64_t>(i_max), last};
        return report;
    }
    report.holds = true;
    return report;
}

CorollaryReport corollary_conditions(const BigRat& delta, unsigned r, unsigned k, unsigned d,
                                     Direction direction, PrimeContext ctx) {
    require_kd(k, d);
    if (delta < 0) {
        throw DomainError("control delta must be nonnegative");
    }
    CorollaryReport report{
        HypothesisReport{ConditionId::CorollaryI, true, std::nullopt},
        HypothesisReport{ConditionId::CorollaryII, false, std::nullopt},
    };
    // (i) sub-multiplicativity of alpha(t) = t^r over a grid of positive
    // magnitudes spanning several valuations (exact equality for this family,
    // but checked rather than assumed).
    const BigRat nk = norm_of_k(k, ctx);
    const BigRat p(ctx.prime());
    std::vector<BigRat> grid;
    for (std::int64_t e = -3; e <= 3; ++e) {
        grid.push_back(rational_pow(p, e));
    }
    grid.emplace_back(3, 4);
    grid.emplace_back(2, 3);
    grid.emplace_back(5);
    const auto re = static_cast<std::int64_t>(r);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const BigRat& t = grid[idx];
        const BigRat lhs = rational_pow(nk * t, re);
        const BigRat rhs = rational_pow(nk, re) * rational_pow(t, re);
        if (lhs > rhs) {
            report.sub_multiplicative.holds = false;
            report.sub_multiplicative.witness =
                ConditionWitness{t, BigRat(0), static_cast<std::int64_t>(idx), Magnitude(lhs)};
            break;
        }
    }
    // (ii) exact contraction comparison, oriented by the direction.
    report.contraction.holds = per_step_ratio(r, k, d, direction, ctx) < 1;
    return report;
}

}  // namespace padicstab
