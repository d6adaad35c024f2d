#include "padicstab/direct_method.hpp"

namespace padicstab {

namespace {

void require_kd(unsigned k, unsigned d) {
    if (k == 0) {
        throw DomainError("direct method needs k >= 1");
    }
    if (d == 0) {
        throw DomainError("direct method needs degree d >= 1");
    }
}

}  // namespace

PAdicScalar approximant(const PolynomialFunction& f, const PAdicScalar& x, unsigned k, unsigned d,
                        unsigned n, Direction direction) {
    require_kd(k, d);
    const PAdicScalar k_scalar(static_cast<std::int64_t>(k), x.context());
    const auto dn = static_cast<std::int64_t>(d) * n;
    if (direction == Direction::Ascending) {
        return div(evaluate(f, mul(int_pow(k_scalar, n), x)), int_pow(k_scalar, dn));
    }
    return mul(int_pow(k_scalar, dn), evaluate(f, div(x, int_pow(k_scalar, n))));
}

std::pair<PAdicScalar, IterationTrace> iterate_to_limit(const PolynomialFunction& f,
                                                        const PAdicScalar& x, unsigned k, unsigned d,
                                                        const IterationConfig& config) {
    require_kd(k, d);
    if (config.n_max == 0) {
        throw DomainError("iteration needs n_max >= 1");
    }
    const Magnitude threshold(
        rational_pow(BigRat(x.context().prime()), -config.target_valuation));
    IterationTrace trace;
    PAdicScalar current = approximant(f, x, k, d, 0, config.direction);
    trace.approximants.push_back(current);
    for (unsigned step = 0; step < config.n_max; ++step) {
        const PAdicScalar next = approximant(f, x, k, d, step + 1, config.direction);
        const Magnitude residual = norm(sub(next, current));
        trace.approximants.push_back(next);
        trace.residuals.push_back(residual);
        current = next;
        if (mag_le(residual, threshold)) {
            trace.converged = true;
            break;
        }
    }
    trace.n_used = trace.residuals.size() - 1;
    return {trace.approximants.back(), trace};
}

std::optional<PolynomialFunction> closed_form_oracle(const PolynomialFunction& f, unsigned k,
                                                     unsigned d, Direction direction) {
    require_kd(k, d);
    if (norm(PAdicScalar(static_cast<std::int64_t>(k), f.context())) == Magnitude::one()) {
        throw DomainError("closed-form oracle needs |k| < 1 (k divisible by the prime)");
    }
    for (const auto& [degree, coeff] : f.coefficients()) {
        const bool diverges =
            direction == Direction::Ascending ? degree < d : degree > d;
        if (diverges) {
            return std::nullopt;
        }
    }
    return PolynomialFunction::monomial(f.coefficient(d), d, f.context());
}

DefectBoundReport verify_defect_bound(const PolynomialFunction& f, const ControlFunction& phi,
                                      const EquationFamily& family,
                                      const std::vector<std::pair<PAdicScalar, PAdicScalar>>& samples) {
    if (family.kind() == EquationKind::Quartic && f.coefficient(0) != 0) {
        throw DomainError("the quartic defect bound requires f(0) = 0");
    }
    if (samples.empty()) {
        throw DomainError("defect bound check needs at least one sample pair");
    }
    DefectBoundReport report;
    for (const auto& [x, y] : samples) {
        const Magnitude defect_norm = norm(defect(f, family, x, y));
        const Magnitude control_value = evaluate_control(phi, x, y);
        report.max_defect_norm = mag_max(report.max_defect_norm, defect_norm);
        if (!control_value.is_zero()) {
            const BigRat ratio = defect_norm.value() / control_value.value();
            if (!report.worst_ratio || *report.worst_ratio < ratio) {
                report.worst_ratio = ratio;
            }
        }
        if (!mag_le(defect_norm, control_value)) {
            report.violations.push_back(DefectViolation{x, y, defect_norm, control_value});
        }
    }
    report.holds = report.violations.empty();
    return report;
}

Magnitude stability_bound_value(const ControlFunction& phi, const PAdicScalar& x, unsigned k,
                                unsigned d, unsigned n_tilde, Direction direction) {
    require_kd(k, d);
    const PrimeContext ctx = x.context();
    const BigRat denominator_norm =
        direction == Direction::Ascending
            ? norm(PAdicScalar(BigRat(2 * boost::multiprecision::pow(BigInt(k), d)), ctx)).value()
            : norm(PAdicScalar(2, ctx)).value();
    const BigRat prefactor = rational_pow(denominator_norm, -1);
    return Magnitude(prefactor * phi_tilde(phi, x, k, d, n_tilde, direction).value());
}

StabilityReport verify_stability_bound(const PolynomialFunction& f, const PolynomialFunction& limit,
                                       const ControlFunction& phi, const PAdicScalar& x, unsigned k,
                                       unsigned d, unsigned n_tilde, Direction direction,
                                       const EquationFamily& family,
                                       const std::vector<std::pair<PAdicScalar, PAdicScalar>>& defect_probes) {
    const PAdicScalar limit_value = evaluate(limit, x);
    const Magnitude deviation = norm(sub(limit_value, evaluate(f, x)));
    const Magnitude bound = stability_bound_value(phi, x, k, d, n_tilde, direction);
    std::optional<BigRat> slack;
    if (!deviation.is_zero()) {
        slack = bound.value() / deviation.value();
    }
    Magnitude defect_max = Magnitude::zero();
    for (const auto& [px, py] : defect_probes) {
        defect_max = mag_max(defect_max, norm(defect(limit, family, px, py)));
    }
    return StabilityReport{x,
                           limit_value,
                           deviation,
                           bound,
                           std::move(slack),
                           mag_le(deviation, bound),
                           direction == Direction::Descending,
                           defect_max};
}

bool verify_intermediate_bound(const PolynomialFunction& f, const ControlFunction& phi,
                               const PAdicScalar& x, unsigned k, unsigned d, unsigned n,
                               Direction direction) {
    if (n == 0) {
        throw DomainError("intermediate bound needs n >= 1");
    }
    const Magnitude lhs = norm(sub(approximant(f, x, k, d, n, direction), evaluate(f, x)));
    return mag_le(lhs, stability_bound_value(phi, x, k, d, n, direction));
}

Magnitude uniqueness_probe(const PolynomialFunction& c1, const PolynomialFunction& c2, unsigned k,
                           unsigned d, unsigned i_max, const std::vector<PAdicScalar>& probes) {
    require_kd(k, d);
    if (i_max == 0) {
        throw DomainError("uniqueness probe needs i_max >= 1");
    }
    if (probes.empty()) {
        throw DomainError("uniqueness probe needs at least one probe point");
    }
    const PrimeContext ctx = c1.context();
    const PAdicScalar k_scalar(static_cast<std::int64_t>(k), ctx);
    const PAdicScalar dilation = int_pow(k_scalar, static_cast<std::int64_t>(i_max));
    const BigRat scale =
        rational_pow(norm(k_scalar).value(), -static_cast<std::int64_t>(d) * i_max);
    Magnitude best = Magnitude::zero();
    for (const auto& x : probes) {
        const PAdicScalar xi = mul(dilation, x);
        best = mag_max(best,
                       Magnitude(scale * norm(sub(evaluate(c1, xi), evaluate(c2, xi))).value()));
    }
    return best;
}

}  // namespace padicstab
