#include "padicstab/harness.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <utility>

namespace padicstab {

namespace {

using Json = nlohmann::ordered_json;

constexpr unsigned kUniquenessDepth = 8;     // dilation depth of the uniqueness cross-check
constexpr unsigned kIntermediateDepth = 10;  // finite-step bounds checked for n = 1..this
constexpr unsigned kMaxK = 10;
constexpr unsigned kMaxDegree = 32;
constexpr unsigned kMaxR = 64;
constexpr unsigned kMaxNMax = 1000;
constexpr std::int64_t kMaxTargetValuation = 100000;
constexpr std::int64_t kMaxGridExp = 64;
constexpr std::int64_t kMaxPrimeValue = 2147483647;

// ---------------------------------------------------------------------------
// polynomial grammar
// ---------------------------------------------------------------------------

class PolynomialParser {
public:
    explicit PolynomialParser(std::string_view text) : text_(text) {}

    std::map<unsigned, BigRat> parse() {
        skip_whitespace();
        if (at_end()) {
            fail("empty polynomial", pos_);
        }
        parse_term(1);
        for (;;) {
            skip_whitespace();
            if (at_end()) {
                break;
            }
            const char c = peek();
            if (c != '+' && c != '-') {
                fail("expected '+' or '-'", pos_);
            }
            ++pos_;
            parse_term(c == '-' ? -1 : 1);
        }
        return std::move(coeffs_);
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void skip_whitespace() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) {
            ++pos_;
        }
    }

    [[noreturn]] void fail(const std::string& message, std::size_t offset) {
        throw ParseError(message, offset);
    }

    BigInt parse_digits(const char* what) {
        const std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            ++pos_;
        }
        if (pos_ == start) {
            fail(std::string("expected ") + what, start);
        }
        return BigInt(std::string(text_.substr(start, pos_ - start)));
    }

    // coeff := int | int '/' uint
    BigRat parse_coefficient() {
        bool negative = false;
        if (peek() == '+' || peek() == '-') {
            negative = peek() == '-';
            ++pos_;
            skip_whitespace();
        }
        const BigInt numerator = parse_digits("a number");
        BigInt denominator(1);
        skip_whitespace();
        if (!at_end() && peek() == '/') {
            ++pos_;
            skip_whitespace();
            const std::size_t den_offset = pos_;
            denominator = parse_digits("a denominator");
            if (denominator == 0) {
                fail("zero denominator", den_offset);
            }
        }
        BigRat value = make_rational(numerator, denominator);
        return negative ? BigRat(-value) : value;
    }

    // 'x' ['^' uint]
    unsigned parse_power() {
        ++pos_;  // consume 'x'
        skip_whitespace();
        if (at_end() || peek() != '^') {
            return 1;
        }
        ++pos_;
        skip_whitespace();
        const std::size_t exp_offset = pos_;
        const BigInt exponent = parse_digits("an exponent");
        if (exponent > 1000000) {
            fail("exponent too large", exp_offset);
        }
        return exponent.convert_to<unsigned>();
    }

    void parse_term(int sign) {
        skip_whitespace();
        if (at_end()) {
            fail("expected a term", pos_);
        }
        if (peek() == 'x') {
            coeffs_[parse_power()] += sign;
            return;
        }
        const BigRat coefficient = parse_coefficient();
        skip_whitespace();
        if (!at_end() && peek() == '*') {
            ++pos_;
            skip_whitespace();
            if (at_end() || peek() != 'x') {
                fail("expected 'x' after '*'", pos_);
            }
            coeffs_[parse_power()] += sign * coefficient;
            return;
        }
        if (!at_end() && peek() == 'x') {
            fail("expected '*' between coefficient and x", pos_);
        }
        coeffs_[0] += sign * coefficient;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::map<unsigned, BigRat> coeffs_;
};

// ---------------------------------------------------------------------------
// json helpers
// ---------------------------------------------------------------------------

[[noreturn]] void config_fail(const std::string& field, const std::string& message) {
    throw ConfigError(field, message);
}

std::string string_like(const Json& value, const std::string& field) {
    if (value.is_string()) {
        return value.get<std::string>();
    }
    if (value.is_number_integer()) {
        return std::to_string(value.get<long long>());
    }
    if (value.is_number_unsigned()) {
        return std::to_string(value.get<unsigned long long>());
    }
    config_fail(field, "expected a string (numbers are written as strings)");
}

BigRat rational_field(const Json& value, const std::string& field) {
    const std::string text = string_like(value, field);
    try {
        return parse_rational_text(text);
    } catch (const ParseError& e) {
        config_fail(field, e.what());
    }
}

std::int64_t integer_field(const Json& value, const std::string& field, std::int64_t lo,
                           std::int64_t hi) {
    const BigRat q = rational_field(value, field);
    if (boost::multiprecision::denominator(q) != 1) {
        config_fail(field, "expected an integer");
    }
    const BigInt n = boost::multiprecision::numerator(q);
    if (n < lo || n > hi) {
        config_fail(field, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
    }
    return n.convert_to<std::int64_t>();
}

GridSpec grid_from_json(const Json& value, const std::string& field) {
    GridSpec grid;
    if (value.is_array()) {
        grid.generated = false;
        for (std::size_t i = 0; i < value.size(); ++i) {
            grid.explicit_values.push_back(
                rational_field(value[i], field + "[" + std::to_string(i) + "]"));
        }
        return grid;
    }
    if (!value.is_object()) {
        config_fail(field, "expected an array of rationals or a generator object");
    }
    for (const auto& [key, sub] : value.items()) {
        if (key == "units") {
            if (!sub.is_array() || sub.empty()) {
                config_fail(field + ".units", "expected a nonempty array of rationals");
            }
            grid.units.clear();
            for (std::size_t i = 0; i < sub.size(); ++i) {
                grid.units.push_back(
                    rational_field(sub[i], field + ".units[" + std::to_string(i) + "]"));
            }
        } else if (key == "min_exp") {
            grid.min_exp = integer_field(sub, field + ".min_exp", -kMaxGridExp, kMaxGridExp);
        } else if (key == "max_exp") {
            grid.max_exp = integer_field(sub, field + ".max_exp", -kMaxGridExp, kMaxGridExp);
        } else if (key == "include_zero") {
            if (!sub.is_boolean()) {
                config_fail(field + ".include_zero", "expected a boolean");
            }
            grid.include_zero = sub.get<bool>();
        } else {
            config_fail(field + "." + key, "unknown grid field");
        }
    }
    if (grid.min_exp > grid.max_exp) {
        config_fail(field, "min_exp exceeds max_exp");
    }
    return grid;
}

ControlSpec control_from_json(const Json& value) {
    if (!value.is_object()) {
        config_fail("control", "expected an object");
    }
    ControlSpec spec;
    for (const auto& [key, sub] : value.items()) {
        if (key == "form") {
            const std::string name = string_like(sub, "control.form");
            if (name == "power") {
                spec.form = ControlFunction::Form::Power;
            } else if (name == "constant") {
                spec.form = ControlFunction::Form::Constant;
            } else if (name == "table") {
                spec.form = ControlFunction::Form::Table;
            } else {
                config_fail("control.form", "expected power, constant, or table");
            }
        } else if (key == "delta") {
            spec.delta = rational_field(sub, "control.delta");
        } else if (key == "r") {
            spec.r = static_cast<unsigned>(integer_field(sub, "control.r", 1, kMaxR));
        } else if (key == "entries") {
            if (!sub.is_array()) {
                config_fail("control.entries", "expected an array of {x, y, value} rows");
            }
            for (std::size_t i = 0; i < sub.size(); ++i) {
                const std::string where = "control.entries[" + std::to_string(i) + "]";
                const Json& row = sub[i];
                if (!row.is_object()) {
                    config_fail(where, "expected an object with x, y, value");
                }
                std::optional<BigRat> x, y, v;
                for (const auto& [k2, v2] : row.items()) {
                    if (k2 == "x") {
                        x = rational_field(v2, where + ".x");
                    } else if (k2 == "y") {
                        y = rational_field(v2, where + ".y");
                    } else if (k2 == "value") {
                        v = rational_field(v2, where + ".value");
                    } else {
                        config_fail(where + "." + k2, "unknown entry field");
                    }
                }
                if (!x || !y || !v) {
                    config_fail(where, "needs x, y, and value");
                }
                if (*v < 0) {
                    config_fail(where + ".value", "control values are nonnegative");
                }
                spec.table.emplace_back(std::move(*x), std::move(*y), std::move(*v));
            }
        } else {
            config_fail("control." + key, "unknown control field");
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// resolution & validation
// ---------------------------------------------------------------------------

void validate_grid(const GridSpec& grid, const std::string& field) {
    if (grid.generated) {
        if (grid.units.empty()) {
            config_fail(field + ".units", "needs at least one unit");
        }
        if (grid.min_exp > grid.max_exp) {
            config_fail(field, "min_exp exceeds max_exp");
        }
        if (grid.min_exp < -kMaxGridExp || grid.max_exp > kMaxGridExp) {
            config_fail(field, "exponents are capped at |e| <= 64");
        }
    }
}

struct ResolvedExperiment {
    ExperimentConfig config;
    PrimeContext ctx;
    EquationFamily family;
    unsigned degree;
    PolynomialFunction f;
    ControlFunction phi;
    std::vector<PAdicScalar> sample_points;
    std::vector<PAdicScalar> probe_points;
    std::vector<std::pair<PAdicScalar, PAdicScalar>> sample_pairs;
};

ResolvedExperiment resolve(const ExperimentConfig& raw) {
    ExperimentConfig cfg = raw;
    if (cfg.prime < 2 || cfg.prime > kMaxPrimeValue) {
        config_fail("prime", "must be between 2 and 2^31 - 1");
    }
    std::optional<PrimeContext> ctx;
    try {
        ctx.emplace(cfg.prime);
    } catch (const DomainError& e) {
        config_fail("prime", e.what());
    }
    if (cfg.k < 1 || cfg.k > kMaxK) {
        config_fail("k", "must be between 1 and " + std::to_string(kMaxK));
    }
    if (cfg.n_max < 1 || cfg.n_max > kMaxNMax) {
        config_fail("n_max", "must be between 1 and " + std::to_string(kMaxNMax));
    }
    if (cfg.target_valuation < 1 || cfg.target_valuation > kMaxTargetValuation) {
        config_fail("target_valuation",
                    "must be between 1 and " + std::to_string(kMaxTargetValuation));
    }
    const EquationFamily family(cfg.equation, cfg.k);
    const unsigned degree = family.degree();
    if (cfg.control.delta < 0) {
        config_fail("control.delta", "must be nonnegative");
    }
    if (cfg.control.form == ControlFunction::Form::Power && !cfg.control.r) {
        cfg.control.r = degree + 1;  // canonical choice compatible with contraction
    }
    if (cfg.control.form == ControlFunction::Form::Power &&
        (*cfg.control.r < 1 || *cfg.control.r > kMaxR)) {
        config_fail("control.r", "must be between 1 and " + std::to_string(kMaxR));
    }
    if (cfg.control.form == ControlFunction::Form::Table && cfg.control.table.empty()) {
        config_fail("control.entries", "table-form control needs entries");
    }
    if (cfg.function_text.empty()) {
        config_fail("function", "a polynomial must be provided");
    }
    std::optional<PolynomialFunction> f;
    try {
        f = parse_polynomial(cfg.function_text, *ctx);
    } catch (const ParseError& e) {
        config_fail("function", e.what());
    }
    if (!f->is_zero() && f->coefficients().rbegin()->first > kMaxDegree) {
        config_fail("function", "degree is capped at " + std::to_string(kMaxDegree));
    }
    if (family.kind() == EquationKind::Quartic && f->coefficient(0) != 0) {
        config_fail("function", "the quartic family requires a zero constant term");
    }
    validate_grid(cfg.samples, "samples");
    validate_grid(cfg.probes, "probes");
    const std::vector<BigRat> sample_values = cfg.samples.materialize(*ctx);
    if (sample_values.empty()) {
        config_fail("samples", "needs at least one point");
    }
    const std::vector<BigRat> probe_values = cfg.probes.materialize(*ctx);

    std::optional<ControlFunction> phi;
    switch (cfg.control.form) {
        case ControlFunction::Form::Power:
            phi = ControlFunction::power(cfg.control.delta, *cfg.control.r, *ctx);
            break;
        case ControlFunction::Form::Constant:
            phi = ControlFunction::constant(cfg.control.delta, *ctx);
            break;
        case ControlFunction::Form::Table: {
            ControlFunction::TableEntries entries;
            for (const auto& [x, y, v] : cfg.control.table) {
                if (!entries.emplace(std::make_pair(x, y), Magnitude(v)).second) {
                    config_fail("control.entries", "duplicate entry for x=" + render_rational(x) +
                                                       ", y=" + render_rational(y));
                }
            }
            phi = ControlFunction::table(std::move(entries), *ctx);
            break;
        }
    }

    std::vector<PAdicScalar> sample_points;
    sample_points.reserve(sample_values.size());
    for (const BigRat& v : sample_values) {
        sample_points.emplace_back(v, *ctx);
    }
    std::vector<PAdicScalar> probe_points;
    probe_points.reserve(probe_values.size());
    for (const BigRat& v : probe_values) {
        probe_points.emplace_back(v, *ctx);
    }
    std::vector<std::pair<PAdicScalar, PAdicScalar>> sample_pairs;
    sample_pairs.reserve(sample_points.size() * sample_points.size());
    for (const PAdicScalar& x : sample_points) {
        for (const PAdicScalar& y : sample_points) {
            sample_pairs.emplace_back(x, y);
        }
    }
    return ResolvedExperiment{std::move(cfg),           *ctx,
                              family,                   degree,
                              std::move(*f),            std::move(*phi),
                              std::move(sample_points), std::move(probe_points),
                              std::move(sample_pairs)};
}

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e.what());
    }
}

// ---------------------------------------------------------------------------
// emission helpers
// ---------------------------------------------------------------------------

std::string_view condition_name(ConditionId id) {
    switch (id) {
        case ConditionId::Vanishing:
            return "vanishing";
        case ConditionId::PhiTildeExists:
            return "phi-tilde-exists";
        case ConditionId::UniquenessTail:
            return "uniqueness-tail";
        case ConditionId::CorollaryI:
            return "corollary-i";
        case ConditionId::CorollaryII:
            return "corollary-ii";
    }
    return "unknown";
}

std::string_view equation_name(EquationKind kind) {
    return kind == EquationKind::Cubic ? "cubic" : "quartic";
}

std::string_view direction_name(Direction direction) {
    return direction == Direction::Ascending ? "ascending" : "descending";
}

std::string_view form_name(ControlFunction::Form form) {
    switch (form) {
        case ControlFunction::Form::Power:
            return "power";
        case ControlFunction::Form::Constant:
            return "constant";
        case ControlFunction::Form::Table:
            return "table";
    }
    return "unknown";
}

Json rational_json(const BigRat& q) {
    Json j = Json::object();
    j["num"] = boost::multiprecision::numerator(q).str();
    j["den"] = boost::multiprecision::denominator(q).str();
    return j;
}

Json magnitude_json(const Magnitude& m) { return rational_json(m.value()); }

Json witness_json(const std::optional<ConditionWitness>& witness) {
    if (!witness) {
        return nullptr;
    }
    Json j = Json::object();
    j["x"] = rational_json(witness->x);
    j["y"] = rational_json(witness->y);
    j["index"] = witness->index;
    j["value"] = magnitude_json(witness->value);
    return j;
}

// Exponent e with p^e == n for n >= 1, if one exists.
std::optional<std::int64_t> exact_power_of(BigInt n, std::int64_t p) {
    std::int64_t e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    if (n == 1) {
        return e;
    }
    return std::nullopt;
}

// Norm-like magnitudes render as p^e whenever they are exact powers of p.
std::string magnitude_text(const Magnitude& m, std::int64_t p) {
    if (m.is_zero()) {
        return "0";
    }
    const BigInt num = boost::multiprecision::numerator(m.value());
    const BigInt den = boost::multiprecision::denominator(m.value());
    if (den == 1) {
        if (const auto e = exact_power_of(num, p)) {
            return std::to_string(p) + "^" + std::to_string(*e);
        }
    } else if (num == 1) {
        if (const auto e = exact_power_of(den, p)) {
            return std::to_string(p) + "^-" + std::to_string(*e);
        }
    }
    return render_rational(m.value());
}

Json config_json(const ReportDocument& doc) {
    const ExperimentConfig& cfg = doc.config;
    Json c = Json::object();
    c["prime"] = std::to_string(cfg.prime);
    c["k"] = std::to_string(cfg.k);
    c["equation"] = std::string(equation_name(cfg.equation));
    c["direction"] = std::string(direction_name(cfg.direction));
    Json control = Json::object();
    control["form"] = std::string(form_name(cfg.control.form));
    if (cfg.control.form != ControlFunction::Form::Table) {
        control["delta"] = render_rational(cfg.control.delta);
        if (cfg.control.form == ControlFunction::Form::Power && cfg.control.r) {
            control["r"] = std::to_string(*cfg.control.r);
        }
    } else {
        Json entries = Json::array();
        for (const auto& [x, y, v] : cfg.control.table) {
            Json row = Json::object();
            row["x"] = render_rational(x);
            row["y"] = render_rational(y);
            row["value"] = render_rational(v);
            entries.push_back(std::move(row));
        }
        control["entries"] = std::move(entries);
    }
    c["control"] = std::move(control);
    c["function"] = cfg.function_text;
    Json samples = Json::array();
    for (const BigRat& v : doc.sample_points) {
        samples.push_back(render_rational(v));
    }
    c["samples"] = std::move(samples);
    Json probes = Json::array();
    for (const BigRat& v : doc.probe_points) {
        probes.push_back(render_rational(v));
    }
    c["probes"] = std::move(probes);
    c["n_max"] = std::to_string(cfg.n_max);
    c["target_valuation"] = std::to_string(cfg.target_valuation);
    return c;
}

std::string emit_json(const ReportDocument& doc) {
    Json j = Json::object();
    j["config"] = config_json(doc);
    j["function_canonical"] = doc.function_canonical;
    Json hypotheses = Json::array();
    for (const HypothesisReport& h : doc.hypotheses) {
        Json row = Json::object();
        row["condition"] = std::string(condition_name(h.condition));
        row["holds"] = h.holds;
        row["witness"] = witness_json(h.witness);
        hypotheses.push_back(std::move(row));
    }
    j["hypotheses"] = std::move(hypotheses);
    Json defect = Json::object();
    defect["holds"] = doc.defect_bound.holds;
    defect["max_defect_norm"] = magnitude_json(doc.defect_bound.max_defect_norm);
    defect["worst_ratio"] =
        doc.defect_bound.worst_ratio ? rational_json(*doc.defect_bound.worst_ratio) : Json(nullptr);
    Json violations = Json::array();
    for (const DefectViolation& v : doc.defect_bound.violations) {
        Json row = Json::object();
        row["x"] = rational_json(v.x.value());
        row["y"] = rational_json(v.y.value());
        row["defect_norm"] = magnitude_json(v.defect_norm);
        row["control_value"] = magnitude_json(v.control_value);
        violations.push_back(std::move(row));
    }
    defect["violations"] = std::move(violations);
    j["defect_bound"] = std::move(defect);
    Json limit = Json::object();
    limit["source"] = doc.limit_source;
    limit["polynomial"] = doc.limit_polynomial ? Json(*doc.limit_polynomial) : Json(nullptr);
    limit["defect_of_limit_max"] =
        doc.defect_of_limit_max ? magnitude_json(*doc.defect_of_limit_max) : Json(nullptr);
    j["limit"] = std::move(limit);
    j["bound_form"] = doc.config.direction == Direction::Ascending ? "ascending" : "descending-derived";
    Json probes = Json::array();
    for (const ProbeOutcome& p : doc.probes) {
        Json row = Json::object();
        row["x"] = rational_json(p.x.value());
        row["converged"] = p.converged;
        row["n_used"] = static_cast<std::uint64_t>(p.n_used);
        row["final_residual"] = magnitude_json(p.final_residual);
        row["limit_value"] = rational_json(p.limit_value.value());
        row["deviation"] = magnitude_json(p.deviation);
        row["bound"] = magnitude_json(p.bound);
        row["slack"] = p.slack ? rational_json(*p.slack) : Json(nullptr);
        row["bound_ok"] = p.bound_ok;
        row["intermediate_ok"] = p.intermediate_ok ? Json(*p.intermediate_ok) : Json(nullptr);
        row["oracle_gap"] = p.oracle_gap ? magnitude_json(*p.oracle_gap) : Json(nullptr);
        probes.push_back(std::move(row));
    }
    j["probes"] = std::move(probes);
    Json uniqueness = Json::object();
    uniqueness["applicable"] = doc.uniqueness.applicable;
    uniqueness["i_max"] = doc.uniqueness.i_max;
    uniqueness["distance"] =
        doc.uniqueness.distance ? magnitude_json(*doc.uniqueness.distance) : Json(nullptr);
    uniqueness["ok"] = doc.uniqueness.ok;
    j["uniqueness"] = std::move(uniqueness);
    j["verdict"] = std::string(verdict_name(doc.verdict));
    return j.dump(2) + "\n";
}

std::string emit_text(const ReportDocument& doc) {
    const std::int64_t p = doc.config.prime;
    std::ostringstream out;
    out << "exact p-adic stability verification\n";
    out << "prime p = " << p << "   k = " << doc.config.k << "   equation = "
        << equation_name(doc.config.equation) << "   direction = "
        << direction_name(doc.config.direction) << "\n";
    out << "control: " << form_name(doc.config.control.form);
    if (doc.config.control.form != ControlFunction::Form::Table) {
        out << "  delta = " << render_rational(doc.config.control.delta);
        if (doc.config.control.form == ControlFunction::Form::Power && doc.config.control.r) {
            out << "  r = " << *doc.config.control.r;
        }
    } else {
        out << "  (" << doc.config.control.table.size() << " entries)";
    }
    out << "\n";
    out << "function: " << doc.function_canonical << "\n";
    out << "grid: " << doc.sample_points.size() << " sample points ("
        << doc.sample_points.size() * doc.sample_points.size() << " pairs), "
        << doc.probe_points.size() << " probes   n_max = " << doc.config.n_max
        << "   target valuation = " << doc.config.target_valuation << "\n";
    out << "\nhypotheses\n";
    for (const HypothesisReport& h : doc.hypotheses) {
        out << "  " << condition_name(h.condition);
        for (std::size_t i = condition_name(h.condition).size(); i < 18; ++i) {
            out << ' ';
        }
        out << (h.holds ? "holds" : "FAILS");
        if (h.witness) {
            out << "  (witness: x=" << render_rational(h.witness->x)
                << ", y=" << render_rational(h.witness->y) << ", index " << h.witness->index
                << ", value " << magnitude_text(h.witness->value, p) << ")";
        }
        out << "\n";
    }
    out << "\ndefect bound: " << (doc.defect_bound.holds ? "holds" : "VIOLATED")
        << "   max defect norm = " << magnitude_text(doc.defect_bound.max_defect_norm, p);
    if (doc.defect_bound.worst_ratio) {
        out << "   worst ratio = " << render_rational(*doc.defect_bound.worst_ratio);
    }
    out << "\n";
    constexpr std::size_t kMaxListedViolations = 5;
    for (std::size_t i = 0; i < doc.defect_bound.violations.size() && i < kMaxListedViolations; ++i) {
        const DefectViolation& v = doc.defect_bound.violations[i];
        out << "  violation: x=" << render_rational(v.x.value())
            << " y=" << render_rational(v.y.value())
            << " |defect|=" << magnitude_text(v.defect_norm, p)
            << " control=" << magnitude_text(v.control_value, p) << "\n";
    }
    if (doc.defect_bound.violations.size() > kMaxListedViolations) {
        out << "  (+" << doc.defect_bound.violations.size() - kMaxListedViolations
            << " further violations)\n";
    }
    out << "limit: ";
    if (doc.limit_polynomial) {
        out << "closed-form polynomial " << *doc.limit_polynomial;
    } else {
        out << "iterated approximants only";
    }
    if (doc.defect_of_limit_max) {
        out << "   (max defect of limit = " << magnitude_text(*doc.defect_of_limit_max, p) << ")";
    }
    out << "\n";
    out << "\nprobes   [bound form: "
        << (doc.config.direction == Direction::Ascending ? "ascending" : "descending-derived")
        << "]\n";
    for (const ProbeOutcome& probe : doc.probes) {
        out << "  x=" << render_rational(probe.x.value());
        if (!probe.converged) {
            out << "  diverged after " << probe.n_used + 1 << " steps  last residual = "
                << magnitude_text(probe.final_residual, p) << "\n";
            continue;
        }
        out << "  dev=" << magnitude_text(probe.deviation, p)
            << "  bound=" << magnitude_text(probe.bound, p)
            << "  " << (probe.bound_ok ? "OK" : "VIOLATION") << "\n";
    }
    if (doc.probes.empty()) {
        out << "  (none)\n";
    }
    out << "\nuniqueness cross-check: ";
    if (!doc.uniqueness.applicable) {
        out << "not applicable\n";
    } else {
        out << "distance = " << magnitude_text(*doc.uniqueness.distance, p) << " at depth "
            << doc.uniqueness.i_max << "  " << (doc.uniqueness.ok ? "OK" : "MISMATCH") << "\n";
    }
    out << "verdict: " << verdict_name(doc.verdict) << "\n";
    return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// public surface
// ---------------------------------------------------------------------------

ParseError::ParseError(const std::string& message, std::size_t offset_in)
    : Error("polynomial syntax error at byte " + std::to_string(offset_in) + ": " + message),
      offset(offset_in) {}

ConfigError::ConfigError(std::string field_in, const std::string& message)
    : Error("config field '" + field_in + "': " + message), field(std::move(field_in)) {}

StageError::StageError(std::string stage_in, const std::string& message)
    : Error("pipeline stage '" + stage_in + "': " + message), stage(std::move(stage_in)) {}

PolynomialFunction parse_polynomial(std::string_view text, PrimeContext ctx) {
    return PolynomialFunction(PolynomialParser(text).parse(), ctx);
}

std::string render_rational(const BigRat& q) {
    const BigInt num = boost::multiprecision::numerator(q);
    const BigInt den = boost::multiprecision::denominator(q);
    return den == 1 ? num.str() : num.str() + "/" + den.str();
}

std::string render_polynomial(const PolynomialFunction& f) {
    if (f.is_zero()) {
        return "0";
    }
    std::string out;
    bool first = true;
    for (const auto& [degree, coeff] : f.coefficients()) {
        const bool negative = coeff < 0;
        const BigRat abs_coeff = negative ? BigRat(-coeff) : coeff;
        if (first) {
            // A leading bare minus is outside the grammar, so a negative
            // first term always carries an explicit coefficient.
            if (negative) {
                out += render_rational(coeff);
                if (degree > 0) {
                    out += "*";
                }
            } else if (degree == 0 || abs_coeff != 1) {
                out += render_rational(coeff);
                if (degree > 0) {
                    out += "*";
                }
            }
            first = false;
        } else {
            out += negative ? " - " : " + ";
            if (degree == 0 || abs_coeff != 1) {
                out += render_rational(abs_coeff);
                if (degree > 0) {
                    out += "*";
                }
            }
        }
        if (degree >= 1) {
            out += "x";
            if (degree > 1) {
                out += "^" + std::to_string(degree);
            }
        }
    }
    return out;
}

BigRat parse_rational_text(std::string_view text) {
    std::size_t pos = 0;
    const auto skip_ws = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
    };
    skip_ws();
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    const auto digits = [&](const char* what) {
        const std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        if (pos == start) {
            throw ParseError(std::string("expected ") + what, start);
        }
        return BigInt(std::string(text.substr(start, pos - start)));
    };
    const BigInt num = digits("a number");
    BigInt den(1);
    if (pos < text.size() && text[pos] == '/') {
        ++pos;
        const std::size_t den_offset = pos;
        den = digits("a denominator");
        if (den == 0) {
            throw ParseError("zero denominator", den_offset);
        }
    }
    skip_ws();
    if (pos != text.size()) {
        throw ParseError("unexpected trailing input", pos);
    }
    const BigRat value = make_rational(num, den);
    return negative ? BigRat(-value) : value;
}

std::string_view verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::TheoremVerified:
            return "theorem-verified";
        case Verdict::HypothesisFailed:
            return "hypothesis-failed";
        case Verdict::Diverged:
            return "diverged";
    }
    return "unknown";
}

int exit_code_for(Verdict verdict) {
    return verdict == Verdict::TheoremVerified ? 0 : 1;
}

std::vector<BigRat> GridSpec::materialize(const PrimeContext& ctx) const {
    std::vector<BigRat> out;
    if (!generated) {
        out = explicit_values;
    } else {
        for (const BigRat& unit : units) {
            for (std::int64_t e = min_exp; e <= max_exp; ++e) {
                out.push_back(unit * rational_pow(BigRat(ctx.prime()), e));
            }
        }
        if (include_zero) {
            out.emplace_back(0);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ExperimentConfig config_from_json(const Json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("config", "top level must be a JSON object");
    }
    ExperimentConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "prime") {
            cfg.prime = integer_field(value, "prime", 2, kMaxPrimeValue);
        } else if (key == "k") {
            cfg.k = static_cast<unsigned>(integer_field(value, "k", 1, kMaxK));
        } else if (key == "equation") {
            const std::string name = string_like(value, "equation");
            if (name == "cubic") {
                cfg.equation = EquationKind::Cubic;
            } else if (name == "quartic") {
                cfg.equation = EquationKind::Quartic;
            } else {
                config_fail("equation", "expected cubic or quartic");
            }
        } else if (key == "direction") {
            const std::string name = string_like(value, "direction");
            if (name == "ascending") {
                cfg.direction = Direction::Ascending;
            } else if (name == "descending") {
                cfg.direction = Direction::Descending;
            } else {
                config_fail("direction", "expected ascending or descending");
            }
        } else if (key == "control") {
            cfg.control = control_from_json(value);
        } else if (key == "function") {
            cfg.function_text = string_like(value, "function");
        } else if (key == "samples") {
            cfg.samples = grid_from_json(value, "samples");
        } else if (key == "probes") {
            cfg.probes = grid_from_json(value, "probes");
        } else if (key == "n_max") {
            cfg.n_max = static_cast<unsigned>(integer_field(value, "n_max", 1, kMaxNMax));
        } else if (key == "target_valuation") {
            cfg.target_valuation = integer_field(value, "target_valuation", 1, kMaxTargetValuation);
        } else {
            config_fail(key, "unknown configuration field");
        }
    }
    return cfg;
}

ReportDocument run_experiment(const ExperimentConfig& raw) {
    ResolvedExperiment exp = resolve(raw);
    const unsigned k = exp.config.k;
    const unsigned d = exp.degree;
    const Direction dir = exp.config.direction;
    const unsigned n_max = exp.config.n_max;

    ReportDocument doc;
    doc.config = exp.config;
    doc.sample_points.reserve(exp.sample_points.size());
    for (const PAdicScalar& s : exp.sample_points) {
        doc.sample_points.push_back(s.value());
    }
    doc.probe_points.reserve(exp.probe_points.size());
    for (const PAdicScalar& s : exp.probe_points) {
        doc.probe_points.push_back(s.value());
    }
    doc.function_canonical = render_polynomial(exp.f);

    run_stage("hypotheses", [&] {
        doc.hypotheses.push_back(
            vanishing_condition(exp.phi, k, d, dir, exp.sample_pairs, n_max));
        doc.hypotheses.push_back(
            phi_tilde_exists(exp.phi, k, d, dir, exp.sample_points, n_max));
        HypothesisReport tail{ConditionId::UniquenessTail, true, std::nullopt};
        for (const PAdicScalar& x : exp.sample_points) {
            const HypothesisReport at_x =
                uniqueness_tail_condition(exp.phi, x, k, d, dir, kUniquenessDepth, n_max);
            if (!at_x.holds) {
                tail = at_x;
                break;
            }
        }
        doc.hypotheses.push_back(std::move(tail));
        if (exp.phi.form() != ControlFunction::Form::Table) {
            const CorollaryReport corollary =
                corollary_conditions(exp.phi.delta(), exp.phi.exponent(), k, d, dir, exp.ctx);
            doc.hypotheses.push_back(corollary.sub_multiplicative);
            doc.hypotheses.push_back(corollary.contraction);
        }
        return 0;
    });

    doc.defect_bound = run_stage("defect-bound", [&] {
        return verify_defect_bound(exp.f, exp.phi, exp.family, exp.sample_pairs);
    });

    const bool oracle_usable =
        !(norm(PAdicScalar(static_cast<std::int64_t>(k), exp.ctx)) == Magnitude::one());
    const std::optional<PolynomialFunction> closed_form =
        run_stage("limit", [&]() -> std::optional<PolynomialFunction> {
            if (!oracle_usable) {
                return std::nullopt;
            }
            return closed_form_oracle(exp.f, k, d, dir);
        });
    if (closed_form) {
        doc.limit_source = "closed-form";
        doc.limit_polynomial = render_polynomial(*closed_form);
        doc.defect_of_limit_max = run_stage("limit", [&] {
            Magnitude worst = Magnitude::zero();
            for (const auto& [x, y] : exp.sample_pairs) {
                worst = mag_max(worst, norm(defect(*closed_form, exp.family, x, y)));
            }
            return worst;
        });
    } else {
        doc.limit_source = "iteration";
    }

    const Magnitude gap_threshold(
        rational_pow(BigRat(exp.config.prime), -exp.config.target_valuation));
    run_stage("probes", [&] {
        const IterationConfig iteration{dir, n_max, exp.config.target_valuation};
        for (const PAdicScalar& x : exp.probe_points) {
            const auto [iterated, trace] = iterate_to_limit(exp.f, x, k, d, iteration);
            const PAdicScalar limit_value = closed_form ? evaluate(*closed_form, x) : iterated;
            const Magnitude deviation = norm(sub(limit_value, evaluate(exp.f, x)));
            const Magnitude bound = stability_bound_value(exp.phi, x, k, d, n_max, dir);
            std::optional<BigRat> slack;
            if (!deviation.is_zero()) {
                slack = bound.value() / deviation.value();
            }
            std::optional<bool> intermediate_ok;
            if (doc.defect_bound.holds) {
                bool ok = true;
                for (unsigned n = 1; n <= std::min(kIntermediateDepth, n_max) && ok; ++n) {
                    ok = verify_intermediate_bound(exp.f, exp.phi, x, k, d, n, dir);
                }
                intermediate_ok = ok;
            }
            std::optional<Magnitude> oracle_gap;
            if (closed_form && trace.converged) {
                oracle_gap = norm(sub(iterated, limit_value));
            }
            doc.probes.push_back(ProbeOutcome{x, trace.converged, trace.n_used,
                                              trace.residuals.back(), limit_value, deviation,
                                              bound, std::move(slack), mag_le(deviation, bound),
                                              intermediate_ok, std::move(oracle_gap)});
        }
        return 0;
    });

    doc.uniqueness = run_stage("uniqueness", [&] {
        UniquenessOutcome outcome;
        outcome.i_max = kUniquenessDepth;
        if (!oracle_usable || exp.probe_points.empty()) {
            return outcome;
        }
        const auto ascending = closed_form_oracle(exp.f, k, d, Direction::Ascending);
        const auto descending = closed_form_oracle(exp.f, k, d, Direction::Descending);
        if (!ascending || !descending) {
            return outcome;
        }
        outcome.applicable = true;
        outcome.distance =
            uniqueness_probe(*ascending, *descending, k, d, kUniquenessDepth, exp.probe_points);
        outcome.ok = outcome.distance->is_zero();
        return outcome;
    });

    bool hypotheses_ok = true;
    for (const HypothesisReport& h : doc.hypotheses) {
        hypotheses_ok = hypotheses_ok && h.holds;
    }
    bool any_diverged = false;
    bool bounds_ok = doc.defect_bound.holds;
    for (const ProbeOutcome& probe : doc.probes) {
        any_diverged = any_diverged || !probe.converged;
        bounds_ok = bounds_ok && probe.bound_ok;
        bounds_ok = bounds_ok && !(probe.intermediate_ok && !*probe.intermediate_ok);
        bounds_ok = bounds_ok && !(probe.oracle_gap && !mag_le(*probe.oracle_gap, gap_threshold));
    }
    bounds_ok = bounds_ok && (!doc.uniqueness.applicable || doc.uniqueness.ok);
    if (!hypotheses_ok) {
        doc.verdict = Verdict::HypothesisFailed;
    } else if (any_diverged) {
        doc.verdict = Verdict::Diverged;
    } else if (!bounds_ok) {
        doc.verdict = Verdict::HypothesisFailed;
    } else {
        doc.verdict = Verdict::TheoremVerified;
    }
    return doc;
}

std::string emit_report(const ReportDocument& doc, ReportFormat format) {
    return format == ReportFormat::Json ? emit_json(doc) : emit_text(doc);
}

}  // namespace padicstab
