#pragma once

#include "padicstab/direct_method.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace padicstab {

/// Polynomial-source syntax error; `offset` is the byte position in the input.
struct ParseError : Error {
    ParseError(const std::string& message, std::size_t offset);
    std::size_t offset;
};

/// An experiment configuration was rejected; `field` names the bad entry.
struct ConfigError : Error {
    ConfigError(std::string field, const std::string& message);
    std::string field;
};

/// A module error surfaced while running the pipeline; `stage` names where.
struct StageError : Error {
    StageError(std::string stage, const std::string& message);
    std::string stage;
};

/// Parses the polynomial grammar
///   poly  := term (('+' | '-') term)*
///   term  := [coeff '*'] 'x' ['^' uint] | coeff
///   coeff := int | int '/' uint
/// with insignificant whitespace.  Repeated degrees are summed; zero
/// denominators and stray input raise ParseError with a byte offset.
PolynomialFunction parse_polynomial(std::string_view text, PrimeContext ctx);

/// Canonical source form: ascending degrees, explicit coefficients where the
/// grammar needs them.  parse(render(f)) == f for every f.
std::string render_polynomial(const PolynomialFunction& f);

/// "num" or "num/den" in lowest terms.
std::string render_rational(const BigRat& q);

/// Strict rational literal: [sign] digits ['/' digits].  ParseError on junk
/// or a zero denominator.
BigRat parse_rational_text(std::string_view text);

enum class Verdict { TheoremVerified, HypothesisFailed, Diverged };

std::string_view verdict_name(Verdict verdict);

/// Process exit code for a completed run: 0 when the theorem held, 1 when a
/// hypothesis failed or a probe diverged.  (Configuration errors exit 2.)
int exit_code_for(Verdict verdict);

/// A set of rational grid points: either an explicit list or the generated
/// family {u * p^e : u in units, min_exp <= e <= max_exp} (plus zero).
/// Materialization sorts and deduplicates.
struct GridSpec {
    bool generated = true;
    std::vector<BigRat> explicit_values;
    std::vector<BigRat> units{BigRat(1), BigRat(3), BigRat(5)};
    std::int64_t min_exp = -2;
    std::int64_t max_exp = 2;
    bool include_zero = true;

    std::vector<BigRat> materialize(const PrimeContext& ctx) const;
};

/// Control-function selection.  An absent r means "equation degree + 1",
/// the canonical choice that makes the power form compatible with the
/// contraction condition.
struct ControlSpec {
    ControlFunction::Form form = ControlFunction::Form::Power;
    BigRat delta = BigRat(1);
    std::optional<unsigned> r;
    std::vector<std::tuple<BigRat, BigRat, BigRat>> table;  // (x, y, value) rows
};

struct ExperimentConfig {
    std::int64_t prime = 2;
    unsigned k = 2;
    EquationKind equation = EquationKind::Cubic;
    Direction direction = Direction::Ascending;
    ControlSpec control;
    std::string function_text;  // required
    GridSpec samples;           // defect-bound pairs come from this grid squared
    GridSpec probes;            // iteration / stability probes
    unsigned n_max = 48;
    std::int64_t target_valuation = 30;
};

/// Loads a configuration from JSON (all numbers written as strings; see the
/// README for the schema).  Unknown fields and malformed values raise
/// ConfigError naming the offending field.
ExperimentConfig config_from_json(const nlohmann::ordered_json& doc);

/// One probe's iteration and stability outcome.
struct ProbeOutcome {
    PAdicScalar x;
    bool converged = false;
    std::size_t n_used = 0;
    Magnitude final_residual;
    PAdicScalar limit_value;  // closed form when known, else the last approximant
    Magnitude deviation;
    Magnitude bound;
    std::optional<BigRat> slack;
    bool bound_ok = false;
    std::optional<bool> intermediate_ok;  // empty when the defect bound failed
    std::optional<Magnitude> oracle_gap;  // |iterated - closed form| when both exist
};

/// Ascending-vs-descending cross-check, applicable only when the closed form
/// exists in both directions (pure degree-d input).
struct UniquenessOutcome {
    bool applicable = false;
    unsigned i_max = 8;
    std::optional<Magnitude> distance;
    bool ok = true;
};

struct ReportDocument {
    ExperimentConfig config;  // normalized: r resolved, grids as configured
    std::vector<BigRat> sample_points;
    std::vector<BigRat> probe_points;
    std::string function_canonical;
    std::vector<HypothesisReport> hypotheses;
    DefectBoundReport defect_bound;
    std::string limit_source;  // "closed-form" or "iteration"
    std::optional<std::string> limit_polynomial;
    std::optional<Magnitude> defect_of_limit_max;
    std::vector<ProbeOutcome> probes;
    UniquenessOutcome uniqueness;
    Verdict verdict = Verdict::HypothesisFailed;
};

/// Runs the whole pipeline: hypothesis checks, defect-bound sweep, per-probe
/// iteration and stability comparison, and the uniqueness cross-check.
/// Deterministic: identical configs produce identical documents.  Module
/// errors surface as StageError naming the pipeline stage.
ReportDocument run_experiment(const ExperimentConfig& config);

enum class ReportFormat { Json, Text };

/// Serializes a report.  JSON uses a stable key order with every rational as
/// {"num": "...", "den": "..."}; text is a human-readable table.  Identical
/// documents serialize to identical bytes.
std::string emit_report(const ReportDocument& doc, ReportFormat format);

}  // namespace padicstab
