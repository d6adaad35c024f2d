#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "padicstab/harness.hpp"

namespace {

using namespace padicstab;

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open '" + path + "'");
    }
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("JSON parse failure: ") + e.what());
    }
    return config_from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact verification of cubic/quartic functional-equation stability "
                 "over the rationals with a p-adic norm"};
    app.require_subcommand(1);

    CLI::App* verify =
        app.add_subcommand("verify", "run one verification experiment and print its report");

    std::string config_path;
    std::string function_text;
    std::string equation_text;
    std::string direction_text;
    std::string delta_text;
    std::string format_text = "text";
    std::int64_t prime = 0;
    std::int64_t k = 0;
    std::int64_t r = 0;
    std::int64_t n_max = 0;
    std::int64_t target_valuation = 0;

    verify->add_option("--config", config_path, "JSON experiment configuration file");
    verify->add_option("--prime", prime, "prime of the valuation (default 2)");
    verify->add_option("--k", k, "dilation parameter of the equation (default 2)");
    verify->add_option("--equation", equation_text, "cubic or quartic (default cubic)")
        ->check(CLI::IsMember({"cubic", "quartic"}));
    verify
        ->add_option("--direction", direction_text,
                     "ascending or descending iteration (default ascending)")
        ->check(CLI::IsMember({"ascending", "descending"}));
    verify->add_option("--function", function_text, "polynomial to test, e.g. \"x^3 + x^4\"");
    verify->add_option("--delta", delta_text, "control amplitude, an exact rational (default 1)");
    verify->add_option("--r", r,
                       "control growth exponent; 0 selects the constant control form "
                       "(default: equation degree + 1)");
    verify->add_option("--n-max", n_max, "maximum iteration depth (default 48)");
    verify->add_option("--target-valuation", target_valuation,
                       "stop once the residual norm is at most p^-target (default 30)");
    verify->add_option("--format", format_text, "report format: json or text (default text)")
        ->check(CLI::IsMember({"json", "text"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ExperimentConfig cfg;
        if (verify->count("--config") > 0) {
            cfg = load_config_file(config_path);
        }
        if (verify->count("--prime") > 0) {
            cfg.prime = prime;
        }
        if (verify->count("--k") > 0) {
            if (k < 1) {
                throw ConfigError("k", "must be at least 1");
            }
            cfg.k = static_cast<unsigned>(k);
        }
        if (verify->count("--equation") > 0) {
            cfg.equation = equation_text == "cubic" ? EquationKind::Cubic : EquationKind::Quartic;
        }
        if (verify->count("--direction") > 0) {
            cfg.direction =
                direction_text == "ascending" ? Direction::Ascending : Direction::Descending;
        }
        if (verify->count("--function") > 0) {
            cfg.function_text = function_text;
        }
        if (verify->count("--delta") > 0) {
            try {
                cfg.control.delta = parse_rational_text(delta_text);
            } catch (const ParseError& e) {
                throw ConfigError("control.delta", e.what());
            }
        }
        if (verify->count("--r") > 0) {
            if (r < 0) {
                throw ConfigError("control.r", "must be nonnegative");
            }
            if (r == 0) {
                cfg.control.form = ControlFunction::Form::Constant;
                cfg.control.r.reset();
            } else {
                cfg.control.form = ControlFunction::Form::Power;
                cfg.control.r = static_cast<unsigned>(r);
            }
        }
        if (verify->count("--n-max") > 0) {
            if (n_max < 1) {
                throw ConfigError("n_max", "must be at least 1");
            }
            cfg.n_max = static_cast<unsigned>(n_max);
        }
        if (verify->count("--target-valuation") > 0) {
            cfg.target_valuation = target_valuation;
        }

        const ReportDocument report = run_experiment(cfg);
        std::cout << emit_report(report,
                                 format_text == "json" ? ReportFormat::Json : ReportFormat::Text);
        return exit_code_for(report.verdict);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
