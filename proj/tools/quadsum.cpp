#include <iostream>

#include "CLI11.hpp"
#include "quadsum/cli.hpp"

int main(int argc, char** argv) {
    using namespace quadsum;
    RunConfig config;
    std::string field_text = "Q";
    std::string mode_text;

    CLI::App app{"Decompose column-finite operators into sums of quadratic operators"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--field", field_text, "Default field: Q or Fp:<p>")->envname("QUADSUM_FIELD");
        sub->add_option("--seed", config.seed, "Random seed, recorded in every output");
        sub->add_flag("--pretty", config.pretty, "Human-readable tables instead of JSON");
    };
    auto stratify_options = [&](CLI::App* sub) {
        sub->add_option("--input", config.input, "Operator file")->required();
        sub->add_option("--window", config.window, "Window N");
        sub->add_option("--mode", mode_text, "certified or heuristic");
        sub->add_option("--orbit-horizon", config.orbit_horizon, "Orbit horizon (default 4N)");
        sub->add_option("--family-horizon", config.family_horizon, "Family member limit (default 8N)");
        sub->add_option("--out", config.output, "Output file");
    };

    auto* stratify = app.add_subcommand("stratify", "Strata table and validation");
    common(stratify);
    stratify_options(stratify);

    auto* decompose = app.add_subcommand("decompose", "Decompose an operator and write dec.json");
    common(decompose);
    stratify_options(decompose);
    decompose->add_option("--polys", config.polys,
                          "squarezero, idempotents, squarezero-preset-2, idempotents-preset-2 or a JSON list");

    auto* verify = app.add_subcommand("verify", "Check a decomposition file against an operator");
    common(verify);
    verify->add_option("--input", config.input, "Operator file")->required();
    verify->add_option("--dec", config.dec, "Decomposition file")->required();
    verify->add_option("--window", config.window, "Window N (default: stored window)");

    auto* oracle = app.add_subcommand("oracle", "Finite-dimensional obstruction oracles");
    common(oracle);
    oracle->add_option("--prop", config.prop, "3squarezero or 3idem")->required();
    oracle->add_option("--dim", config.dim, "Matrix dimension");
    oracle->add_option("--trials", config.trials, "Random trials (3squarezero)");

    auto* demo = app.add_subcommand("demo", "Run the canned examples");
    common(demo);

    try {
        app.parse(argc, argv);
        config.field = Field::parse(field_text);
        if (mode_text == "certified") config.mode = StratMode::Certified;
        else if (mode_text == "heuristic") config.mode = StratMode::Heuristic;
        else if (!mode_text.empty()) throw UsageError("--mode must be certified or heuristic");
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    config.subcommand = app.get_subcommands().front()->get_name();
    return run(config, std::cout, std::cerr);
}
