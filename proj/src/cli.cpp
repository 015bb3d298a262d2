#include "tde/cli.hpp"

#include "tde/config.hpp"
#include "tde/experiments.hpp"

#include <CLI11.hpp>

#include <optional>
#include <ostream>

namespace tde::cli {

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::string> variant;
};

// Leftover "--a.b value" / "--a.b=value" pairs become config overrides.
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& arg = extras[i];
        if (arg.rfind("--", 0) != 0 || arg.size() <= 2) {
            throw ConfigError("unexpected argument '" + arg + "'");
        }
        const auto eq = arg.find('=');
        if (eq != std::string::npos) {
            pairs.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
        }
        else {
            if (i + 1 >= extras.size()) throw ConfigError("missing value for '" + arg + "'");
            pairs.emplace_back(arg.substr(2), extras[++i]);
        }
    }
    return pairs;
}

ExperimentConfig build_config(const std::string& experiment, const CommonFlags& flags,
                              const std::vector<std::string>& extras)
{
    nlohmann::json j = to_json(ExperimentConfig{});
    if (!flags.config_path.empty()) {
        // Validate the file against the schema before merging overrides on top.
        j = to_json(config_from_json(load_json_file(flags.config_path)));
    }
    for (const auto& [key, value]: parse_overrides(extras)) apply_override(j, key, value);
    j["experiment"] = experiment;
    if (flags.seed) j["seed"] = *flags.seed;
    if (flags.out) j["out"] = *flags.out;
    if (flags.threads) j["threads"] = *flags.threads;
    if (flags.variant) j["variant"] = *flags.variant;
    return config_from_json(j);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-driven time difference encoder simulator", "tde"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    CommonFlags flags;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"step", "Single FAC/TRG pair: state trace and output spikes"},
        {"sweep", "Charge and spike count against delta_t for both variants"},
        {"montecarlo", "Mismatch Monte Carlo of transmitted charge, both variants"},
        {"optical-flow", "Orientation selectivity of a random TDE array on moving texture"},
        {"gen-events", "Write a synthetic event-camera stimulus file"},
    };
    for (const auto& [name, help]: commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->allow_extras();
        sub->add_option("--config", flags.config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "Top-level random seed");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
        sub->add_option("--variant", flags.variant, "Circuit variant")->check(CLI::IsMember({"old", "new"}));
        sub->footer("Any config field can be set with --<dotted.name> <value>, e.g. --nominal.tau_fac 0.02");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back(); // program name
    try {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    }
    catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    }
    catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    const CLI::App* sub = app.get_subcommands().front();
    ExperimentConfig config;
    try {
        config = build_config(sub->get_name(), flags, sub->remaining());
    }
    catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        for (const auto& path: run_experiment(config)) out << path.string() << '\n';
    }
    catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kSuccess;
}

} // namespace tde::cli
