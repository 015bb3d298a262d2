#pragma once

#include "tde/core.hpp"
#include "tde/mismatch.hpp"
#include "tde/stimulus.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tde {

/// Raised for any invalid experiment configuration (CLI exit code 2).
class ConfigError: public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepConfig {
    double delta_t = 12e-3; // FAC -> TRG [s]
    double tail = 50e-3;    // simulated time after TRG [s]
};

struct NetworkConfig {
    std::size_t n_units = 100;
    bool mismatch = false;  // per-unit parameter draws instead of shared nominal
};

struct EventsConfig {
    std::string format = "evt";   // gen-events output: "evt" or "csv"
    std::string input;            // optical-flow: load this event file instead of generating
};

struct ExperimentConfig {
    std::string experiment = "step";
    std::uint64_t seed = 1;
    std::string out = "out";
    unsigned threads = 0; // 0 = all cores
    TdeVariant variant = TdeVariant::NewDualDpi;
    TdeParams nominal;
    MismatchSpec mismatch_old = default_mismatch(TdeVariant::OldSingleBranch);
    MismatchSpec mismatch_new = default_mismatch(TdeVariant::NewDualDpi);
    TextureConfig texture;  // texture.seed is derived from `seed`
    NetworkConfig network;
    StepConfig step;
    std::vector<double> delta_ts{1e-3, 2e-3, 5e-3, 10e-3, 20e-3, 50e-3};
    std::size_t n_trials = 2000;
    EventsConfig events;

    // Throws ConfigError.
    void validate() const;
};

inline constexpr std::string_view kExperiments[] = {"step", "sweep", "montecarlo", "optical-flow", "gen-events"};

nlohmann::json to_json(const ExperimentConfig& config);
// Strict: unknown keys and wrong types raise ConfigError. Missing keys keep defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);

// Sets the value at a dotted path ("nominal.tau_fac", "texture.velocity.1")
// that must already exist in `j`. The value is parsed as JSON when possible
// and taken as a string otherwise.
void apply_override(nlohmann::json& j, std::string_view dotted_key, std::string_view value);

nlohmann::json load_json_file(const std::filesystem::path& path);

} // namespace tde
