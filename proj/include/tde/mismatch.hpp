#pragma once

#include "tde/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace tde {

// Behavioral-level device mismatch: each listed parameter p of a TDE is
// replaced by p * exp(sigma_p * z), z ~ N(0, 1), independently per instance.

struct MismatchSpec {
    std::map<std::string, double> sigmas; // TdeParams field name -> lognormal sigma
    TdeVariant variant = TdeVariant::NewDualDpi;

    // Unknown field names and negative or non-finite sigmas are rejected.
    void validate() const;
};

// Calibration defaults: shared 0.1 spread on tau_fac, tau_trg and gain, plus a
// larger w_fac spread on the single-branch circuit (0.45 vs 0.15).
MismatchSpec default_mismatch(TdeVariant variant);

// The old circuit's spec must have at least one parameter strictly more
// variable than the new one.
void validate_variant_pair(const MismatchSpec& old_spec, const MismatchSpec& new_spec);

// Names of the TdeParams fields that accept mismatch.
std::span<const std::string_view> mismatch_parameter_names();

// Deterministic in (seed, trial_index): draws come from a counter-based stream
// keyed by (seed, trial, parameter name, attempt). Invalid draws are retried
// with the next attempt counter, at most 100 times.
TdeParams sample_params(const TdeParams& nominal, const MismatchSpec& spec,
                        std::uint64_t seed, std::uint64_t trial_index);

struct McResult {
    TdeVariant variant = TdeVariant::NewDualDpi;
    std::vector<double> delta_ts;
    std::size_t n_trials = 0;
    std::vector<double> charges;    // row-major [trial][delta_t]
    std::vector<double> normalized; // each column divided by its mean
    std::vector<double> cv_per_dt;  // population stddev of each normalized column
    std::uint64_t seed = 0;

    double charge(std::size_t trial, std::size_t dt) const { return charges[trial * delta_ts.size() + dt]; }
    double normalized_charge(std::size_t trial, std::size_t dt) const {
        return normalized[trial * delta_ts.size() + dt];
    }
};

McResult mc_charge_sweep(const TdeParams& nominal, const MismatchSpec& spec,
                         std::span<const double> delta_ts, std::size_t n_trials,
                         std::uint64_t seed, unsigned threads = 0);

// Mean over delta_t of 100 * (1 - cv_new / cv_old), in percent.
double cv_reduction(const McResult& old_result, const McResult& new_result);

struct ChargeStats {
    double delta_t;
    double mean;
    double stddev;
};

// Per-delta_t mean and population stddev of the raw charge.
std::vector<ChargeStats> summarize(const McResult& result);

// Long-format CSV: trial,delta_t_s,charge,normalized_charge (12 significant digits).
void write_mc_csv(const McResult& result, std::ostream& os);

nlohmann::json mc_summary_json(const McResult& old_result, const McResult& new_result);

nlohmann::json to_json(const MismatchSpec& spec);
MismatchSpec mismatch_from_json(const nlohmann::json& j, TdeVariant variant);

} // namespace tde
