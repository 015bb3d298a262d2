#include "tde/mismatch.hpp"

#include "tde/format.hpp"
#include "tde/parallel.hpp"
#include "tde/random.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace tde {

namespace {

using Field = double TdeParams::*;

constexpr std::array<std::pair<std::string_view, Field>, 9> kFields{{
    {"tau_fac", &TdeParams::tau_fac},
    {"tau_trg", &TdeParams::tau_trg},
    {"w_fac", &TdeParams::w_fac},
    {"fac_max", &TdeParams::fac_max},
    {"gain", &TdeParams::gain},
    {"i_leak", &TdeParams::i_leak},
    {"v_thresh", &TdeParams::v_thresh},
    {"v_reset", &TdeParams::v_reset},
    {"t_refr", &TdeParams::t_refr},
}};

constexpr std::array<std::string_view, 9> kNames{
    "tau_fac", "tau_trg", "w_fac", "fac_max", "gain", "i_leak", "v_thresh", "v_reset", "t_refr"};

Field field_for(std::string_view name) {
    for (const auto& [n, f]: kFields) {
        if (n == name) return f;
    }
    throw std::invalid_argument("MismatchSpec: unknown parameter '" + std::string(name) + "'");
}

constexpr int kMaxAttempts = 100;

} // namespace

std::span<const std::string_view> mismatch_parameter_names() { return kNames; }

void MismatchSpec::validate() const {
    for (const auto& [name, sigma]: sigmas) {
        field_for(name);
        if (!std::isfinite(sigma) || sigma < 0) {
            throw std::invalid_argument("MismatchSpec: sigma for '" + name + "' must be finite and >= 0");
        }
    }
}

MismatchSpec default_mismatch(TdeVariant variant) {
    MismatchSpec spec;
    spec.variant = variant;
    spec.sigmas = {
        {"tau_fac", 0.1},
        {"tau_trg", 0.1},
        {"gain", 0.1},
        {"w_fac", variant == TdeVariant::OldSingleBranch ? 0.45 : 0.15},
    };
    return spec;
}

void validate_variant_pair(const MismatchSpec& old_spec, const MismatchSpec& new_spec) {
    old_spec.validate();
    new_spec.validate();
    if (old_spec.variant != TdeVariant::OldSingleBranch || new_spec.variant != TdeVariant::NewDualDpi) {
        throw std::invalid_argument("MismatchSpec pair: variants must be (old, new)");
    }
    for (const auto& [name, sigma]: old_spec.sigmas) {
        const auto it = new_spec.sigmas.find(name);
        const double other = it == new_spec.sigmas.end() ? 0.0 : it->second;
        if (sigma > other) return;
    }
    throw std::invalid_argument(
        "MismatchSpec pair: the old variant needs at least one parameter with a larger sigma than the new one");
}

TdeParams sample_params(const TdeParams& nominal, const MismatchSpec& spec,
                        std::uint64_t seed, std::uint64_t trial_index)
{
    nominal.validate();
    spec.validate();
    const CounterRng trial_rng = CounterRng(seed).substream(trial_index);

    for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
        TdeParams p = nominal;
        for (const auto& [name, sigma]: spec.sigmas) {
            if (sigma == 0) continue;
            const double z = trial_rng.substream(name).normal(attempt);
            p.*field_for(name) *= std::exp(sigma * z);
        }
        try {
            p.validate();
            return p;
        }
        catch (const std::invalid_argument&) {
        }
    }
    throw std::runtime_error("sample_params: no valid parameter set after 100 attempts (trial "
                             + std::to_string(trial_index) + ")");
}

namespace {

// Mean of one column; a constant column returns its value exactly so that
// zero-spread runs give exactly zero deviation.
template <typename Get>
double column_mean(std::size_t n, Get get) {
    const double first = get(0);
    double sum = 0.0;
    bool constant = true;
    for (std::size_t t = 0; t < n; ++t) {
        const double v = get(t);
        sum += v;
        constant = constant && v == first;
    }
    return constant ? first : sum / static_cast<double>(n);
}

} // namespace

McResult mc_charge_sweep(const TdeParams& nominal, const MismatchSpec& spec,
                         std::span<const double> delta_ts, std::size_t n_trials,
                         std::uint64_t seed, unsigned threads)
{
    if (n_trials < 2) throw std::invalid_argument("mc_charge_sweep: n_trials must be >= 2");
    if (delta_ts.empty()) throw std::invalid_argument("mc_charge_sweep: empty delta_t grid");
    for (double dt: delta_ts) {
        if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("mc_charge_sweep: delta_t values must be > 0");
    }
    nominal.validate();
    spec.validate();

    McResult r;
    r.variant = spec.variant;
    r.delta_ts.assign(delta_ts.begin(), delta_ts.end());
    r.n_trials = n_trials;
    r.seed = seed;
    const std::size_t n_dt = delta_ts.size();
    r.charges.resize(n_trials * n_dt);

    parallel_for(n_trials, threads, [&](std::size_t t) {
        const TdeParams p = sample_params(nominal, spec, seed, t);
        for (std::size_t d = 0; d < n_dt; ++d) {
            r.charges[t * n_dt + d] = charge(p, spec.variant, delta_ts[d]);
        }
    });

    // Statistics are accumulated in trial order so they never depend on threads.
    r.normalized.resize(r.charges.size());
    r.cv_per_dt.resize(n_dt);
    for (std::size_t d = 0; d < n_dt; ++d) {
        const double mean = column_mean(n_trials, [&](std::size_t t) { return r.charges[t * n_dt + d]; });
        for (std::size_t t = 0; t < n_trials; ++t) {
            r.normalized[t * n_dt + d] = r.charges[t * n_dt + d] / mean;
        }
        const double norm_mean = column_mean(n_trials, [&](std::size_t t) { return r.normalized[t * n_dt + d]; });
        double ss = 0.0;
        for (std::size_t t = 0; t < n_trials; ++t) {
            const double e = r.normalized[t * n_dt + d] - norm_mean;
            ss += e * e;
        }
        r.cv_per_dt[d] = std::sqrt(ss / static_cast<double>(n_trials));
    }
    return r;
}

double cv_reduction(const McResult& old_result, const McResult& new_result) {
    if (old_result.delta_ts != new_result.delta_ts) {
        throw std::invalid_argument("cv_reduction: delta_t grids differ");
    }
    if (old_result.cv_per_dt.empty()) throw std::invalid_argument("cv_reduction: empty result");
    double acc = 0.0;
    for (std::size_t i = 0; i < old_result.cv_per_dt.size(); ++i) {
        const double cv_old = old_result.cv_per_dt[i];
        if (cv_old == 0) {
            throw std::domain_error("cv_reduction: old CV is zero at delta_t = "
                                    + format_sig12(old_result.delta_ts[i]));
        }
        acc += 1.0 - new_result.cv_per_dt[i] / cv_old;
    }
    return 100.0 * acc / static_cast<double>(old_result.cv_per_dt.size());
}

std::vector<ChargeStats> summarize(const McResult& result) {
    const std::size_t n_dt = result.delta_ts.size();
    const auto n = static_cast<double>(result.n_trials);
    std::vector<ChargeStats> out;
    out.reserve(n_dt);
    for (std::size_t d = 0; d < n_dt; ++d) {
        const double mean = column_mean(result.n_trials, [&](std::size_t t) { return result.charge(t, d); });
        double ss = 0.0;
        for (std::size_t t = 0; t < result.n_trials; ++t) {
            const double e = result.charge(t, d) - mean;
            ss += e * e;
        }
        out.push_back({result.delta_ts[d], mean, std::sqrt(ss / n)});
    }
    return out;
}

void write_mc_csv(const McResult& result, std::ostream& os) {
    os << "trial,delta_t_s,charge,normalized_charge\n";
    for (std::size_t t = 0; t < result.n_trials; ++t) {
        for (std::size_t d = 0; d < result.delta_ts.size(); ++d) {
            os << t << ',' << format_sig12(result.delta_ts[d]) << ',' << format_sig12(result.charge(t, d))
               << ',' << format_sig12(result.normalized_charge(t, d)) << '\n';
        }
    }
}

namespace {

nlohmann::json variant_summary(const McResult& r) {
    nlohmann::json rows = nlohmann::json::array();
    const auto stats = summarize(r);
    for (std::size_t d = 0; d < stats.size(); ++d) {
        rows.push_back({
            {"delta_t_s", round_sig12(stats[d].delta_t)},
            {"mean_charge", round_sig12(stats[d].mean)},
            {"stddev_charge", round_sig12(stats[d].stddev)},
            {"cv", round_sig12(r.cv_per_dt[d])},
        });
    }
    return {{"variant", to_string(r.variant)}, {"n_trials", r.n_trials}, {"per_delta_t", rows}};
}

} // namespace

nlohmann::json mc_summary_json(const McResult& old_result, const McResult& new_result) {
    return {
        {"seed", old_result.seed},
        {"old", variant_summary(old_result)},
        {"new", variant_summary(new_result)},
        {"cv_reduction_percent", round_sig12(cv_reduction(old_result, new_result))},
    };
}

nlohmann::json to_json(const MismatchSpec& spec) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, sigma]: spec.sigmas) j[name] = sigma;
    return j;
}

MismatchSpec mismatch_from_json(const nlohmann::json& j, TdeVariant variant) {
    if (!j.is_object()) throw std::invalid_argument("mismatch spec must be a JSON object");
    MismatchSpec spec;
    spec.variant = variant;
    for (const auto& [name, sigma]: j.items()) {
        if (!sigma.is_number()) throw std::invalid_argument("mismatch sigma for '" + name + "' must be a number");
        spec.sigmas[name] = sigma.get<double>();
    }
    spec.validate();
    return spec;
}

} // namespace tde
