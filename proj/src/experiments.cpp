#include "tde/experiments.hpp"

#include "tde/format.hpp"
#include "tde/random.hpp"
#include "tde/stimulus.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tde {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return os;
}

void finish(std::ofstream& os, const fs::path& path) {
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

fs::path prepare_out(const ExperimentConfig& config) {
    const fs::path out(config.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + out.string() + "': " + ec.message());
    return out;
}

void write_json(const json& j, const fs::path& path) {
    auto os = open_output(path);
    os << j.dump(2) << '\n';
    finish(os, path);
}

} // namespace

StepResult run_step(const TdeParams& p, TdeVariant variant, double delta_t, double tail) {
    const double t_end = delta_t + tail;
    const std::vector<double> fac{0.0};
    const std::vector<double> trg{delta_t};

    StepResult r;
    r.spikes = process_events(p, variant, fac, trg, t_end);

    // Trace: the same dynamics sampled on a regular grid. Input events at a
    // sample time are applied before the sample is taken.
    const double dt = p.tau_trg / 100.0;
    const auto n = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    TdeUnit unit(p, variant);
    SpikeTrain scratch;
    bool fac_done = false, trg_done = false;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (!fac_done && fac[0] <= t) {
            unit.fac_event(fac[0], scratch);
            fac_done = true;
        }
        if (!trg_done && trg[0] <= t) {
            unit.trg_event(trg[0], scratch);
            trg_done = true;
        }
        unit.advance_to(t, scratch);
        const auto& s = unit.state();
        r.trace.push_back({t, s.fac, s.epsc, s.v_mem});
    }
    return r;
}

std::vector<SweepRow> run_sweep(const TdeParams& p, std::span<const double> delta_ts, double tail) {
    std::vector<SweepRow> rows;
    for (auto variant: {TdeVariant::OldSingleBranch, TdeVariant::NewDualDpi}) {
        for (double dt: delta_ts) {
            const std::vector<double> fac{0.0};
            const std::vector<double> trg{dt};
            const auto spikes = process_events(p, variant, fac, trg, dt + tail);
            rows.push_back({variant, dt, charge(p, variant, dt), spikes.size()});
        }
    }
    return rows;
}

MonteCarloResult run_montecarlo(const ExperimentConfig& config) {
    const std::uint64_t seed = derive_seed(config.seed, "mismatch");
    MonteCarloResult r{
        mc_charge_sweep(config.nominal, config.mismatch_old, config.delta_ts, config.n_trials, seed, config.threads),
        mc_charge_sweep(config.nominal, config.mismatch_new, config.delta_ts, config.n_trials, seed, config.threads),
        0.0,
    };
    r.reduction_percent = cv_reduction(r.old_result, r.new_result);
    return r;
}

std::vector<Event> synthetic_stimulus(const ExperimentConfig& config) {
    TextureConfig texture = config.texture;
    texture.seed = derive_seed(config.seed, "stimulus");
    return add_jitter(generate_texture_events(texture), texture.jitter_sigma, derive_seed(config.seed, "jitter"));
}

std::vector<Event> make_stimulus(const ExperimentConfig& config) {
    if (!config.events.input.empty()) return read_events(config.events.input);
    return synthetic_stimulus(config);
}

OpticalFlowResult run_optical_flow(const ExperimentConfig& config) {
    OpticalFlowResult r;
    r.events = make_stimulus(config);
    r.network = build_random_network(config.texture.geometry, config.network.n_units, config.nominal,
                                     derive_seed(config.seed, "network"));
    if (config.network.mismatch) {
        const auto& spec = config.variant == TdeVariant::OldSingleBranch ? config.mismatch_old : config.mismatch_new;
        apply_mismatch(r.network, spec, derive_seed(config.seed, "mismatch"));
    }
    r.raster = run_network(r.network, r.events, config.variant, config.threads);
    r.fractions = orientation_fractions(r.raster);
    return r;
}

Outputs cmd_step(const ExperimentConfig& config) {
    const auto out = prepare_out(config);
    const auto r = run_step(config.nominal, config.variant, config.step.delta_t, config.step.tail);

    const auto trace_path = out / "step_trace.csv";
    auto trace = open_output(trace_path);
    trace << "t_s,fac,epsc,v_mem\n";
    for (const auto& s: r.trace) {
        trace << format_exact(s.t) << ',' << format_exact(s.fac) << ',' << format_exact(s.epsc) << ','
              << format_exact(s.v_mem) << '\n';
    }
    finish(trace, trace_path);

    const auto spikes_path = out / "step_spikes.csv";
    auto spikes = open_output(spikes_path);
    spikes << "spike_time_s\n";
    for (double t: r.spikes) spikes << format_exact(t) << '\n';
    finish(spikes, spikes_path);

    const auto summary_path = out / "step_summary.json";
    json isi = nullptr;
    if (r.spikes.size() >= 2) isi = r.spikes[1] - r.spikes[0];
    write_json({{"variant", to_string(config.variant)},
                {"delta_t_s", config.step.delta_t},
                {"spike_count", r.spikes.size()},
                {"spike_times_s", r.spikes},
                {"first_isi_s", isi},
                {"charge", charge(config.nominal, config.variant, config.step.delta_t)}},
               summary_path);
    return {trace_path, spikes_path, summary_path};
}

Outputs cmd_sweep(const ExperimentConfig& config) {
    const auto out = prepare_out(config);
    const auto rows = run_sweep(config.nominal, config.delta_ts, config.step.tail);
    const auto path = out / "sweep.csv";
    auto os = open_output(path);
    os << "variant,delta_t_s,charge,spike_count\n";
    for (const auto& row: rows) {
        os << to_string(row.variant) << ',' << format_exact(row.delta_t) << ',' << format_exact(row.charge) << ','
           << row.spike_count << '\n';
    }
    finish(os, path);
    return {path};
}

Outputs cmd_montecarlo(const ExperimentConfig& config) {
    const auto out = prepare_out(config);
    const auto r = run_montecarlo(config);

    Outputs written;
    for (const auto* result: {&r.old_result, &r.new_result}) {
        const auto path = out / ("mc_" + std::string(to_string(result->variant)) + ".csv");
        auto os = open_output(path);
        write_mc_csv(*result, os);
        finish(os, path);
        written.push_back(path);
    }
    const auto summary_path = out / "mc_summary.json";
    write_json(mc_summary_json(r.old_result, r.new_result), summary_path);
    written.push_back(summary_path);
    return written;
}

Outputs cmd_optical_flow(const ExperimentConfig& config) {
    const auto out = prepare_out(config);
    const auto r = run_optical_flow(config);

    const auto network_path = out / "network.json";
    write_json(to_json(r.network), network_path);

    const auto raster_path = out / "raster.csv";
    auto os = open_output(raster_path);
    write_raster_csv(r.raster, os);
    finish(os, raster_path);

    json fractions = json::object();
    json counts = json::object();
    for (auto o: kOrientations) {
        fractions[std::string(to_string(o))] = r.fractions.at(o);
        std::size_t n = 0;
        for (const auto& row: r.raster.rows) {
            if (row.orientation == o) n += row.spikes.size();
        }
        counts[std::string(to_string(o))] = n;
    }
    const auto fractions_path = out / "fractions.json";
    write_json({{"variant", to_string(config.variant)},
                {"n_events", r.events.size()},
                {"total_spikes", r.raster.total_spikes()},
                {"spike_counts", counts},
                {"fractions", fractions}},
               fractions_path);
    return {network_path, raster_path, fractions_path};
}

Outputs cmd_gen_events(const ExperimentConfig& config) {
    const auto out = prepare_out(config);
    const auto events = synthetic_stimulus(config);
    const auto path = out / ("events." + config.events.format);
    write_events(events, path, config.events.format == "csv" ? EventFormat::Csv : EventFormat::Binary);
    return {path};
}

Outputs run_experiment(const ExperimentConfig& config) {
    if (config.experiment == "step") return cmd_step(config);
    if (config.experiment == "sweep") return cmd_sweep(config);
    if (config.experiment == "montecarlo") return cmd_montecarlo(config);
    if (config.experiment == "optical-flow") return cmd_optical_flow(config);
    if (config.experiment == "gen-events") return cmd_gen_events(config);
    throw ConfigError("unknown experiment '" + config.experiment + "'");
}

} // namespace tde
