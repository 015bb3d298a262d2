#pragma once

#include "tde/config.hpp"
#include "tde/core.hpp"
#include "tde/events.hpp"
#include "tde/mismatch.hpp"
#include "tde/network.hpp"

#include <filesystem>
#include <map>
#include <vector>

namespace tde {

// One function per CLI subcommand. Each cmd_* writes its outputs into config.out
// (created if needed) and returns the list of files written.

struct TraceSample {
    double t;
    double fac;
    double epsc;
    double v_mem;
};

struct StepResult {
    SpikeTrain spikes;               // from process_events
    std::vector<TraceSample> trace;  // sampled every tau_trg / 100
};

// FAC at t = 0, TRG at delta_t, simulated until delta_t + tail.
StepResult run_step(const TdeParams& p, TdeVariant variant, double delta_t, double tail);

struct SweepRow {
    TdeVariant variant;
    double delta_t;
    double charge;
    std::size_t spike_count;
};

std::vector<SweepRow> run_sweep(const TdeParams& p, std::span<const double> delta_ts, double tail);

struct MonteCarloResult {
    McResult old_result;
    McResult new_result;
    double reduction_percent;
};

MonteCarloResult run_montecarlo(const ExperimentConfig& config);

struct OpticalFlowResult {
    TdeNetwork network;
    std::vector<Event> events;
    Raster raster;
    std::map<Orientation, double> fractions;
};

// Jittered texture events with the stimulus/jitter substreams of config.seed.
std::vector<Event> synthetic_stimulus(const ExperimentConfig& config);
// Stimulus from config.events.input when set, otherwise synthetic_stimulus.
std::vector<Event> make_stimulus(const ExperimentConfig& config);
OpticalFlowResult run_optical_flow(const ExperimentConfig& config);

using Outputs = std::vector<std::filesystem::path>;

Outputs cmd_step(const ExperimentConfig& config);
Outputs cmd_sweep(const ExperimentConfig& config);
Outputs cmd_montecarlo(const ExperimentConfig& config);
Outputs cmd_optical_flow(const ExperimentConfig& config);
Outputs cmd_gen_events(const ExperimentConfig& config);

Outputs run_experiment(const ExperimentConfig& config);

} // namespace tde
