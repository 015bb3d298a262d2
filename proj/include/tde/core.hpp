#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace tde {

// Behavioral model of one time difference encoder: a facilitatory trace armed
// by FAC events, an EPSC whose amplitude samples that trace on TRG events, and
// a constant-leak integrate-and-fire membrane driven by the EPSC.
//
// State evolution between input events is exact: both traces decay as
// first-order exponentials and the membrane has a closed form, so the only
// numerical step is locating threshold crossings.

enum class TdeVariant {
    OldSingleBranch, // single discharge branch: FAC resets the trace to w_fac
    NewDualDpi,      // DPI in both blocks: FAC events add linearly
};

std::string_view to_string(TdeVariant v);
// Accepts "old" / "new" as well as the enumerator names.
TdeVariant parse_variant(std::string_view s);

struct TdeParams {
    double tau_fac = 10e-3;  // facilitatory trace decay [s]
    double tau_trg = 5e-3;   // EPSC decay [s]
    double w_fac = 1.0;      // FAC increment (new) or reset level (old)
    double fac_max = 4.0;    // facilitatory trace ceiling
    double gain = 2500.0;    // EPSC amplitude per unit trace [1/s]
    double i_leak = 20.0;    // constant membrane leak [1/s]
    double v_thresh = 1.0;
    double v_reset = 0.0;
    double t_refr = 1e-3;    // absolute refractory period [s]
    // TRG empties the facilitatory trace after sampling it. Off by default.
    bool consume_on_trg = false;

    // Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    bool operator==(const TdeParams&) const = default;
};

struct TdeState {
    double fac = 0.0;
    double epsc = 0.0;
    double v_mem = 0.0;
    double t_last = 0.0;     // time at which this snapshot is valid [s]
    double refr_until = 0.0; // end of the current refractory window [s]

    bool operator==(const TdeState&) const = default;
};

/// Output spike times in seconds, strictly increasing.
using SpikeTrain = std::vector<double>;

TdeState rest_state(const TdeParams& p, double t0 = 0.0);

// Exponential decay of both traces over dt >= 0. The membrane is untouched.
TdeState decay(TdeState s, const TdeParams& p, double dt);

TdeState on_fac(TdeState s, const TdeParams& p, TdeVariant variant);
TdeState on_trg(TdeState s, const TdeParams& p);

// Unclamped membrane trajectory v0 + epsc0*tau*(1 - exp(-t/tau)) - leak*t.
double membrane_free(const TdeState& s, const TdeParams& p, double t);

// Evolves the full state over an input-free segment of length dt, appending
// any output spikes to `spikes`. Threshold crossings are bracketed and
// bisected to 1e-6 * tau_trg.
TdeState neuron_advance(TdeState s, const TdeParams& p, double dt, SpikeTrain& spikes);

struct AdvanceResult {
    TdeState state;
    SpikeTrain spikes;
};
AdvanceResult neuron_advance(const TdeState& s, const TdeParams& p, double dt);

/// Incremental driver for a single unit. Events must arrive in time order.
class TdeUnit {
public:
    TdeUnit(const TdeParams& p, TdeVariant variant, double t0 = 0.0);

    void advance_to(double t, SpikeTrain& spikes);
    void fac_event(double t, SpikeTrain& spikes);
    void trg_event(double t, SpikeTrain& spikes);

    const TdeState& state() const { return state_; }
    const TdeParams& params() const { return params_; }
    TdeVariant variant() const { return variant_; }

private:
    TdeParams params_;
    TdeVariant variant_;
    TdeState state_;
};

// Runs one unit from rest at t = 0 over merged FAC/TRG streams (each sorted,
// all times >= 0). Coincident FAC and TRG events apply FAC first.
SpikeTrain process_events(const TdeParams& p, TdeVariant variant,
                          std::span<const double> fac_events,
                          std::span<const double> trg_events,
                          double t_end);

// Charge integral of the EPSC for a single FAC -> TRG pair from rest:
// gain * w_fac * exp(-delta_t / tau_fac) * tau_trg for both variants.
// A negative delta_t (TRG first) transmits nothing and returns 0.
double charge(const TdeParams& p, TdeVariant variant, double delta_t);

// Strictly increasing with gaps >= t_refr.
bool is_valid_train(const SpikeTrain& train, double t_refr);

} // namespace tde
