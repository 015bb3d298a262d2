#include "tde/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tde {

std::string_view to_string(TdeVariant v) {
    switch (v) {
    case TdeVariant::OldSingleBranch: return "old";
    case TdeVariant::NewDualDpi: return "new";
    }
    return "?";
}

TdeVariant parse_variant(std::string_view s) {
    if (s == "old" || s == "OldSingleBranch") return TdeVariant::OldSingleBranch;
    if (s == "new" || s == "NewDualDpi") return TdeVariant::NewDualDpi;
    throw std::invalid_argument("unknown TDE variant '" + std::string(s) + "' (expected old or new)");
}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("TdeParams: ") + what);
}

bool finite(double x) { return std::isfinite(x); }

} // namespace

void TdeParams::validate() const {
    require(finite(tau_fac) && tau_fac > 0, "tau_fac must be > 0");
    require(finite(tau_trg) && tau_trg > 0, "tau_trg must be > 0");
    require(finite(w_fac) && w_fac > 0, "w_fac must be > 0");
    require(finite(fac_max) && fac_max >= w_fac, "fac_max must be >= w_fac");
    require(finite(gain) && gain > 0, "gain must be > 0");
    require(finite(i_leak) && i_leak >= 0, "i_leak must be >= 0");
    require(finite(v_thresh) && v_thresh > 0, "v_thresh must be > 0");
    require(finite(v_reset) && v_reset < v_thresh, "v_reset must be < v_thresh");
    require(finite(t_refr) && t_refr >= 0, "t_refr must be >= 0");
}

TdeState rest_state(const TdeParams& p, double t0) {
    TdeState s;
    s.v_mem = p.v_reset;
    s.t_last = t0;
    s.refr_until = t0;
    return s;
}

TdeState decay(TdeState s, const TdeParams& p, double dt) {
    if (!(dt >= 0)) throw std::invalid_argument("decay: dt must be >= 0");
    s.fac *= std::exp(-dt / p.tau_fac);
    s.epsc *= std::exp(-dt / p.tau_trg);
    s.t_last += dt;
    return s;
}

TdeState on_fac(TdeState s, const TdeParams& p, TdeVariant variant) {
    if (variant == TdeVariant::NewDualDpi) {
        s.fac = std::min(s.fac + p.w_fac, p.fac_max);
    }
    else {
        s.fac = p.w_fac;
    }
    return s;
}

TdeState on_trg(TdeState s, const TdeParams& p) {
    s.epsc += p.gain * s.fac;
    if (p.consume_on_trg) s.fac = 0.0;
    return s;
}

double membrane_free(const TdeState& s, const TdeParams& p, double t) {
    return s.v_mem + s.epsc * p.tau_trg * -std::expm1(-t / p.tau_trg) - p.i_leak * t;
}

namespace {

// Offset in (0, span] at which the membrane first reaches threshold, or a
// negative value if it stays below. The free trajectory is concave, so it
// rises monotonically up to the point where epsc(t) == i_leak.
double find_crossing(const TdeState& s, const TdeParams& p, double span) {
    if (s.v_mem >= p.v_thresh) return 0.0;

    double rise_end = 0.0;
    if (s.epsc > p.i_leak) {
        rise_end = p.i_leak > 0
            ? p.tau_trg * std::log(s.epsc / p.i_leak)
            : std::numeric_limits<double>::infinity();
    }
    rise_end = std::min(rise_end, span);
    if (rise_end <= 0 || membrane_free(s, p, rise_end) < p.v_thresh) return -1.0;

    // Bisect down to adjacent doubles, well inside the 1e-6 * tau_trg bound,
    // so spike times do not depend on where a segment was split.
    const double tol = 1e-6 * p.tau_trg;
    double lo = 0.0, hi = rise_end;
    for (int iter = 0;; ++iter) {
        if (iter > 200) throw std::logic_error("neuron_advance: threshold bisection did not converge");
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (membrane_free(s, p, mid) >= p.v_thresh) hi = mid;
        else lo = mid;
    }
    if (hi - lo > tol) throw std::logic_error("neuron_advance: threshold bracket wider than tolerance");
    return hi;
}

} // namespace

TdeState neuron_advance(TdeState s, const TdeParams& p, double dt, SpikeTrain& spikes) {
    if (!(dt >= 0)) throw std::invalid_argument("neuron_advance: dt must be >= 0");
    const double t_end = s.t_last + dt;

    while (true) {
        if (s.refr_until > s.t_last) {
            const double hold_end = std::min(s.refr_until, t_end);
            s = decay(s, p, hold_end - s.t_last);
            s.t_last = hold_end;
            s.v_mem = p.v_reset;
            if (hold_end >= t_end) break;
        }

        const double remaining = t_end - s.t_last;
        const double hit = remaining > 0 ? find_crossing(s, p, remaining) : -1.0;
        if (hit < 0) {
            const double v = std::max(p.v_reset, membrane_free(s, p, std::max(remaining, 0.0)));
            s = decay(s, p, std::max(remaining, 0.0));
            s.v_mem = v;
            s.t_last = t_end;
            break;
        }

        const double t_spike = s.t_last + hit;
        if (!spikes.empty() && t_spike <= spikes.back()) {
            throw std::logic_error("neuron_advance: spike times not strictly increasing");
        }
        s = decay(s, p, hit);
        s.t_last = t_spike;
        s.v_mem = p.v_reset;
        s.refr_until = t_spike + p.t_refr;
        spikes.push_back(t_spike);
    }
    return s;
}

AdvanceResult neuron_advance(const TdeState& s, const TdeParams& p, double dt) {
    AdvanceResult r;
    r.state = neuron_advance(s, p, dt, r.spikes);
    return r;
}

TdeUnit::TdeUnit(const TdeParams& p, TdeVariant variant, double t0):
    params_(p), variant_(variant), state_(rest_state(p, t0))
{
    params_.validate();
}

void TdeUnit::advance_to(double t, SpikeTrain& spikes) {
    if (t < state_.t_last) throw std::invalid_argument("TdeUnit: time went backwards");
    state_ = neuron_advance(state_, params_, t - state_.t_last, spikes);
    state_.t_last = t;
}

void TdeUnit::fac_event(double t, SpikeTrain& spikes) {
    advance_to(t, spikes);
    state_ = on_fac(state_, params_, variant_);
}

void TdeUnit::trg_event(double t, SpikeTrain& spikes) {
    advance_to(t, spikes);
    state_ = on_trg(state_, params_);
}

namespace {

void require_sorted(std::span<const double> events, const char* name) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!(events[i] >= 0)) {
            throw std::invalid_argument(std::string("process_events: ") + name + " has a negative or NaN time");
        }
        if (i > 0 && events[i] < events[i - 1]) {
            throw std::invalid_argument(std::string("process_events: ") + name + " is not sorted");
        }
    }
}

} // namespace

SpikeTrain process_events(const TdeParams& p, TdeVariant variant,
                          std::span<const double> fac_events,
                          std::span<const double> trg_events,
                          double t_end)
{
    require_sorted(fac_events, "fac_events");
    require_sorted(trg_events, "trg_events");
    const double last = std::max(fac_events.empty() ? 0.0 : fac_events.back(),
                                 trg_events.empty() ? 0.0 : trg_events.back());
    if (!(t_end >= last)) throw std::invalid_argument("process_events: t_end precedes the last event");

    TdeUnit unit(p, variant);
    SpikeTrain spikes;
    std::size_t i = 0, j = 0;
    while (i < fac_events.size() || j < trg_events.size()) {
        const bool take_fac = j == trg_events.size()
            || (i < fac_events.size() && fac_events[i] <= trg_events[j]);
        if (take_fac) unit.fac_event(fac_events[i++], spikes);
        else unit.trg_event(trg_events[j++], spikes);
    }
    unit.advance_to(t_end, spikes);
    return spikes;
}

double charge(const TdeParams& p, TdeVariant, double delta_t) {
    if (std::isnan(delta_t)) throw std::invalid_argument("charge: delta_t is NaN");
    if (delta_t < 0) return 0.0;
    if (delta_t == 0) throw std::invalid_argument("charge: delta_t must be > 0");
    if (std::isinf(delta_t)) return 0.0;
    p.validate();
    return p.gain * p.w_fac * std::exp(-delta_t / p.tau_fac) * p.tau_trg;
}

bool is_valid_train(const SpikeTrain& train, double t_refr) {
    for (std::size_t i = 1; i < train.size(); ++i) {
        if (!(train[i] > train[i - 1])) return false;
        // refractory gaps are exact up to bisection tolerance on the next crossing
        if (train[i] - train[i - 1] < t_refr * (1 - 1e-12)) return false;
    }
    return true;
}

} // namespace tde
