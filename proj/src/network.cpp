#include "tde/network.hpp"

#include "tde/format.hpp"
#include "tde/parallel.hpp"
#include "tde/random.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace tde {

std::string_view to_string(Orientation o) {
    switch (o) {
    case Orientation::Up: return "up";
    case Orientation::Down: return "down";
    case Orientation::Left: return "left";
    case Orientation::Right: return "right";
    }
    return "?";
}

Orientation parse_orientation(std::string_view s) {
    for (auto o: kOrientations) {
        if (to_string(o) == s) return o;
    }
    throw std::invalid_argument("unknown orientation '" + std::string(s) + "'");
}

namespace {

std::pair<int, int> step(Orientation o) {
    switch (o) {
    case Orientation::Up: return {0, -1};
    case Orientation::Down: return {0, 1};
    case Orientation::Left: return {-1, 0};
    case Orientation::Right: return {1, 0};
    }
    return {0, 0};
}

constexpr int kMaxRejections = 10'000;

} // namespace

bool is_consistent(const ReceptiveField& field) {
    const auto [dx, dy] = step(field.orientation);
    return static_cast<int>(field.trg.x) - static_cast<int>(field.fac.x) == dx
        && static_cast<int>(field.trg.y) - static_cast<int>(field.fac.y) == dy;
}

TdeNetwork build_random_network(Geometry geometry, std::size_t n_units, const TdeParams& params,
                                std::uint64_t seed)
{
    if (n_units == 0 || n_units % 4 != 0) {
        throw std::invalid_argument("build_random_network: n_units must be a positive multiple of 4");
    }
    if (geometry.width == 0 || geometry.height == 0) {
        throw std::invalid_argument("build_random_network: empty geometry");
    }
    params.validate();

    TdeNetwork net;
    net.geometry = geometry;
    net.seed = seed;
    net.units.reserve(n_units);

    RngCursor rng(CounterRng(seed).substream("placement"));
    std::set<std::pair<Pixel, Pixel>> used;
    int rejections = 0;
    for (std::size_t i = 0; i < n_units; ++i) {
        const Orientation o = kOrientations[i % 4];
        const auto [dx, dy] = step(o);
        while (true) {
            const auto x = static_cast<int>(rng.below(geometry.width));
            const auto y = static_cast<int>(rng.below(geometry.height));
            const int tx = x + dx, ty = y + dy;
            const Pixel fac{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y)};
            if (tx >= 0 && ty >= 0 && geometry.contains(tx, ty)) {
                const Pixel trg{static_cast<std::uint16_t>(tx), static_cast<std::uint16_t>(ty)};
                if (used.emplace(fac, trg).second) {
                    net.units.push_back({{fac, trg, o}, params});
                    break;
                }
            }
            if (++rejections > kMaxRejections) {
                throw std::runtime_error("build_random_network: cannot place " + std::to_string(n_units)
                                         + " distinct units in a " + std::to_string(geometry.width) + "x"
                                         + std::to_string(geometry.height) + " array");
            }
        }
    }
    return net;
}

void apply_mismatch(TdeNetwork& network, const MismatchSpec& spec, std::uint64_t seed) {
    for (std::size_t i = 0; i < network.units.size(); ++i) {
        network.units[i].params = sample_params(network.units[i].params, spec, seed, i);
    }
}

std::vector<UnitInputs> route(std::span<const Event> events, const TdeNetwork& network) {
    const Geometry g = network.geometry;
    // pixel -> (unit, is_fac)
    std::vector<std::vector<std::pair<std::size_t, bool>>> targets(std::size_t{g.width} * g.height);
    for (std::size_t u = 0; u < network.units.size(); ++u) {
        const auto& f = network.units[u].field;
        if (!g.contains(f.fac.x, f.fac.y) || !g.contains(f.trg.x, f.trg.y)) {
            throw std::invalid_argument("route: unit " + std::to_string(u) + " lies outside the geometry");
        }
        targets[std::size_t{f.fac.y} * g.width + f.fac.x].emplace_back(u, true);
        targets[std::size_t{f.trg.y} * g.width + f.trg.x].emplace_back(u, false);
    }

    std::vector<UnitInputs> inputs(network.units.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (!g.contains(e.x, e.y)) {
            throw std::invalid_argument("route: event " + std::to_string(i) + " at (" + std::to_string(e.x) + ", "
                                        + std::to_string(e.y) + ", t_us=" + std::to_string(e.t_us)
                                        + ") is outside the geometry");
        }
        const double t = static_cast<double>(e.t_us) * 1e-6;
        for (const auto& [u, is_fac]: targets[std::size_t{e.y} * g.width + e.x]) {
            (is_fac ? inputs[u].fac : inputs[u].trg).push_back(t);
        }
    }
    return inputs;
}

std::size_t Raster::total_spikes() const {
    std::size_t n = 0;
    for (const auto& row: rows) n += row.spikes.size();
    return n;
}

Raster run_network(const TdeNetwork& network, std::span<const Event> events, TdeVariant variant,
                   unsigned threads)
{
    if (!is_sorted_stream(events)) throw std::invalid_argument("run_network: event stream is not sorted");
    const auto inputs = route(events, network);
    const double t_end = events.empty() ? 0.0 : static_cast<double>(events.back().t_us) * 1e-6;

    Raster raster;
    raster.rows.resize(network.units.size());
    parallel_for(network.units.size(), threads, [&](std::size_t u) {
        const auto& unit = network.units[u];
        raster.rows[u] = {u, unit.field.orientation,
                          process_events(unit.params, variant, inputs[u].fac, inputs[u].trg, t_end)};
    });
    return raster;
}

std::map<Orientation, double> orientation_fractions(const Raster& raster) {
    std::map<Orientation, std::size_t> counts;
    for (auto o: kOrientations) counts[o] = 0;
    for (const auto& row: raster.rows) counts[row.orientation] += row.spikes.size();
    const std::size_t total = raster.total_spikes();
    if (total == 0) throw std::domain_error("orientation_fractions: the raster has no spikes");

    std::map<Orientation, double> fractions;
    for (const auto& [o, n]: counts) fractions[o] = static_cast<double>(n) / static_cast<double>(total);
    return fractions;
}

nlohmann::json to_json(const TdeParams& p) {
    return {
        {"tau_fac", p.tau_fac}, {"tau_trg", p.tau_trg}, {"w_fac", p.w_fac},
        {"fac_max", p.fac_max}, {"gain", p.gain}, {"i_leak", p.i_leak},
        {"v_thresh", p.v_thresh}, {"v_reset", p.v_reset}, {"t_refr", p.t_refr},
        {"consume_on_trg", p.consume_on_trg},
    };
}

TdeParams params_from_json(const nlohmann::json& j, const TdeParams& defaults) {
    if (!j.is_object()) throw std::invalid_argument("TDE parameters must be a JSON object");
    TdeParams p = defaults;
    for (const auto& [key, value]: j.items()) {
        if (key == "consume_on_trg") {
            if (!value.is_boolean()) throw std::invalid_argument("consume_on_trg must be a boolean");
            p.consume_on_trg = value.get<bool>();
            continue;
        }
        double TdeParams::*field = nullptr;
        if (key == "tau_fac") field = &TdeParams::tau_fac;
        else if (key == "tau_trg") field = &TdeParams::tau_trg;
        else if (key == "w_fac") field = &TdeParams::w_fac;
        else if (key == "fac_max") field = &TdeParams::fac_max;
        else if (key == "gain") field = &TdeParams::gain;
        else if (key == "i_leak") field = &TdeParams::i_leak;
        else if (key == "v_thresh") field = &TdeParams::v_thresh;
        else if (key == "v_reset") field = &TdeParams::v_reset;
        else if (key == "t_refr") field = &TdeParams::t_refr;
        else throw std::invalid_argument("unknown TDE parameter '" + key + "'");
        if (!value.is_number()) throw std::invalid_argument("TDE parameter '" + key + "' must be a number");
        p.*field = value.get<double>();
    }
    p.validate();
    return p;
}

nlohmann::json to_json(const TdeNetwork& network) {
    nlohmann::json units = nlohmann::json::array();
    for (std::size_t i = 0; i < network.units.size(); ++i) {
        const auto& u = network.units[i];
        units.push_back({
            {"index", i},
            {"orientation", to_string(u.field.orientation)},
            {"fac", {u.field.fac.x, u.field.fac.y}},
            {"trg", {u.field.trg.x, u.field.trg.y}},
            {"params", to_json(u.params)},
        });
    }
    return {
        {"geometry", {{"width", network.geometry.width}, {"height", network.geometry.height}}},
        {"seed", network.seed},
        {"units", units},
    };
}

TdeNetwork network_from_json(const nlohmann::json& j) {
    TdeNetwork net;
    net.geometry.width = j.at("geometry").at("width").get<std::uint16_t>();
    net.geometry.height = j.at("geometry").at("height").get<std::uint16_t>();
    net.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& u: j.at("units")) {
        NetworkUnit unit;
        unit.field.orientation = parse_orientation(u.at("orientation").get<std::string>());
        unit.field.fac = {u.at("fac").at(0).get<std::uint16_t>(), u.at("fac").at(1).get<std::uint16_t>()};
        unit.field.trg = {u.at("trg").at(0).get<std::uint16_t>(), u.at("trg").at(1).get<std::uint16_t>()};
        if (!is_consistent(unit.field)) {
            throw std::invalid_argument("network unit " + std::to_string(net.units.size())
                                        + ": pixels do not match its orientation");
        }
        unit.params = params_from_json(u.at("params"));
        net.units.push_back(unit);
    }
    return net;
}

void write_raster_csv(const Raster& raster, std::ostream& os) {
    os << "unit,orientation,spike_time_s\n";
    for (const auto& row: raster.rows) {
        for (double t: row.spikes) {
            os << row.unit << ',' << to_string(row.orientation) << ',' << format_exact(t) << '\n';
        }
    }
}

} // namespace tde
