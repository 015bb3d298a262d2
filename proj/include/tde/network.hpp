#pragma once

#include "tde/core.hpp"
#include "tde/events.hpp"
#include "tde/mismatch.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace tde {

enum class Orientation { Up, Down, Left, Right };

inline constexpr std::array<Orientation, 4> kOrientations{
    Orientation::Up, Orientation::Down, Orientation::Left, Orientation::Right};

std::string_view to_string(Orientation o);
Orientation parse_orientation(std::string_view s);

struct Pixel {
    std::uint16_t x = 0;
    std::uint16_t y = 0;

    bool operator==(const Pixel&) const = default;
    auto operator<=>(const Pixel&) const = default;
};

// FAC and TRG are 4-neighbours; the orientation points from FAC to TRG in
// image coordinates (Up = TRG one row above FAC), so a unit prefers motion
// along its orientation.
struct ReceptiveField {
    Pixel fac;
    Pixel trg;
    Orientation orientation = Orientation::Up;

    bool operator==(const ReceptiveField&) const = default;
};

bool is_consistent(const ReceptiveField& field);

struct NetworkUnit {
    ReceptiveField field;
    TdeParams params;

    bool operator==(const NetworkUnit&) const = default;
};

struct TdeNetwork {
    Geometry geometry;
    std::vector<NetworkUnit> units;
    std::uint64_t seed = 0;

    bool operator==(const TdeNetwork&) const = default;
};

// n_units / 4 units per orientation (interleaved Up, Down, Left, Right), FAC
// pixels drawn uniformly with rejection of out-of-bounds TRG pixels and
// repeated (FAC, TRG) pairs. Fails after 10^4 rejections.
TdeNetwork build_random_network(Geometry geometry, std::size_t n_units, const TdeParams& params,
                                std::uint64_t seed);

// Replaces each unit's params with an independent mismatched draw.
void apply_mismatch(TdeNetwork& network, const MismatchSpec& spec, std::uint64_t seed);

struct UnitInputs {
    std::vector<double> fac; // event times [s]
    std::vector<double> trg;
};

// Both polarities drive both inputs. Events outside the geometry throw.
std::vector<UnitInputs> route(std::span<const Event> events, const TdeNetwork& network);

struct RasterRow {
    std::size_t unit = 0;
    Orientation orientation = Orientation::Up;
    SpikeTrain spikes;

    bool operator==(const RasterRow&) const = default;
};

struct Raster {
    std::vector<RasterRow> rows; // ordered by unit index

    std::size_t total_spikes() const;
    bool operator==(const Raster&) const = default;
};

// Each unit is simulated from rest over [0, last event time].
Raster run_network(const TdeNetwork& network, std::span<const Event> events, TdeVariant variant,
                   unsigned threads = 0);

// Spike share per orientation; throws if the raster is silent.
std::map<Orientation, double> orientation_fractions(const Raster& raster);

nlohmann::json to_json(const TdeParams& p);
TdeParams params_from_json(const nlohmann::json& j, const TdeParams& defaults = {});

nlohmann::json to_json(const TdeNetwork& network);
TdeNetwork network_from_json(const nlohmann::json& j);

// unit,orientation,spike_time_s with shortest round-trip times.
void write_raster_csv(const Raster& raster, std::ostream& os);

} // namespace tde
