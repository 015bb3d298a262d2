#include "tde/config.hpp"

#include "tde/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace tde {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

bool is_free_form(const std::string& path) {
    return path == "mismatch.old" || path == "mismatch.new";
}

// Copies overlay into base, rejecting keys that base does not know.
void merge_strict(json& base, const json& overlay, const std::string& path) {
    if (!overlay.is_object() || !base.is_object() || is_free_form(path)) {
        base = overlay;
        return;
    }
    for (const auto& [key, value]: overlay.items()) {
        const std::string sub = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) fail("unknown config key '" + sub + "'");
        merge_strict(base[key], value, sub);
    }
}

json texture_to_json(const TextureConfig& t) {
    return {
        {"width", t.geometry.width},
        {"height", t.geometry.height},
        {"n_features", t.n_features},
        {"radius_min", t.radius_min},
        {"radius_max", t.radius_max},
        {"velocity", {t.vx, t.vy}},
        {"duration", t.duration},
        {"events_per_crossing", t.events_per_crossing},
        {"jitter_sigma", t.jitter_sigma},
    };
}

TextureConfig texture_from_json(const json& j) {
    TextureConfig t;
    t.geometry.width = j.at("width").get<std::uint16_t>();
    t.geometry.height = j.at("height").get<std::uint16_t>();
    t.n_features = j.at("n_features").get<std::uint32_t>();
    t.radius_min = j.at("radius_min").get<double>();
    t.radius_max = j.at("radius_max").get<double>();
    const auto& v = j.at("velocity");
    if (!v.is_array() || v.size() != 2) fail("texture.velocity must be [vx, vy]");
    t.vx = v[0].get<double>();
    t.vy = v[1].get<double>();
    t.duration = j.at("duration").get<double>();
    t.events_per_crossing = j.at("events_per_crossing").get<std::uint32_t>();
    t.jitter_sigma = j.at("jitter_sigma").get<double>();
    return t;
}

} // namespace

void ExperimentConfig::validate() const {
    try {
        if (std::find(std::begin(kExperiments), std::end(kExperiments), experiment) == std::end(kExperiments)) {
            fail("unknown experiment '" + experiment + "'");
        }
        nominal.validate();
        validate_variant_pair(mismatch_old, mismatch_new);
        texture.validate();
        if (texture.vx == 0 && texture.vy == 0) fail("texture.velocity must be non-zero");
        if (network.n_units == 0 || network.n_units % 4 != 0) fail("network.n_units must be a positive multiple of 4");
        if (!(step.delta_t > 0) || !std::isfinite(step.delta_t)) fail("step.delta_t must be > 0");
        if (!(step.tail >= 0) || !std::isfinite(step.tail)) fail("step.tail must be >= 0");
        if (delta_ts.empty()) fail("delta_ts must not be empty");
        for (double dt: delta_ts) {
            if (!(dt > 0) || !std::isfinite(dt)) fail("delta_ts entries must be > 0");
        }
        if (n_trials < 2) fail("n_trials must be >= 2");
        if (events.format != "evt" && events.format != "csv") fail("events.format must be 'evt' or 'csv'");
        if (out.empty()) fail("out must not be empty");
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

json to_json(const ExperimentConfig& c) {
    return {
        {"experiment", c.experiment},
        {"seed", c.seed},
        {"out", c.out},
        {"threads", c.threads},
        {"variant", to_string(c.variant)},
        {"nominal", to_json(c.nominal)},
        {"mismatch", {{"old", to_json(c.mismatch_old)}, {"new", to_json(c.mismatch_new)}}},
        {"texture", texture_to_json(c.texture)},
        {"network", {{"n_units", c.network.n_units}, {"mismatch", c.network.mismatch}}},
        {"step", {{"delta_t", c.step.delta_t}, {"tail", c.step.tail}}},
        {"delta_ts", c.delta_ts},
        {"n_trials", c.n_trials},
        {"events", {{"format", c.events.format}, {"input", c.events.input}}},
    };
}

ExperimentConfig config_from_json(const json& input) {
    if (!input.is_object()) fail("config must be a JSON object");
    json j = to_json(ExperimentConfig{});
    merge_strict(j, input, "");

    ExperimentConfig c;
    try {
        c.experiment = j.at("experiment").get<std::string>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.out = j.at("out").get<std::string>();
        c.threads = j.at("threads").get<unsigned>();
        c.variant = parse_variant(j.at("variant").get<std::string>());
        c.nominal = params_from_json(j.at("nominal"));
        c.mismatch_old = mismatch_from_json(j.at("mismatch").at("old"), TdeVariant::OldSingleBranch);
        c.mismatch_new = mismatch_from_json(j.at("mismatch").at("new"), TdeVariant::NewDualDpi);
        c.texture = texture_from_json(j.at("texture"));
        c.network.n_units = j.at("network").at("n_units").get<std::size_t>();
        c.network.mismatch = j.at("network").at("mismatch").get<bool>();
        c.step.delta_t = j.at("step").at("delta_t").get<double>();
        c.step.tail = j.at("step").at("tail").get<double>();
        c.delta_ts = j.at("delta_ts").get<std::vector<double>>();
        c.n_trials = j.at("n_trials").get<std::size_t>();
        c.events.format = j.at("events").at("format").get<std::string>();
        c.events.input = j.at("events").at("input").get<std::string>();
    }
    catch (const json::exception& e) {
        fail(std::string("config: ") + e.what());
    }
    catch (const std::invalid_argument& e) {
        fail(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

void apply_override(json& j, std::string_view dotted_key, std::string_view value) {
    json* node = &j;
    std::string path;
    std::string_view rest = dotted_key;
    while (!rest.empty()) {
        const auto dot = rest.find('.');
        const std::string part(rest.substr(0, dot));
        rest = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);
        path += path.empty() ? part : "." + part;

        if (node->is_object()) {
            if (!node->contains(part) && !is_free_form(path.substr(0, path.rfind('.')))) {
                fail("unknown config key '" + path + "'");
            }
            node = &(*node)[part];
        }
        else if (node->is_array()) {
            std::size_t index = 0;
            const auto res = std::from_chars(part.data(), part.data() + part.size(), index);
            if (res.ec != std::errc{} || res.ptr != part.data() + part.size() || index >= node->size()) {
                fail("bad array index in config key '" + path + "'");
            }
            node = &(*node)[index];
        }
        else {
            fail("config key '" + path + "' is not a container");
        }
    }

    if (node->is_string()) {
        *node = std::string(value);
        return;
    }
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = std::string(value);
    *node = std::move(parsed);
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open config file '" + path.string() + "'");
    json j = json::parse(is, nullptr, false);
    if (j.is_discarded()) fail("config file '" + path.string() + "' is not valid JSON");
    return j;
}

} // namespace tde
