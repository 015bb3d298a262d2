#pragma once

#include "tde/events.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tde {

// Synthetic event-camera stimulus: a texture of disc-shaped features sliding
// over a toroidal canvas at constant velocity. A pixel emits a positive event
// when a feature's leading edge crosses its centre and a negative event when
// the trailing edge leaves. Pixel (x, y) has its centre at (x, y); y grows
// downwards, so upward motion has vy < 0.

struct TextureConfig {
    Geometry geometry{64, 64};
    std::uint32_t n_features = 40;
    double radius_min = 1.0;         // per-feature radius drawn uniformly [px]
    double radius_max = 3.0;
    double vx = 0.0;                 // [px/s]
    double vy = -100.0;              // [px/s], negative = upwards
    double duration = 2.0;           // [s]
    std::uint32_t events_per_crossing = 1;
    double jitter_sigma = 1e-3;      // [s]
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TextureConfig&) const = default;
};

struct Feature {
    double cx;
    double cy;
    double radius;
};

std::vector<Feature> draw_features(const TextureConfig& config);

// Ideal (jitter-free) crossing events of the given features, sorted.
std::vector<Event> render_features(std::span<const Feature> features, const TextureConfig& config);

// render_features(draw_features(config), config)
std::vector<Event> generate_texture_events(const TextureConfig& config);

// Independent Gaussian timestamp noise per event, clamped at t = 0 and
// quantized to 1 us. Output is re-sorted.
std::vector<Event> add_jitter(std::span<const Event> events, double sigma, std::uint64_t seed);

} // namespace tde
