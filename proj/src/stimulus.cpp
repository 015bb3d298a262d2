#include "tde/stimulus.hpp"

#include "tde/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tde {

void TextureConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("TextureConfig: ") + what);
    };
    require(geometry.width > 0 && geometry.height > 0, "width and height must be > 0");
    require(n_features > 0, "n_features must be > 0");
    require(std::isfinite(radius_min) && radius_min > 0, "radius_min must be > 0");
    require(std::isfinite(radius_max) && radius_max >= radius_min, "radius_max must be >= radius_min");
    require(std::isfinite(vx) && std::isfinite(vy), "velocity must be finite");
    require(std::isfinite(duration) && duration > 0, "duration must be > 0");
    require(events_per_crossing > 0, "events_per_crossing must be > 0");
    require(std::isfinite(jitter_sigma) && jitter_sigma >= 0, "jitter_sigma must be >= 0");
}

std::vector<Feature> draw_features(const TextureConfig& config) {
    config.validate();
    RngCursor rng(CounterRng(config.seed).substream("features"));
    std::vector<Feature> features;
    features.reserve(config.n_features);
    for (std::uint32_t i = 0; i < config.n_features; ++i) {
        Feature f;
        f.cx = rng.uniform() * config.geometry.width;
        f.cy = rng.uniform() * config.geometry.height;
        f.radius = config.radius_min + (config.radius_max - config.radius_min) * rng.uniform();
        features.push_back(f);
    }
    return features;
}

namespace {

std::uint64_t to_us(double t) {
    return static_cast<std::uint64_t>(std::llround(t * 1e6));
}

std::uint16_t wrap(long long v, std::uint16_t n) {
    const long long m = v % n;
    return static_cast<std::uint16_t>(m < 0 ? m + n : m);
}

} // namespace

std::vector<Event> render_features(std::span<const Feature> features, const TextureConfig& config) {
    config.validate();
    const double speed2 = config.vx * config.vx + config.vy * config.vy;
    if (speed2 == 0) throw std::invalid_argument("generate_texture_events: velocity is zero, no events can occur");

    const double T = config.duration;
    std::vector<Event> events;
    auto emit = [&](double t, long long X, long long Y, std::int8_t polarity) {
        if (!(t >= 0 && t < T)) return;
        const Event e{to_us(t), wrap(X, config.geometry.width), wrap(Y, config.geometry.height), polarity};
        events.insert(events.end(), config.events_per_crossing, e);
    };

    for (const auto& f: features) {
        const double r = f.radius;
        // Unwrapped pixel images that the swept disc can reach.
        const double x_lo = std::min(f.cx, f.cx + config.vx * T) - r;
        const double x_hi = std::max(f.cx, f.cx + config.vx * T) + r;
        const double y_lo = std::min(f.cy, f.cy + config.vy * T) - r;
        const double y_hi = std::max(f.cy, f.cy + config.vy * T) + r;

        for (auto X = static_cast<long long>(std::ceil(x_lo)); X <= static_cast<long long>(std::floor(x_hi)); ++X) {
            for (auto Y = static_cast<long long>(std::ceil(y_lo)); Y <= static_cast<long long>(std::floor(y_hi)); ++Y) {
                // |a - v t| = r with a the pixel position relative to the start centre.
                const double ax = static_cast<double>(X) - f.cx;
                const double ay = static_cast<double>(Y) - f.cy;
                const double cross = ax * config.vy - ay * config.vx;
                const double disc = speed2 * r * r - cross * cross;
                if (disc <= 0) continue;
                const double b = ax * config.vx + ay * config.vy;
                const double root = std::sqrt(disc);
                emit((b - root) / speed2, X, Y, 1);
                emit((b + root) / speed2, X, Y, -1);
            }
        }
    }
    sort_stream(events);
    return events;
}

std::vector<Event> generate_texture_events(const TextureConfig& config) {
    return render_features(draw_features(config), config);
}

std::vector<Event> add_jitter(std::span<const Event> events, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0) || !std::isfinite(sigma)) throw std::invalid_argument("add_jitter: sigma must be >= 0");
    std::vector<Event> out(events.begin(), events.end());
    if (sigma == 0) return out;

    const CounterRng rng = CounterRng(seed).substream("jitter");
    const double sigma_us = sigma * 1e6;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = static_cast<double>(out[i].t_us) + sigma_us * rng.normal(i);
        out[i].t_us = t <= 0 ? 0 : static_cast<std::uint64_t>(std::llround(t));
    }
    sort_stream(out);
    return out;
}

} // namespace tde
