#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tde {

/// An address event from a pixel array. Timestamps are integer microseconds.
struct Event {
    std::uint64_t t_us = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::int8_t polarity = 1; // +1 or -1

    bool operator==(const Event&) const = default;
};

/// Stream order: by time, ties broken by (y, x, polarity).
bool event_less(const Event& a, const Event& b);
bool is_sorted_stream(std::span<const Event> events);
void sort_stream(std::vector<Event>& events);

struct Geometry {
    std::uint16_t width = 64;
    std::uint16_t height = 64;

    bool contains(std::uint32_t x, std::uint32_t y) const { return x < width && y < height; }
    bool operator==(const Geometry&) const = default;
};

enum class EventFormat { Csv, Binary };

// ".csv" -> Csv, ".evt" -> Binary; anything else throws.
EventFormat format_from_path(const std::filesystem::path& path);

class EventFormatError: public std::runtime_error {
public:
    enum class Kind { BadMagic, BadHeader, Truncated, BadValue, Unsorted };

    // `position` is a byte offset for binary files and a 1-based line number for CSV.
    EventFormatError(Kind kind, std::size_t position, const std::string& what):
        std::runtime_error(what), kind_(kind), position_(position) {}

    Kind kind() const { return kind_; }
    std::size_t position() const { return position_; }

private:
    Kind kind_;
    std::size_t position_;
};

// CSV: header "t_us,x,y,p", one event per line, polarity written as 1 / -1.
void write_events_csv(std::span<const Event> events, std::ostream& os);
std::vector<Event> read_events_csv(std::istream& is);

// Binary: "EVT1" then packed little-endian records of
// u64 t_us, u16 x, u16 y, i8 polarity (13 bytes each).
inline constexpr std::size_t kEvtRecordSize = 13;
void write_events_binary(std::span<const Event> events, std::ostream& os);
std::vector<Event> read_events_binary(std::istream& is);

void write_events(std::span<const Event> events, const std::filesystem::path& path, EventFormat format);
void write_events(std::span<const Event> events, const std::filesystem::path& path);
std::vector<Event> read_events(const std::filesystem::path& path, EventFormat format);
std::vector<Event> read_events(const std::filesystem::path& path);

} // namespace tde
