#include "tde/events.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <tuple>

namespace tde {

bool event_less(const Event& a, const Event& b) {
    return std::tie(a.t_us, a.y, a.x, a.polarity) < std::tie(b.t_us, b.y, b.x, b.polarity);
}

bool is_sorted_stream(std::span<const Event> events) {
    return std::is_sorted(events.begin(), events.end(), event_less);
}

void sort_stream(std::vector<Event>& events) {
    std::sort(events.begin(), events.end(), event_less);
}

EventFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return EventFormat::Csv;
    if (ext == ".evt") return EventFormat::Binary;
    throw std::invalid_argument("cannot infer event format from '" + path.string() + "' (use .csv or .evt)");
}

namespace {

void require_writable(std::span<const Event> events) {
    if (!is_sorted_stream(events)) throw std::invalid_argument("write_events: stream is not sorted");
    for (const auto& e: events) {
        if (e.polarity != 1 && e.polarity != -1) throw std::invalid_argument("write_events: polarity must be +1 or -1");
    }
}

template <typename T>
bool parse_field(std::string_view s, T& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc{} && res.ptr == end && !s.empty();
}

[[noreturn]] void csv_error(EventFormatError::Kind kind, std::size_t line, const std::string& msg) {
    throw EventFormatError(kind, line, "event CSV line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void bin_error(EventFormatError::Kind kind, std::size_t offset, const std::string& msg) {
    throw EventFormatError(kind, offset, "event file byte offset " + std::to_string(offset) + ": " + msg);
}

} // namespace

void write_events_csv(std::span<const Event> events, std::ostream& os) {
    require_writable(events);
    os << "t_us,x,y,p\n";
    for (const auto& e: events) {
        os << e.t_us << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.polarity) << '\n';
    }
}

std::vector<Event> read_events_csv(std::istream& is) {
    using Kind = EventFormatError::Kind;
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(is, line)) csv_error(Kind::BadHeader, 1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_us,x,y,p") csv_error(Kind::BadHeader, 1, "expected header 't_us,x,y,p'");

    std::vector<Event> events;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::array<std::string_view, 4> cols;
        std::string_view rest = line;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto comma = rest.find(',');
            if (c + 1 < cols.size()) {
                if (comma == std::string_view::npos) csv_error(Kind::Truncated, line_no, "expected 4 columns");
                cols[c] = rest.substr(0, comma);
                rest.remove_prefix(comma + 1);
            }
            else {
                if (comma != std::string_view::npos) csv_error(Kind::BadValue, line_no, "too many columns");
                cols[c] = rest;
            }
        }

        Event e;
        int polarity = 0;
        if (!parse_field(cols[0], e.t_us)) csv_error(Kind::BadValue, line_no, "bad t_us");
        if (!parse_field(cols[1], e.x)) csv_error(Kind::BadValue, line_no, "bad x");
        if (!parse_field(cols[2], e.y)) csv_error(Kind::BadValue, line_no, "bad y");
        if (!parse_field(cols[3], polarity) || (polarity != 1 && polarity != -1)) {
            csv_error(Kind::BadValue, line_no, "polarity must be 1 or -1");
        }
        e.polarity = static_cast<std::int8_t>(polarity);
        if (!events.empty() && event_less(e, events.back())) csv_error(Kind::Unsorted, line_no, "events out of order");
        events.push_back(e);
    }
    return events;
}

namespace {

constexpr std::array<char, 4> kMagic{'E', 'V', 'T', '1'};

void put_le(unsigned char* out, std::uint64_t v, std::size_t bytes) {
    for (std::size_t i = 0; i < bytes; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t get_le(const unsigned char* in, std::size_t bytes) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

} // namespace

void write_events_binary(std::span<const Event> events, std::ostream& os) {
    require_writable(events);
    os.write(kMagic.data(), kMagic.size());
    std::array<unsigned char, kEvtRecordSize> rec;
    for (const auto& e: events) {
        put_le(rec.data(), e.t_us, 8);
        put_le(rec.data() + 8, e.x, 2);
        put_le(rec.data() + 10, e.y, 2);
        rec[12] = static_cast<unsigned char>(e.polarity);
        os.write(reinterpret_cast<const char*>(rec.data()), rec.size());
    }
}

std::vector<Event> read_events_binary(std::istream& is) {
    using Kind = EventFormatError::Kind;
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (is.gcount() != 4 || magic != kMagic) bin_error(Kind::BadMagic, 0, "missing EVT1 magic");

    std::vector<Event> events;
    std::array<unsigned char, kEvtRecordSize> rec;
    std::size_t offset = kMagic.size();
    while (true) {
        is.read(reinterpret_cast<char*>(rec.data()), rec.size());
        const auto got = static_cast<std::size_t>(is.gcount());
        if (got == 0) break;
        if (got < rec.size()) bin_error(Kind::Truncated, offset, "truncated record");

        Event e;
        e.t_us = get_le(rec.data(), 8);
        e.x = static_cast<std::uint16_t>(get_le(rec.data() + 8, 2));
        e.y = static_cast<std::uint16_t>(get_le(rec.data() + 10, 2));
        e.polarity = static_cast<std::int8_t>(rec[12]);
        if (e.polarity != 1 && e.polarity != -1) bin_error(Kind::BadValue, offset, "polarity must be +1 or -1");
        if (!events.empty() && event_less(e, events.back())) bin_error(Kind::Unsorted, offset, "events out of order");
        events.push_back(e);
        offset += rec.size();
    }
    return events;
}

void write_events(std::span<const Event> events, const std::filesystem::path& path, EventFormat format) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    if (format == EventFormat::Csv) write_events_csv(events, os);
    else write_events_binary(events, os);
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_events(std::span<const Event> events, const std::filesystem::path& path) {
    write_events(events, path, format_from_path(path));
}

std::vector<Event> read_events(const std::filesystem::path& path, EventFormat format) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return format == EventFormat::Csv ? read_events_csv(is) : read_events_binary(is);
}

std::vector<Event> read_events(const std::filesystem::path& path) {
    return read_events(path, format_from_path(path));
}

} // namespace tde
