#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace neuroloop {

using TimeUs = std::int64_t;

enum class EventKind : std::uint8_t { input, output };

struct AerEvent {
    TimeUs timestamp = 0;
    std::int32_t address = 0;
    EventKind kind = EventKind::input;

    friend bool operator==(const AerEvent&, const AerEvent&) = default;
};

// Orders by timestamp, then address. Stable sort keeps generator order for
// identical events.
void sort_events(std::vector<AerEvent>& events);

bool is_time_sorted(std::span<const AerEvent> events);

// Text format: one `timestamp_us,address` per line, `#` starts a comment.
// Throws ParseError on malformed lines and StreamError on decreasing
// timestamps.
std::vector<AerEvent> read_aer(std::istream& in, EventKind kind = EventKind::input);
std::vector<AerEvent> read_aer_file(const std::string& path, EventKind kind = EventKind::input);
void write_aer(std::ostream& out, std::span<const AerEvent> events);
void write_aer_file(const std::string& path, std::span<const AerEvent> events);

}  // namespace neuroloop
