#include "neuroloop/aer.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "neuroloop/errors.hpp"
#include "neuroloop/text.hpp"

namespace neuroloop {

void sort_events(std::vector<AerEvent>& events) {
    std::stable_sort(events.begin(), events.end(), [](const AerEvent& a, const AerEvent& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.address < b.address;
    });
}

bool is_time_sorted(std::span<const AerEvent> events) {
    return std::is_sorted(events.begin(), events.end(),
                          [](const AerEvent& a, const AerEvent& b) { return a.timestamp < b.timestamp; });
}

std::vector<AerEvent> read_aer(std::istream& in, EventKind kind) {
    std::vector<AerEvent> events;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        const auto comma = body.find(',');
        if (comma == std::string_view::npos) {
            throw ParseError("AER line " + std::to_string(line_no) + ": expected timestamp_us,address");
        }
        AerEvent e{parse_int<TimeUs>(trim(body.substr(0, comma)), "AER timestamp"),
                   parse_int<std::int32_t>(trim(body.substr(comma + 1)), "AER address"), kind};
        if (e.timestamp < 0 || e.address < 0) {
            throw ParseError("AER line " + std::to_string(line_no) + ": negative field");
        }
        if (!events.empty() && e.timestamp < events.back().timestamp) {
            throw StreamError("AER line " + std::to_string(line_no) + ": timestamp decreases");
        }
        events.push_back(e);
    }
    return events;
}

std::vector<AerEvent> read_aer_file(const std::string& path, EventKind kind) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open AER file " + path);
    return read_aer(in, kind);
}

void write_aer(std::ostream& out, std::span<const AerEvent> events) {
    for (const auto& e : events) out << e.timestamp << ',' << e.address << '\n';
}

void write_aer_file(const std::string& path, std::span<const AerEvent> events) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write AER file " + path);
    write_aer(out, events);
}

}  // namespace neuroloop
