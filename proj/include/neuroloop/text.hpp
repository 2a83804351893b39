#pragma once

// Small helpers shared by the text file readers.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "neuroloop/errors.hpp"

namespace neuroloop {

std::string_view trim(std::string_view s);

// Drops everything from the first '#'.
std::string_view strip_comment(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

template <class Int>
Int parse_int(std::string_view s, std::string_view what) {
    Int value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(std::string(what) + ": not an integer: '" + std::string(s) + "'");
    }
    return value;
}

double parse_double(std::string_view s, std::string_view what);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace neuroloop
