#include "tde/format.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace tde {

std::string format_sig12(double x) {
    std::array<char, 64> buf;
    const int n = std::snprintf(buf.data(), buf.size(), "%.12g", x);
    return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::string format_exact(double x) {
    std::array<char, 64> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (res.ec != std::errc{}) throw std::runtime_error("format_exact: to_chars failed");
    return std::string(buf.data(), res.ptr);
}

double round_sig12(double x) {
    return std::strtod(format_sig12(x).c_str(), nullptr);
}

} // namespace tde
