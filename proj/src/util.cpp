#include "dnp3ids/util.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace dnp3ids::util {

std::optional<std::uint32_t> parse_ipv4(const std::string& text) {
    unsigned a, b, c, d;
    char tail;
    if (std::sscanf(text.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) != 4) return std::nullopt;
    if (a > 255 || b > 255 || c > 255 || d > 255) return std::nullopt;
    return (a << 24) | (b << 16) | (c << 8) | d;
}

std::string format_ipv4(std::uint32_t addr) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (addr >> 24) & 0xFF, (addr >> 16) & 0xFF,
                  (addr >> 8) & 0xFF, addr & 0xFF);
    return buf;
}

std::optional<Cidr> parse_cidr(const std::string& text) {
    Cidr c;
    auto slash = text.find('/');
    if (slash == std::string::npos) {
        auto addr = parse_ipv4(text);
        if (!addr) return std::nullopt;
        c.base = *addr;
        c.prefix = 32;
        return c;
    }
    auto addr = parse_ipv4(text.substr(0, slash));
    if (!addr) return std::nullopt;
    int prefix = 0;
    try {
        prefix = std::stoi(text.substr(slash + 1));
    } catch (...) {
        return std::nullopt;
    }
    if (prefix < 0 || prefix > 32) return std::nullopt;
    c.base = *addr;
    c.prefix = prefix;
    return c;
}

std::string format_cidr(const Cidr& c) {
    if (c.prefix == 32) return format_ipv4(c.base);
    return format_ipv4(c.base) + "/" + std::to_string(c.prefix);
}

std::string to_hex(std::span<const std::uint8_t> data, bool spaced) {
    static const char* digits = "0123456789ABCDEF";
    std::string out;
    out.reserve(data.size() * 3);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (spaced && i) out.push_back(' ');
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xF]);
    }
    return out;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : data) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

} // namespace dnp3ids::util
