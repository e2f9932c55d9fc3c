#pragma once

#include <cstdint>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dnp3ids::util {

inline std::uint16_t rd16le(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint16_t rd16be(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}
inline std::uint32_t rd32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint32_t rd32be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}
inline void wr16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void wr16be(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}
inline void wr32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
inline void wr32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

// IPv4 addresses are held in host order throughout.
std::optional<std::uint32_t> parse_ipv4(const std::string& text);
std::string format_ipv4(std::uint32_t addr);

struct Cidr {
    std::uint32_t base = 0;
    int prefix = 32;

    bool contains(std::uint32_t addr) const {
        if (prefix == 0) return true;
        const std::uint32_t mask = prefix >= 32 ? 0xFFFFFFFFu : ~((1u << (32 - prefix)) - 1);
        return (addr & mask) == (base & mask);
    }
    bool operator==(const Cidr&) const = default;
};

// "10.0.0.1" or "10.0.0.0/24"
std::optional<Cidr> parse_cidr(const std::string& text);
std::string format_cidr(const Cidr& c);

std::string to_hex(std::span<const std::uint8_t> data, bool spaced = true);

// FNV-1a, used for payload digests in the select/operate tracker.
std::uint64_t fnv1a64(std::span<const std::uint8_t> data);
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    return fnv1a64(std::span<const std::uint8_t>(static_cast<const std::uint8_t*>(data), len));
}

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

} // namespace dnp3ids::util
