#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnp3ids::dnp3 {

// CRC-16/DNP: poly 0x3D65, reflected in/out, init 0, output complemented.
// Transmitted LSB first after every header/body block.
std::uint16_t crc16_dnp(std::span<const std::uint8_t> data);

constexpr std::uint8_t kStart0 = 0x05;
constexpr std::uint8_t kStart1 = 0x64;
constexpr std::size_t kLinkHeaderSize = 10;   // start..source + header CRC
constexpr std::size_t kBlockSize = 16;        // user octets per CRC block
constexpr std::size_t kMaxUserData = 250;     // length field caps at 255 = 5 + 250

struct LinkHeader {
    std::uint8_t length = 0;        // counts control+dst+src+user data, not CRCs
    std::uint8_t control = 0;
    std::uint16_t destination = 0;  // little-endian on the wire
    std::uint16_t source = 0;
    std::uint16_t header_crc = 0;   // as seen on the wire

    bool dir() const { return control & 0x80; }
    bool prm() const { return control & 0x40; }
    bool fcb() const { return control & 0x20; }
    bool fcv() const { return control & 0x10; }
    std::uint8_t link_function() const { return control & 0x0F; }
};

struct TransportHeader {
    bool fin = true;                // bit 7
    bool fir = true;                // bit 6
    std::uint8_t sequence = 0;      // bits 0-5

    std::uint8_t octet() const {
        return static_cast<std::uint8_t>((fin ? 0x80 : 0) | (fir ? 0x40 : 0) | (sequence & 0x3F));
    }
    static TransportHeader from_octet(std::uint8_t o) {
        return {(o & 0x80) != 0, (o & 0x40) != 0, static_cast<std::uint8_t>(o & 0x3F)};
    }
};

struct ApplicationHeader {
    std::uint8_t control = 0xC0;    // FIR|FIN|CON|UNS + 4-bit sequence
    std::uint8_t function_code = 0;
    std::optional<std::uint16_t> internal_indications;  // responses only

    bool fir() const { return control & 0x80; }
    bool fin() const { return control & 0x40; }
    bool con() const { return control & 0x20; }
    bool uns() const { return control & 0x10; }
    std::uint8_t sequence() const { return control & 0x0F; }
};

enum class Direction { request, response };

struct Dnp3Frame {
    LinkHeader link;
    TransportHeader transport;
    ApplicationHeader app;
    std::vector<std::uint8_t> payload;   // application octets past the header
    std::vector<bool> crc_valid;         // [0] header block, then one per body block
    Direction direction = Direction::request;
    bool dir_fc_consistent = true;

    bool all_crc_valid() const {
        for (bool v : crc_valid)
            if (!v) return false;
        return true;
    }
    bool is_request() const { return direction == Direction::request; }
};

struct Dnp3Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadStartBytes : Dnp3Error {
    BadStartBytes() : Dnp3Error("frame does not start with 0x05 0x64") {}
};
struct LengthOutOfRange : Dnp3Error {
    LengthOutOfRange() : Dnp3Error("link length field below minimum of 5") {}
};
struct Truncated : Dnp3Error {
    Truncated() : Dnp3Error("fewer octets than the length field implies") {}
};
struct PayloadTooLarge : Dnp3Error {
    PayloadTooLarge() : Dnp3Error("user data exceeds 250 octets, cannot fit one link frame") {}
};

// Total wire octets of a frame whose link length field is `length`,
// including start bytes and all CRCs. Valid for length >= 5.
std::size_t frame_wire_size(std::uint8_t length);

// Parses one link frame starting at bytes[0]. CRC mismatches are reported via
// crc_valid flags, never as errors. Throws BadStartBytes / LengthOutOfRange /
// Truncated for structural problems.
Dnp3Frame parse_frame(std::span<const std::uint8_t> bytes);

// Emits wire bytes with recomputed length and CRCs.
// parse_frame(encode_frame(f)) == f with crc_valid all true.
std::vector<std::uint8_t> encode_frame(const Dnp3Frame& frame);

// Request function codes 0x00-0x1E; everything else renders as "Unknown(0xNN)".
std::string describe_function(std::uint8_t code);
bool known_function(std::uint8_t code);

using CriticalSet = std::set<std::uint8_t>;
const CriticalSet& default_critical_set();
bool is_critical(std::uint8_t code, const CriticalSet& set = default_critical_set());

using BroadcastSet = std::set<std::uint16_t>;
const BroadcastSet& default_broadcast_set();
bool is_broadcast(std::uint16_t destination, const BroadcastSet& set = default_broadcast_set());

// Common request function codes used around the codebase.
constexpr std::uint8_t FC_CONFIRM = 0x00;
constexpr std::uint8_t FC_READ = 0x01;
constexpr std::uint8_t FC_WRITE = 0x02;
constexpr std::uint8_t FC_SELECT = 0x03;
constexpr std::uint8_t FC_OPERATE = 0x04;
constexpr std::uint8_t FC_DIRECT_OPERATE = 0x05;
constexpr std::uint8_t FC_DIRECT_OPERATE_NR = 0x06;
constexpr std::uint8_t FC_COLD_RESTART = 0x0D;
constexpr std::uint8_t FC_WARM_RESTART = 0x0E;
constexpr std::uint8_t FC_STOP_APPLICATION = 0x12;
constexpr std::uint8_t FC_ENABLE_UNSOLICITED = 0x14;
constexpr std::uint8_t FC_DISABLE_UNSOLICITED = 0x15;
constexpr std::uint8_t FC_RESPONSE = 0x81;
constexpr std::uint8_t FC_UNSOLICITED_RESPONSE = 0x82;

// Builders for the traffic synthesizer. Link control defaults: 0xC4 for
// master frames (DIR=1, PRM=1, unconfirmed user data), 0x44 for outstation.
Dnp3Frame make_request(std::uint16_t dst, std::uint16_t src, std::uint8_t fc,
                       std::span<const std::uint8_t> payload = {},
                       std::uint8_t transport_seq = 0, std::uint8_t app_seq = 0);
Dnp3Frame make_response(std::uint16_t dst, std::uint16_t src, std::uint8_t fc,
                        std::uint16_t iin = 0, std::span<const std::uint8_t> payload = {},
                        std::uint8_t transport_seq = 0, std::uint8_t app_seq = 0);

} // namespace dnp3ids::dnp3
