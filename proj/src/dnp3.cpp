#include "dnp3ids/dnp3.hpp"

#include "dnp3ids/util.hpp"

#include <array>
#include <cstdio>

namespace dnp3ids::dnp3 {

using namespace util;

namespace {

std::array<std::uint16_t, 256> make_crc_table() {
    // 0xA6BC is 0x3D65 bit-reversed.
    std::array<std::uint16_t, 256> table{};
    for (unsigned i = 0; i < 256; ++i) {
        std::uint16_t crc = static_cast<std::uint16_t>(i);
        for (int bit = 0; bit < 8; ++bit)
            crc = (crc & 1) ? static_cast<std::uint16_t>((crc >> 1) ^ 0xA6BC) : static_cast<std::uint16_t>(crc >> 1);
        table[i] = crc;
    }
    return table;
}

const std::array<std::uint16_t, 256>& crc_table() {
    static const auto table = make_crc_table();
    return table;
}

std::uint16_t read_block_crc(const std::uint8_t* p) { return rd16le(p); }

} // namespace

std::uint16_t crc16_dnp(std::span<const std::uint8_t> data) {
    const auto& table = crc_table();
    std::uint16_t crc = 0x0000;
    for (auto b : data) crc = static_cast<std::uint16_t>((crc >> 8) ^ table[(crc ^ b) & 0xFF]);
    return static_cast<std::uint16_t>(~crc);
}

std::size_t frame_wire_size(std::uint8_t length) {
    const std::size_t user = static_cast<std::size_t>(length) - 5;
    const std::size_t blocks = (user + kBlockSize - 1) / kBlockSize;
    return kLinkHeaderSize + user + 2 * blocks;
}

Dnp3Frame parse_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != kStart0 || bytes[1] != kStart1) throw BadStartBytes{};
    if (bytes.size() < kLinkHeaderSize) throw Truncated{};

    Dnp3Frame f;
    f.link.length = bytes[2];
    if (f.link.length < 5) throw LengthOutOfRange{};
    if (bytes.size() < frame_wire_size(f.link.length)) throw Truncated{};

    f.link.control = bytes[3];
    f.link.destination = rd16le(&bytes[4]);
    f.link.source = rd16le(&bytes[6]);
    f.link.header_crc = read_block_crc(&bytes[8]);
    f.crc_valid.push_back(crc16_dnp(bytes.subspan(0, 8)) == f.link.header_crc);

    // Re-assemble user data from 16-octet blocks, checking each block CRC.
    const std::size_t user_len = static_cast<std::size_t>(f.link.length) - 5;
    std::vector<std::uint8_t> user;
    user.reserve(user_len);
    std::size_t off = kLinkHeaderSize;
    std::size_t remaining = user_len;
    while (remaining > 0) {
        const std::size_t n = remaining < kBlockSize ? remaining : kBlockSize;
        const std::uint16_t got = read_block_crc(&bytes[off + n]);
        f.crc_valid.push_back(crc16_dnp(bytes.subspan(off, n)) == got);
        user.insert(user.end(), bytes.begin() + off, bytes.begin() + off + n);
        off += n + 2;
        remaining -= n;
    }

    f.direction = f.link.dir() ? Direction::request : Direction::response;

    if (!user.empty()) f.transport = TransportHeader::from_octet(user[0]);
    if (user.size() >= 2) f.app.control = user[1];
    if (user.size() >= 3) f.app.function_code = user[2];

    std::size_t payload_start = user.size() < 3 ? user.size() : 3;
    const bool response_fc = f.app.function_code >= 0x81;
    if (f.direction == Direction::response && response_fc && user.size() >= 5) {
        f.app.internal_indications = rd16le(&user[3]);
        payload_start = 5;
    }
    f.payload.assign(user.begin() + payload_start, user.end());

    f.dir_fc_consistent = f.direction == Direction::request
                              ? f.app.function_code <= 0x21
                              : (response_fc || f.app.function_code == FC_CONFIRM);
    return f;
}

std::vector<std::uint8_t> encode_frame(const Dnp3Frame& frame) {
    std::vector<std::uint8_t> user;
    user.push_back(frame.transport.octet());
    user.push_back(frame.app.control);
    user.push_back(frame.app.function_code);
    if (frame.app.internal_indications) {
        user.push_back(static_cast<std::uint8_t>(*frame.app.internal_indications & 0xFF));
        user.push_back(static_cast<std::uint8_t>(*frame.app.internal_indications >> 8));
    }
    user.insert(user.end(), frame.payload.begin(), frame.payload.end());
    if (user.size() > kMaxUserData) throw PayloadTooLarge{};

    std::vector<std::uint8_t> out;
    out.reserve(frame_wire_size(static_cast<std::uint8_t>(5 + user.size())));
    out.push_back(kStart0);
    out.push_back(kStart1);
    out.push_back(static_cast<std::uint8_t>(5 + user.size()));
    out.push_back(frame.link.control);
    wr16le(out, frame.link.destination);
    wr16le(out, frame.link.source);
    wr16le(out, crc16_dnp({out.data(), 8}));

    std::size_t off = 0;
    while (off < user.size()) {
        const std::size_t n = user.size() - off < kBlockSize ? user.size() - off : kBlockSize;
        out.insert(out.end(), user.begin() + off, user.begin() + off + n);
        wr16le(out, crc16_dnp({user.data() + off, n}));
        off += n;
    }
    return out;
}

namespace {
const char* kFunctionNames[0x1F] = {
    "Confirm",                  // 0x00
    "Read",                     // 0x01
    "Write",                    // 0x02
    "Select",                   // 0x03
    "Operate",                  // 0x04
    "Dir operate",              // 0x05
    "Dir operate-No resp",      // 0x06
    "Freeze",                   // 0x07
    "Freeze-No resp",           // 0x08
    "Freeze clear",             // 0x09
    "Freeze clear-No resp",     // 0x0A
    "Freeze at time",           // 0x0B
    "Freeze at time-No resp",   // 0x0C
    "Cold restart",             // 0x0D
    "Warm restart",             // 0x0E
    "Initialize data",          // 0x0F
    "Initialize application",   // 0x10
    "Start application",        // 0x11
    "Stop application",         // 0x12
    "Save configuration",       // 0x13
    "Enable unsolicited",       // 0x14
    "Disable unsolicited",      // 0x15
    "Assign class",             // 0x16
    "Delay measurement",        // 0x17
    "Record current time",      // 0x18
    "Open file",                // 0x19
    "Close file",               // 0x1A
    "Delete file",              // 0x1B
    "Get file information",     // 0x1C
    "Authenticate file",        // 0x1D
    "Abort file",               // 0x1E
};
} // namespace

std::string describe_function(std::uint8_t code) {
    if (code <= 0x1E) return kFunctionNames[code];
    char buf[16];
    std::snprintf(buf, sizeof buf, "Unknown(0x%02X)", code);
    return buf;
}

bool known_function(std::uint8_t code) { return code <= 0x1E; }

const CriticalSet& default_critical_set() {
    static const CriticalSet set = {FC_SELECT,       FC_OPERATE,          FC_DIRECT_OPERATE,
                                    FC_DIRECT_OPERATE_NR, FC_COLD_RESTART, FC_WARM_RESTART,
                                    FC_STOP_APPLICATION,  FC_DISABLE_UNSOLICITED};
    return set;
}

bool is_critical(std::uint8_t code, const CriticalSet& set) { return set.count(code) != 0; }

const BroadcastSet& default_broadcast_set() {
    static const BroadcastSet set = {0xFFFD, 0xFFFE, 0xFFFF};
    return set;
}

bool is_broadcast(std::uint16_t destination, const BroadcastSet& set) {
    return set.count(destination) != 0;
}

Dnp3Frame make_request(std::uint16_t dst, std::uint16_t src, std::uint8_t fc,
                       std::span<const std::uint8_t> payload, std::uint8_t transport_seq,
                       std::uint8_t app_seq) {
    Dnp3Frame f;
    f.link.control = 0xC4;
    f.link.destination = dst;
    f.link.source = src;
    f.transport = {true, true, static_cast<std::uint8_t>(transport_seq & 0x3F)};
    f.app.control = static_cast<std::uint8_t>(0xC0 | (app_seq & 0x0F));
    f.app.function_code = fc;
    f.payload.assign(payload.begin(), payload.end());
    f.direction = Direction::request;
    // crc_valid stays empty on constructed frames; it is filled in by parse_frame.
    return f;
}

Dnp3Frame make_response(std::uint16_t dst, std::uint16_t src, std::uint8_t fc, std::uint16_t iin,
                        std::span<const std::uint8_t> payload, std::uint8_t transport_seq,
                        std::uint8_t app_seq) {
    Dnp3Frame f = make_request(dst, src, fc, payload, transport_seq, app_seq);
    f.link.control = 0x44;
    f.app.internal_indications = iin;
    f.direction = Direction::response;
    return f;
}

} // namespace dnp3ids::dnp3
