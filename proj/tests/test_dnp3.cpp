#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dnp3ids/dnp3.hpp"

#include <random>
#include <vector>

using namespace dnp3ids::dnp3;

namespace {

std::vector<std::uint8_t> golden_read_request() {
    // length 8 = 5 + transport + app control + fc, master 1 -> outstation 10
    Dnp3Frame f = make_request(10, 1, FC_READ);
    return encode_frame(f);
}

} // namespace

TEST_CASE("golden read request lays out header, crc, and trailer blocks") {
    auto bytes = golden_read_request();
    REQUIRE(bytes.size() == 15); // 10 link header + 3 user + 2 crc

    CHECK(bytes[0] == 0x05);
    CHECK(bytes[1] == 0x64);
    CHECK(bytes[2] == 0x08);        // length: 5 + 3 user octets
    CHECK(bytes[3] == 0xC4);        // DIR|PRM, unconfirmed user data
    CHECK(bytes[4] == 0x0A);        // destination 10 LE
    CHECK(bytes[5] == 0x00);
    CHECK(bytes[6] == 0x01);        // source 1 LE
    CHECK(bytes[7] == 0x00);

    const std::uint16_t hdr_crc = crc16_dnp({bytes.data(), 8});
    CHECK(bytes[8] == (hdr_crc & 0xFF));
    CHECK(bytes[9] == (hdr_crc >> 8));

    CHECK(bytes[10] == 0xC0);       // transport FIN|FIR seq 0
    CHECK(bytes[11] == 0xC0);       // app FIR|FIN seq 0
    CHECK(bytes[12] == 0x01);       // Read

    const std::uint16_t body_crc = crc16_dnp({bytes.data() + 10, 3});
    CHECK(bytes[13] == (body_crc & 0xFF));
    CHECK(bytes[14] == (body_crc >> 8));
}

TEST_CASE("parse of an encoded frame restores every field with valid crcs") {
    std::vector<std::uint8_t> payload = {0x3C, 0x02, 0x06};
    Dnp3Frame f = make_request(0x0204, 0x0103, FC_SELECT, payload, 5, 9);
    auto bytes = encode_frame(f);
    Dnp3Frame g = parse_frame(bytes);

    CHECK(g.link.destination == 0x0204);
    CHECK(g.link.source == 0x0103);
    CHECK(g.link.length == 5 + 3 + 3);
    CHECK(g.transport.sequence == 5);
    CHECK(g.transport.fin);
    CHECK(g.transport.fir);
    CHECK(g.app.function_code == FC_SELECT);
    CHECK(g.app.sequence() == 9);
    CHECK(g.payload == payload);
    CHECK(g.is_request());
    CHECK(g.all_crc_valid());
    CHECK_FALSE(g.app.internal_indications.has_value());
}

TEST_CASE("responses carry internal indications and parse back") {
    Dnp3Frame f = make_response(1, 10, FC_RESPONSE, 0x8001, {}, 2, 2);
    auto bytes = encode_frame(f);
    Dnp3Frame g = parse_frame(bytes);
    REQUIRE(g.app.internal_indications.has_value());
    CHECK(*g.app.internal_indications == 0x8001);
    CHECK_FALSE(g.is_request());
}

TEST_CASE("encode chunks user data into 16-octet blocks with one crc each") {
    // 40 user octets past the header -> blocks of 16, 16, 8 after the
    // 3 header-adjacent octets; verify via total wire size and re-parse
    std::vector<std::uint8_t> payload(37, 0xAB);
    Dnp3Frame f = make_request(10, 1, FC_WRITE, payload);
    auto bytes = encode_frame(f);

    const std::size_t user = 3 + payload.size(); // transport + app hdr + data
    const std::size_t expect = 10 + user + 2 * ((user + 15) / 16);
    CHECK(bytes.size() == expect);
    CHECK(frame_wire_size(static_cast<std::uint8_t>(5 + user)) == expect);

    Dnp3Frame g = parse_frame(bytes);
    CHECK(g.payload == payload);
    CHECK(g.all_crc_valid());
    CHECK(g.crc_valid.size() == 1 + (user + 15) / 16);
}

TEST_CASE("frame_wire_size matches blockwise enumeration") {
    for (unsigned len = 5; len <= 255; ++len) {
        const std::size_t user = len - 5;
        std::size_t manual = 10;
        std::size_t left = user;
        while (left > 0) {
            const std::size_t take = left > 16 ? 16 : left;
            manual += take + 2;
            left -= take;
        }
        CHECK(frame_wire_size(static_cast<std::uint8_t>(len)) == manual);
    }
}

TEST_CASE("structural errors are distinct exceptions") {
    auto good = golden_read_request();

    auto bad_start = good;
    bad_start[0] = 0x06;
    CHECK_THROWS_AS(parse_frame(bad_start), BadStartBytes);

    auto bad_len = good;
    bad_len[2] = 4; // below link minimum
    CHECK_THROWS_AS(parse_frame(bad_len), LengthOutOfRange);

    auto short_buf = good;
    short_buf.resize(12);
    CHECK_THROWS_AS(parse_frame(short_buf), Truncated);

    std::vector<std::uint8_t> huge(251, 0x00);
    CHECK_THROWS_AS(encode_frame(make_request(10, 1, FC_WRITE, huge)), PayloadTooLarge);
}

TEST_CASE("crc corruption is flagged, not thrown") {
    auto bytes = golden_read_request();
    bytes[13] ^= 0x01; // body crc low byte
    Dnp3Frame g = parse_frame(bytes);
    CHECK_FALSE(g.all_crc_valid());
    CHECK(g.crc_valid[0]);        // header block still fine
    CHECK_FALSE(g.crc_valid[1]);
}

TEST_CASE("function table names the request verbs") {
    CHECK(describe_function(0x00) == "Confirm");
    CHECK(describe_function(0x01) == "Read");
    CHECK(describe_function(0x02) == "Write");
    CHECK(describe_function(0x03) == "Select");
    CHECK(describe_function(0x04) == "Operate");
    CHECK(describe_function(0x05) == "Dir operate");
    CHECK(describe_function(0x0D) == "Cold restart");
    CHECK(describe_function(0x12) == "Stop application");
    CHECK(describe_function(0x15) == "Disable unsolicited");
    CHECK(describe_function(0x18) == "Record current time");
    CHECK(describe_function(0x1E) == "Abort file");
    CHECK(describe_function(0x1F) == "Unknown(0x1F)");
    CHECK(describe_function(0x81) == "Unknown(0x81)");
    CHECK(known_function(0x1E));
    CHECK_FALSE(known_function(0x1F));
}

TEST_CASE("critical and broadcast sets") {
    for (std::uint8_t fc : {0x03, 0x04, 0x05, 0x06, 0x0D, 0x0E, 0x12, 0x15})
        CHECK(is_critical(fc));
    CHECK_FALSE(is_critical(FC_READ));
    CHECK_FALSE(is_critical(FC_WRITE));

    CHECK(is_broadcast(0xFFFF));
    CHECK(is_broadcast(0xFFFE));
    CHECK(is_broadcast(0xFFFD));
    CHECK_FALSE(is_broadcast(0xFFFC));
    CHECK_FALSE(is_broadcast(10));

    CriticalSet custom = {FC_READ};
    CHECK(is_critical(FC_READ, custom));
    CHECK_FALSE(is_critical(FC_OPERATE, custom));
}

TEST_CASE("random frames survive an encode/parse round trip") {
    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> payload(rng() % 200);
        for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
        const auto fc = static_cast<std::uint8_t>(rng() % 0x1F);
        const auto dst = static_cast<std::uint16_t>(rng());
        const auto src = static_cast<std::uint16_t>(rng());
        Dnp3Frame f = make_request(dst, src, fc, payload,
                                   static_cast<std::uint8_t>(rng() % 64),
                                   static_cast<std::uint8_t>(rng() % 16));
        Dnp3Frame g = parse_frame(encode_frame(f));
        CAPTURE(trial);
        REQUIRE(g.link.destination == dst);
        REQUIRE(g.link.source == src);
        REQUIRE(g.app.function_code == fc);
        REQUIRE(g.payload == payload);
        REQUIRE(g.all_crc_valid());
    }
}
