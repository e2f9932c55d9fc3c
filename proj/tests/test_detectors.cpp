#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dnp3ids/detectors.hpp"

using namespace dnp3ids;
using namespace dnp3ids::detect;

namespace {

std::uint32_t ip(const char* s) { return *util::parse_ipv4(s); }

net::ParsedPacket pkt_from(const char* src, std::uint64_t ts = 1'000'000) {
    net::ParsedPacket p;
    p.ts_us = ts;
    p.src_ip = ip(src);
    p.dst_ip = ip("10.0.0.2");
    p.proto = net::IpProto::tcp;
    p.src_port = 45000;
    p.dst_port = 20000;
    return p;
}

dnp3::Dnp3Frame req(std::uint8_t fc, std::vector<std::uint8_t> payload = {},
                    std::uint16_t dst = 10) {
    return dnp3::make_request(dst, 1, fc, payload);
}

DetectorConfig authorized(const char* master) {
    DetectorConfig cfg;
    cfg.authorized_masters = {*util::parse_cidr(master)};
    return cfg;
}

} // namespace

TEST_CASE("crc check fires only on invalid blocks") {
    auto good = dnp3::parse_frame(dnp3::encode_frame(req(dnp3::FC_READ)));
    CHECK_FALSE(check_frame_crc(good).has_value());

    auto bytes = dnp3::encode_frame(req(dnp3::FC_READ));
    bytes[8] ^= 0x40;  // header crc
    auto bad = dnp3::parse_frame(bytes);
    auto ev = check_frame_crc(bad);
    REQUIRE(ev.has_value());
    CHECK(ev->gid == kGid);
    CHECK(ev->sid == kSidBadCrc);
    CHECK(ev->msg == "DNP3-Bad-CRC");
}

TEST_CASE("sequence check passes the flow verdict through") {
    flow::FlowVerdict ok;
    CHECK_FALSE(check_tcp_sequence(ok).has_value());
    flow::FlowVerdict bad;
    bad.seq_anomaly = true;
    auto ev = check_tcp_sequence(bad);
    REQUIRE(ev.has_value());
    CHECK(ev->sid == kSidBadSequence);
    CHECK(ev->msg == "DNP3-Invalid sequence no");
}

TEST_CASE("select then operate with the same points is clean") {
    SboTracker sbo;
    auto cfg = authorized("10.0.0.1");
    std::vector<std::uint8_t> crob = {0x0C, 0x01, 0x17, 0x01, 0x00, 0x41};

    CHECK_FALSE(sbo.on_frame(pkt_from("10.0.0.1", 1'000'000), req(dnp3::FC_SELECT, crob), cfg)
                    .has_value());
    CHECK(sbo.outstanding() == 1);
    CHECK_FALSE(sbo.on_frame(pkt_from("10.0.0.1", 3'000'000), req(dnp3::FC_OPERATE, crob), cfg)
                    .has_value());
    CHECK(sbo.outstanding() == 0);
    CHECK(sbo.selects_recorded == 1);
    CHECK(sbo.operates_matched == 1);
    CHECK(sbo.operates_unmatched == 0);
}

TEST_CASE("operate alone, wrong points, or wrong source alerts") {
    auto cfg = authorized("10.0.0.1");
    std::vector<std::uint8_t> crob = {0x0C, 0x01, 0x17, 0x01, 0x00, 0x41};
    std::vector<std::uint8_t> other = {0x0C, 0x01, 0x17, 0x01, 0x00, 0x81};

    SboTracker bare;
    auto ev = bare.on_frame(pkt_from("10.0.0.1"), req(dnp3::FC_OPERATE, crob), cfg);
    REQUIRE(ev.has_value());
    CHECK(ev->sid == kSidOperateWithoutSelect);
    CHECK(bare.operates_unmatched == 1);

    SboTracker echo;
    echo.on_frame(pkt_from("10.0.0.1", 1'000'000), req(dnp3::FC_SELECT, crob), cfg);
    // operate must echo the selected points: different payload digest misses
    auto wrong = echo.on_frame(pkt_from("10.0.0.1", 2'000'000), req(dnp3::FC_OPERATE, other), cfg);
    REQUIRE(wrong.has_value());
    CHECK(echo.outstanding() == 1);  // the select stays pending

    SboTracker cross;
    cross.on_frame(pkt_from("10.0.0.1", 1'000'000), req(dnp3::FC_SELECT, crob), cfg);
    // the select belongs to 10.0.0.1; an operate from elsewhere cannot claim it
    auto theft = cross.on_frame(pkt_from("10.7.7.7", 2'000'000), req(dnp3::FC_OPERATE, crob), cfg);
    REQUIRE(theft.has_value());
    CHECK(theft->sid == kSidOperateWithoutSelect);
}

TEST_CASE("loose pairing keys on endpoints only") {
    DetectorConfig cfg = authorized("10.0.0.1");
    cfg.sbo_loose_key = true;
    std::vector<std::uint8_t> crob = {0x0C, 0x01, 0x17, 0x01, 0x00, 0x41};
    std::vector<std::uint8_t> other = {0x0C, 0x01, 0x17, 0x01, 0x00, 0x81};

    SboTracker sbo;
    sbo.on_frame(pkt_from("10.0.0.1", 1'000'000), req(dnp3::FC_SELECT, crob), cfg);
    CHECK_FALSE(sbo.on_frame(pkt_from("10.0.0.1", 2'000'000), req(dnp3::FC_OPERATE, other), cfg)
                    .has_value());
}

TEST_CASE("selects expire after the timeout") {
    auto cfg = authorized("10.0.0.1");
    cfg.select_timeout_us = 10'000'000;
    std::vector<std::uint8_t> crob = {0x0C, 0x01};

    SboTracker sbo;
    sbo.on_frame(pkt_from("10.0.0.1", 1'000'000), req(dnp3::FC_SELECT, crob), cfg);
    auto late = sbo.on_frame(pkt_from("10.0.0.1", 12'000'001), req(dnp3::FC_OPERATE, crob), cfg);
    REQUIRE(late.has_value());
    CHECK(late->sid == kSidOperateWithoutSelect);
    CHECK(sbo.selects_expired == 1);
    CHECK(sbo.outstanding() == 0);
}

TEST_CASE("sbo counters conserve: selects = matched + expired + outstanding") {
    auto cfg = authorized("10.0.0.1");
    cfg.select_timeout_us = 5'000'000;
    SboTracker sbo;
    std::uint64_t ts = 1'000'000;
    for (int i = 0; i < 30; ++i) {
        std::vector<std::uint8_t> body = {static_cast<std::uint8_t>(i)};
        sbo.on_frame(pkt_from("10.0.0.1", ts), req(dnp3::FC_SELECT, body), cfg);
        if (i % 3 == 0)  // match a third of them promptly
            sbo.on_frame(pkt_from("10.0.0.1", ts + 1000), req(dnp3::FC_OPERATE, body), cfg);
        ts += 2'000'000;
    }
    // push time far forward so stragglers expire
    sbo.on_frame(pkt_from("10.0.0.1", ts + 100'000'000), req(dnp3::FC_OPERATE, {0x7F}), cfg);
    CHECK(sbo.selects_recorded ==
          sbo.operates_matched + sbo.selects_expired + sbo.outstanding());
}

TEST_CASE("direct operate is screened by source authority") {
    auto cfg = authorized("10.0.0.1");
    SboTracker sbo;
    CHECK_FALSE(sbo.on_frame(pkt_from("10.0.0.1"), req(dnp3::FC_DIRECT_OPERATE), cfg).has_value());
    auto ev = sbo.on_frame(pkt_from("10.7.7.7"), req(dnp3::FC_DIRECT_OPERATE), cfg);
    REQUIRE(ev.has_value());
    CHECK(ev->sid == kSidUnauthorizedDirectOperate);
    auto nr = sbo.on_frame(pkt_from("10.7.7.7"), req(dnp3::FC_DIRECT_OPERATE_NR), cfg);
    REQUIRE(nr.has_value());
    CHECK(nr->sid == kSidUnauthorizedDirectOperate);
}

TEST_CASE("responses are ignored by the sbo tracker") {
    auto cfg = authorized("10.0.0.1");
    SboTracker sbo;
    auto resp = dnp3::make_response(1, 10, dnp3::FC_RESPONSE);
    CHECK_FALSE(sbo.on_frame(pkt_from("10.7.7.7"), resp, cfg).has_value());
    CHECK(sbo.outstanding() == 0);
}

TEST_CASE("broadcast critical requests are flagged regardless of source") {
    auto cfg = authorized("10.0.0.1");
    auto events = screen_critical(pkt_from("10.0.0.1"), req(dnp3::FC_OPERATE, {}, 0xFFFF), cfg);
    REQUIRE(events.size() == 1);
    CHECK(events[0].sid == kSidBroadcastCritical);

    // broadcast read is not critical; unicast operate is not broadcast
    CHECK(screen_critical(pkt_from("10.0.0.1"), req(dnp3::FC_READ, {}, 0xFFFF), cfg).empty());
    CHECK(screen_critical(pkt_from("10.0.0.1"), req(dnp3::FC_OPERATE, {}, 10), cfg).empty());
    CHECK_FALSE(
        screen_critical(pkt_from("10.0.0.1"), req(dnp3::FC_OPERATE, {}, 0xFFFD), cfg).empty());
}

TEST_CASE("station-control verbs from unknown sources alert; authorized are quiet") {
    auto cfg = authorized("10.0.0.0/29");
    const struct {
        std::uint8_t fc;
        std::uint32_t sid;
    } cases[] = {
        {dnp3::FC_DISABLE_UNSOLICITED, kSidDisableUnsolUnknown},
        {dnp3::FC_STOP_APPLICATION, kSidStopApplicationUnknown},
        {dnp3::FC_COLD_RESTART, kSidColdRestartUnknown},
    };
    for (const auto& c : cases) {
        auto bad = screen_critical(pkt_from("10.99.0.1"), req(c.fc), cfg);
        REQUIRE(bad.size() == 1);
        CHECK(bad[0].sid == c.sid);
        CHECK(screen_critical(pkt_from("10.0.0.5"), req(c.fc), cfg).empty());
    }
    // warm restart is critical but has no per-verb screen
    CHECK(screen_critical(pkt_from("10.99.0.1"), req(dnp3::FC_WARM_RESTART), cfg).empty());
}

TEST_CASE("broadcast critical from an unknown source stacks both events") {
    auto cfg = authorized("10.0.0.1");
    auto events = screen_critical(pkt_from("10.99.0.1"), req(dnp3::FC_COLD_RESTART, {}, 0xFFFF), cfg);
    REQUIRE(events.size() == 2);
    CHECK(events[0].sid == kSidBroadcastCritical);
    CHECK(events[1].sid == kSidColdRestartUnknown);
}
