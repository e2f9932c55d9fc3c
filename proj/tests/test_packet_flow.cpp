#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dnp3ids/flow.hpp"
#include "dnp3ids/packet.hpp"
#include "dnp3ids/util.hpp"

using namespace dnp3ids;
using namespace dnp3ids::net;

namespace {

std::uint32_t ip(const char* s) { return *util::parse_ipv4(s); }

pcap::CaptureRecord rec(std::vector<std::uint8_t> bytes, std::uint64_t ts = 1000) {
    return {ts, std::move(bytes)};
}

ParsedPacket tcp_pkt(std::uint64_t ts, const char* src, std::uint16_t sport, const char* dst,
                     std::uint16_t dport, std::uint8_t flags, std::uint32_t seq,
                     std::size_t payload_len = 0, std::uint32_t ack = 0) {
    ParsedPacket p;
    p.ts_us = ts;
    p.src_ip = ip(src);
    p.dst_ip = ip(dst);
    p.proto = IpProto::tcp;
    p.src_port = sport;
    p.dst_port = dport;
    p.tcp_flags = flags;
    p.tcp_seq = seq;
    p.tcp_ack = ack;
    p.payload.assign(payload_len, 0xAA);
    return p;
}

} // namespace

TEST_CASE("tcp decode recovers addressing, flags, and embedded dnp3") {
    auto frame = dnp3::encode_frame(dnp3::make_request(10, 1, dnp3::FC_READ));
    TcpSegmentSpec spec;
    spec.src_ip = ip("10.0.0.1");
    spec.dst_ip = ip("10.0.0.2");
    spec.src_port = 49152;
    spec.dst_port = 20000;
    spec.seq = 0x1000;
    spec.ack = 0x2000;
    spec.flags = TCP_ACK | TCP_PSH;
    spec.payload = frame;

    auto out = decode_packet(rec(build_tcp_packet(spec), 777));
    REQUIRE(out.packet.has_value());
    const auto& p = *out.packet;
    CHECK(out.skip == SkipReason::none);
    CHECK(p.ts_us == 777);
    CHECK(p.src_ip == spec.src_ip);
    CHECK(p.dst_ip == spec.dst_ip);
    CHECK(p.src_port == 49152);
    CHECK(p.dst_port == 20000);
    CHECK(p.tcp_seq == 0x1000);
    CHECK(p.tcp_ack == 0x2000);
    CHECK(p.ack());
    CHECK_FALSE(p.syn());
    CHECK(p.payload == frame);
    REQUIRE(p.dnp3.size() == 1);
    CHECK(p.dnp3[0].app.function_code == dnp3::FC_READ);
    CHECK(p.dnp3[0].link.destination == 10);
    CHECK_FALSE(p.dnp3_trailing_garbage);
}

TEST_CASE("two frames in one segment both parse; split tail flags garbage") {
    auto f1 = dnp3::encode_frame(dnp3::make_request(10, 1, dnp3::FC_READ, {}, 1, 1));
    auto f2 = dnp3::encode_frame(dnp3::make_request(10, 1, dnp3::FC_WRITE, {}, 2, 2));
    TcpSegmentSpec spec;
    spec.src_ip = ip("10.0.0.1");
    spec.dst_ip = ip("10.0.0.2");
    spec.src_port = 49152;
    spec.dst_port = 20000;
    spec.payload = f1;
    spec.payload.insert(spec.payload.end(), f2.begin(), f2.end());

    auto both = decode_packet(rec(build_tcp_packet(spec)));
    REQUIRE(both.packet.has_value());
    CHECK(both.packet->dnp3.size() == 2);
    CHECK(both.packet->dnp3[1].app.function_code == dnp3::FC_WRITE);
    CHECK_FALSE(both.packet->dnp3_trailing_garbage);

    spec.payload.resize(spec.payload.size() - 4);  // cut the second frame short
    auto cut = decode_packet(rec(build_tcp_packet(spec)));
    REQUIRE(cut.packet.has_value());
    CHECK(cut.packet->dnp3.size() == 1);
    CHECK(cut.packet->dnp3_trailing_garbage);
}

TEST_CASE("udp and icmp decode carry their payloads") {
    std::vector<std::uint8_t> body = {1, 2, 3, 4, 5};
    auto udp = decode_packet(rec(build_udp_packet(ip("10.0.0.1"), ip("10.0.0.2"), 53, 5353, body)));
    REQUIRE(udp.packet.has_value());
    CHECK(udp.packet->proto == IpProto::udp);
    CHECK(udp.packet->src_port == 53);
    CHECK(udp.packet->dst_port == 5353);
    CHECK(udp.packet->payload == body);

    auto icmp = decode_packet(rec(build_icmp_echo(ip("10.0.0.1"), ip("10.0.0.2"), 7, 1, body)));
    REQUIRE(icmp.packet.has_value());
    CHECK(icmp.packet->proto == IpProto::icmp);
    CHECK(icmp.packet->src_port == 0);
    CHECK(icmp.packet->payload == body);
}

TEST_CASE("non-ipv4 and malformed records come back as skips") {
    auto arp = decode_packet(rec(build_arp_probe(ip("10.0.0.1"), ip("10.0.0.9"))));
    CHECK_FALSE(arp.packet.has_value());
    CHECK(arp.skip == SkipReason::not_ipv4);

    auto runt = decode_packet(rec({0x01, 0x02, 0x03}));
    CHECK_FALSE(runt.packet.has_value());
    CHECK(runt.skip == SkipReason::truncated_link);

    // valid ethernet header claiming ipv4, then a truncated ip header
    std::vector<std::uint8_t> partial(14 + 6, 0);
    partial[12] = 0x08;
    partial[13] = 0x00;
    partial[14] = 0x45;
    auto bad = decode_packet(rec(partial));
    CHECK_FALSE(bad.packet.has_value());
    CHECK(bad.skip == SkipReason::bad_ip_header);
}

TEST_CASE("tcp_payload_offset finds the payload; checksum refresh is exact") {
    TcpSegmentSpec spec;
    spec.src_ip = ip("192.168.1.5");
    spec.dst_ip = ip("192.168.1.6");
    spec.src_port = 1234;
    spec.dst_port = 20000;
    spec.payload = {0x10, 0x20, 0x30, 0x40};
    auto bytes = build_tcp_packet(spec);

    auto off = tcp_payload_offset(bytes);
    REQUIRE(off.has_value());
    CHECK(*off == bytes.size() - spec.payload.size());
    CHECK(bytes[*off] == 0x10);

    // mutate one payload octet, refresh, and compare against a fresh build
    bytes[*off + 2] = 0x99;
    refresh_tcp_checksum(bytes);
    auto expect_spec = spec;
    expect_spec.payload[2] = 0x99;
    CHECK(bytes == build_tcp_packet(expect_spec));

    CHECK_FALSE(tcp_payload_offset(build_arp_probe(ip("10.0.0.1"), ip("10.0.0.2"))).has_value());
}

TEST_CASE("handshake walks to established and tracks direction") {
    flow::FlowTable table;

    auto syn = table.update(tcp_pkt(1, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_SYN, 100));
    CHECK(syn.new_flow);
    CHECK(syn.to_server);
    CHECK_FALSE(syn.established);

    auto synack = table.update(
        tcp_pkt(2, "10.0.0.2", 20000, "10.0.0.1", 5000, TCP_SYN | TCP_ACK, 900, 0, 101));
    CHECK_FALSE(synack.new_flow);
    CHECK_FALSE(synack.to_server);
    CHECK_FALSE(synack.established);

    auto ackp = table.update(tcp_pkt(3, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK, 101, 0, 901));
    CHECK(ackp.established);
    CHECK(ackp.to_server);

    auto data = table.update(
        tcp_pkt(4, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK | TCP_PSH, 101, 10, 901));
    CHECK(data.established);
    CHECK_FALSE(data.seq_anomaly);

    auto reply = table.update(
        tcp_pkt(5, "10.0.0.2", 20000, "10.0.0.1", 5000, TCP_ACK | TCP_PSH, 901, 4, 111));
    CHECK(reply.established);
    CHECK_FALSE(reply.to_server);
    CHECK_FALSE(reply.seq_anomaly);
    CHECK(table.size() == 1);
}

TEST_CASE("midstream traffic never reports established") {
    flow::FlowTable table;
    auto v1 = table.update(
        tcp_pkt(1, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK | TCP_PSH, 5555, 12));
    CHECK(v1.new_flow);
    CHECK_FALSE(v1.established);
    auto v2 = table.update(
        tcp_pkt(2, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK | TCP_PSH, 5567, 12));
    CHECK_FALSE(v2.new_flow);
    CHECK_FALSE(v2.established);
}

TEST_CASE("sequence jump beyond the window is flagged once and holds position") {
    flow::FlowTable table;
    table.update(tcp_pkt(1, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_SYN, 100));
    table.update(tcp_pkt(2, "10.0.0.2", 20000, "10.0.0.1", 5000, TCP_SYN | TCP_ACK, 900, 0, 101));
    table.update(tcp_pkt(3, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK, 101, 0, 901));

    // in-window advance is clean
    auto ok = table.update(
        tcp_pkt(4, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK | TCP_PSH, 101, 16, 901));
    CHECK_FALSE(ok.seq_anomaly);

    // expected is now 117; jump far past the 65535-octet window
    auto bad = table.update(
        tcp_pkt(5, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK | TCP_PSH, 117 + 70000, 16, 901));
    CHECK(bad.seq_anomaly);

    // the anomalous segment must not advance the expectation
    auto resumed = table.update(
        tcp_pkt(6, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK | TCP_PSH, 117, 16, 901));
    CHECK_FALSE(resumed.seq_anomaly);
}

TEST_CASE("fin or rst closes; a fresh syn re-arms the same tuple") {
    flow::FlowTable table;
    table.update(tcp_pkt(1, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_SYN, 100));
    table.update(tcp_pkt(2, "10.0.0.2", 20000, "10.0.0.1", 5000, TCP_SYN | TCP_ACK, 900, 0, 101));
    table.update(tcp_pkt(3, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK, 101, 0, 901));

    auto fin = table.update(
        tcp_pkt(4, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_FIN | TCP_ACK, 101, 0, 901));
    CHECK(fin.established);  // verdict is as-of this packet

    auto after = table.update(
        tcp_pkt(5, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK | TCP_PSH, 102, 4, 901));
    CHECK_FALSE(after.established);

    // same 4-tuple, new handshake
    table.update(tcp_pkt(6, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_SYN, 7000));
    table.update(tcp_pkt(7, "10.0.0.2", 20000, "10.0.0.1", 5000, TCP_SYN | TCP_ACK, 8000, 0, 7001));
    auto again =
        table.update(tcp_pkt(8, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK, 7001, 0, 8001));
    CHECK(again.established);
    CHECK(table.size() == 1);

    auto rst = table.update(
        tcp_pkt(9, "10.0.0.2", 20000, "10.0.0.1", 5000, TCP_RST, 8001, 0, 0));
    (void)rst;
    auto dead = table.update(
        tcp_pkt(10, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK | TCP_PSH, 7001, 4, 8001));
    CHECK_FALSE(dead.established);
}

TEST_CASE("idle flows are forgotten") {
    flow::FlowConfig cfg;
    cfg.idle_timeout_us = 1'000'000;  // 1 s
    flow::FlowTable table(cfg);

    table.update(tcp_pkt(1'000'000, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_SYN, 100));
    auto soon = table.update(
        tcp_pkt(1'500'000, "10.0.0.2", 20000, "10.0.0.1", 5000, TCP_SYN | TCP_ACK, 900, 0, 101));
    CHECK_FALSE(soon.new_flow);

    auto late = table.update(
        tcp_pkt(9'000'000, "10.0.0.1", 5000, "10.0.0.2", 20000, TCP_ACK, 101, 0, 901));
    CHECK(late.new_flow);
    CHECK_FALSE(late.established);
}

TEST_CASE("non-tcp packets get the null verdict") {
    flow::FlowTable table;
    ParsedPacket p;
    p.proto = IpProto::udp;
    p.src_ip = ip("10.0.0.1");
    p.dst_ip = ip("10.0.0.2");
    auto v = table.update(p);
    CHECK_FALSE(v.new_flow);
    CHECK_FALSE(v.established);
    CHECK(table.size() == 0);
}
