#pragma once

#include "dnp3ids/dnp3.hpp"
#include "dnp3ids/pcap.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dnp3ids::net {

enum class IpProto : std::uint8_t { other = 0, icmp = 1, tcp = 6, udp = 17 };

constexpr std::uint8_t TCP_FIN = 0x01;
constexpr std::uint8_t TCP_SYN = 0x02;
constexpr std::uint8_t TCP_RST = 0x04;
constexpr std::uint8_t TCP_PSH = 0x08;
constexpr std::uint8_t TCP_ACK = 0x10;

struct ParsedPacket {
    std::uint64_t ts_us = 0;
    std::uint32_t src_ip = 0;   // host order
    std::uint32_t dst_ip = 0;
    IpProto proto = IpProto::other;
    std::uint8_t ip_proto_raw = 0;
    std::uint16_t src_port = 0;  // tcp/udp only
    std::uint16_t dst_port = 0;
    std::uint8_t tcp_flags = 0;
    std::uint32_t tcp_seq = 0;
    std::uint32_t tcp_ack = 0;
    std::vector<std::uint8_t> payload;             // transport payload
    std::vector<dnp3::Dnp3Frame> dnp3;             // parsed frames, tcp payloads starting 05 64
    bool dnp3_trailing_garbage = false;            // split frame or junk after last frame

    bool is_tcp() const { return proto == IpProto::tcp; }
    bool has_dnp3() const { return !dnp3.empty(); }
    bool syn() const { return tcp_flags & TCP_SYN; }
    bool ack() const { return tcp_flags & TCP_ACK; }
    bool fin() const { return tcp_flags & TCP_FIN; }
    bool rst() const { return tcp_flags & TCP_RST; }
};

enum class SkipReason {
    none,
    truncated_link,
    not_ipv4,
    bad_ip_header,
    bad_transport_header,
};

const char* skip_reason_name(SkipReason r);

struct DecodeOutcome {
    std::optional<ParsedPacket> packet;
    SkipReason skip = SkipReason::none;
};

// Ethernet -> IPv4 -> TCP/UDP/ICMP. Non-IPv4 and malformed records come back
// as a skip reason, never as an error. DNP3 sub-parse is attempted on TCP
// payloads starting 0x05 0x64; frames split across segments are not
// reassembled (dnp3_trailing_garbage is set instead).
DecodeOutcome decode_packet(const pcap::CaptureRecord& record);

// ---- raw packet construction (synthesizer + tests) ----

struct TcpSegmentSpec {
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t seq = 0;
    std::uint32_t ack = 0;
    std::uint8_t flags = TCP_ACK;
    std::uint16_t ip_id = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> build_tcp_packet(const TcpSegmentSpec& spec);
std::vector<std::uint8_t> build_udp_packet(std::uint32_t src_ip, std::uint32_t dst_ip,
                                           std::uint16_t src_port, std::uint16_t dst_port,
                                           std::span<const std::uint8_t> payload,
                                           std::uint16_t ip_id = 0);
std::vector<std::uint8_t> build_icmp_echo(std::uint32_t src_ip, std::uint32_t dst_ip,
                                          std::uint16_t id, std::uint16_t seq,
                                          std::span<const std::uint8_t> payload,
                                          std::uint16_t ip_id = 0);
std::vector<std::uint8_t> build_arp_probe(std::uint32_t sender_ip, std::uint32_t target_ip);

// Offset of the TCP payload within an Ethernet record, if the record is a
// well-formed TCP packet. Used to patch DNP3 octets in place.
std::optional<std::size_t> tcp_payload_offset(std::span<const std::uint8_t> record);

// Recomputes the TCP checksum of an Ethernet/IPv4/TCP record in place.
void refresh_tcp_checksum(std::vector<std::uint8_t>& record);

std::uint16_t inet_checksum(std::span<const std::uint8_t> data);

} // namespace dnp3ids::net
