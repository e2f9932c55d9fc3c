#include "dnp3ids/packet.hpp"

#include "dnp3ids/util.hpp"

#include <cstring>

namespace dnp3ids::net {

using namespace util;

namespace {

constexpr std::size_t kEthSize = 14;
constexpr std::uint16_t kEthIpv4 = 0x0800;
constexpr std::uint16_t kEthArp = 0x0806;

// MACs are derived from the IPv4 address so captures stay deterministic.
void mac_for_ip(std::uint32_t ip, std::uint8_t out[6]) {
    out[0] = 0x02;  // locally administered
    out[1] = 0x1D;
    out[2] = static_cast<std::uint8_t>(ip >> 24);
    out[3] = static_cast<std::uint8_t>(ip >> 16);
    out[4] = static_cast<std::uint8_t>(ip >> 8);
    out[5] = static_cast<std::uint8_t>(ip);
}

void append_eth_header(std::vector<std::uint8_t>& out, std::uint32_t src_ip, std::uint32_t dst_ip,
                       std::uint16_t ethertype) {
    std::uint8_t mac[6];
    mac_for_ip(dst_ip, mac);
    out.insert(out.end(), mac, mac + 6);
    mac_for_ip(src_ip, mac);
    out.insert(out.end(), mac, mac + 6);
    wr16be(out, ethertype);
}

void append_ipv4_header(std::vector<std::uint8_t>& out, std::uint32_t src_ip, std::uint32_t dst_ip,
                        std::uint8_t proto, std::uint16_t payload_len, std::uint16_t ip_id) {
    const std::size_t start = out.size();
    out.push_back(0x45);  // v4, ihl 5
    out.push_back(0x00);
    wr16be(out, static_cast<std::uint16_t>(20 + payload_len));
    wr16be(out, ip_id);
    wr16be(out, 0x4000);  // DF
    out.push_back(64);    // ttl
    out.push_back(proto);
    wr16be(out, 0);       // checksum placeholder
    wr32be(out, src_ip);
    wr32be(out, dst_ip);
    const std::uint16_t sum = inet_checksum({out.data() + start, 20});
    out[start + 10] = static_cast<std::uint8_t>(sum >> 8);
    out[start + 11] = static_cast<std::uint8_t>(sum & 0xFF);
}

std::uint16_t tcp_checksum(std::uint32_t src_ip, std::uint32_t dst_ip,
                           std::span<const std::uint8_t> segment) {
    std::vector<std::uint8_t> pseudo;
    pseudo.reserve(12 + segment.size());
    wr32be(pseudo, src_ip);
    wr32be(pseudo, dst_ip);
    pseudo.push_back(0);
    pseudo.push_back(6);
    wr16be(pseudo, static_cast<std::uint16_t>(segment.size()));
    pseudo.insert(pseudo.end(), segment.begin(), segment.end());
    return inet_checksum(pseudo);
}

} // namespace

std::uint16_t inet_checksum(std::span<const std::uint8_t> data) {
    std::uint32_t sum = 0;
    std::size_t i = 0;
    for (; i + 1 < data.size(); i += 2) sum += (data[i] << 8) | data[i + 1];
    if (i < data.size()) sum += data[i] << 8;
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

const char* skip_reason_name(SkipReason r) {
    switch (r) {
        case SkipReason::none: return "none";
        case SkipReason::truncated_link: return "truncated_link";
        case SkipReason::not_ipv4: return "not_ipv4";
        case SkipReason::bad_ip_header: return "bad_ip_header";
        case SkipReason::bad_transport_header: return "bad_transport_header";
    }
    return "?";
}

DecodeOutcome decode_packet(const pcap::CaptureRecord& record) {
    const auto& d = record.data;
    if (d.size() < kEthSize) return {std::nullopt, SkipReason::truncated_link};
    if (rd16be(&d[12]) != kEthIpv4) return {std::nullopt, SkipReason::not_ipv4};
    if (d.size() < kEthSize + 20) return {std::nullopt, SkipReason::bad_ip_header};

    const std::uint8_t* ip = &d[kEthSize];
    if ((ip[0] >> 4) != 4) return {std::nullopt, SkipReason::bad_ip_header};
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
    if (ihl < 20 || d.size() < kEthSize + ihl) return {std::nullopt, SkipReason::bad_ip_header};
    const std::size_t total_len = rd16be(&ip[2]);
    if (total_len < ihl || d.size() < kEthSize + total_len)
        return {std::nullopt, SkipReason::bad_ip_header};

    ParsedPacket pkt;
    pkt.ts_us = record.ts_us;
    pkt.ip_proto_raw = ip[9];
    pkt.src_ip = rd32be(&ip[12]);
    pkt.dst_ip = rd32be(&ip[16]);

    const std::uint8_t* tp = ip + ihl;
    const std::size_t tp_len = total_len - ihl;

    switch (pkt.ip_proto_raw) {
        case 6: {
            pkt.proto = IpProto::tcp;
            if (tp_len < 20) return {std::nullopt, SkipReason::bad_transport_header};
            const std::size_t doff = static_cast<std::size_t>(tp[12] >> 4) * 4;
            if (doff < 20 || doff > tp_len) return {std::nullopt, SkipReason::bad_transport_header};
            pkt.src_port = rd16be(&tp[0]);
            pkt.dst_port = rd16be(&tp[2]);
            pkt.tcp_seq = rd32be(&tp[4]);
            pkt.tcp_ack = rd32be(&tp[8]);
            pkt.tcp_flags = tp[13];
            pkt.payload.assign(tp + doff, tp + tp_len);
            break;
        }
        case 17: {
            pkt.proto = IpProto::udp;
            if (tp_len < 8) return {std::nullopt, SkipReason::bad_transport_header};
            pkt.src_port = rd16be(&tp[0]);
            pkt.dst_port = rd16be(&tp[2]);
            pkt.payload.assign(tp + 8, tp + tp_len);
            break;
        }
        case 1: {
            pkt.proto = IpProto::icmp;
            if (tp_len < 8) return {std::nullopt, SkipReason::bad_transport_header};
            pkt.payload.assign(tp + 8, tp + tp_len);
            break;
        }
        default:
            pkt.proto = IpProto::other;
            pkt.payload.assign(tp, tp + tp_len);
            break;
    }

    // Sequentially parse DNP3 frames out of a TCP payload.
    if (pkt.is_tcp() && pkt.payload.size() >= 2 && pkt.payload[0] == dnp3::kStart0 &&
        pkt.payload[1] == dnp3::kStart1) {
        std::size_t off = 0;
        while (off + dnp3::kLinkHeaderSize <= pkt.payload.size() &&
               pkt.payload[off] == dnp3::kStart0 && pkt.payload[off + 1] == dnp3::kStart1) {
            try {
                std::span<const std::uint8_t> rest(pkt.payload.data() + off,
                                                   pkt.payload.size() - off);
                auto frame = dnp3::parse_frame(rest);
                off += dnp3::frame_wire_size(frame.link.length);
                pkt.dnp3.push_back(std::move(frame));
            } catch (const dnp3::Dnp3Error&) {
                pkt.dnp3_trailing_garbage = true;
                break;
            }
        }
        if (off < pkt.payload.size() && !pkt.dnp3_trailing_garbage)
            pkt.dnp3_trailing_garbage = true;
    }
    return {std::move(pkt), SkipReason::none};
}

std::vector<std::uint8_t> build_tcp_packet(const TcpSegmentSpec& spec) {
    std::vector<std::uint8_t> seg;
    seg.reserve(20 + spec.payload.size());
    wr16be(seg, spec.src_port);
    wr16be(seg, spec.dst_port);
    wr32be(seg, spec.seq);
    wr32be(seg, spec.ack);
    seg.push_back(0x50);  // doff 5
    seg.push_back(spec.flags);
    wr16be(seg, 65535);   // window
    wr16be(seg, 0);       // checksum placeholder
    wr16be(seg, 0);       // urgent
    seg.insert(seg.end(), spec.payload.begin(), spec.payload.end());
    const std::uint16_t sum = tcp_checksum(spec.src_ip, spec.dst_ip, seg);
    seg[16] = static_cast<std::uint8_t>(sum >> 8);
    seg[17] = static_cast<std::uint8_t>(sum & 0xFF);

    std::vector<std::uint8_t> out;
    out.reserve(kEthSize + 20 + seg.size());
    append_eth_header(out, spec.src_ip, spec.dst_ip, kEthIpv4);
    append_ipv4_header(out, spec.src_ip, spec.dst_ip, 6, static_cast<std::uint16_t>(seg.size()),
                       spec.ip_id);
    out.insert(out.end(), seg.begin(), seg.end());
    return out;
}

std::vector<std::uint8_t> build_udp_packet(std::uint32_t src_ip, std::uint32_t dst_ip,
                                           std::uint16_t src_port, std::uint16_t dst_port,
                                           std::span<const std::uint8_t> payload,
                                           std::uint16_t ip_id) {
    std::vector<std::uint8_t> udp;
    udp.reserve(8 + payload.size());
    wr16be(udp, src_port);
    wr16be(udp, dst_port);
    wr16be(udp, static_cast<std::uint16_t>(8 + payload.size()));
    wr16be(udp, 0); // checksum optional in v4
    udp.insert(udp.end(), payload.begin(), payload.end());

    std::vector<std::uint8_t> out;
    append_eth_header(out, src_ip, dst_ip, kEthIpv4);
    append_ipv4_header(out, src_ip, dst_ip, 17, static_cast<std::uint16_t>(udp.size()), ip_id);
    out.insert(out.end(), udp.begin(), udp.end());
    return out;
}

std::vector<std::uint8_t> build_icmp_echo(std::uint32_t src_ip, std::uint32_t dst_ip,
                                          std::uint16_t id, std::uint16_t seq,
                                          std::span<const std::uint8_t> payload,
                                          std::uint16_t ip_id) {
    std::vector<std::uint8_t> icmp;
    icmp.reserve(8 + payload.size());
    icmp.push_back(8);  // echo request
    icmp.push_back(0);
    wr16be(icmp, 0);    // checksum placeholder
    wr16be(icmp, id);
    wr16be(icmp, seq);
    icmp.insert(icmp.end(), payload.begin(), payload.end());
    const std::uint16_t sum = inet_checksum(icmp);
    icmp[2] = static_cast<std::uint8_t>(sum >> 8);
    icmp[3] = static_cast<std::uint8_t>(sum & 0xFF);

    std::vector<std::uint8_t> out;
    append_eth_header(out, src_ip, dst_ip, kEthIpv4);
    append_ipv4_header(out, src_ip, dst_ip, 1, static_cast<std::uint16_t>(icmp.size()), ip_id);
    out.insert(out.end(), icmp.begin(), icmp.end());
    return out;
}

std::vector<std::uint8_t> build_arp_probe(std::uint32_t sender_ip, std::uint32_t target_ip) {
    std::vector<std::uint8_t> out;
    append_eth_header(out, sender_ip, 0xFFFFFFFF, kEthArp);
    wr16be(out, 1);       // ethernet
    wr16be(out, kEthIpv4);
    out.push_back(6);
    out.push_back(4);
    wr16be(out, 1);       // request
    std::uint8_t mac[6];
    mac_for_ip(sender_ip, mac);
    out.insert(out.end(), mac, mac + 6);
    wr32be(out, sender_ip);
    out.insert(out.end(), 6, 0x00);
    wr32be(out, target_ip);
    return out;
}

std::optional<std::size_t> tcp_payload_offset(std::span<const std::uint8_t> record) {
    if (record.size() < kEthSize + 20 + 20) return std::nullopt;
    if (rd16be(&record[12]) != kEthIpv4) return std::nullopt;
    const std::uint8_t* ip = &record[kEthSize];
    if ((ip[0] >> 4) != 4 || ip[9] != 6) return std::nullopt;
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
    const std::uint8_t* tp = ip + ihl;
    const std::size_t doff = static_cast<std::size_t>(tp[12] >> 4) * 4;
    const std::size_t off = kEthSize + ihl + doff;
    if (off > record.size()) return std::nullopt;
    return off;
}

void refresh_tcp_checksum(std::vector<std::uint8_t>& record) {
    const std::uint8_t* ip = &record[kEthSize];
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
    const std::size_t total_len = rd16be(&ip[2]);
    const std::size_t seg_len = total_len - ihl;
    std::uint8_t* tp = &record[kEthSize + ihl];
    tp[16] = 0;
    tp[17] = 0;
    const std::uint16_t sum =
        tcp_checksum(rd32be(&ip[12]), rd32be(&ip[16]), {tp, seg_len});
    tp[16] = static_cast<std::uint8_t>(sum >> 8);
    tp[17] = static_cast<std::uint8_t>(sum & 0xFF);
}

} // namespace dnp3ids::net
