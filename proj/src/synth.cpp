#include "dnp3ids/synth.hpp"

#include "dnp3ids/packet.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dnp3ids::synth {

namespace {

// class 1..3 then class 0 poll request objects
const std::vector<std::uint8_t> kClassPoll = {0x3C, 0x02, 0x06, 0x3C, 0x03, 0x06,
                                              0x3C, 0x04, 0x06, 0x3C, 0x01, 0x06};
// one CROB point, latch-on; opaque to every implemented check
const std::vector<std::uint8_t> kControlObjects = {0x0C, 0x01, 0x17, 0x01, 0x00, 0x41,
                                                   0x01, 0xE8, 0x03, 0x00, 0x00, 0x00,
                                                   0x00, 0x00, 0x00, 0x00, 0x00};
// assign-class objects for an unsolicited-control request
const std::vector<std::uint8_t> kClassAssign = {0x3C, 0x02, 0x06, 0x3C, 0x03, 0x06,
                                                0x3C, 0x04, 0x06};

std::uint32_t isn_for(std::uint32_t ip, std::uint16_t port, std::uint64_t seed) {
    std::uint8_t buf[14];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(ip >> (8 * i));
    buf[4] = static_cast<std::uint8_t>(port);
    buf[5] = static_cast<std::uint8_t>(port >> 8);
    for (int i = 0; i < 8; ++i) buf[6 + i] = static_cast<std::uint8_t>(seed >> (8 * i));
    return static_cast<std::uint32_t>(util::fnv1a64(buf, sizeof buf) & 0x7FFFFFFF);
}

// scripted TCP endpoint pair with correct seq/ack progression
struct TcpSession {
    std::uint32_t c_ip, s_ip;
    std::uint16_t c_port, s_port;
    std::uint32_t c_seq, s_seq;
    std::uint16_t c_id, s_id;
    std::vector<pcap::CaptureRecord>* out;

    TcpSession(std::uint32_t client_ip, std::uint16_t client_port, std::uint32_t server_ip,
               std::uint16_t server_port, std::uint64_t seed,
               std::vector<pcap::CaptureRecord>* sink)
        : c_ip(client_ip),
          s_ip(server_ip),
          c_port(client_port),
          s_port(server_port),
          c_seq(isn_for(client_ip, client_port, seed)),
          s_seq(isn_for(server_ip, server_port, seed ^ 0x5A5A)),
          c_id(static_cast<std::uint16_t>(seed * 7919)),
          s_id(static_cast<std::uint16_t>(seed * 104729)),
          out(sink) {}

    void emit(std::uint64_t ts, bool from_client, std::uint8_t flags,
              std::vector<std::uint8_t> payload) {
        net::TcpSegmentSpec spec;
        spec.src_ip = from_client ? c_ip : s_ip;
        spec.dst_ip = from_client ? s_ip : c_ip;
        spec.src_port = from_client ? c_port : s_port;
        spec.dst_port = from_client ? s_port : c_port;
        spec.seq = from_client ? c_seq : s_seq;
        spec.ack = (flags & net::TCP_ACK) ? (from_client ? s_seq : c_seq) : 0;
        spec.flags = flags;
        spec.ip_id = from_client ? c_id++ : s_id++;
        spec.payload = std::move(payload);

        std::uint32_t advance = static_cast<std::uint32_t>(spec.payload.size());
        if (flags & (net::TCP_SYN | net::TCP_FIN)) ++advance;
        (from_client ? c_seq : s_seq) += advance;

        out->push_back({ts, net::build_tcp_packet(spec)});
    }

    void handshake(std::uint64_t t_syn, std::uint64_t step_us = 10000) {
        emit(t_syn, true, net::TCP_SYN, {});
        emit(t_syn + step_us, false, net::TCP_SYN | net::TCP_ACK, {});
        emit(t_syn + 2 * step_us, true, net::TCP_ACK, {});
    }

    void send(std::uint64_t ts, bool from_client, std::vector<std::uint8_t> payload) {
        emit(ts, from_client, net::TCP_PSH | net::TCP_ACK, std::move(payload));
    }

    void teardown(std::uint64_t t_fin, std::uint64_t step_us = 10000) {
        emit(t_fin, true, net::TCP_FIN | net::TCP_ACK, {});
        emit(t_fin + step_us, false, net::TCP_FIN | net::TCP_ACK, {});
        emit(t_fin + 2 * step_us, true, net::TCP_ACK, {});
    }
};

std::uint64_t poll_period_us(const ScenarioConfig& cfg) {
    return static_cast<std::uint64_t>(std::llround(1e6 / cfg.rate_hz));
}

std::vector<std::uint8_t> master_request(const ScenarioConfig& cfg, std::uint8_t fc,
                                         const std::vector<std::uint8_t>& objects,
                                         std::uint8_t tseq, std::uint8_t aseq,
                                         std::uint16_t dst_override = 0) {
    const std::uint16_t dst = dst_override ? dst_override : cfg.outstation_addr;
    return dnp3::encode_frame(dnp3::make_request(dst, cfg.master_addr, fc, objects, tseq, aseq));
}

std::vector<std::uint8_t> outstation_response(const ScenarioConfig& cfg, std::uint8_t tseq,
                                              std::uint8_t aseq) {
    return dnp3::encode_frame(dnp3::make_response(cfg.master_addr, cfg.outstation_addr,
                                                  dnp3::FC_RESPONSE, 0x0000, {}, tseq, aseq));
}

void merge_by_time(std::vector<pcap::CaptureRecord>& base,
                   std::vector<pcap::CaptureRecord>&& extra) {
    std::vector<pcap::CaptureRecord> merged;
    merged.reserve(base.size() + extra.size());
    std::merge(std::make_move_iterator(base.begin()), std::make_move_iterator(base.end()),
               std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()),
               std::back_inserter(merged),
               [](const pcap::CaptureRecord& a, const pcap::CaptureRecord& b) {
                   return a.ts_us < b.ts_us;
               });
    base = std::move(merged);
}

} // namespace

const char* attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::select_operate_replay: return "select_operate_replay";
        case AttackKind::direct_operate: return "direct_operate";
        case AttackKind::broadcast_request: return "broadcast_request";
        case AttackKind::disable_unsolicited: return "disable_unsolicited";
        case AttackKind::stop_application: return "stop_application";
        case AttackKind::cold_restart: return "cold_restart";
    }
    return "?";
}

const char* flood_kind_name(FloodKind k) {
    switch (k) {
        case FloodKind::dnp3_flood: return "dnp3_flood";
        case FloodKind::syn_flood: return "syn_flood";
        case FloodKind::port_scan: return "port_scan";
    }
    return "?";
}

std::vector<pcap::CaptureRecord> synth_benign(const ScenarioConfig& cfg) {
    std::vector<pcap::CaptureRecord> out;
    TcpSession sess(cfg.master_ip, cfg.master_port, cfg.outstation_ip, cfg.outstation_port,
                    cfg.seed, &out);
    const std::uint64_t period = poll_period_us(cfg);
    const std::uint64_t t0 = cfg.start_us;

    sess.handshake(t0 - 30000);

    std::uint8_t m_tseq = 0, m_aseq = 0, o_tseq = 0;
    auto cycle = [&](std::uint64_t t, std::uint8_t fc, const std::vector<std::uint8_t>& objects) {
        sess.send(t, true, master_request(cfg, fc, objects, m_tseq, m_aseq));
        sess.send(t + 5000, false, outstation_response(cfg, o_tseq, m_aseq));
        m_tseq = (m_tseq + 1) & 0x3F;
        m_aseq = (m_aseq + 1) & 0x0F;
        o_tseq = (o_tseq + 1) & 0x3F;
    };

    for (std::uint32_t i = 0; i < cfg.count; ++i) {
        const std::uint64_t t = t0 + i * period;
        cycle(t, dnp3::FC_READ, kClassPoll);
        if (cfg.control_exchange && i == cfg.count / 2) {
            cycle(t + period / 2, dnp3::FC_SELECT, kControlObjects);
            cycle(t + period / 2 + 20000, dnp3::FC_OPERATE, kControlObjects);
        }
    }
    sess.teardown(t0 + static_cast<std::uint64_t>(cfg.count) * period);
    return out;
}

std::vector<pcap::CaptureRecord> synth_attack(AttackKind kind, const ScenarioConfig& cfg) {
    ScenarioConfig bg = cfg;
    if (kind == AttackKind::select_operate_replay) bg.control_exchange = true;
    std::vector<pcap::CaptureRecord> records = synth_benign(bg);

    const std::uint64_t period = poll_period_us(cfg);
    const std::uint64_t t_atk = cfg.start_us + (cfg.count / 2) * period + period / 4;

    std::vector<pcap::CaptureRecord> atk;
    std::vector<std::pair<std::uint8_t, const std::vector<std::uint8_t>*>> frames;
    std::uint16_t dst_override = 0;
    switch (kind) {
        case AttackKind::select_operate_replay:
            frames = {{dnp3::FC_SELECT, &kControlObjects}, {dnp3::FC_OPERATE, &kControlObjects}};
            break;
        case AttackKind::direct_operate:
            frames = {{dnp3::FC_DIRECT_OPERATE, &kControlObjects}};
            break;
        case AttackKind::broadcast_request:
            frames = {{dnp3::FC_OPERATE, &kControlObjects}};
            dst_override = 0xFFFF;
            break;
        case AttackKind::disable_unsolicited:
            frames = {{dnp3::FC_DISABLE_UNSOLICITED, &kClassAssign}};
            break;
        case AttackKind::stop_application: {
            static const std::vector<std::uint8_t> empty;
            frames = {{dnp3::FC_STOP_APPLICATION, &empty}};
            break;
        }
        case AttackKind::cold_restart: {
            static const std::vector<std::uint8_t> empty;
            frames = {{dnp3::FC_COLD_RESTART, &empty}};
            break;
        }
    }

    if (cfg.spoof_source && kind == AttackKind::select_operate_replay) {
        // mid-stream injection into the victim's own session: wrong TCP
        // sequence numbers, no handshake of its own
        std::uint16_t id = static_cast<std::uint16_t>(cfg.seed * 31337);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            net::TcpSegmentSpec spec;
            spec.src_ip = cfg.master_ip;
            spec.dst_ip = cfg.outstation_ip;
            spec.src_port = cfg.master_port;
            spec.dst_port = cfg.outstation_port;
            spec.seq = 0xDEAD0000u + static_cast<std::uint32_t>(i) * 1000;
            spec.ack = 0;
            spec.flags = net::TCP_PSH | net::TCP_ACK;
            spec.ip_id = id++;
            spec.payload = master_request(cfg, frames[i].first, *frames[i].second,
                                          static_cast<std::uint8_t>(i),
                                          static_cast<std::uint8_t>(i), dst_override);
            atk.push_back({t_atk + i * 10000, net::build_tcp_packet(spec)});
        }
    } else {
        TcpSession sess(cfg.attacker_ip, cfg.attacker_port, cfg.outstation_ip,
                        cfg.outstation_port, cfg.seed ^ 0xA77ACC, &atk);
        sess.handshake(t_atk - 30000);
        std::uint64_t t = t_atk;
        std::uint8_t seq = 0;
        for (const auto& [fc, objects] : frames) {
            sess.send(t, true, master_request(cfg, fc, *objects, seq, seq, dst_override));
            t += 10000;
            seq = (seq + 1) & 0x0F;
        }
        sess.teardown(t + 90000);
    }

    merge_by_time(records, std::move(atk));
    return records;
}

std::vector<pcap::CaptureRecord> synth_flood(FloodKind kind, const ScenarioConfig& cfg) {
    std::vector<pcap::CaptureRecord> out;
    const std::uint64_t t0 = cfg.start_us;

    switch (kind) {
        case FloodKind::dnp3_flood: {
            TcpSession sess(cfg.attacker_ip, cfg.attacker_port, cfg.outstation_ip,
                            cfg.outstation_port, cfg.seed, &out);
            sess.handshake(t0 - 30000);
            const std::uint64_t span = static_cast<std::uint64_t>(cfg.seconds) * 1000000;
            const std::uint64_t spacing = std::max<std::uint64_t>(1, span / std::max(1u, cfg.count));
            std::uint64_t t = t0;
            for (std::uint32_t i = 0; i < cfg.count; ++i, t += spacing) {
                sess.send(t, true, master_request(cfg, dnp3::FC_READ, kClassPoll,
                                                  static_cast<std::uint8_t>(i & 0x3F),
                                                  static_cast<std::uint8_t>(i & 0x0F)));
            }
            sess.teardown(t + 10000);
            break;
        }
        case FloodKind::syn_flood: {
            for (std::uint32_t i = 0; i < cfg.count; ++i) {
                net::TcpSegmentSpec spec;
                spec.src_ip = cfg.attacker_ip;
                spec.dst_ip = cfg.outstation_ip;
                spec.src_port = static_cast<std::uint16_t>(cfg.attacker_port + i);
                spec.dst_port = cfg.outstation_port;
                spec.seq = isn_for(cfg.attacker_ip, spec.src_port, cfg.seed);
                spec.ack = 0;
                spec.flags = net::TCP_SYN;
                spec.ip_id = static_cast<std::uint16_t>(i);
                out.push_back({t0 + i * 1000, net::build_tcp_packet(spec)});
            }
            break;
        }
        case FloodKind::port_scan: {
            for (std::uint32_t i = 0; i < cfg.count; ++i) {
                net::TcpSegmentSpec spec;
                spec.src_ip = cfg.attacker_ip;
                spec.dst_ip = cfg.outstation_ip;
                spec.src_port = cfg.attacker_port;
                spec.dst_port = static_cast<std::uint16_t>(1024 + i);
                spec.seq = isn_for(cfg.attacker_ip, cfg.attacker_port, cfg.seed + i);
                spec.ack = 0;
                spec.flags = net::TCP_SYN;
                spec.ip_id = static_cast<std::uint16_t>(i);
                out.push_back({t0 + i * 1000, net::build_tcp_packet(spec)});
            }
            break;
        }
    }
    return out;
}

std::vector<pcap::CaptureRecord> corrupt_crc(const std::vector<pcap::CaptureRecord>& records,
                                             std::size_t index, CorruptSite site,
                                             unsigned bit) {
    if (index >= records.size())
        throw IndexNotDnp3("record index " + std::to_string(index) + " out of range");
    std::vector<pcap::CaptureRecord> out = records;
    std::vector<std::uint8_t>& data = out[index].data;

    const auto off = net::tcp_payload_offset(data);
    if (!off) throw IndexNotDnp3("record " + std::to_string(index) + " is not TCP");
    const std::size_t payload_len = data.size() - *off;
    if (payload_len < dnp3::kLinkHeaderSize || data[*off] != dnp3::kStart0 ||
        data[*off + 1] != dnp3::kStart1)
        throw IndexNotDnp3("record " + std::to_string(index) + " carries no DNP3 frame");

    std::size_t target;
    if (site == CorruptSite::header) {
        target = *off + 4; // destination address low octet, under the header CRC
    } else {
        const std::uint8_t length = data[*off + 2];
        if (length <= 5 || payload_len < dnp3::kLinkHeaderSize + 1)
            throw IndexNotDnp3("record " + std::to_string(index) + " frame has no body block");
        target = *off + dnp3::kLinkHeaderSize; // first octet under the first body CRC
    }
    data[target] ^= static_cast<std::uint8_t>(1u << (bit & 7));
    net::refresh_tcp_checksum(data);
    return out;
}

std::vector<pcap::CaptureRecord> random_frame_capture(const ScenarioConfig& cfg, std::size_t n) {
    // function codes with no control/critical semantics, so a clean capture
    // stays alert-free under the default detectors
    static const std::uint8_t kFcPool[] = {0x01, 0x02, 0x07, 0x08, 0x09, 0x0A,
                                           0x0B, 0x0C, 0x16, 0x17, 0x18};
    std::mt19937_64 rng(cfg.seed);
    std::vector<pcap::CaptureRecord> out;
    TcpSession sess(cfg.master_ip, cfg.master_port, cfg.outstation_ip, cfg.outstation_port,
                    cfg.seed, &out);
    const std::uint64_t t0 = cfg.start_us;
    sess.handshake(t0 - 30000);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t fc = kFcPool[rng() % std::size(kFcPool)];
        std::vector<std::uint8_t> objects(rng() % 33);
        for (auto& b : objects) b = static_cast<std::uint8_t>(rng());
        const std::uint16_t dst = static_cast<std::uint16_t>(1 + rng() % 0xFE00);
        const std::uint16_t src = static_cast<std::uint16_t>(1 + rng() % 1000);
        auto frame = dnp3::encode_frame(dnp3::make_request(
            dst, src, fc, objects, static_cast<std::uint8_t>(rng() & 0x3F),
            static_cast<std::uint8_t>(rng() & 0x0F)));
        sess.send(t0 + i * 1000, true, std::move(frame));
    }
    sess.teardown(t0 + n * 1000 + 10000);
    return out;
}

} // namespace dnp3ids::synth
