#include "dnp3ids/flow.hpp"

namespace dnp3ids::flow {

namespace {

// 0 for the numerically lower endpoint, 1 for the higher
int sender_side(const FlowKey& key, const net::ParsedPacket& pkt) {
    return (pkt.src_ip == key.ip_a && pkt.src_port == key.port_a) ? 0 : 1;
}

} // namespace

FlowKey FlowKey::from(const net::ParsedPacket& pkt) {
    FlowKey k;
    const bool src_low = pkt.src_ip < pkt.dst_ip ||
                         (pkt.src_ip == pkt.dst_ip && pkt.src_port <= pkt.dst_port);
    if (src_low) {
        k.ip_a = pkt.src_ip;
        k.port_a = pkt.src_port;
        k.ip_b = pkt.dst_ip;
        k.port_b = pkt.dst_port;
    } else {
        k.ip_a = pkt.dst_ip;
        k.port_a = pkt.dst_port;
        k.ip_b = pkt.src_ip;
        k.port_b = pkt.src_port;
    }
    return k;
}

FlowVerdict FlowTable::update(const net::ParsedPacket& pkt) {
    FlowVerdict verdict;
    if (!pkt.is_tcp()) return verdict;

    if (++updates_since_sweep_ >= 1024) {
        updates_since_sweep_ = 0;
        evict_idle(pkt.ts_us);
    }

    const FlowKey key = FlowKey::from(pkt);
    auto it = flows_.find(key);
    if (it != flows_.end() &&
        pkt.ts_us > it->second.last_activity_us &&
        pkt.ts_us - it->second.last_activity_us > config_.idle_timeout_us) {
        flows_.erase(it);
        it = flows_.end();
    }
    if (it == flows_.end()) {
        verdict.new_flow = true;
        FlowState st;
        st.initiator_ip = pkt.src_ip;
        st.initiator_port = pkt.src_port;
        it = flows_.emplace(key, st).first;
    }
    FlowState& st = it->second;
    st.last_activity_us = pkt.ts_us;

    const int side = sender_side(key, pkt);
    const bool from_initiator =
        pkt.src_ip == st.initiator_ip && pkt.src_port == st.initiator_port;
    verdict.to_server = from_initiator;

    // handshake progression
    if (pkt.syn() && !pkt.ack()) {
        // fresh SYN (re)arms the handshake, including reuse of a closed tuple
        if (st.phase == Phase::none || st.phase == Phase::closed) {
            st.phase = Phase::syn_seen;
            st.initiator_ip = pkt.src_ip;
            st.initiator_port = pkt.src_port;
            verdict.to_server = true;
            st.expected_valid[0] = st.expected_valid[1] = false;
            st.expected_seq[side] = pkt.tcp_seq + 1;
            st.expected_valid[side] = true;
        }
    } else if (pkt.syn() && pkt.ack()) {
        if (st.phase == Phase::syn_seen && !from_initiator) {
            st.phase = Phase::synack_seen;
            st.expected_seq[side] = pkt.tcp_seq + 1;
            st.expected_valid[side] = true;
        }
    } else if (st.phase == Phase::synack_seen && from_initiator && pkt.ack()) {
        st.phase = Phase::established;
    }

    verdict.established = st.phase == Phase::established;

    if (verdict.established && st.expected_valid[side]) {
        const std::uint32_t diff = pkt.tcp_seq - st.expected_seq[side];
        if (diff > config_.seq_window) {
            verdict.seq_anomaly = true;
        } else {
            std::uint32_t next = pkt.tcp_seq + static_cast<std::uint32_t>(pkt.payload.size());
            if (pkt.fin()) ++next;
            st.expected_seq[side] = next;
        }
    }

    if (pkt.fin() || pkt.rst()) st.phase = Phase::closed;

    return verdict;
}

void FlowTable::evict_idle(std::uint64_t now_us) {
    for (auto it = flows_.begin(); it != flows_.end();) {
        const FlowState& st = it->second;
        if (now_us > st.last_activity_us &&
            now_us - st.last_activity_us > config_.idle_timeout_us) {
            it = flows_.erase(it);
        } else {
            ++it;
        }
    }
}

} // namespace dnp3ids::flow
