#pragma once

#include "dnp3ids/packet.hpp"

#include <cstdint>
#include <unordered_map>

namespace dnp3ids::flow {

enum class Phase { none, syn_seen, synack_seen, established, closed };

struct FlowVerdict {
    bool established = false;
    bool new_flow = false;
    bool seq_anomaly = false;
    bool to_server = false;   // packet travels initiator -> responder
};

struct FlowKey {
    // endpoint a is the numerically lower (ip, port) pair
    std::uint32_t ip_a = 0, ip_b = 0;
    std::uint16_t port_a = 0, port_b = 0;

    bool operator==(const FlowKey&) const = default;
    static FlowKey from(const net::ParsedPacket& pkt);
};

struct FlowKeyHash {
    std::size_t operator()(const FlowKey& k) const {
        std::uint64_t h = (static_cast<std::uint64_t>(k.ip_a) << 32) | k.ip_b;
        h ^= (static_cast<std::uint64_t>(k.port_a) << 16) | k.port_b;
        h *= 0x9E3779B97F4A7C15ull;
        return static_cast<std::size_t>(h ^ (h >> 32));
    }
};

struct FlowState {
    Phase phase = Phase::none;
    std::uint32_t initiator_ip = 0;     // sent the SYN
    std::uint16_t initiator_port = 0;
    std::uint32_t expected_seq[2] = {0, 0};  // [0] from endpoint a, [1] from endpoint b
    bool expected_valid[2] = {false, false};
    std::uint64_t last_activity_us = 0;
};

struct FlowConfig {
    std::uint32_t seq_window = 65535;        // octets past expected_seq still in-window
    std::uint64_t idle_timeout_us = 300ull * 1000000;
};

// Per-pipeline TCP connection tracker. Single-writer by design.
class FlowTable {
public:
    explicit FlowTable(FlowConfig config = {}) : config_(config) {}

    // pkt must be TCP. Advances the handshake state machine and reports the
    // verdict as of this packet.
    FlowVerdict update(const net::ParsedPacket& pkt);

    std::size_t size() const { return flows_.size(); }

private:
    void evict_idle(std::uint64_t now_us);

    FlowConfig config_;
    std::unordered_map<FlowKey, FlowState, FlowKeyHash> flows_;
    std::uint64_t updates_since_sweep_ = 0;
};

} // namespace dnp3ids::flow
