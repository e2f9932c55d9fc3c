#pragma once

#include "dnp3ids/dnp3.hpp"
#include "dnp3ids/pcap.hpp"
#include "dnp3ids/util.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dnp3ids::synth {

struct SynthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexNotDnp3 : SynthError {
    using SynthError::SynthError;
};

struct ScenarioConfig {
    std::uint32_t master_ip = util::parse_ipv4("10.0.0.1").value();
    std::uint16_t master_port = 49152;
    std::uint32_t outstation_ip = util::parse_ipv4("10.0.0.2").value();
    std::uint16_t outstation_port = 20000;
    std::uint16_t master_addr = 1;       // link-layer source of requests
    std::uint16_t outstation_addr = 10;  // link-layer destination of requests
    std::uint32_t attacker_ip = util::parse_ipv4("10.0.0.66").value();
    std::uint16_t attacker_port = 51000;
    std::uint64_t start_us = 1'700'000'000'000'000ull;
    double rate_hz = 1.0;        // poll cycles per second
    std::uint32_t count = 100;   // poll cycles, or flood frames
    std::uint32_t seconds = 10;  // flood window
    bool control_exchange = false; // one Select/Operate pair mid-capture
    bool spoof_source = false;     // replay with the victim's addresses, no handshake
    std::uint64_t seed = 1;
};

enum class AttackKind {
    select_operate_replay,
    direct_operate,
    broadcast_request,
    disable_unsolicited,
    stop_application,
    cold_restart,
};

enum class FloodKind { dnp3_flood, syn_flood, port_scan };

enum class CorruptSite { header, body };

const char* attack_kind_name(AttackKind k);
const char* flood_kind_name(FloodKind k);

// Full TCP session carrying `count` Read poll cycles at rate_hz, valid CRCs,
// advancing transport/application sequence numbers, FIN teardown at the end.
std::vector<pcap::CaptureRecord> synth_benign(const ScenarioConfig& cfg);

// Benign background of `count` cycles plus attacker-sourced frames from the
// attacker's own TCP session (or spoofed mid-stream injection).
std::vector<pcap::CaptureRecord> synth_attack(AttackKind kind, const ScenarioConfig& cfg);

// dnp3_flood: count read frames inside `seconds` after a completed handshake;
// syn_flood: count SYNs, never completed; port_scan: SYNs to count distinct ports.
std::vector<pcap::CaptureRecord> synth_flood(FloodKind kind, const ScenarioConfig& cfg);

// Flips one bit of one CRC-covered octet of the first DNP3 frame in
// records[index] without touching the framing fields, then recomputes the TCP
// checksum. Applying the same call twice restores the original records.
std::vector<pcap::CaptureRecord> corrupt_crc(const std::vector<pcap::CaptureRecord>& records,
                                             std::size_t index, CorruptSite site,
                                             unsigned bit = 0);

// Validation corpus: one established session carrying n frames with randomized
// non-control function codes, payloads and link addresses. Deterministic.
std::vector<pcap::CaptureRecord> random_frame_capture(const ScenarioConfig& cfg, std::size_t n);

} // namespace dnp3ids::synth
