#pragma once

#include "dnp3ids/dnp3.hpp"
#include "dnp3ids/flow.hpp"
#include "dnp3ids/packet.hpp"
#include "dnp3ids/util.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dnp3ids::detect {

inline constexpr std::uint32_t kGid = 145;

// event stream ids, stable across the wire and the rule corpus
inline constexpr std::uint32_t kSidBadCrc = 1;
inline constexpr std::uint32_t kSidBadSequence = 3;
inline constexpr std::uint32_t kSidOperateWithoutSelect = 10;
inline constexpr std::uint32_t kSidUnauthorizedDirectOperate = 11;
inline constexpr std::uint32_t kSidBroadcastCritical = 12;
inline constexpr std::uint32_t kSidDisableUnsolUnknown = 13;
inline constexpr std::uint32_t kSidStopApplicationUnknown = 14;
inline constexpr std::uint32_t kSidColdRestartUnknown = 15;

const char* sid_message(std::uint32_t sid);

struct Event {
    std::uint32_t gid = kGid;
    std::uint32_t sid = 0;
    std::string msg;

    bool operator==(const Event&) const = default;
};

Event make_event(std::uint32_t sid);

struct DetectorConfig {
    std::vector<util::Cidr> authorized_masters;
    std::uint64_t select_timeout_us = 10'000'000;
    bool sbo_loose_key = false; // pair selects with operates by endpoint only
    dnp3::CriticalSet critical = dnp3::default_critical_set();
    dnp3::BroadcastSet broadcast = dnp3::default_broadcast_set();

    bool is_authorized_master(std::uint32_t ip) const;
};

// one event per frame whose link header or body blocks failed their CRC
std::optional<Event> check_frame_crc(const dnp3::Dnp3Frame& frame);

// verdict comes from the flow tracker for the packet carrying the frame(s)
std::optional<Event> check_tcp_sequence(const flow::FlowVerdict& verdict);

// select-before-operate pairing across masters and outstations
class SboTracker {
public:
    std::optional<Event> on_frame(const net::ParsedPacket& pkt,
                                  const dnp3::Dnp3Frame& frame,
                                  const DetectorConfig& cfg);

    std::size_t outstanding() const { return pending_.size(); }
    std::uint64_t selects_recorded = 0;
    std::uint64_t operates_matched = 0;
    std::uint64_t operates_unmatched = 0;
    std::uint64_t selects_expired = 0;

private:
    using Key = std::tuple<std::uint32_t, std::uint16_t, std::uint64_t>;
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = std::get<2>(k);
            h = h * 0x100000001B3ull ^ std::get<0>(k);
            h = h * 0x100000001B3ull ^ std::get<1>(k);
            return static_cast<std::size_t>(h ^ (h >> 31));
        }
    };

    Key make_key(const net::ParsedPacket& pkt, const dnp3::Dnp3Frame& frame,
                 const DetectorConfig& cfg) const;
    void purge(std::uint64_t now_us, const DetectorConfig& cfg);

    std::unordered_map<Key, std::uint64_t, KeyHash> pending_; // key -> select ts
};

// broadcast and station-control screening for critical requests
std::vector<Event> screen_critical(const net::ParsedPacket& pkt,
                                   const dnp3::Dnp3Frame& frame,
                                   const DetectorConfig& cfg);

} // namespace dnp3ids::detect
