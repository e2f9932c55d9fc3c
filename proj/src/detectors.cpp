#include "dnp3ids/detectors.hpp"

namespace dnp3ids::detect {

const char* sid_message(std::uint32_t sid) {
    switch (sid) {
        case kSidBadCrc: return "DNP3-Bad-CRC";
        case kSidBadSequence: return "DNP3-Invalid sequence no";
        case kSidOperateWithoutSelect: return "Operate without Select";
        case kSidUnauthorizedDirectOperate: return "Unauthorized direct operate";
        case kSidBroadcastCritical: return "Broadcast critical request";
        case kSidDisableUnsolUnknown: return "Disable unsolicited from unknown source";
        case kSidStopApplicationUnknown: return "Stop application from unknown source";
        case kSidColdRestartUnknown: return "Cold restart from unknown source";
    }
    return "DNP3 anomaly";
}

Event make_event(std::uint32_t sid) { return Event{kGid, sid, sid_message(sid)}; }

bool DetectorConfig::is_authorized_master(std::uint32_t ip) const {
    for (const auto& c : authorized_masters)
        if (c.contains(ip)) return true;
    return false;
}

std::optional<Event> check_frame_crc(const dnp3::Dnp3Frame& frame) {
    if (frame.all_crc_valid()) return std::nullopt;
    return make_event(kSidBadCrc);
}

std::optional<Event> check_tcp_sequence(const flow::FlowVerdict& verdict) {
    if (!verdict.seq_anomaly) return std::nullopt;
    return make_event(kSidBadSequence);
}

SboTracker::Key SboTracker::make_key(const net::ParsedPacket& pkt,
                                     const dnp3::Dnp3Frame& frame,
                                     const DetectorConfig& cfg) const {
    const std::uint64_t digest =
        cfg.sbo_loose_key ? 0 : util::fnv1a64(frame.payload.data(), frame.payload.size());
    return {pkt.src_ip, frame.link.destination, digest};
}

void SboTracker::purge(std::uint64_t now_us, const DetectorConfig& cfg) {
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (now_us > it->second && now_us - it->second > cfg.select_timeout_us) {
            ++selects_expired;
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }
}

std::optional<Event> SboTracker::on_frame(const net::ParsedPacket& pkt,
                                          const dnp3::Dnp3Frame& frame,
                                          const DetectorConfig& cfg) {
    if (!frame.is_request()) return std::nullopt;
    const std::uint8_t fc = frame.app.function_code;
    switch (fc) {
        case dnp3::FC_SELECT:
            purge(pkt.ts_us, cfg);
            pending_[make_key(pkt, frame, cfg)] = pkt.ts_us;
            ++selects_recorded;
            return std::nullopt;
        case dnp3::FC_OPERATE: {
            purge(pkt.ts_us, cfg);
            auto it = pending_.find(make_key(pkt, frame, cfg));
            if (it != pending_.end()) {
                pending_.erase(it);
                ++operates_matched;
                return std::nullopt;
            }
            ++operates_unmatched;
            return make_event(kSidOperateWithoutSelect);
        }
        case dnp3::FC_DIRECT_OPERATE:
        case dnp3::FC_DIRECT_OPERATE_NR:
            if (!cfg.is_authorized_master(pkt.src_ip))
                return make_event(kSidUnauthorizedDirectOperate);
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

std::vector<Event> screen_critical(const net::ParsedPacket& pkt,
                                   const dnp3::Dnp3Frame& frame,
                                   const DetectorConfig& cfg) {
    std::vector<Event> out;
    if (!frame.is_request()) return out;
    const std::uint8_t fc = frame.app.function_code;
    if (dnp3::is_broadcast(frame.link.destination, cfg.broadcast) &&
        dnp3::is_critical(fc, cfg.critical))
        out.push_back(make_event(kSidBroadcastCritical));
    if (!cfg.is_authorized_master(pkt.src_ip)) {
        if (fc == dnp3::FC_DISABLE_UNSOLICITED)
            out.push_back(make_event(kSidDisableUnsolUnknown));
        if (fc == dnp3::FC_STOP_APPLICATION)
            out.push_back(make_event(kSidStopApplicationUnknown));
        if (fc == dnp3::FC_COLD_RESTART)
            out.push_back(make_event(kSidColdRestartUnknown));
    }
    return out;
}

} // namespace dnp3ids::detect
