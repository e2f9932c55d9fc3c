#include "dnp3ids/pipeline.hpp"

namespace dnp3ids::pipeline {

Pipeline::Pipeline(PipelineConfig cfg, std::shared_ptr<const rules::RuleSet> rs)
    : cfg_(cfg), flow_(cfg.flow), ruleset_(std::move(rs)) {}

void Pipeline::swap_ruleset(std::shared_ptr<const rules::RuleSet> rs) {
    std::lock_guard lock(rs_mutex_);
    ruleset_ = std::move(rs);
}

std::shared_ptr<const rules::RuleSet> Pipeline::ruleset() const {
    std::lock_guard lock(rs_mutex_);
    return ruleset_;
}

Pipeline::Result Pipeline::process(const pcap::CaptureRecord& rec, pcap::PcapWriter* out) {
    Result result;
    ++stats_.packets_in;

    auto outcome = net::decode_packet(rec);
    if (!outcome.packet) {
        ++stats_.decode_skipped;
        ++stats_.skip_by_reason[static_cast<std::size_t>(outcome.skip)];
        if (cfg_.mode == Mode::ips && out) {
            out->write(rec);
            result.forwarded = true;
            ++stats_.packets_out;
        }
        return result;
    }
    const net::ParsedPacket& pkt = *outcome.packet;
    stats_.dnp3_frames += pkt.dnp3.size();

    std::optional<flow::FlowVerdict> verdict;
    if (pkt.is_tcp()) verdict = flow_.update(pkt);

    // detector events, one entry per (gid, sid) seen on this packet
    std::vector<rules::PreprocEvent> events;
    auto add_event = [&events](const detect::Event& e) {
        for (const auto& seen : events)
            if (seen.gid == e.gid && seen.sid == e.sid) return;
        events.push_back({e.gid, e.sid, e.msg});
    };
    if (verdict) {
        if (auto e = detect::check_tcp_sequence(*verdict)) add_event(*e);
    }
    for (const auto& frame : pkt.dnp3) {
        if (auto e = detect::check_frame_crc(frame)) add_event(*e);
        if (auto e = sbo_.on_frame(pkt, frame, cfg_.detectors)) add_event(*e);
        for (const auto& e : detect::screen_critical(pkt, frame, cfg_.detectors))
            add_event(e);
    }

    auto rs = ruleset();
    auto eval = rules::evaluate_packet(*rs, pkt, verdict, events, thresholds_, cfg_.eval);
    stats_.options_evaluated += eval.options_evaluated;
    stats_.alerts += eval.alerts.size();
    result.options_evaluated = eval.options_evaluated;
    result.alerts = std::move(eval.alerts);

    if (cfg_.mode == Mode::ips) {
        if (eval.drop) {
            result.dropped = true;
            ++stats_.packets_dropped;
        } else {
            if (out) out->write(rec);
            result.forwarded = true;
            ++stats_.packets_out;
        }
    }
    return result;
}

PipelineStats Pipeline::run(pcap::PcapReader& in, const AlertSink& sink,
                            pcap::PcapWriter* out) {
    while (auto rec = in.next()) {
        auto r = process(*rec, out);
        if (sink)
            for (const auto& a : r.alerts) sink(a);
    }
    return stats_;
}

} // namespace dnp3ids::pipeline
