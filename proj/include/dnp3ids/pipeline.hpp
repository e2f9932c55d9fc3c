#pragma once

#include "dnp3ids/detectors.hpp"
#include "dnp3ids/flow.hpp"
#include "dnp3ids/packet.hpp"
#include "dnp3ids/pcap.hpp"
#include "dnp3ids/rules.hpp"

#include <array>
#include <functional>
#include <memory>
#include <mutex>

namespace dnp3ids::pipeline {

enum class Mode { ids, ips };

struct PipelineConfig {
    Mode mode = Mode::ids;
    detect::DetectorConfig detectors;
    flow::FlowConfig flow;
    rules::EvalConfig eval;
};

struct PipelineStats {
    std::uint64_t packets_in = 0;
    std::uint64_t packets_out = 0;      // ips only; ids forwards nothing
    std::uint64_t packets_dropped = 0;  // ips only
    std::uint64_t decode_skipped = 0;
    std::uint64_t dnp3_frames = 0;
    std::uint64_t alerts = 0;
    std::uint64_t options_evaluated = 0;
    std::array<std::uint64_t, 5> skip_by_reason{}; // indexed by net::SkipReason
};

// Single capture path: decode, flow update, semantic detectors, rule
// evaluation. Timestamps come from the capture, so replays are deterministic.
// The rule set can be swapped from another thread between packets.
class Pipeline {
public:
    Pipeline(PipelineConfig cfg, std::shared_ptr<const rules::RuleSet> rs);

    void swap_ruleset(std::shared_ptr<const rules::RuleSet> rs);
    std::shared_ptr<const rules::RuleSet> ruleset() const;

    struct Result {
        std::vector<rules::Alert> alerts;
        bool dropped = false;    // ips refused to forward
        bool forwarded = false;  // written to `out`
        std::uint64_t options_evaluated = 0;
    };

    // Processes one captured packet. In ips mode the packet is written
    // bit-exact to `out` unless a matching drop rule claimed it.
    Result process(const pcap::CaptureRecord& rec, pcap::PcapWriter* out = nullptr);

    using AlertSink = std::function<void(const rules::Alert&)>;
    PipelineStats run(pcap::PcapReader& in, const AlertSink& sink,
                      pcap::PcapWriter* out = nullptr);

    const PipelineStats& stats() const { return stats_; }
    const detect::SboTracker& sbo() const { return sbo_; }

private:
    PipelineConfig cfg_;
    flow::FlowTable flow_;
    detect::SboTracker sbo_;
    rules::ThresholdState thresholds_;
    mutable std::mutex rs_mutex_;
    std::shared_ptr<const rules::RuleSet> ruleset_;
    PipelineStats stats_;
};

} // namespace dnp3ids::pipeline
