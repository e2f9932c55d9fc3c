#pragma once

#include "dnp3ids/pcap.hpp"
#include "dnp3ids/pipeline.hpp"
#include "dnp3ids/rules.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dnp3ids::bench {

struct BenchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RuleSetMismatch : BenchError {
    using BenchError::BenchError;
};

struct LatencySample {
    std::uint32_t sid = 0;
    std::uint64_t capture_ts_us = 0;
    std::uint64_t detection_ns = 0; // pipeline entry to alert emission
    std::uint64_t options_evaluated = 0;
};

struct RuleLatency {
    std::uint32_t sid = 0;
    std::size_t position = 0; // 1-based position in its ordering
    std::size_t samples = 0;
    double mean_us = 0, median_us = 0, p95_us = 0, stddev_us = 0;
    double mean_options = 0;
};

struct SequenceReport {
    std::vector<RuleLatency> seq1, seq2; // one entry per alerting rule

    struct Row {
        std::uint32_t sid = 0;
        std::size_t pos1 = 0, pos2 = 0;
        double mean_us_1 = 0, mean_us_2 = 0;
        double mean_options_1 = 0, mean_options_2 = 0;
        bool options_follow_position = false; // fewer options where earlier
        bool latency_follows_position = false;
    };
    std::vector<Row> comparison;
    bool all_options_follow_position = false;

    std::string text_table() const;
    std::string csv() const;
};

// Replays the capture `repetitions` times, each through a fresh pipeline,
// recording one sample per alert.
std::vector<LatencySample> measure_detection(const rules::RuleSet& rs,
                                             const std::vector<pcap::CaptureRecord>& capture,
                                             int repetitions,
                                             const pipeline::PipelineConfig& pcfg = {});

// Same rules in two orders; throws RuleSetMismatch when the rule multisets
// differ.
SequenceReport compare_sequences(const rules::RuleSet& seq1, const rules::RuleSet& seq2,
                                 const std::vector<pcap::CaptureRecord>& capture,
                                 int repetitions,
                                 const pipeline::PipelineConfig& pcfg = {});

// Four-rule ordering experiment: an ICMP content rule, a flow rule, a
// payload content rule, and a rate threshold rule, each triggered by its
// own source in the bundled capture. seq2 is seq1 reversed.
struct ReferenceScenario {
    std::string rules_seq1;
    std::string rules_seq2;
    rules::VarTable vars;
    std::vector<pcap::CaptureRecord> capture;      // triggers every rule
    std::vector<pcap::CaptureRecord> miss_capture; // matches no rule
};
ReferenceScenario make_reference_scenario();

// Mean options_evaluated per packet over one replay (no repetitions).
double mean_options_per_packet(const rules::RuleSet& rs,
                               const std::vector<pcap::CaptureRecord>& capture,
                               const pipeline::PipelineConfig& pcfg = {});

} // namespace dnp3ids::bench
