#pragma once

#include "dnp3ids/dnp3.hpp"
#include "dnp3ids/packet.hpp"
#include "dnp3ids/pcap.hpp"
#include "dnp3ids/rules.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace dnp3ids::rulegen {

struct RulegenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoDnp3Traffic : RulegenError {
    NoDnp3Traffic() : RulegenError("capture contains no DNP3 frames") {}
};

struct TimingStats {
    double mean_interval_s = 0; // 0 when fewer than 2 observations
    double stddev_s = 0;
    std::uint32_t max_burst = 0; // max frames in any sliding window
    std::uint64_t count = 0;
};

// conversation key: requests keyed by sender ip + link destination,
// responses by receiver ip + link source, so both sides of one poll share it
using MatrixKey = std::pair<std::uint32_t, std::uint16_t>;            // (master ip, outstation addr)
using TimingKey = std::tuple<std::uint32_t, std::uint16_t, std::uint8_t>; // + function code

struct BaselineProfile {
    std::map<MatrixKey, std::map<std::uint8_t, std::uint64_t>> function_matrix;
    std::map<TimingKey, TimingStats> timing_stats;
    std::map<TimingKey, std::vector<std::uint64_t>> frame_times_us; // sorted
    std::set<std::uint32_t> masters;      // sources of requests
    std::set<std::uint32_t> outstations;  // sources of responses / request targets
    std::set<std::uint16_t> ports;        // request destination ports
    std::uint32_t window_seconds = 10;
    std::string source_id;
    std::uint64_t last_ts_us = 0;

    bool knows_endpoint(std::uint32_t ip) const {
        return masters.count(ip) || outstations.count(ip);
    }
    bool knows_port(std::uint16_t p) const { return ports.count(p) != 0; }
};

BaselineProfile learn_baseline(const std::vector<pcap::CaptureRecord>& capture,
                               std::uint32_t window_seconds = 10,
                               std::string source_id = "");

enum class PatternKind : int {
    known = 0,
    payload_port = 1,     // unseen endpoint or port
    flow_direction = 2,   // request from an outstation-side address
    critical_command = 3, // critical function code
    rate_threshold = 4,   // learned tuple above its rate bound
};

const char* pattern_kind_name(PatternKind k);

struct TrafficPattern {
    PatternKind kind = PatternKind::known;
    std::uint32_t src_ip = 0;
    std::uint16_t outstation_addr = 0;
    int function_code = -1;
    std::string evidence;
};

struct PatternConfig {
    double k_sigma = 3.0;
    std::uint32_t window_seconds = 10;
    std::uint64_t select_timeout_us = 10'000'000;
    dnp3::CriticalSet critical = dnp3::default_critical_set();
};

// frames per window the baseline tolerates before a tuple counts as pattern 4
std::uint32_t rate_bound(const TimingStats& stats, double k_sigma, std::uint32_t window_seconds);

// Stateful observer: packets of one replay stream classified in order,
// lowest-numbered applicable pattern wins, baseline traffic comes back known.
class Classifier {
public:
    Classifier(const BaselineProfile& profile, PatternConfig cfg = {});
    TrafficPattern classify(const net::ParsedPacket& pkt);

private:
    const BaselineProfile& profile_;
    PatternConfig cfg_;
    std::map<TimingKey, std::deque<std::uint64_t>> recent_;
};

// single-packet convenience (no rate history)
TrafficPattern classify_observation(const BaselineProfile& profile,
                                    const net::ParsedPacket& pkt,
                                    PatternConfig cfg = {});

struct GeneratedRule {
    rules::Rule rule;
    TrafficPattern pattern;
    std::string provenance;
};

struct GeneratedRuleset {
    std::vector<GeneratedRule> rules;
    rules::VarTable variables; // MASTERS, OUTSTATIONS, ENDPOINTS

    std::string text() const; // canonical rendering, deterministic
};

// Emits rules in priority order (critical commands, flow, endpoint/port,
// rate thresholds) with sids from 1,000,000 up.
GeneratedRuleset generate_ruleset(const BaselineProfile& profile,
                                  const PatternConfig& cfg = {});

struct MergeResult {
    std::string text;
    std::string changelog; // "ADD <sid> <reason>" / "SKIP <sid> <reason>" lines
};

// Splices fresh rules into an existing repository: duplicates (semantic key,
// msg and sid ignored) are skipped, newcomers land before the first retained
// rule of lower priority, retained order is otherwise untouched.
MergeResult merge_repository(const std::string& repo_text,
                             const std::vector<GeneratedRule>& fresh);

} // namespace dnp3ids::rulegen
