#pragma once

#include "dnp3ids/flow.hpp"
#include "dnp3ids/packet.hpp"
#include "dnp3ids/util.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace dnp3ids::rules {

struct RuleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SyntaxError : RuleError {
    using RuleError::RuleError;
};
struct UnknownOption : RuleError {
    using RuleError::RuleError;
};
struct MissingSid : RuleError {
    using RuleError::RuleError;
};
struct DuplicateSid : RuleError {
    using RuleError::RuleError;
};
struct UnresolvedVariable : RuleError {
    using RuleError::RuleError;
};

// aggregate of per-line failures from compile_ruleset
struct CompileError : RuleError {
    explicit CompileError(std::string summary, std::vector<std::pair<int, std::string>> lines)
        : RuleError(std::move(summary)), line_errors(std::move(lines)) {}
    std::vector<std::pair<int, std::string>> line_errors;
};

enum class Action { alert, drop, pass };
enum class RuleProto { ip, tcp, udp, icmp };

const char* action_name(Action a);
const char* proto_name(RuleProto p);

// address side of a rule header: any | [!]$VAR | [!]cidr | [!][cidr,cidr,...]
struct AddrExpr {
    bool negate = false;
    bool any = false;
    std::string var;               // unresolved variable name, empty if literal
    std::vector<util::Cidr> cidrs; // literal entries, or resolved variable body
    bool resolved = false;         // cidrs usable for matching

    bool matches(std::uint32_t ip) const;
    bool operator==(const AddrExpr&) const = default;
};

struct PortExpr {
    bool negate = false;
    bool any = false;
    std::vector<std::uint16_t> ports;

    bool matches(std::uint16_t port) const;
    bool operator==(const PortExpr&) const = default;
};

struct ContentOpt {
    std::vector<std::uint8_t> bytes;
    bool hex_form = false;             // render as spaced hex pairs
    std::size_t offset = 0;
    std::optional<std::size_t> depth;  // window length from offset; nullopt = to end

    bool operator==(const ContentOpt&) const = default;
};

// flow predicates; all listed tokens must hold
struct FlowOpt {
    bool established = false;
    bool not_established = false;
    bool to_server = false;
    bool to_client = false;

    bool operator==(const FlowOpt&) const = default;
};

enum class ThresholdType { limit, every, both };
enum class ThresholdTrack { by_src, by_dst };

struct ThresholdOpt {
    ThresholdType type = ThresholdType::both;
    ThresholdTrack track = ThresholdTrack::by_src;
    std::uint32_t count = 0;
    std::uint32_t seconds = 0;

    bool operator==(const ThresholdOpt&) const = default;
};

struct MsgOpt {
    std::string text;
    bool operator==(const MsgOpt&) const = default;
};
struct SidOpt {
    std::uint32_t value = 0;
    bool operator==(const SidOpt&) const = default;
};
struct GidOpt {
    std::uint32_t value = 1;
    bool operator==(const GidOpt&) const = default;
};
struct MetadataOpt {
    std::string text;
    bool operator==(const MetadataOpt&) const = default;
};

using RuleOption =
    std::variant<ContentOpt, FlowOpt, ThresholdOpt, MsgOpt, SidOpt, GidOpt, MetadataOpt>;

struct Rule {
    Action action = Action::alert;
    RuleProto proto = RuleProto::tcp;
    AddrExpr src;
    PortExpr src_port;
    bool bidirectional = false;
    AddrExpr dst;
    PortExpr dst_port;
    std::vector<RuleOption> options; // original order, for faithful rendering

    // cached from options
    std::uint32_t sid = 0;
    std::uint32_t gid = 1;
    std::string msg;
    std::string metadata;

    bool is_preproc() const;                 // bound to a detector event stream
    const ThresholdOpt* threshold() const;
    bool operator==(const Rule&) const = default;
};

// Parses one rule line. Throws SyntaxError / UnknownOption / MissingSid.
Rule parse_rule(const std::string& line);

// Canonical text form; parse_rule(render_rule(r)) == r.
std::string render_rule(const Rule& r);

// Dedup identity: the rule with msg and sid stripped, canonically rendered.
std::string semantic_key(const Rule& r);

using VarTable = std::map<std::string, std::vector<util::Cidr>>;

struct RuleSet {
    std::uint64_t version = 0;
    std::vector<Rule> rules;
    VarTable variables;
    std::string source_text;                          // lines as given to the compiler
    std::set<std::pair<std::uint32_t, std::uint32_t>> preproc_bindings; // (gid, sid)

    bool binds(std::uint32_t gid, std::uint32_t sid) const {
        return preproc_bindings.count({gid, sid}) != 0;
    }
};

// Compiles rule text (one rule per line, '#' comments and blanks skipped).
// All line failures are aggregated into a single CompileError; duplicate
// (gid, sid) pairs and variables missing from vars are compile failures.
RuleSet compile_ruleset(const std::string& text, const VarTable& vars,
                        std::uint64_t version);

struct PreprocEvent {
    std::uint32_t gid = 0;
    std::uint32_t sid = 0;
    std::string msg;
};

struct Alert {
    std::uint64_t ts_us = 0;
    std::uint32_t gid = 1;
    std::uint32_t sid = 0;
    std::string msg;
    Action action = Action::alert;
    std::uint32_t src_ip = 0;
    std::uint16_t src_port = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t dst_port = 0;
    net::IpProto proto = net::IpProto::other;
    int dnp3_fc = -1;        // first frame's function code, -1 when no frame
    int rule_position = -1;  // index in the rule list, -1 for detector-direct
    std::uint64_t rule_version = 0;

    bool operator==(const Alert&) const = default;
};

struct ThresholdEntry {
    std::uint64_t window_start_us = 0;
    std::uint32_t count = 0;
    bool started = false;
};

struct ThresholdKeyHash {
    std::size_t operator()(const std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>& k) const {
        std::uint64_t h = std::get<0>(k);
        h = h * 0x100000001B3ull ^ std::get<1>(k);
        h = h * 0x100000001B3ull ^ std::get<2>(k);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

// tumbling windows keyed by (gid, sid, tracked ip)
using ThresholdState =
    std::unordered_map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>,
                       ThresholdEntry, ThresholdKeyHash>;

struct EvalConfig {
    bool evaluate_all = false; // keep evaluating rules after the first match
};

struct EvalResult {
    std::vector<Alert> alerts;
    std::uint64_t options_evaluated = 0;
    bool drop = false; // a matching drop rule claimed the packet
};

// Evaluates one packet against the set, first match wins unless
// cfg.evaluate_all. Detector events are consumed two ways: rules marked
// preproc match when the packet produced their (gid, sid); events no rule
// binds are emitted as direct alerts with rule_position -1.
EvalResult evaluate_packet(const RuleSet& rs, const net::ParsedPacket& pkt,
                           const std::optional<flow::FlowVerdict>& verdict,
                           std::span<const PreprocEvent> events,
                           ThresholdState& thresholds, const EvalConfig& cfg = {});

} // namespace dnp3ids::rules
