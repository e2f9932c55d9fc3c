#pragma once

#include "dnp3ids/rules.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnp3ids::dist {

constexpr int kProtoVersion = 1;
constexpr std::uint16_t kDefaultMasterPort = 7000;

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MsgType { hello, alert, ack, rule_push, rule_ack, ping };

const char* msg_type_name(MsgType t);
std::optional<MsgType> msg_type_from_name(const std::string& name);

// One alert as shipped from a sensor and stored at the master.
struct AlertRecord {
    std::string sensor_id;
    std::uint64_t seq = 0;
    rules::Alert alert;
    std::uint64_t received_at_us = 0; // stamped by the master, 0 in transit

    bool operator==(const AlertRecord&) const = default;
};

struct HelloMsg {
    std::string sensor_id;
    int proto_ver = kProtoVersion;
    std::uint64_t rule_version = 0;
    std::string token;
};

struct AckMsg {
    std::uint64_t seq = 0; // last contiguous seq stored
};

struct RulePushMsg {
    std::uint64_t version = 0;
    std::string rules_text;
    std::map<std::string, std::string> variables; // NAME -> "cidr,cidr"
    std::string sha256_hex;                       // of rules_text
};

struct RuleAckMsg {
    std::uint64_t version = 0;
    std::string status; // "ok" | "stale" | "compile_failed" | "checksum_mismatch"
};

struct PingMsg {};

// Line-delimited JSON; every message is one line ending in '\n'.
std::string encode_hello(const HelloMsg& m);
std::string encode_alert(const AlertRecord& r);
std::string encode_ack(const AckMsg& m);
std::string encode_rule_push(const RulePushMsg& m);
std::string encode_rule_ack(const RuleAckMsg& m);
std::string encode_ping();

struct Message {
    MsgType type = MsgType::ping;
    HelloMsg hello;
    AlertRecord alert;
    AckMsg ack;
    RulePushMsg rule_push;
    RuleAckMsg rule_ack;
};

// Parses one line (newline optional). Throws WireError on malformed input.
Message decode_message(const std::string& line);

std::string sha256_hex(const std::string& data);

// Variable tables cross the wire as NAME -> comma-joined CIDR strings.
std::map<std::string, std::string> vars_to_wire(const rules::VarTable& vars);
rules::VarTable vars_from_wire(const std::map<std::string, std::string>& wire);

} // namespace dnp3ids::dist
