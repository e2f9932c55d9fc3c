#include "dnp3ids/wire.hpp"

#include "dnp3ids/util.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <sstream>

namespace dnp3ids::dist {

using json = nlohmann::json;
using namespace util;

const char* msg_type_name(MsgType t) {
    switch (t) {
        case MsgType::hello: return "hello";
        case MsgType::alert: return "alert";
        case MsgType::ack: return "ack";
        case MsgType::rule_push: return "rule_push";
        case MsgType::rule_ack: return "rule_ack";
        case MsgType::ping: return "ping";
    }
    return "?";
}

std::optional<MsgType> msg_type_from_name(const std::string& name) {
    if (name == "hello") return MsgType::hello;
    if (name == "alert") return MsgType::alert;
    if (name == "ack") return MsgType::ack;
    if (name == "rule_push") return MsgType::rule_push;
    if (name == "rule_ack") return MsgType::rule_ack;
    if (name == "ping") return MsgType::ping;
    return std::nullopt;
}

namespace {

const char* proto_wire_name(net::IpProto p) {
    switch (p) {
        case net::IpProto::tcp: return "tcp";
        case net::IpProto::udp: return "udp";
        case net::IpProto::icmp: return "icmp";
        default: return "other";
    }
}

net::IpProto proto_from_wire(const std::string& s) {
    if (s == "tcp") return net::IpProto::tcp;
    if (s == "udp") return net::IpProto::udp;
    if (s == "icmp") return net::IpProto::icmp;
    return net::IpProto::other;
}

std::string finish(json& j) {
    return j.dump() + "\n";
}

} // namespace

std::string encode_hello(const HelloMsg& m) {
    json j{{"type", "hello"},
           {"sensor_id", m.sensor_id},
           {"proto_ver", m.proto_ver},
           {"rule_version", m.rule_version},
           {"token", m.token}};
    return finish(j);
}

std::string encode_alert(const AlertRecord& r) {
    json j{{"type", "alert"},
           {"sensor_id", r.sensor_id},
           {"seq", r.seq},
           {"ts_us", r.alert.ts_us},
           {"sid", r.alert.sid},
           {"gid", r.alert.gid},
           {"msg", r.alert.msg},
           {"src_ip", format_ipv4(r.alert.src_ip)},
           {"src_port", r.alert.src_port},
           {"dst_ip", format_ipv4(r.alert.dst_ip)},
           {"dst_port", r.alert.dst_port},
           {"proto", proto_wire_name(r.alert.proto)},
           {"rule_version", r.alert.rule_version}};
    if (r.alert.dnp3_fc >= 0) j["dnp3_fc"] = r.alert.dnp3_fc;
    if (r.alert.rule_position >= 0) j["rule_pos"] = r.alert.rule_position;
    if (r.received_at_us != 0) j["received_at_us"] = r.received_at_us;
    return finish(j);
}

std::string encode_ack(const AckMsg& m) {
    json j{{"type", "ack"}, {"seq", m.seq}};
    return finish(j);
}

std::string encode_rule_push(const RulePushMsg& m) {
    json j{{"type", "rule_push"},
           {"version", m.version},
           {"rules", m.rules_text},
           {"vars", m.variables},
           {"sha256", m.sha256_hex}};
    return finish(j);
}

std::string encode_rule_ack(const RuleAckMsg& m) {
    json j{{"type", "rule_ack"}, {"version", m.version}, {"status", m.status}};
    return finish(j);
}

std::string encode_ping() {
    json j{{"type", "ping"}};
    return finish(j);
}

Message decode_message(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw WireError(std::string("bad message: ") + e.what());
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw WireError("bad message: missing type");
    auto type = msg_type_from_name(j["type"].get<std::string>());
    if (!type) throw WireError("bad message: unknown type " + j["type"].get<std::string>());

    Message m;
    m.type = *type;
    try {
        switch (*type) {
            case MsgType::hello:
                m.hello.sensor_id = j.at("sensor_id").get<std::string>();
                m.hello.proto_ver = j.at("proto_ver").get<int>();
                m.hello.rule_version = j.value("rule_version", std::uint64_t{0});
                m.hello.token = j.value("token", std::string{});
                break;
            case MsgType::alert: {
                m.alert.sensor_id = j.at("sensor_id").get<std::string>();
                m.alert.seq = j.at("seq").get<std::uint64_t>();
                auto& a = m.alert.alert;
                a.ts_us = j.at("ts_us").get<std::uint64_t>();
                a.sid = j.at("sid").get<std::uint32_t>();
                a.gid = j.value("gid", std::uint32_t{1});
                a.msg = j.value("msg", std::string{});
                if (auto ip = parse_ipv4(j.value("src_ip", std::string{"0.0.0.0"})))
                    a.src_ip = *ip;
                if (auto ip = parse_ipv4(j.value("dst_ip", std::string{"0.0.0.0"})))
                    a.dst_ip = *ip;
                a.src_port = j.value("src_port", std::uint16_t{0});
                a.dst_port = j.value("dst_port", std::uint16_t{0});
                a.proto = proto_from_wire(j.value("proto", std::string{"other"}));
                a.dnp3_fc = j.value("dnp3_fc", -1);
                a.rule_position = j.value("rule_pos", -1);
                a.rule_version = j.value("rule_version", std::uint64_t{0});
                m.alert.received_at_us = j.value("received_at_us", std::uint64_t{0});
                break;
            }
            case MsgType::ack:
                m.ack.seq = j.at("seq").get<std::uint64_t>();
                break;
            case MsgType::rule_push:
                m.rule_push.version = j.at("version").get<std::uint64_t>();
                m.rule_push.rules_text = j.at("rules").get<std::string>();
                m.rule_push.variables =
                    j.value("vars", std::map<std::string, std::string>{});
                m.rule_push.sha256_hex = j.at("sha256").get<std::string>();
                break;
            case MsgType::rule_ack:
                m.rule_ack.version = j.at("version").get<std::uint64_t>();
                m.rule_ack.status = j.at("status").get<std::string>();
                break;
            case MsgType::ping:
                break;
        }
    } catch (const json::exception& e) {
        throw WireError(std::string("bad ") + msg_type_name(*type) + " message: " + e.what());
    }
    return m;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hexdig = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hexdig[digest[i] >> 4]);
        out.push_back(hexdig[digest[i] & 0xF]);
    }
    return out;
}

std::map<std::string, std::string> vars_to_wire(const rules::VarTable& vars) {
    std::map<std::string, std::string> wire;
    for (const auto& [name, cidrs] : vars) {
        std::string joined;
        for (const auto& c : cidrs) {
            if (!joined.empty()) joined += ',';
            joined += format_cidr(c);
        }
        wire[name] = joined;
    }
    return wire;
}

rules::VarTable vars_from_wire(const std::map<std::string, std::string>& wire) {
    rules::VarTable vars;
    for (const auto& [name, value] : wire) {
        std::vector<Cidr> cidrs;
        for (const auto& part : split(value, ',')) {
            auto c = parse_cidr(trim(part));
            if (!c) throw WireError("bad CIDR in variable " + name + ": " + part);
            cidrs.push_back(*c);
        }
        vars[name] = std::move(cidrs);
    }
    return vars;
}

} // namespace dnp3ids::dist
