#include "dnp3ids/rulegen.hpp"

#include "dnp3ids/util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dnp3ids::rulegen {

namespace {

constexpr std::uint32_t kGeneratedSidBase = 1'000'000;

std::uint32_t burst_in_window(const std::vector<std::uint64_t>& times, std::uint32_t window_s) {
    const std::uint64_t span = static_cast<std::uint64_t>(window_s) * 1000000;
    std::uint32_t best = 0;
    std::size_t lo = 0;
    for (std::size_t hi = 0; hi < times.size(); ++hi) {
        while (times[hi] - times[lo] >= span) ++lo;
        best = std::max<std::uint32_t>(best, static_cast<std::uint32_t>(hi - lo + 1));
    }
    return best;
}

TimingStats stats_from_times(const std::vector<std::uint64_t>& times, std::uint32_t window_s) {
    TimingStats s;
    s.count = times.size();
    s.max_burst = burst_in_window(times, window_s);
    if (times.size() >= 2) {
        std::vector<double> intervals;
        intervals.reserve(times.size() - 1);
        for (std::size_t i = 1; i < times.size(); ++i)
            intervals.push_back(static_cast<double>(times[i] - times[i - 1]) / 1e6);
        double sum = 0;
        for (double v : intervals) sum += v;
        s.mean_interval_s = sum / static_cast<double>(intervals.size());
        double var = 0;
        for (double v : intervals) var += (v - s.mean_interval_s) * (v - s.mean_interval_s);
        s.stddev_s = std::sqrt(var / static_cast<double>(intervals.size()));
    }
    return s;
}

// (conversation key, tuple key) of a frame, oriented master-side
struct FrameKeys {
    MatrixKey matrix;
    TimingKey timing;
    bool request;
};

FrameKeys keys_for(const net::ParsedPacket& pkt, const dnp3::Dnp3Frame& f) {
    if (f.is_request())
        return {{pkt.src_ip, f.link.destination},
                {pkt.src_ip, f.link.destination, f.app.function_code},
                true};
    return {{pkt.dst_ip, f.link.source},
            {pkt.dst_ip, f.link.source, f.app.function_code},
            false};
}

rules::AddrExpr var_expr(const std::string& name, bool negate) {
    rules::AddrExpr e;
    e.negate = negate;
    e.var = name;
    return e;
}

rules::AddrExpr host_expr(std::uint32_t ip) {
    rules::AddrExpr e;
    e.cidrs.push_back({ip, 32});
    e.resolved = true;
    return e;
}

rules::AddrExpr any_expr() {
    rules::AddrExpr e;
    e.any = true;
    e.resolved = true;
    return e;
}

rules::PortExpr any_port() {
    rules::PortExpr p;
    p.any = true;
    return p;
}

rules::PortExpr ports_expr(const std::set<std::uint16_t>& ports) {
    if (ports.empty()) return any_port();
    rules::PortExpr p;
    p.ports.assign(ports.begin(), ports.end());
    return p;
}

rules::ContentOpt fc_content(std::uint8_t fc) {
    rules::ContentOpt c;
    c.bytes = {fc};
    c.hex_form = true;
    c.offset = 12; // function code of a single-frame message
    c.depth = 1;
    return c;
}

rules::ContentOpt start_bytes_content() {
    rules::ContentOpt c;
    c.bytes = {dnp3::kStart0, dnp3::kStart1};
    c.hex_form = true;
    return c;
}

void finish_rule(rules::Rule& r, std::string msg, std::uint32_t sid) {
    r.options.emplace_back(rules::MsgOpt{msg});
    r.msg = std::move(msg);
    r.options.emplace_back(rules::SidOpt{sid});
    r.sid = sid;
}

int priority_rank(PatternKind k) {
    switch (k) {
        case PatternKind::critical_command: return 0;
        case PatternKind::flow_direction: return 1;
        case PatternKind::payload_port: return 2;
        case PatternKind::rate_threshold: return 3;
        case PatternKind::known: break;
    }
    return 4;
}

// class heuristic for rules that arrive as bare text
int priority_rank(const rules::Rule& r) {
    if (r.threshold()) return priority_rank(PatternKind::rate_threshold);
    for (const auto& o : r.options)
        if (std::holds_alternative<rules::FlowOpt>(o))
            return priority_rank(PatternKind::flow_direction);
    for (const auto& o : r.options)
        if (const auto* c = std::get_if<rules::ContentOpt>(&o); c && c->offset == 12)
            return priority_rank(PatternKind::critical_command);
    return priority_rank(PatternKind::payload_port);
}

} // namespace

const char* pattern_kind_name(PatternKind k) {
    switch (k) {
        case PatternKind::known: return "known";
        case PatternKind::payload_port: return "payload/port";
        case PatternKind::flow_direction: return "flow-direction";
        case PatternKind::critical_command: return "critical-command";
        case PatternKind::rate_threshold: return "rate-threshold";
    }
    return "?";
}

BaselineProfile learn_baseline(const std::vector<pcap::CaptureRecord>& capture,
                               std::uint32_t window_seconds, std::string source_id) {
    BaselineProfile p;
    p.window_seconds = window_seconds;
    p.source_id = std::move(source_id);

    bool any_frame = false;
    for (const auto& rec : capture) {
        auto outcome = net::decode_packet(rec);
        if (!outcome.packet) continue;
        const net::ParsedPacket& pkt = *outcome.packet;
        for (const auto& f : pkt.dnp3) {
            any_frame = true;
            p.last_ts_us = std::max(p.last_ts_us, pkt.ts_us);
            const FrameKeys k = keys_for(pkt, f);
            p.function_matrix[k.matrix][f.app.function_code] += 1;
            p.frame_times_us[k.timing].push_back(pkt.ts_us);
            if (k.request) {
                p.masters.insert(pkt.src_ip);
                p.outstations.insert(pkt.dst_ip);
                p.ports.insert(pkt.dst_port);
            } else {
                p.outstations.insert(pkt.src_ip);
                p.masters.insert(pkt.dst_ip);
            }
        }
    }
    if (!any_frame) throw NoDnp3Traffic();

    for (auto& [key, times] : p.frame_times_us) {
        std::sort(times.begin(), times.end());
        p.timing_stats[key] = stats_from_times(times, window_seconds);
    }
    return p;
}

std::uint32_t rate_bound(const TimingStats& stats, double k_sigma,
                         std::uint32_t window_seconds) {
    std::uint32_t bound = stats.max_burst + 1;
    if (stats.mean_interval_s > 0) {
        const double w = static_cast<double>(window_seconds);
        const double expected = w / stats.mean_interval_s;
        const double sigma_count =
            stats.stddev_s * w / (stats.mean_interval_s * stats.mean_interval_s);
        const double est = std::ceil(expected + k_sigma * sigma_count);
        if (est > bound) bound = static_cast<std::uint32_t>(est);
    }
    return bound;
}

Classifier::Classifier(const BaselineProfile& profile, PatternConfig cfg)
    : profile_(profile), cfg_(cfg) {}

TrafficPattern Classifier::classify(const net::ParsedPacket& pkt) {
    TrafficPattern out;
    out.src_ip = pkt.src_ip;

    const dnp3::Dnp3Frame* frame = pkt.dnp3.empty() ? nullptr : &pkt.dnp3.front();
    const bool src_known = profile_.knows_endpoint(pkt.src_ip);
    const bool dst_known = profile_.knows_endpoint(pkt.dst_ip);
    const bool port_known =
        !pkt.is_tcp() || profile_.knows_port(pkt.dst_port) || profile_.knows_port(pkt.src_port);

    bool fc_known = true;
    bool rate_exceeded = false;
    if (frame) {
        const FrameKeys k = keys_for(pkt, *frame);
        out.outstation_addr = k.matrix.second;
        out.function_code = frame->app.function_code;
        auto mit = profile_.function_matrix.find(k.matrix);
        fc_known = mit != profile_.function_matrix.end() &&
                   mit->second.count(frame->app.function_code) != 0;
        if (fc_known) {
            auto& window = recent_[k.timing];
            const std::uint64_t span = static_cast<std::uint64_t>(cfg_.window_seconds) * 1000000;
            window.push_back(pkt.ts_us);
            while (!window.empty() && pkt.ts_us - window.front() >= span) window.pop_front();
            const auto sit = profile_.timing_stats.find(k.timing);
            if (sit != profile_.timing_stats.end())
                rate_exceeded = window.size() >=
                                rate_bound(sit->second, cfg_.k_sigma, cfg_.window_seconds);
        }
    }

    if (src_known && dst_known && port_known && fc_known && !rate_exceeded) {
        out.kind = PatternKind::known;
        return out;
    }
    if (!src_known || !dst_known || !port_known) {
        out.kind = PatternKind::payload_port;
        out.evidence = !src_known   ? "source " + util::format_ipv4(pkt.src_ip) + " not in baseline"
                       : !dst_known ? "destination " + util::format_ipv4(pkt.dst_ip) + " not in baseline"
                                    : "port " + std::to_string(pkt.dst_port) + " not in baseline";
        return out;
    }
    if (frame && frame->is_request() && profile_.outstations.count(pkt.src_ip) &&
        !profile_.masters.count(pkt.src_ip)) {
        out.kind = PatternKind::flow_direction;
        out.evidence = "request from outstation-side address";
        return out;
    }
    if (frame && dnp3::is_critical(frame->app.function_code, cfg_.critical)) {
        out.kind = PatternKind::critical_command;
        out.evidence = dnp3::describe_function(frame->app.function_code) + " outside baseline";
        return out;
    }
    if (rate_exceeded) {
        out.kind = PatternKind::rate_threshold;
        out.evidence = "tuple above learned burst bound";
        return out;
    }
    out.kind = PatternKind::payload_port;
    out.evidence = frame ? "function code " + dnp3::describe_function(frame->app.function_code) +
                               " not in baseline for this pair"
                         : "unmatched traffic";
    return out;
}

TrafficPattern classify_observation(const BaselineProfile& profile,
                                    const net::ParsedPacket& pkt, PatternConfig cfg) {
    Classifier c(profile, cfg);
    return c.classify(pkt);
}

std::string GeneratedRuleset::text() const {
    std::string out;
    for (const auto& g : rules) {
        out += rules::render_rule(g.rule);
        out += '\n';
    }
    return out;
}

GeneratedRuleset generate_ruleset(const BaselineProfile& profile, const PatternConfig& cfg) {
    GeneratedRuleset out;

    auto to_cidrs = [](const std::set<std::uint32_t>& ips) {
        std::vector<util::Cidr> v;
        for (std::uint32_t ip : ips) v.push_back({ip, 32});
        return v;
    };
    out.variables["MASTERS"] = to_cidrs(profile.masters);
    out.variables["OUTSTATIONS"] = to_cidrs(profile.outstations);
    std::set<std::uint32_t> endpoints = profile.masters;
    endpoints.insert(profile.outstations.begin(), profile.outstations.end());
    out.variables["ENDPOINTS"] = to_cidrs(endpoints);

    const std::string provenance =
        (profile.source_id.empty() ? "capture" : profile.source_id) + "@" +
        std::to_string(profile.last_ts_us);
    std::uint32_t sid = kGeneratedSidBase;

    auto push = [&](rules::Rule r, TrafficPattern pat, std::string msg) {
        finish_rule(r, std::move(msg), sid++);
        out.rules.push_back({std::move(r), std::move(pat), provenance});
    };

    // critical commands from outside the learned master set
    for (std::uint8_t fc : cfg.critical) {
        rules::Rule r;
        r.proto = rules::RuleProto::tcp;
        r.src = var_expr("MASTERS", true);
        r.src_port = any_port();
        r.dst = var_expr("OUTSTATIONS", false);
        r.dst_port = ports_expr(profile.ports);
        r.options.emplace_back(fc_content(fc));
        TrafficPattern pat;
        pat.kind = PatternKind::critical_command;
        pat.function_code = fc;
        push(std::move(r), pat,
             "DNP3 " + dnp3::describe_function(fc) + " from unlearned source");
    }

    // connections toward the outstation port that never completed a handshake
    {
        rules::Rule r;
        r.proto = rules::RuleProto::tcp;
        r.src = var_expr("MASTERS", true);
        r.src_port = any_port();
        r.dst = var_expr("OUTSTATIONS", false);
        r.dst_port = ports_expr(profile.ports);
        r.options.emplace_back(rules::FlowOpt{.not_established = true});
        TrafficPattern pat;
        pat.kind = PatternKind::flow_direction;
        push(std::move(r), pat, "Unknown flow to outstation port");
    }

    // any traffic to the learned service port from outside the baseline
    {
        rules::Rule r;
        r.proto = rules::RuleProto::tcp;
        r.src = var_expr("ENDPOINTS", true);
        r.src_port = any_port();
        r.dst = any_expr();
        r.dst_port = ports_expr(profile.ports);
        TrafficPattern pat;
        pat.kind = PatternKind::payload_port;
        push(std::move(r), pat, "Unlearned endpoint to outstation port");
    }

    // per-tuple rate bounds over the learned request traffic
    for (const auto& [key, times] : profile.frame_times_us) {
        const auto& [master_ip, outstation_addr, fc] = key;
        if (fc > 0x21) continue; // responses carry no rate rule
        TimingStats stats = stats_from_times(times, cfg.window_seconds);
        rules::Rule r;
        r.proto = rules::RuleProto::tcp;
        r.src = host_expr(master_ip);
        r.src_port = any_port();
        r.dst = var_expr("OUTSTATIONS", false);
        r.dst_port = ports_expr(profile.ports);
        r.options.emplace_back(fc_content(fc));
        rules::ThresholdOpt th;
        th.type = rules::ThresholdType::both;
        th.track = rules::ThresholdTrack::by_src;
        th.count = stats.max_burst + 1;
        th.seconds = cfg.window_seconds;
        r.options.emplace_back(th);
        TrafficPattern pat;
        pat.kind = PatternKind::rate_threshold;
        pat.src_ip = master_ip;
        pat.outstation_addr = outstation_addr;
        pat.function_code = fc;
        push(std::move(r), pat,
             "DNP3 " + dnp3::describe_function(fc) + " above learned rate from " +
                 util::format_ipv4(master_ip) + " to outstation " +
                 std::to_string(outstation_addr));
    }

    // frame flood from anywhere outside the baseline
    {
        rules::Rule r;
        r.proto = rules::RuleProto::tcp;
        r.src = var_expr("ENDPOINTS", true);
        r.src_port = any_port();
        r.dst = any_expr();
        r.dst_port = any_port();
        r.options.emplace_back(start_bytes_content());
        rules::ThresholdOpt th;
        th.type = rules::ThresholdType::both;
        th.track = rules::ThresholdTrack::by_src;
        th.count = 5;
        th.seconds = 10;
        r.options.emplace_back(th);
        TrafficPattern pat;
        pat.kind = PatternKind::rate_threshold;
        push(std::move(r), pat, "DNP3 frame flood");
    }

    return out;
}

MergeResult merge_repository(const std::string& repo_text,
                             const std::vector<GeneratedRule>& fresh) {
    struct Entry {
        rules::Rule rule;
        int rank;
    };
    std::vector<Entry> merged;
    std::set<std::string> keys;

    std::istringstream in(repo_text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = util::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        rules::Rule r;
        try {
            r = rules::parse_rule(stripped);
        } catch (const rules::RuleError& e) {
            throw RulegenError("repository line " + std::to_string(lineno) + ": " + e.what());
        }
        keys.insert(rules::semantic_key(r));
        merged.push_back({std::move(r), 0});
        merged.back().rank = priority_rank(merged.back().rule);
    }

    std::string changelog;
    for (const auto& g : fresh) {
        const std::string key = rules::semantic_key(g.rule);
        if (keys.count(key)) {
            changelog += "SKIP " + std::to_string(g.rule.sid) + " duplicate of existing rule\n";
            continue;
        }
        const int rank = priority_rank(g.pattern.kind);
        auto pos = std::find_if(merged.begin(), merged.end(),
                                [rank](const Entry& e) { return e.rank > rank; });
        merged.insert(pos, {g.rule, rank});
        keys.insert(key);
        changelog += "ADD " + std::to_string(g.rule.sid) + " " +
                     pattern_kind_name(g.pattern.kind) + " rule\n";
    }

    MergeResult res;
    for (const auto& e : merged) {
        res.text += rules::render_rule(e.rule);
        res.text += '\n';
    }
    res.changelog = std::move(changelog);
    return res;
}

} // namespace dnp3ids::rulegen
