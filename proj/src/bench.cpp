#include "dnp3ids/bench.hpp"

#include "dnp3ids/dnp3.hpp"
#include "dnp3ids/packet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace dnp3ids::bench {

using namespace util;

std::vector<LatencySample> measure_detection(const rules::RuleSet& rs,
                                             const std::vector<pcap::CaptureRecord>& capture,
                                             int repetitions,
                                             const pipeline::PipelineConfig& pcfg) {
    auto shared = std::make_shared<const rules::RuleSet>(rs);
    std::vector<LatencySample> samples;
    for (int rep = 0; rep < repetitions; ++rep) {
        pipeline::Pipeline pipe(pcfg, shared);
        for (const auto& rec : capture) {
            const auto t0 = std::chrono::steady_clock::now();
            auto result = pipe.process(rec);
            const auto t1 = std::chrono::steady_clock::now();
            const auto ns = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
            for (const auto& a : result.alerts)
                samples.push_back({a.sid, rec.ts_us, ns, result.options_evaluated});
        }
    }
    return samples;
}

namespace {

struct Agg {
    std::vector<double> lat_us;
    std::vector<double> options;
};

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double idx = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = idx - lo;
    return v[lo] * (1 - frac) + v[hi] * frac;
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double acc = 0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / v.size());
}

std::vector<RuleLatency> aggregate(const rules::RuleSet& rs,
                                   const std::vector<LatencySample>& samples) {
    // the report is per-rule: alerts raised directly by detectors have no
    // position in either ordering and stay out of it
    std::set<std::uint32_t> rule_sids;
    for (const auto& r : rs.rules) rule_sids.insert(r.sid);

    std::map<std::uint32_t, Agg> by_sid;
    for (const auto& s : samples) {
        if (!rule_sids.count(s.sid)) continue;
        auto& a = by_sid[s.sid];
        a.lat_us.push_back(s.detection_ns / 1000.0);
        a.options.push_back(static_cast<double>(s.options_evaluated));
    }
    std::vector<RuleLatency> out;
    for (auto& [sid, agg] : by_sid) {
        RuleLatency rl;
        rl.sid = sid;
        for (std::size_t i = 0; i < rs.rules.size(); ++i)
            if (rs.rules[i].sid == sid) {
                rl.position = i + 1;
                break;
            }
        rl.samples = agg.lat_us.size();
        rl.mean_us = mean(agg.lat_us);
        rl.median_us = quantile(agg.lat_us, 0.5);
        rl.p95_us = quantile(agg.lat_us, 0.95);
        rl.stddev_us = stddev(agg.lat_us);
        rl.mean_options = mean(agg.options);
        out.push_back(rl);
    }
    return out;
}

std::multiset<std::string> rule_multiset(const rules::RuleSet& rs) {
    std::multiset<std::string> keys;
    for (const auto& r : rs.rules) keys.insert(rules::render_rule(r));
    return keys;
}

} // namespace

SequenceReport compare_sequences(const rules::RuleSet& seq1, const rules::RuleSet& seq2,
                                 const std::vector<pcap::CaptureRecord>& capture,
                                 int repetitions, const pipeline::PipelineConfig& pcfg) {
    if (rule_multiset(seq1) != rule_multiset(seq2))
        throw RuleSetMismatch("orderings contain different rules");

    SequenceReport report;
    report.seq1 = aggregate(seq1, measure_detection(seq1, capture, repetitions, pcfg));
    report.seq2 = aggregate(seq2, measure_detection(seq2, capture, repetitions, pcfg));

    report.all_options_follow_position = true;
    for (const auto& r1 : report.seq1) {
        const RuleLatency* r2 = nullptr;
        for (const auto& cand : report.seq2)
            if (cand.sid == r1.sid) r2 = &cand;
        if (!r2) continue;
        SequenceReport::Row row;
        row.sid = r1.sid;
        row.pos1 = r1.position;
        row.pos2 = r2->position;
        row.mean_us_1 = r1.mean_us;
        row.mean_us_2 = r2->mean_us;
        row.mean_options_1 = r1.mean_options;
        row.mean_options_2 = r2->mean_options;
        if (row.pos1 == row.pos2) {
            row.options_follow_position = row.mean_options_1 == row.mean_options_2;
            row.latency_follows_position = true;
        } else {
            const bool earlier_in_1 = row.pos1 < row.pos2;
            row.options_follow_position = earlier_in_1
                                              ? row.mean_options_1 < row.mean_options_2
                                              : row.mean_options_2 < row.mean_options_1;
            row.latency_follows_position = earlier_in_1
                                               ? row.mean_us_1 <= row.mean_us_2
                                               : row.mean_us_2 <= row.mean_us_1;
        }
        report.all_options_follow_position &= row.options_follow_position;
        report.comparison.push_back(row);
    }
    return report;
}

std::string SequenceReport::text_table() const {
    std::ostringstream os;
    char line[160];
    os << "sid   seq1 pos  seq2 pos  mean_us(1)  mean_us(2)  options(1)  options(2)  "
          "fewer_opts  lower_lat\n";
    for (const auto& row : comparison) {
        const char* fewer = row.mean_options_1 < row.mean_options_2   ? "seq1"
                            : row.mean_options_2 < row.mean_options_1 ? "seq2"
                                                                      : "tie";
        const char* lower = row.mean_us_1 < row.mean_us_2   ? "seq1"
                            : row.mean_us_2 < row.mean_us_1 ? "seq2"
                                                            : "tie";
        std::snprintf(line, sizeof line,
                      "%-5u %-9zu %-9zu %-11.3f %-11.3f %-11.2f %-11.2f %-11s %s\n",
                      row.sid, row.pos1, row.pos2, row.mean_us_1, row.mean_us_2,
                      row.mean_options_1, row.mean_options_2, fewer, lower);
        os << line;
    }
    return os.str();
}

std::string SequenceReport::csv() const {
    std::ostringstream os;
    os << "rule_sid,ordering,position,mean_us,median_us,p95_us,mean_options\n";
    char line[160];
    for (const auto* seq : {&seq1, &seq2}) {
        const int ordering = seq == &seq1 ? 1 : 2;
        for (const auto& rl : *seq) {
            std::snprintf(line, sizeof line, "%u,%d,%zu,%.3f,%.3f,%.3f,%.3f\n", rl.sid,
                          ordering, rl.position, rl.mean_us, rl.median_us, rl.p95_us,
                          rl.mean_options);
            os << line;
        }
    }
    return os.str();
}

namespace {

// Minimal TCP session builder for the reference capture.
struct MiniSession {
    std::uint32_t src_ip, dst_ip;
    std::uint16_t src_port, dst_port;
    std::uint32_t seq, peer_seq;

    void handshake(std::vector<pcap::CaptureRecord>& out, std::uint64_t& ts) {
        out.push_back({ts, net::build_tcp_packet({src_ip, dst_ip, src_port, dst_port, seq,
                                                  0, net::TCP_SYN, 0, {}})});
        ts += 1000;
        out.push_back({ts, net::build_tcp_packet({dst_ip, src_ip, dst_port, src_port,
                                                  peer_seq, seq + 1,
                                                  net::TCP_SYN | net::TCP_ACK, 0, {}})});
        ts += 1000;
        ++seq;
        ++peer_seq;
        out.push_back({ts, net::build_tcp_packet({src_ip, dst_ip, src_port, dst_port, seq,
                                                  peer_seq, net::TCP_ACK, 0, {}})});
        ts += 1000;
    }

    void send(std::vector<pcap::CaptureRecord>& out, std::uint64_t& ts,
              const std::vector<std::uint8_t>& payload) {
        out.push_back({ts, net::build_tcp_packet({src_ip, dst_ip, src_port, dst_port, seq,
                                                  peer_seq, net::TCP_ACK | net::TCP_PSH, 0,
                                                  payload})});
        seq += static_cast<std::uint32_t>(payload.size());
        ts += 1000;
    }
};

} // namespace

ReferenceScenario make_reference_scenario() {
    ReferenceScenario sc;
    sc.rules_seq1 =
        "alert ip 10.9.9.0/24 any -> any any (msg:\"icmp sweep pattern\"; "
        "content:\"abcdefghijklmnop\"; sid:21;)\n"
        "alert ip 10.9.9.0/24 any -> any any (msg:\"unestablished probe\"; "
        "flow:not_established; sid:22;)\n"
        "alert ip 10.9.9.0/24 any -> any any (msg:\"direct operate request\"; "
        "content:\" 05 \"; offset:12; depth:1; sid:23;)\n"
        "alert ip 10.9.9.0/24 any -> any any (msg:\"read flood\"; content:\" 01 \"; "
        "offset:12; depth:1; threshold:type both, track by_src, count 5, seconds 10; "
        "sid:24;)\n";
    {
        // seq2 is seq1 reversed
        auto lines = split(sc.rules_seq1, '\n');
        std::string rev;
        for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
            if (it->empty()) continue;
            rev += *it;
            rev += '\n';
        }
        sc.rules_seq2 = rev;
    }

    const std::uint32_t victim = *parse_ipv4("10.0.0.2");
    const std::uint32_t src_a = *parse_ipv4("10.9.9.1"); // icmp pattern
    const std::uint32_t src_b = *parse_ipv4("10.9.9.2"); // bare syn probes
    const std::uint32_t src_c = *parse_ipv4("10.9.9.3"); // operate requests
    const std::uint32_t src_d = *parse_ipv4("10.9.9.4"); // read flood
    const std::uint32_t src_e = *parse_ipv4("10.9.9.5"); // miss traffic

    std::uint64_t ts = 1'700'000'000'000'000ull;
    auto& cap = sc.capture;

    const std::string pattern = "abcdefghijklmnop";
    std::vector<std::uint8_t> echo_data(pattern.begin(), pattern.end());
    for (int i = 0; i < 3; ++i) {
        cap.push_back({ts, net::build_icmp_echo(src_a, victim, 0x77, static_cast<std::uint16_t>(i),
                                                echo_data)});
        ts += 1000;
    }

    for (int i = 0; i < 4; ++i) {
        cap.push_back({ts, net::build_tcp_packet({src_b, victim, static_cast<std::uint16_t>(40000 + i),
                                                  20000, 0x1000u + static_cast<std::uint32_t>(i),
                                                  0, net::TCP_SYN, 0, {}})});
        ts += 1000;
    }

    const std::vector<std::uint8_t> crob = {0x0C, 0x01, 0x17, 0x01, 0x00, 0x41, 0x01,
                                            0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
                                            0x00, 0x00, 0x00};
    MiniSession c{src_c, victim, 50001, 20000, 0x2000, 0x9000};
    c.handshake(cap, ts);
    for (int i = 0; i < 3; ++i)
        c.send(cap, ts,
               dnp3::encode_frame(dnp3::make_request(10, 1, dnp3::FC_DIRECT_OPERATE, crob,
                                                     static_cast<std::uint8_t>(i),
                                                     static_cast<std::uint8_t>(i))));

    const std::vector<std::uint8_t> class_poll = {0x3C, 0x02, 0x06, 0x3C, 0x03, 0x06,
                                                  0x3C, 0x04, 0x06, 0x3C, 0x01, 0x06};
    MiniSession d{src_d, victim, 50002, 20000, 0x3000, 0x9800};
    d.handshake(cap, ts);
    for (int i = 0; i < 5; ++i)
        d.send(cap, ts,
               dnp3::encode_frame(dnp3::make_request(10, 1, dnp3::FC_READ, class_poll,
                                                     static_cast<std::uint8_t>(i),
                                                     static_cast<std::uint8_t>(i))));

    // miss traffic: headers match every rule, no option does. UDP so the
    // flow rule has no verdict to bite on.
    auto& miss = sc.miss_capture;
    std::uint64_t mts = ts + 1'000'000;
    const std::vector<std::uint8_t> write_body = {0x50, 0x01, 0x00, 0x07, 0x07, 0x00};
    for (int i = 0; i < 6; ++i) {
        auto frame = dnp3::encode_frame(dnp3::make_request(10, 1, dnp3::FC_WRITE, write_body,
                                                           static_cast<std::uint8_t>(i),
                                                           static_cast<std::uint8_t>(i)));
        miss.push_back({mts, net::build_udp_packet(src_e, victim, 50003, 20000, frame)});
        mts += 1000;
    }
    return sc;
}

double mean_options_per_packet(const rules::RuleSet& rs,
                               const std::vector<pcap::CaptureRecord>& capture,
                               const pipeline::PipelineConfig& pcfg) {
    if (capture.empty()) return 0.0;
    pipeline::Pipeline pipe(pcfg, std::make_shared<const rules::RuleSet>(rs));
    for (const auto& rec : capture) pipe.process(rec);
    return static_cast<double>(pipe.stats().options_evaluated) /
           static_cast<double>(pipe.stats().packets_in);
}

} // namespace dnp3ids::bench
