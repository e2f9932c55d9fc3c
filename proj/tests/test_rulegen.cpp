#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dnp3ids/pipeline.hpp"
#include "dnp3ids/rulegen.hpp"
#include "dnp3ids/synth.hpp"

using namespace dnp3ids;
using namespace dnp3ids::rulegen;

namespace {

synth::ScenarioConfig steady() {
    synth::ScenarioConfig cfg;
    cfg.count = 6;
    cfg.rate_hz = 2.0;  // one poll every 500 ms
    return cfg;
}

net::ParsedPacket request_pkt(std::uint32_t src, std::uint32_t dst, std::uint16_t dport,
                              std::uint8_t fc, std::uint64_t ts, std::uint16_t link_dst = 10) {
    net::ParsedPacket p;
    p.ts_us = ts;
    p.src_ip = src;
    p.dst_ip = dst;
    p.proto = net::IpProto::tcp;
    p.src_port = 49152;
    p.dst_port = dport;
    auto frame = dnp3::make_request(link_dst, 1, fc);
    p.payload = dnp3::encode_frame(frame);
    p.dnp3.push_back(frame);
    return p;
}

} // namespace

TEST_CASE("baseline learns endpoints, ports, and the function matrix") {
    auto scfg = steady();
    auto profile = learn_baseline(synth::synth_benign(scfg), 10, "bench1");

    CHECK(profile.masters == std::set<std::uint32_t>{scfg.master_ip});
    CHECK(profile.outstations == std::set<std::uint32_t>{scfg.outstation_ip});
    CHECK(profile.ports == std::set<std::uint16_t>{scfg.outstation_port});
    CHECK(profile.source_id == "bench1");

    MatrixKey mk{scfg.master_ip, scfg.outstation_addr};
    REQUIRE(profile.function_matrix.count(mk) == 1);
    const auto& fcs = profile.function_matrix.at(mk);
    CHECK(fcs.at(dnp3::FC_READ) == scfg.count);
    CHECK(fcs.at(dnp3::FC_RESPONSE) == scfg.count);

    TimingKey tk{scfg.master_ip, scfg.outstation_addr, dnp3::FC_READ};
    REQUIRE(profile.timing_stats.count(tk) == 1);
    const TimingStats& st = profile.timing_stats.at(tk);
    CHECK(st.count == scfg.count);
    CHECK(st.mean_interval_s == doctest::Approx(0.5).epsilon(0.01));
    CHECK(st.stddev_s == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(st.max_burst == scfg.count);  // 6 polls all fit in one 10 s window
}

TEST_CASE("a capture with no frames is refused") {
    auto cfg = steady();
    cfg.count = 5;
    CHECK_THROWS_AS(learn_baseline(synth::synth_flood(synth::FloodKind::syn_flood, cfg), 10),
                    NoDnp3Traffic);
}

TEST_CASE("rate_bound: burst floor plus a k-sigma estimate") {
    TimingStats quiet{0.5, 0.0, 6, 6};
    CHECK(rate_bound(quiet, 3.0, 10) == 20);  // 10 s / 0.5 s, zero variance

    TimingStats sparse{0.0, 0.0, 3, 1};       // one observation, burst only
    CHECK(rate_bound(sparse, 3.0, 10) == 4);

    TimingStats noisy{0.5, 0.25, 6, 6};
    // expected 20 plus 3 * (0.25 * 10 / 0.25) = 50
    CHECK(rate_bound(noisy, 3.0, 10) == 50);
}

TEST_CASE("classifier: baseline traffic is known, deviations pick their pattern") {
    auto scfg = steady();
    auto profile = learn_baseline(synth::synth_benign(scfg), 10);
    PatternConfig pcfg;

    // the learned poll replayed at its learned pace
    auto known = classify_observation(
        profile, request_pkt(scfg.master_ip, scfg.outstation_ip, scfg.outstation_port,
                             dnp3::FC_READ, 1'000'000));
    CHECK(known.kind == PatternKind::known);

    // pattern 1: unlearned endpoint
    auto stranger = classify_observation(
        profile, request_pkt(*util::parse_ipv4("10.9.9.9"), scfg.outstation_ip,
                             scfg.outstation_port, dnp3::FC_READ, 1'000'000));
    CHECK(stranger.kind == PatternKind::payload_port);
    CHECK(stranger.evidence.find("10.9.9.9") != std::string::npos);

    // pattern 1: unlearned port
    auto odd_port = classify_observation(
        profile, request_pkt(scfg.master_ip, scfg.outstation_ip, 9999, dnp3::FC_READ,
                             1'000'000));
    CHECK(odd_port.kind == PatternKind::payload_port);

    // pattern 2: a request issued from the outstation side
    net::ParsedPacket reversed = request_pkt(scfg.outstation_ip, scfg.master_ip,
                                             scfg.outstation_port, dnp3::FC_READ, 1'000'000);
    reversed.src_port = scfg.outstation_port;
    auto flow_dir = classify_observation(profile, reversed);
    CHECK(flow_dir.kind == PatternKind::flow_direction);

    // pattern 3: critical verb the baseline never saw
    auto critical = classify_observation(
        profile, request_pkt(scfg.master_ip, scfg.outstation_ip, scfg.outstation_port,
                             dnp3::FC_COLD_RESTART, 1'000'000));
    CHECK(critical.kind == PatternKind::critical_command);
    CHECK(critical.function_code == dnp3::FC_COLD_RESTART);

    // unlearned but non-critical verb falls back to pattern 1
    auto unusual = classify_observation(
        profile, request_pkt(scfg.master_ip, scfg.outstation_ip, scfg.outstation_port,
                             dnp3::FC_WRITE, 1'000'000));
    CHECK(unusual.kind == PatternKind::payload_port);
    CHECK(unusual.evidence.find("not in baseline for this pair") != std::string::npos);

    // pattern 4: the learned tuple, far above its learned rate
    Classifier cls(profile, pcfg);
    std::vector<PatternKind> kinds;
    for (int i = 0; i < 25; ++i)
        kinds.push_back(cls.classify(request_pkt(scfg.master_ip, scfg.outstation_ip,
                                                 scfg.outstation_port, dnp3::FC_READ,
                                                 1'000'000 + i * 100'000))
                            .kind);
    for (int i = 0; i < 19; ++i) CHECK(kinds[i] == PatternKind::known);
    CHECK(kinds[19] == PatternKind::rate_threshold);  // 20th frame in the window
}

TEST_CASE("generated ruleset: deterministic text, rising sids, grouped priorities") {
    auto scfg = steady();
    auto profile = learn_baseline(synth::synth_benign(scfg), 10);
    auto gen = generate_ruleset(profile);
    CHECK(gen.text() == generate_ruleset(profile).text());

    REQUIRE(!gen.rules.empty());
    CHECK(gen.variables.count("MASTERS") == 1);
    CHECK(gen.variables.count("OUTSTATIONS") == 1);
    CHECK(gen.variables.count("ENDPOINTS") == 1);

    std::uint32_t prev_sid = 0;
    int prev_rank = -1;
    auto rank_of = [](PatternKind k) {
        switch (k) {
            case PatternKind::critical_command: return 0;
            case PatternKind::flow_direction: return 1;
            case PatternKind::payload_port: return 2;
            case PatternKind::rate_threshold: return 3;
            default: return 4;
        }
    };
    for (const auto& g : gen.rules) {
        CHECK(g.rule.sid >= 1'000'000);
        CHECK(g.rule.sid > prev_sid);
        prev_sid = g.rule.sid;
        CHECK(rank_of(g.pattern.kind) >= prev_rank);
        prev_rank = rank_of(g.pattern.kind);
        CHECK_FALSE(g.provenance.empty());
    }
    CHECK(gen.rules[0].pattern.kind == PatternKind::critical_command);
}

TEST_CASE("generated rules compile and stay silent on their own baseline") {
    auto scfg = steady();
    auto capture = synth::synth_benign(scfg);
    auto profile = learn_baseline(capture, 10);
    auto gen = generate_ruleset(profile);

    auto rs = std::make_shared<const rules::RuleSet>(
        rules::compile_ruleset(gen.text(), gen.variables, 1));

    pipeline::PipelineConfig pcfg;
    pcfg.detectors.authorized_masters = {{scfg.master_ip, 32}};
    pipeline::Pipeline p(pcfg, rs);
    std::uint64_t alerts = 0;
    for (const auto& r : capture) alerts += p.process(r).alerts.size();
    CHECK(alerts == 0);
}

TEST_CASE("generated rules catch the attacks they were derived for") {
    auto scfg = steady();
    auto profile = learn_baseline(synth::synth_benign(scfg), 10);
    auto gen = generate_ruleset(profile);
    auto rs = std::make_shared<const rules::RuleSet>(
        rules::compile_ruleset(gen.text(), gen.variables, 1));

    pipeline::PipelineConfig pcfg;
    pcfg.detectors.authorized_masters = {{scfg.master_ip, 32}};

    // direct operate from an unlearned source: critical-command rule fires
    pipeline::Pipeline p(pcfg, rs);
    std::vector<rules::Alert> alerts;
    for (const auto& r : synth::synth_attack(synth::AttackKind::direct_operate, scfg)) {
        auto res = p.process(r);
        alerts.insert(alerts.end(), res.alerts.begin(), res.alerts.end());
    }
    bool critical_hit = false;
    for (const auto& a : alerts)
        critical_hit = critical_hit || a.msg.find("Dir operate") != std::string::npos;
    CHECK(critical_hit);

    // syn flood from a stranger: the not-established rule fires
    pipeline::Pipeline p2(pcfg, rs);
    auto flood_cfg = scfg;
    flood_cfg.count = 10;
    std::uint64_t flow_alerts = 0;
    for (const auto& r : synth::synth_flood(synth::FloodKind::syn_flood, flood_cfg))
        for (const auto& a : p2.process(r).alerts)
            if (a.msg.find("Unknown flow") != std::string::npos) ++flow_alerts;
    CHECK(flow_alerts == 10);
}

TEST_CASE("merge into an empty repository keeps priority order; re-merge skips all") {
    auto scfg = steady();
    auto profile = learn_baseline(synth::synth_benign(scfg), 10);
    auto gen = generate_ruleset(profile);

    auto m1 = merge_repository("", gen.rules);
    std::size_t adds = 0;
    std::istringstream log(m1.changelog);
    for (std::string line; std::getline(log, line);) {
        CHECK(line.rfind("ADD ", 0) == 0);
        ++adds;
    }
    CHECK(adds == gen.rules.size());

    // merged text is a loadable repository
    rules::RuleSet rs = rules::compile_ruleset(m1.text, gen.variables, 1);
    CHECK(rs.rules.size() == gen.rules.size());

    auto m2 = merge_repository(m1.text, gen.rules);
    CHECK(m2.text == m1.text);
    std::istringstream log2(m2.changelog);
    for (std::string line; std::getline(log2, line);) CHECK(line.rfind("SKIP ", 0) == 0);
}

TEST_CASE("fresh rules land before retained rules of lower priority") {
    const std::string repo =
        "alert tcp any any -> any 20000 (flow: not_established; msg:\"old flow\"; sid:500;)\n"
        "alert tcp any any -> any any (content:\" 05 64 \"; threshold: type both, track by_src, "
        "count 5, seconds 10; msg:\"old flood\"; sid:900;)\n";

    GeneratedRule fresh;
    fresh.rule = rules::parse_rule(
        "alert tcp !$MASTERS any -> $OUTSTATIONS 20000 (content:\" 0D \"; offset:12; depth:1; "
        "msg:\"cold restart probe\"; sid:1000001;)");
    fresh.pattern.kind = PatternKind::critical_command;

    auto m = merge_repository(repo, {fresh});
    std::vector<std::string> lines;
    std::istringstream in(m.text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].find("sid:1000001") != std::string::npos);  // newcomer on top
    CHECK(lines[1].find("sid:500") != std::string::npos);
    CHECK(lines[2].find("sid:900") != std::string::npos);
    CHECK(m.changelog.find("ADD 1000001") != std::string::npos);
}

TEST_CASE("a rule already in the repository is skipped even with a new sid and msg") {
    auto scfg = steady();
    auto profile = learn_baseline(synth::synth_benign(scfg), 10);
    auto gen = generate_ruleset(profile);
    REQUIRE(!gen.rules.empty());

    // repository already holds rule 0 under a different identity
    rules::Rule existing = gen.rules[0].rule;
    std::string repo;
    for (auto& opt : existing.options) {
        if (auto* s = std::get_if<rules::SidOpt>(&opt)) s->value = 42;
        if (auto* msg = std::get_if<rules::MsgOpt>(&opt)) msg->text = "someone else's name";
    }
    repo = rules::render_rule(existing) + "\n";

    auto m = merge_repository(repo, {gen.rules[0]});
    CHECK(m.changelog.find("SKIP") != std::string::npos);
    std::size_t rule_lines = 0;
    std::istringstream in(m.text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rule_lines;
    CHECK(rule_lines == 1);
}

TEST_CASE("a broken repository line is reported with its number") {
    GeneratedRule fresh;
    fresh.rule = rules::parse_rule("alert tcp any any -> any any (content:\"x\"; sid:1;)");
    fresh.pattern.kind = PatternKind::payload_port;
    try {
        merge_repository("# fine\nnot a rule at all\n", {fresh});
        FAIL("expected RulegenError");
    } catch (const RulegenError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}
