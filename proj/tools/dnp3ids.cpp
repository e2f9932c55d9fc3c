#include "dnp3ids/bench.hpp"
#include "dnp3ids/config.hpp"
#include "dnp3ids/master.hpp"
#include "dnp3ids/pipeline.hpp"
#include "dnp3ids/rulegen.hpp"
#include "dnp3ids/sensor.hpp"
#include "dnp3ids/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace dnp3ids;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

cfg::Config base_config(const std::string& config_flag) {
    if (!config_flag.empty()) return cfg::Config::from_file(config_flag);
    if (const char* env = std::getenv("DNP3IDS_CONFIG"); env && *env && fs::exists(env))
        return cfg::Config::from_file(env);
    return {};
}

// NAME=cidr[,cidr...] flags merged over the config file's variables
rules::VarTable merge_vars(const cfg::Config& conf, const std::vector<std::string>& var_flags) {
    rules::VarTable vars = conf.variables();
    for (const auto& flag : var_flags) {
        auto eq = flag.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--var expects NAME=cidr[,cidr...]: " + flag);
        const std::string name = flag.substr(0, eq);
        std::vector<util::Cidr> cidrs;
        for (const auto& part : util::split(flag.substr(eq + 1), ',')) {
            auto c = util::parse_cidr(util::trim(part));
            if (!c) throw std::runtime_error("bad CIDR in --var " + name + ": " + part);
            cidrs.push_back(*c);
        }
        vars[name] = std::move(cidrs);
    }
    return vars;
}

std::vector<util::Cidr> parse_cidr_list(const std::string& csv) {
    std::vector<util::Cidr> out;
    for (const auto& part : util::split(csv, ',')) {
        if (util::trim(part).empty()) continue;
        auto c = util::parse_cidr(util::trim(part));
        if (!c) throw std::runtime_error("bad CIDR: " + part);
        out.push_back(*c);
    }
    return out;
}

std::string alert_line(const rules::Alert& a) {
    char buf[384];
    std::string fc = "-";
    if (a.dnp3_fc >= 0) {
        char fcbuf[16];
        std::snprintf(fcbuf, sizeof fcbuf, "0x%02X", a.dnp3_fc);
        fc = fcbuf;
    }
    const char* proto = a.proto == net::IpProto::tcp    ? "tcp"
                        : a.proto == net::IpProto::udp  ? "udp"
                        : a.proto == net::IpProto::icmp ? "icmp"
                                                        : "other";
    std::snprintf(buf, sizeof buf,
                  "alert t=%.6f gid=%u sid=%u \"%s\" %s:%u->%s:%u proto=%s fc=%s pos=%d v=%llu",
                  a.ts_us / 1e6, a.gid, a.sid, a.msg.c_str(),
                  util::format_ipv4(a.src_ip).c_str(), a.src_port,
                  util::format_ipv4(a.dst_ip).c_str(), a.dst_port, proto, fc.c_str(),
                  a.rule_position, static_cast<unsigned long long>(a.rule_version));
    return buf;
}

// ---- parse ----

int cmd_parse(const std::string& pcap_path) {
    auto records = pcap::read_capture(pcap_path);
    for (const auto& rec : records) {
        auto outcome = net::decode_packet(rec);
        if (!outcome.packet) continue;
        const auto& pkt = *outcome.packet;
        for (const auto& frame : pkt.dnp3) {
            char line[256];
            std::snprintf(line, sizeof line, "t=%.6f %s→%s dst_addr=%u fc=0x%02X %s crc=%s",
                          pkt.ts_us / 1e6, util::format_ipv4(pkt.src_ip).c_str(),
                          util::format_ipv4(pkt.dst_ip).c_str(), frame.link.destination,
                          frame.app.function_code,
                          dnp3::describe_function(frame.app.function_code).c_str(),
                          frame.all_crc_valid() ? "ok" : "bad");
            std::cout << line << "\n";
        }
    }
    return 0;
}

// ---- sensor ----

struct SensorArgs {
    std::string config;
    std::string id;
    std::string rules_path;
    std::string master; // host:port
    std::string token;
    std::string pcap_path;
    std::string mode; // resolved against config in cmd_sensor
    std::string output;
    std::string authorized_masters;
    std::vector<std::string> vars;
    std::uint64_t select_timeout_us = 10'000'000;
    std::size_t spool = 10000;
    bool evaluate_all = false;
    bool quiet = false;
};

int cmd_sensor(const SensorArgs& args) {
    auto conf = base_config(args.config);
    const std::string id = !args.id.empty() ? args.id : conf.get("sensor_id", "sensor-1");
    const std::string rules_path =
        !args.rules_path.empty() ? args.rules_path : conf.get("rules");
    const std::string pcap_path =
        !args.pcap_path.empty() ? args.pcap_path : conf.get("source");
    const std::string mode = args.mode.empty() ? conf.get("mode", "ids") : args.mode;

    if (mode != "ids" && mode != "ips") {
        std::cerr << "error: mode must be ids or ips\n";
        return 2;
    }
    if (mode == "ids" && !args.output.empty()) {
        std::cerr << "error: --output only applies in ips mode\n";
        return 2;
    }
    if (mode == "ips" && args.output.empty()) {
        std::cerr << "error: ips mode needs --output for the forwarded capture\n";
        return 2;
    }
    if (rules_path.empty()) throw std::runtime_error("no rules file given (--rules)");
    if (!fs::exists(rules_path))
        throw std::runtime_error("rules file not found: " + rules_path);
    if (pcap_path.empty()) throw std::runtime_error("no capture source given (--pcap)");

    rules::VarTable vars = merge_vars(conf, args.vars);
    auto rs = std::make_shared<const rules::RuleSet>(
        rules::compile_ruleset(read_file(rules_path), vars, 1));

    pipeline::PipelineConfig pcfg;
    pcfg.mode = mode == "ips" ? pipeline::Mode::ips : pipeline::Mode::ids;
    pcfg.eval.evaluate_all = args.evaluate_all || conf.get_bool("evaluate_all", false);
    pcfg.detectors.select_timeout_us =
        args.select_timeout_us != 10'000'000
            ? args.select_timeout_us
            : conf.get_u64("select_timeout_us", 10'000'000);
    const std::string auth = !args.authorized_masters.empty()
                                 ? args.authorized_masters
                                 : conf.get("authorized_masters");
    if (!auth.empty()) pcfg.detectors.authorized_masters = parse_cidr_list(auth);

    pipeline::Pipeline pipe(pcfg, rs);

    std::unique_ptr<dist::SensorUplink> uplink;
    if (const std::string master = !args.master.empty() ? args.master : conf.get("master");
        !master.empty()) {
        dist::UplinkConfig ucfg;
        ucfg.sensor_id = id;
        auto colon = master.rfind(':');
        ucfg.master_host = colon == std::string::npos ? master : master.substr(0, colon);
        if (colon != std::string::npos)
            ucfg.master_port = static_cast<std::uint16_t>(std::stoi(master.substr(colon + 1)));
        ucfg.token = !args.token.empty() ? args.token : conf.get("token");
        ucfg.spool_capacity = args.spool;
        uplink = std::make_unique<dist::SensorUplink>(
            ucfg, [&pipe](std::shared_ptr<const rules::RuleSet> next) {
                pipe.swap_ruleset(std::move(next));
            });
        uplink->set_rule_version(rs->version);
        uplink->start();
    }

    pcap::PcapReader reader(pcap_path);
    std::unique_ptr<pcap::PcapWriter> writer;
    if (pcfg.mode == pipeline::Mode::ips)
        writer = std::make_unique<pcap::PcapWriter>(args.output);

    auto stats = pipe.run(
        reader,
        [&](const rules::Alert& a) {
            if (!args.quiet) std::cout << alert_line(a) << "\n";
            if (uplink) uplink->submit(a);
        },
        writer.get());

    if (uplink) {
        if (!uplink->wait_drained(15000))
            std::cerr << "warning: uplink not drained (master unreachable?)\n";
        uplink->stop();
    }
    std::cerr << "packets_in=" << stats.packets_in << " dnp3_frames=" << stats.dnp3_frames
              << " alerts=" << stats.alerts << " dropped=" << stats.packets_dropped
              << " forwarded=" << stats.packets_out << "\n";
    return 0;
}

// ---- master ----

struct MasterArgs {
    std::string config;
    std::string bind = "0.0.0.0";
    std::uint16_t port = dist::kDefaultMasterPort;
    std::string store_dir;
    std::string rules_path;
    std::string token;
    std::vector<std::string> vars;
    unsigned poll_ms = 1000;
    std::uint64_t run_for_ms = 0; // 0 = until signal
};

int cmd_master(const MasterArgs& args) {
    auto conf = base_config(args.config);
    dist::MasterConfig mcfg;
    mcfg.bind_addr = args.bind;
    mcfg.port = args.port;
    mcfg.store_dir = !args.store_dir.empty() ? args.store_dir : conf.get("store", "alert-store");
    mcfg.token = !args.token.empty() ? args.token : conf.get("token");

    rules::VarTable vars = merge_vars(conf, args.vars);
    const std::string rules_path =
        !args.rules_path.empty() ? args.rules_path : conf.get("rules");

    dist::MasterNode node(mcfg);
    fs::file_time_type last_mtime{};
    if (!rules_path.empty()) {
        if (!fs::exists(rules_path))
            throw std::runtime_error("rules file not found: " + rules_path);
        node.set_rules(read_file(rules_path), vars);
        last_mtime = fs::last_write_time(rules_path);
    }
    node.start();
    std::cerr << "listening on " << mcfg.bind_addr << ":" << node.port() << ", store "
              << mcfg.store_dir << "\n";

    const auto started = std::chrono::steady_clock::now();
    auto last_poll = started;
    while (!g_stop) {
        // short sleep keeps signal / --run-for-ms response snappy; the rules
        // file itself is only stat'ed every --poll-ms
        std::this_thread::sleep_for(std::chrono::milliseconds(
            std::clamp<std::uint64_t>(args.poll_ms, 1, 200)));
        const auto now = std::chrono::steady_clock::now();
        if (args.run_for_ms != 0 && now - started >= std::chrono::milliseconds(args.run_for_ms))
            break;
        if (now - last_poll < std::chrono::milliseconds(args.poll_ms)) continue;
        last_poll = now;
        if (rules_path.empty() || !fs::exists(rules_path)) continue;
        auto mtime = fs::last_write_time(rules_path);
        if (mtime == last_mtime) continue;
        last_mtime = mtime;
        try {
            auto acks = node.push_rules(read_file(rules_path), vars);
            std::ostringstream os;
            os << "push v=" << node.rule_version();
            for (const auto& [sensor, status] : acks) os << " " << sensor << "=" << status;
            std::cout << os.str() << "\n" << std::flush;
        } catch (const dist::CompileFailedAtMaster& e) {
            std::cerr << "rules rejected: " << e.what() << "\n";
        }
    }
    node.stop();
    return 0;
}

// ---- rulegen ----

struct RulegenArgs {
    std::string pcap_path;
    std::uint32_t window = 10;
    std::string source_id;
    double k_sigma = 3.0;
    std::string out;
    std::string merge_repo;
};

int cmd_rulegen(const RulegenArgs& args) {
    auto records = pcap::read_capture(args.pcap_path);
    const std::string source =
        args.source_id.empty() ? fs::path(args.pcap_path).filename().string() : args.source_id;
    auto profile = rulegen::learn_baseline(records, args.window, source);

    rulegen::PatternConfig pcfg;
    pcfg.k_sigma = args.k_sigma;
    pcfg.window_seconds = args.window;
    auto generated = rulegen::generate_ruleset(profile, pcfg);

    std::cerr << "baseline: " << profile.masters.size() << " master(s), "
              << profile.outstations.size() << " outstation(s), "
              << profile.frame_times_us.size() << " frames\n";

    if (!args.merge_repo.empty()) {
        auto merged = rulegen::merge_repository(read_file(args.merge_repo), generated.rules);
        write_file(args.out.empty() ? args.merge_repo : args.out, merged.text);
        std::cout << merged.changelog;
        return 0;
    }
    if (args.out.empty())
        std::cout << generated.text();
    else
        write_file(args.out, generated.text());
    return 0;
}

// ---- bench ----

struct BenchArgs {
    bool reference = false;
    std::string seq_a, seq_b, pcap_path;
    std::vector<std::string> vars;
    int reps = 200;
    std::string csv_path;
};

int cmd_bench(const BenchArgs& args) {
    rules::RuleSet rs1, rs2;
    std::vector<pcap::CaptureRecord> capture;
    if (args.reference) {
        auto sc = bench::make_reference_scenario();
        rs1 = rules::compile_ruleset(sc.rules_seq1, sc.vars, 1);
        rs2 = rules::compile_ruleset(sc.rules_seq2, sc.vars, 1);
        capture = std::move(sc.capture);
    } else {
        if (args.seq_a.empty() || args.seq_b.empty() || args.pcap_path.empty())
            throw CLI::ValidationError("bench",
                                       "either --reference or --seq-a/--seq-b/--pcap");
        auto conf = base_config("");
        rules::VarTable vars = merge_vars(conf, args.vars);
        rs1 = rules::compile_ruleset(read_file(args.seq_a), vars, 1);
        rs2 = rules::compile_ruleset(read_file(args.seq_b), vars, 1);
        capture = pcap::read_capture(args.pcap_path);
    }

    auto report = bench::compare_sequences(rs1, rs2, capture, args.reps);
    std::cout << report.text_table() << "\n" << report.csv();
    if (!args.csv_path.empty()) write_file(args.csv_path, report.csv());
    if (!report.all_options_follow_position)
        std::cerr << "warning: option counts do not follow rule position\n";
    return 0;
}

// ---- query ----

struct QueryArgs {
    std::string store_dir;
    std::uint64_t from_us = 0, to_us = 0;
    std::string sensor;
    std::int64_t sid = -1, gid = -1;
    std::size_t limit = 0;
    bool follow = false;
};

int cmd_query(const QueryArgs& args) {
    dist::StoreQuery q;
    if (args.from_us) q.from_ts_us = args.from_us;
    if (args.to_us) q.to_ts_us = args.to_us;
    if (!args.sensor.empty()) q.sensor_id = args.sensor;
    if (args.sid >= 0) q.sid = static_cast<std::uint32_t>(args.sid);
    if (args.gid >= 0) q.gid = static_cast<std::uint32_t>(args.gid);
    q.limit = args.limit;

    std::set<std::pair<std::string, std::uint64_t>> printed;
    for (;;) {
        dist::AlertStore store(args.store_dir);
        for (const auto& rec : store.query(q)) {
            if (!printed.insert({rec.sensor_id, rec.seq}).second) continue;
            std::cout << dist::encode_alert(rec) << std::flush;
        }
        if (!args.follow || g_stop) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(500));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    CLI::App app{"DNP3 network intrusion detection toolkit"};
    app.require_subcommand(1);

    // parse
    std::string parse_pcap;
    auto* parse_cmd = app.add_subcommand("parse", "dump decoded DNP3 frames from a capture");
    parse_cmd->add_option("pcap", parse_pcap, "capture file")->required();

    // sensor
    SensorArgs sargs;
    auto* sensor_cmd = app.add_subcommand("sensor", "run the detection pipeline over a capture");
    sensor_cmd->add_option("--config", sargs.config, "key=value config file");
    sensor_cmd->add_option("--id", sargs.id, "sensor identifier");
    sensor_cmd->add_option("--rules", sargs.rules_path, "rules file");
    sensor_cmd->add_option("--master", sargs.master, "master host:port for alert forwarding");
    sensor_cmd->add_option("--token", sargs.token, "shared hello token");
    sensor_cmd->add_option("--pcap", sargs.pcap_path, "capture source");
    sensor_cmd->add_option("--mode", sargs.mode, "ids or ips")
        ->check(CLI::IsMember({"ids", "ips"}));
    sensor_cmd->add_option("--output", sargs.output, "forwarded-traffic capture (ips mode)");
    sensor_cmd->add_option("--authorized-masters", sargs.authorized_masters,
                           "CIDR list of legitimate masters");
    sensor_cmd->add_option("--var", sargs.vars, "rule variable NAME=cidr[,cidr...]");
    sensor_cmd->add_option("--select-timeout-us", sargs.select_timeout_us,
                           "select/operate pairing timeout");
    sensor_cmd->add_option("--spool", sargs.spool, "uplink spool capacity");
    sensor_cmd->add_flag("--evaluate-all", sargs.evaluate_all,
                         "keep evaluating rules after the first match");
    sensor_cmd->add_flag("--quiet", sargs.quiet, "suppress per-alert output");

    // master
    MasterArgs margs;
    auto* master_cmd = app.add_subcommand("master", "run the ingest/store/push service");
    master_cmd->add_option("--config", margs.config, "key=value config file");
    master_cmd->add_option("--bind", margs.bind, "bind address");
    master_cmd->add_option("--port", margs.port, "listen port");
    master_cmd->add_option("--store", margs.store_dir, "alert store directory");
    master_cmd->add_option("--rules", margs.rules_path,
                           "rules file pushed to sensors when it changes");
    master_cmd->add_option("--token", margs.token, "required hello token");
    master_cmd->add_option("--var", margs.vars, "rule variable NAME=cidr[,cidr...]");
    master_cmd->add_option("--poll-ms", margs.poll_ms, "rules file poll interval");
    master_cmd->add_option("--run-for-ms", margs.run_for_ms, "exit after this long (0 = run until signal)");

    // rulegen
    RulegenArgs rargs;
    auto* rulegen_cmd = app.add_subcommand("rulegen", "learn a baseline and generate rules");
    rulegen_cmd->add_option("--pcap", rargs.pcap_path, "baseline capture")->required();
    rulegen_cmd->add_option("--window", rargs.window, "rate window seconds");
    rulegen_cmd->add_option("--source-id", rargs.source_id, "provenance tag");
    rulegen_cmd->add_option("--k-sigma", rargs.k_sigma, "rate bound sigma multiplier");
    rulegen_cmd->add_option("--out", rargs.out, "output rules file (default stdout)");
    rulegen_cmd->add_option("--merge", rargs.merge_repo, "merge into this rule repository");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "emit deterministic capture files");
    synth_cmd->require_subcommand(1);
    synth::ScenarioConfig sc;
    std::string synth_out, attack_kind, flood_kind = "dnp3", corrupt_in, corrupt_site = "body";
    std::size_t random_n = 100, corrupt_index = 0;
    unsigned corrupt_bit = 0;
    bool spoof = false, control_exchange = false;
    std::uint32_t count = 100;
    double rate = 1.0;
    std::uint32_t seconds = 10;
    std::uint64_t seed = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", synth_out, "output capture file")->required();
        cmd->add_option("--count", count, "poll cycles / flood frames");
        cmd->add_option("--rate", rate, "poll cycles per second");
        cmd->add_option("--seconds", seconds, "flood window seconds");
        cmd->add_option("--seed", seed, "prng seed");
    };
    auto* benign_cmd = synth_cmd->add_subcommand("benign", "poll/response background traffic");
    add_common(benign_cmd);
    benign_cmd->add_flag("--control-exchange", control_exchange,
                         "include one select/operate pair");
    auto* attack_cmd = synth_cmd->add_subcommand("attack", "attack embedded in background");
    add_common(attack_cmd);
    attack_cmd
        ->add_option("--kind", attack_kind,
                     "replay|direct-operate|broadcast|disable-unsolicited|stop-application|"
                     "cold-restart")
        ->required()
        ->check(CLI::IsMember({"replay", "direct-operate", "broadcast", "disable-unsolicited",
                               "stop-application", "cold-restart"}));
    attack_cmd->add_flag("--spoof", spoof, "inject into the victim session midstream");
    auto* flood_cmd = synth_cmd->add_subcommand("flood", "rate-anomaly traffic");
    add_common(flood_cmd);
    flood_cmd->add_option("--kind", flood_kind, "dnp3|syn|portscan")
        ->check(CLI::IsMember({"dnp3", "syn", "portscan"}));
    auto* random_cmd = synth_cmd->add_subcommand("random", "randomized valid frames");
    add_common(random_cmd);
    random_cmd->add_option("--n", random_n, "frame count");
    auto* corrupt_cmd = synth_cmd->add_subcommand("corrupt", "flip one CRC-covered bit");
    corrupt_cmd->add_option("--in", corrupt_in, "input capture")->required();
    corrupt_cmd->add_option("--out", synth_out, "output capture file")->required();
    corrupt_cmd->add_option("--index", corrupt_index, "record index")->required();
    corrupt_cmd->add_option("--site", corrupt_site, "header|body")
        ->check(CLI::IsMember({"header", "body"}));
    corrupt_cmd->add_option("--bit", corrupt_bit, "bit to flip (0-7)");

    // bench
    BenchArgs bargs;
    auto* bench_cmd = app.add_subcommand("bench", "rule-ordering detection-time comparison");
    bench_cmd->add_flag("--reference", bargs.reference, "use the built-in 4-rule scenario");
    bench_cmd->add_option("--seq-a", bargs.seq_a, "first ordering rules file");
    bench_cmd->add_option("--seq-b", bargs.seq_b, "second ordering rules file");
    bench_cmd->add_option("--pcap", bargs.pcap_path, "capture to replay");
    bench_cmd->add_option("--var", bargs.vars, "rule variable NAME=cidr[,cidr...]");
    bench_cmd->add_option("--reps", bargs.reps, "repetitions");
    bench_cmd->add_option("--csv", bargs.csv_path, "also write CSV here");

    // query
    QueryArgs qargs;
    auto* query_cmd = app.add_subcommand("query", "search the master's alert store");
    query_cmd->add_option("--store", qargs.store_dir, "alert store directory")->required();
    query_cmd->add_option("--from-us", qargs.from_us, "inclusive lower timestamp bound");
    query_cmd->add_option("--to-us", qargs.to_us, "inclusive upper timestamp bound");
    query_cmd->add_option("--sensor", qargs.sensor, "sensor id filter");
    query_cmd->add_option("--sid", qargs.sid, "sid filter");
    query_cmd->add_option("--gid", qargs.gid, "gid filter");
    query_cmd->add_option("--limit", qargs.limit, "result cap (0 = unlimited)");
    query_cmd->add_flag("--follow", qargs.follow, "keep polling for new records");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*parse_cmd) return cmd_parse(parse_pcap);
        if (*sensor_cmd) return cmd_sensor(sargs);
        if (*master_cmd) return cmd_master(margs);
        if (*rulegen_cmd) return cmd_rulegen(rargs);
        if (*synth_cmd) {
            sc.count = count;
            sc.rate_hz = rate;
            sc.seconds = seconds;
            sc.seed = seed;
            sc.control_exchange = control_exchange;
            sc.spoof_source = spoof;
            std::vector<pcap::CaptureRecord> records;
            if (*benign_cmd) {
                records = synth::synth_benign(sc);
            } else if (*attack_cmd) {
                synth::AttackKind kind = synth::AttackKind::select_operate_replay;
                if (attack_kind == "replay") kind = synth::AttackKind::select_operate_replay;
                else if (attack_kind == "direct-operate") kind = synth::AttackKind::direct_operate;
                else if (attack_kind == "broadcast") kind = synth::AttackKind::broadcast_request;
                else if (attack_kind == "disable-unsolicited") kind = synth::AttackKind::disable_unsolicited;
                else if (attack_kind == "stop-application") kind = synth::AttackKind::stop_application;
                else if (attack_kind == "cold-restart") kind = synth::AttackKind::cold_restart;
                records = synth::synth_attack(kind, sc);
            } else if (*flood_cmd) {
                synth::FloodKind kind = flood_kind == "syn" ? synth::FloodKind::syn_flood
                                        : flood_kind == "portscan" ? synth::FloodKind::port_scan
                                                                   : synth::FloodKind::dnp3_flood;
                records = synth::synth_flood(kind, sc);
            } else if (*random_cmd) {
                records = synth::random_frame_capture(sc, random_n);
            } else if (*corrupt_cmd) {
                auto input = pcap::read_capture(corrupt_in);
                records = synth::corrupt_crc(input, corrupt_index,
                                             corrupt_site == "header" ? synth::CorruptSite::header
                                                                      : synth::CorruptSite::body,
                                             corrupt_bit);
            }
            pcap::write_capture(records, synth_out);
            std::cerr << records.size() << " records -> " << synth_out << "\n";
            return 0;
        }
        if (*bench_cmd) return cmd_bench(bargs);
        if (*query_cmd) return cmd_query(qargs);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const bench::RuleSetMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
