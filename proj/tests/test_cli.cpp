// End-to-end checks of the dnp3ids tool: exit codes, output formats and the
// plumbing between subcommands (synth -> parse -> sensor -> rulegen -> bench).
// The binary path comes in via DNP3IDS_TOOL_PATH from the build.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("dnp3ids-cli-" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

RunResult run(const std::string& args, const std::string& env_prefix = {}) {
    static int n = 0;
    const fs::path out = work_dir() / ("out" + std::to_string(n) + ".txt");
    const fs::path err = work_dir() / ("err" + std::to_string(n) + ".txt");
    ++n;
    std::string cmd;
    if (!env_prefix.empty()) cmd += env_prefix + " ";
    cmd += std::string(DNP3IDS_TOOL_PATH) + " " + args + " >" + out.string() +
           " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

fs::path benign_capture() {
    static const fs::path p = [] {
        fs::path path = work_dir() / "benign3.pcap";
        auto r = run("synth benign --out " + path.string() + " --count 3 --rate 2");
        REQUIRE(r.code == 0);
        REQUIRE(r.err.find("12 records") != std::string::npos);
        return path;
    }();
    return p;
}

} // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("parse").code == 2);                   // missing positional
    CHECK(run("query").code == 2);                   // --store is required
    CHECK(run("synth benign").code == 2);            // --out is required
    CHECK(run("synth attack --out x.pcap").code == 2); // --kind is required
    CHECK(run("synth attack --out x.pcap --kind nonsense").code == 2);
    CHECK(run("bench").code == 2);                   // neither --reference nor seqs
    CHECK(run("sensor --mode sideways").code == 2);
}

TEST_CASE("parse prints one line per decoded frame") {
    auto r = run("parse " + benign_capture().string());
    REQUIRE(r.code == 0);
    auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 6); // 3 polls + 3 responses; handshake carries no frames
    CHECK(lines[0] ==
          "t=1700000000.000000 10.0.0.1→10.0.0.2 dst_addr=10 fc=0x01 Read crc=ok");
    CHECK(lines[1] ==
          "t=1700000000.005000 10.0.0.2→10.0.0.1 dst_addr=1 fc=0x81 Unknown(0x81) crc=ok");
    // rate 2 -> next poll half a second later
    CHECK(lines[2].substr(0, 19) == "t=1700000000.500000");
}

TEST_CASE("parse flags a corrupted frame") {
    fs::path corrupted = work_dir() / "corrupt.pcap";
    auto r = run("synth corrupt --in " + benign_capture().string() + " --out " +
                 corrupted.string() + " --index 3 --site body");
    REQUIRE(r.code == 0);
    auto lines = lines_of(run("parse " + corrupted.string()).out);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0].find("crc=bad") != std::string::npos);
    for (std::size_t i = 1; i < lines.size(); ++i)
        CHECK(lines[i].find("crc=ok") != std::string::npos);

    // out-of-range / non-DNP3 target is a hard error
    CHECK(run("synth corrupt --in " + benign_capture().string() + " --out " +
              corrupted.string() + " --index 99 --site body")
              .code == 1);
}

TEST_CASE("sensor argument validation") {
    const std::string pcap = benign_capture().string();

    SUBCASE("ids mode rejects --output") {
        auto r = run("sensor --pcap " + pcap + " --output x.pcap");
        CHECK(r.code == 2);
        CHECK(r.err.find("ips mode") != std::string::npos);
    }
    SUBCASE("ips mode requires --output") {
        auto r = run("sensor --pcap " + pcap + " --mode ips");
        CHECK(r.code == 2);
        CHECK(r.err.find("--output") != std::string::npos);
    }
    SUBCASE("missing rules is a runtime error") {
        auto r = run("sensor --pcap " + pcap);
        CHECK(r.code == 1);
        CHECK(r.err.find("error:") != std::string::npos);
    }
    SUBCASE("nonexistent rules file named in the diagnostic") {
        auto r = run("sensor --pcap " + pcap + " --rules /no/such/file.rules");
        CHECK(r.code == 1);
        CHECK(r.err.find("rules file not found") != std::string::npos);
    }
    SUBCASE("broken rule reported with its line") {
        fs::path bad = work_dir() / "bad.rules";
        spit(bad, "alert tcp any any -> any any (msg:\"x\" sid:1;)\n");
        auto r = run("sensor --pcap " + pcap + " --rules " + bad.string());
        CHECK(r.code == 1);
        CHECK(r.err.find("line 1") != std::string::npos);
    }
}

TEST_CASE("sensor ids run emits alert lines and a stats summary") {
    fs::path rules = work_dir() / "read.rules";
    spit(rules,
         "alert tcp any any -> any 20000 "
         "(msg:\"read poll\"; content:\" 01 \"; offset:12; depth:1; sid:700;)\n");
    auto r = run("sensor --pcap " + benign_capture().string() + " --rules " +
                 rules.string());
    REQUIRE(r.code == 0);
    auto alerts = lines_of(r.out);
    REQUIRE(alerts.size() == 3); // one per poll request, responses keep fc 0x81
    CHECK(alerts[0] ==
          "alert t=1700000000.000000 gid=1 sid=700 \"read poll\" "
          "10.0.0.1:49152->10.0.0.2:20000 proto=tcp fc=0x01 pos=0 v=1");
    CHECK(r.err.find("packets_in=12 dnp3_frames=6 alerts=3 dropped=0 forwarded=0") !=
          std::string::npos);

    SUBCASE("--quiet suppresses the per-alert lines") {
        auto q = run("sensor --quiet --pcap " + benign_capture().string() +
                     " --rules " + rules.string());
        CHECK(q.code == 0);
        CHECK(q.out.empty());
        CHECK(q.err.find("alerts=3") != std::string::npos);
    }
}

TEST_CASE("sensor ips run drops matched frames and forwards the rest") {
    fs::path rules = work_dir() / "drop.rules";
    spit(rules,
         "drop tcp any any -> any 20000 "
         "(msg:\"kill read\"; content:\" 01 \"; offset:12; depth:1; sid:701;)\n");
    fs::path fwd = work_dir() / "forwarded.pcap";
    auto r = run("sensor --mode ips --output " + fwd.string() + " --pcap " +
                 benign_capture().string() + " --rules " + rules.string() +
                 " --quiet");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("packets_in=12 dnp3_frames=6 alerts=3 dropped=3 forwarded=9") !=
          std::string::npos);

    auto lines = lines_of(run("parse " + fwd.string()).out);
    REQUIRE(lines.size() == 3); // only the responses survive
    for (const auto& l : lines) CHECK(l.find("fc=0x81") != std::string::npos);
}

TEST_CASE("sensor picks up a config file") {
    fs::path rules = work_dir() / "cfg.rules";
    spit(rules,
         "alert tcp any any -> any 20000 "
         "(msg:\"cfg hit\"; content:\" 01 \"; offset:12; depth:1; sid:702;)\n");

    SUBCASE("via DNP3IDS_CONFIG") {
        fs::path cfg = work_dir() / "sensor.conf";
        spit(cfg, "rules=" + rules.string() + "\nsource=" +
                      benign_capture().string() + "\n");
        auto r = run("sensor --quiet", "DNP3IDS_CONFIG=" + cfg.string());
        CHECK(r.code == 0);
        CHECK(r.err.find("alerts=3") != std::string::npos);
    }
    SUBCASE("config-selected ips mode still requires --output") {
        fs::path cfg = work_dir() / "sensor-ips.conf";
        spit(cfg, "rules=" + rules.string() + "\nsource=" +
                      benign_capture().string() + "\nmode=ips\n");
        auto denied = run("sensor --quiet --config " + cfg.string());
        CHECK(denied.code == 2);

        fs::path fwd = work_dir() / "cfg-fwd.pcap";
        auto ok = run("sensor --quiet --config " + cfg.string() + " --output " +
                      fwd.string());
        CHECK(ok.code == 0);
        CHECK(ok.err.find("forwarded=12") != std::string::npos); // alert action drops nothing
    }
}

TEST_CASE("rulegen output is deterministic") {
    fs::path r1 = work_dir() / "gen1.rules";
    fs::path r2 = work_dir() / "gen2.rules";
    const std::string base = "rulegen --pcap " + benign_capture().string();
    REQUIRE(run(base + " --out " + r1.string()).code == 0);
    REQUIRE(run(base + " --out " + r2.string()).code == 0);
    const std::string a = slurp(r1);
    CHECK(!a.empty());
    CHECK(a == slurp(r2));
    CHECK(a.find("sid:1000000;") != std::string::npos);
    CHECK(a.find("MASTERS") != std::string::npos);

    // without --out the text goes to stdout, and the summary to stderr
    auto r = run(base);
    CHECK(r.code == 0);
    CHECK(r.out == a);
    CHECK(r.err.find("baseline:") != std::string::npos);

    // a capture with no DNP3 at all is an error
    fs::path syn = work_dir() / "synonly.pcap";
    REQUIRE(run("synth flood --kind syn --out " + syn.string() + " --count 5").code == 0);
    CHECK(run("rulegen --pcap " + syn.string()).code == 1);
}

TEST_CASE("bench reference run writes the comparison table and csv") {
    fs::path csv = work_dir() / "bench.csv";
    auto r = run("bench --reference --reps 3 --csv " + csv.string());
    REQUIRE(r.code == 0);
    const std::string header =
        "rule_sid,ordering,position,mean_us,median_us,p95_us,mean_options";
    CHECK(r.out.find(header) != std::string::npos);
    CHECK(r.out.find("fewer_opts") != std::string::npos);
    auto csv_lines = lines_of(slurp(csv));
    REQUIRE(csv_lines.size() == 9); // header + 4 rules x 2 orderings
    CHECK(csv_lines[0] == header);
}

TEST_CASE("bench rejects orderings over different rules") {
    fs::path a = work_dir() / "seq-a.rules";
    fs::path b = work_dir() / "seq-b.rules";
    spit(a, "alert tcp any any -> any any (msg:\"one\"; sid:1;)\n");
    spit(b, "alert tcp any any -> any any (msg:\"two\"; sid:2;)\n");
    auto r = run("bench --seq-a " + a.string() + " --seq-b " + b.string() +
                 " --pcap " + benign_capture().string() + " --reps 2");
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("query on an empty store prints nothing and succeeds") {
    fs::path store = work_dir() / "empty-store";
    auto r = run("query --store " + store.string());
    CHECK(r.code == 0);
    CHECK(r.out.empty());
}

TEST_CASE("master runs for a bounded time") {
    fs::path store = work_dir() / "master-store";
    auto r = run("master --store " + store.string() + " --port 0 --run-for-ms 300");
    CHECK(r.code == 0);
    CHECK(r.err.find("listening on") != std::string::npos);

    auto missing = run("master --store " + store.string() +
                       " --port 0 --rules /no/such.rules --run-for-ms 100");
    CHECK(missing.code == 1);
    CHECK(missing.err.find("rules file not found") != std::string::npos);
}
